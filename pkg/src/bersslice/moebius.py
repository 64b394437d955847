"""2x2 complex matrices of unit determinant."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

DET_TOL = 1e-10
PARABOLIC_TOL = 1e-8


class NotHyperbolic(ValueError):
    pass


@dataclass(frozen=True)
class Mat2C:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def identity(cls) -> Mat2C:
        return cls(1, 0, 0, 1)

    @classmethod
    def from_array(cls, m) -> Mat2C:
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def __matmul__(self, other: Mat2C) -> Mat2C:
        return compose(self, other)

    def __neg__(self) -> Mat2C:
        return Mat2C(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> Mat2C:
        """Adjugate divided by the determinant."""
        det = self.det
        return Mat2C(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def normalized(self, reference: Mat2C | None = None) -> Mat2C:
        """Scale to unit determinant.

        Of the two square roots of det, picks the one whose result lies closer
        to ``reference`` so a lift stays continuous along a computation path.
        """
        s = cmath.sqrt(self.det)
        if s == 0:
            raise ValueError("singular matrix")
        m = Mat2C(self.a / s, self.b / s, self.c / s, self.d / s)
        if reference is not None and _dist(-m, reference) < _dist(m, reference):
            m = -m
        return m

    def distance(self, other: Mat2C) -> float:
        return _dist(self, other)


def _dist(m, n):
    return max(abs(m.a - n.a), abs(m.b - n.b), abs(m.c - n.c), abs(m.d - n.d))


def compose(m1: Mat2C, m2: Mat2C) -> Mat2C:
    return Mat2C(m1.a * m2.a + m1.b * m2.c, m1.a * m2.b + m1.b * m2.d,
                 m1.c * m2.a + m1.d * m2.c, m1.c * m2.b + m1.d * m2.d)


@dataclass(frozen=True)
class IsometryClass:
    tag: str  # elliptic | parabolic | identity-like | loxodromic
    tol: float
    margin: float  # distance of the trace from the nearest classification boundary


def classify(m: Mat2C, tol: float = PARABOLIC_TOL) -> IsometryClass:
    t = m.trace
    to_parabolic = min(abs(t - 2), abs(t + 2))
    if to_parabolic <= tol:
        # +-I and the parabolics share a trace; tell them apart by the off-diagonal part
        sign = 1 if abs(t - 2) <= abs(t + 2) else -1
        off = max(abs(m.b), abs(m.c), abs(m.a - sign), abs(m.d - sign))
        tag = "identity-like" if off <= tol else "parabolic"
        return IsometryClass(tag, tol, tol - to_parabolic)
    if abs(t.imag) <= tol and abs(t.real) < 2:
        return IsometryClass("elliptic", tol, min(abs(t.imag - tol), 2 - abs(t.real)))
    margin = min(to_parabolic - tol, abs(t.imag) if abs(t.real) < 2 else to_parabolic)
    return IsometryClass("loxodromic", tol, margin)


def length_from_trace(t: complex, tol: float = 1e-9) -> float:
    """Hyperbolic translation length 2 arccosh(|t| / 2) of a real trace |t| > 2."""
    t = complex(t)
    if abs(t.imag) > tol * max(1.0, abs(t.real)):
        raise NotHyperbolic(f"trace {t} is not real")
    if abs(t.real) <= 2:
        raise NotHyperbolic(f"|trace| = {abs(t.real)} <= 2")
    return 2.0 * math.acosh(abs(t.real) / 2.0)


def translation_length(m: Mat2C, tol: float = 1e-9) -> float:
    return length_from_trace(m.trace, tol)
