"""Trace coordinates on the SL2(C) character variety of a free group."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations

from .moebius import Mat2C, compose

MAX_GENERATORS = 16
REAL_TOL = 1e-6


class TooManyGenerators(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class WordList:
    """The 2^n - 1 products x_i1 ... x_ik with i1 < ... < ik (0-based indices)."""

    n: int
    words: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.words)

    def labels(self) -> list[str]:
        return ["".join(f"x{i + 1}" for i in w) for w in self.words]


def word_list(n: int) -> WordList:
    if n < 1:
        raise ValueError("need at least one generator")
    if n > MAX_GENERATORS:
        raise TooManyGenerators(f"{n} generators give {2 ** n - 1} words; limit is n <= {MAX_GENERATORS}")
    words = tuple(w for k in range(1, n + 1) for w in combinations(range(n), k))
    return WordList(n, words)


def evaluate_character(mats, wl: WordList) -> list[complex]:
    """Trace of every word in ``wl`` under the representation x_i -> mats[i]."""
    if len(mats) != wl.n:
        raise DimensionMismatch(f"{len(mats)} matrices for {wl.n} generators")
    return [reduce(compose, (mats[i] for i in w)).trace for w in wl.words]


@dataclass(frozen=True)
class CharacterTriple:
    """Traces (x, y, z) of (A, B, AB) for the free group <A, B>."""

    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        for name in "xyz":
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_matrices(cls, a: Mat2C, b: Mat2C) -> CharacterTriple:
        return cls(a.trace, b.trace, compose(a, b).trace)

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return self.x, self.y, self.z

    @property
    def kappa(self) -> complex:
        return commutator_trace(self)

    @property
    def markov_residual(self) -> float:
        """|x^2 + y^2 + z^2 - xyz|, zero exactly for type-preserving characters."""
        x, y, z = self.as_tuple()
        return abs(x * x + y * y + z * z - x * y * z)

    def distance(self, other: CharacterTriple) -> float:
        return max(abs(a - b) for a, b in zip(self.as_tuple(), other.as_tuple()))


def commutator_trace(t: CharacterTriple) -> complex:
    """Fricke: tr(A B A^-1 B^-1) = x^2 + y^2 + z^2 - xyz - 2."""
    x, y, z = t.as_tuple()
    return x * x + y * y + z * z - x * y * z - 2


def fourth_trace(t: CharacterTriple) -> complex:
    """tr(A B^-1) = xy - z."""
    return t.x * t.y - t.z


def canonical_signs(t: CharacterTriple) -> CharacterTriple:
    """Representative of ``t`` under the sign changes (-x, -y, z), (-x, y, -z), (x, -y, -z).

    These come from twisting the representation by a character to {+1, -1} and
    do not change the PSL2 class.  Makes the real parts of x and y non-negative.
    """
    x, y, z = t.as_tuple()
    if x.real < 0:
        x, z = -x, -z
    if y.real < 0:
        y, z = -y, -z
    return CharacterTriple(x, y, z)


@dataclass(frozen=True)
class RealPointClass:
    tag: str  # fuchsian-teich | sl2r-nonteich | su2 | not-real | not-relative
    imag_residual: float
    relative_residual: float


def classify_real_point(t: CharacterTriple, tol: float = REAL_TOL) -> RealPointClass:
    """Place a character in the real locus of the relative character variety.

    Tolerances are relative to the size of the traces.  The Teichmueller
    component is {x, y, z > 2, x^2 + y^2 + z^2 = xyz}, read after the sign
    normalisation of :func:`canonical_signs`.
    """
    vals = t.as_tuple()
    scale = max(1.0, *(abs(v) for v in vals))
    imag = max(abs(v.imag) for v in vals)
    rel = abs(commutator_trace(t) + 2)
    if imag > tol * scale:
        return RealPointClass("not-real", imag, rel)
    if rel > tol * scale ** 2:
        return RealPointClass("not-relative", imag, rel)
    x, y, z = (v.real for v in canonical_signs(t).as_tuple())
    if min(x, y, z) > 2:
        tag = "fuchsian-teich"
    elif max(abs(x), abs(y), abs(z)) <= 2:
        tag = "su2"
    else:
        tag = "sl2r-nonteich"
    return RealPointClass(tag, imag, rel)
