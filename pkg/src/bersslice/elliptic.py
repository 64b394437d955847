"""Weierstrass p on Z + tau Z and the slice family q_c = theta * p + c."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels

#: coefficient of p in q_c; equal indicial exponents at the puncture for u'' + q u / 2 = 0
THETA = 0.5
EPS_Z = 1e-3
MIN_CUTOFF = 20
LAURENT_TERMS = 64


class CutoffTooSmall(ValueError):
    pass


class TooCloseToPole(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    """The lattice Z + tau Z; ``cutoff`` is the number of q-expansion terms kept
    when summing the Eisenstein series."""

    tau: complex = 1j
    cutoff: int = 40

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        if not self.tau.imag > 0:
            raise ValueError(f"lattice modulus must lie in the upper half plane, got {self.tau}")


@dataclass(frozen=True)
class Invariants:
    g2: complex
    g3: complex
    tail_bound: float = 0.0


def _sigma(n, k):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def _qseries_tail(r, n):
    # bound on sum_{m > n} m^5 r^m, which dominates sigma_5(m) r^m and sigma_3(m) r^m
    ratio = r * ((n + 2) / (n + 1)) ** 5
    if ratio >= 1:
        return math.inf
    return (n + 1) ** 5 * r ** (n + 1) / (1 - ratio)


def eisenstein_invariants(lat: LatticeSpec = LatticeSpec()) -> Invariants:
    """g2 = 60 sum' w^-4 and g3 = 140 sum' w^-6.

    The lattice sums are resummed row by row (Lipschitz), which turns them into
    the q-expansions of E4 and E6 in q = exp(2 pi i tau); ``lat.cutoff`` terms
    are kept and ``tail_bound`` bounds the absolute error of both invariants.
    """
    if lat.cutoff < MIN_CUTOFF:
        raise CutoffTooSmall(f"cutoff {lat.cutoff} < {MIN_CUTOFF}")
    return _invariants(lat.tau, lat.cutoff)


@lru_cache(maxsize=32)
def _invariants(tau, cutoff):
    q = complex(np.exp(2j * np.pi * tau))
    e4 = 1.0 + 240.0 * sum(_sigma(n, 3) * q ** n for n in range(1, cutoff + 1))
    e6 = 1.0 - 504.0 * sum(_sigma(n, 5) * q ** n for n in range(1, cutoff + 1))
    g2 = 4.0 * np.pi ** 4 / 3.0 * e4
    g3 = 8.0 * np.pi ** 6 / 27.0 * e6
    tail = _qseries_tail(abs(q), cutoff) * max(4.0 * np.pi ** 4 / 3.0 * 240.0, 8.0 * np.pi ** 6 / 27.0 * 504.0)
    return Invariants(complex(g2), complex(g3), float(tail))


def lattice_sum_invariants(lat: LatticeSpec, shells: int) -> Invariants:
    """Direct summation over the square shells max(|m|, |n|) <= shells.

    Slow and only accurate to O(shells^-2); kept as an independent check on
    :func:`eisenstein_invariants`.
    """
    m = np.arange(-shells, shells + 1)
    mm, nn = np.meshgrid(m, m)
    w = (mm + nn * lat.tau).ravel()
    w = w[w != 0]
    g2 = 60.0 * np.sum(w ** -4.0)
    g3 = 140.0 * np.sum(w ** -6.0)
    return Invariants(complex(g2), complex(g3), float(8.0 * np.pi / shells ** 2))


def laurent_coefficients(inv: Invariants, n_terms: int = LAURENT_TERMS) -> np.ndarray:
    """Coefficients c_2, c_3, ... of p(z) = z^-2 + sum c_k z^(2k-2)."""
    c = np.zeros(n_terms + 2, dtype=complex)
    c[2] = inv.g2 / 20.0
    c[3] = inv.g3 / 28.0
    for k in range(4, n_terms + 2):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * np.sum(c[2:k - 1] * c[k - 2:1:-1])
    return c[2:]


@dataclass(frozen=True, eq=False)
class EllipticData:
    """Everything the compiled kernels need to evaluate p on one lattice."""

    lattice: LatticeSpec
    invariants: Invariants
    coef: np.ndarray = field(repr=False)
    r_series: float

    @property
    def tau(self) -> complex:
        return self.lattice.tau

    def kernel_args(self):
        inv = self.invariants
        return self.lattice.tau, self.coef, inv.g2, inv.g3, self.r_series


@lru_cache(maxsize=32)
def elliptic_data(lat: LatticeSpec = LatticeSpec()) -> EllipticData:
    inv = eisenstein_invariants(lat)
    shortest = min(abs(1.0), abs(lat.tau), abs(lat.tau - 1), abs(lat.tau + 1))
    return EllipticData(lat, inv, laurent_coefficients(inv), 0.75 * shortest)


def _check_pole(z, data, eps_z):
    w = _kernels.reduce_to_cell(complex(z), data.tau)
    if abs(w) < eps_z:
        raise TooCloseToPole(f"z = {z} is within {abs(w):.3g} of a lattice point")


def wp(z: complex, lat: LatticeSpec = LatticeSpec(), eps_z: float = EPS_Z) -> complex:
    data = elliptic_data(lat)
    _check_pole(z, data, eps_z)
    return complex(_kernels.wp_eval(complex(z), *data.kernel_args())[0])


def wp_prime(z: complex, lat: LatticeSpec = LatticeSpec(), eps_z: float = EPS_Z) -> complex:
    data = elliptic_data(lat)
    _check_pole(z, data, eps_z)
    return complex(_kernels.wp_eval(complex(z), *data.kernel_args())[1])


@dataclass(frozen=True)
class BasisDifferential:
    """Double-pole coefficient of the slice family and the ODE convention it assumes."""

    theta: float = THETA
    convention: str = "u'' + q u / 2 = 0"


@dataclass(frozen=True)
class SlicePoint:
    """The quadratic differential q_c(w) = theta * p(w) + c on the punctured torus."""

    c: complex
    basis: BasisDifferential = BasisDifferential()
    lattice: LatticeSpec = LatticeSpec()

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))


def quad_diff_eval(p: SlicePoint, z: complex, eps_z: float = EPS_Z) -> complex:
    return p.basis.theta * wp(z, p.lattice, eps_z) + p.c
