"""Monodromy of u'' + q_c u / 2 = 0 around the generators of the punctured torus.

The transfer matrix of the first-order system (u, u') is built from exponentials
of traceless matrices, so every monodromy has determinant one up to rounding
and the SL2 lift is the one the ODE provides; no renormalisation is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .character import CharacterTriple
from .elliptic import EPS_Z, LatticeSpec, SlicePoint, elliptic_data
from .moebius import Mat2C

LOCAL_TOL = 1e-12
H_MIN = 1e-9
MAX_STEPS = 50_000
BASEPOINT = 0.5 + 0.5j


class PathTooClose(ValueError):
    pass


class StepUnderflow(ArithmeticError):
    pass


def _raise_status(status, what):
    if status == _kernels.TOO_CLOSE:
        raise PathTooClose(f"{what}: integration node within eps_z of the lattice")
    if status == _kernels.STEP_UNDERFLOW:
        raise StepUnderflow(f"{what}: step size fell below {H_MIN}")
    if status == _kernels.MAX_STEPS:
        raise StepUnderflow(f"{what}: more than {MAX_STEPS} steps")


def _lattice_points_near(a, b, tau, pad=1.5):
    zs = (a, b)
    vs = [z.imag / tau.imag for z in zs]
    us = [z.real - v * tau.real for z, v in zip(zs, vs)]
    m0, m1 = math.floor(min(us) - pad), math.ceil(max(us) + pad)
    n0, n1 = math.floor(min(vs) - pad), math.ceil(max(vs) + pad)
    return [m + n * tau for m in range(m0, m1 + 1) for n in range(n0, n1 + 1)]


def _segment_distance(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a), 0.0
    s = ((p - a) * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(p - (a + s * d)), s


def clearance(vertices, tau: complex = 1j) -> float:
    """Smallest distance from the polyline to a lattice point."""
    best = math.inf
    for a, b in zip(vertices[:-1], vertices[1:]):
        for w in _lattice_points_near(a, b, tau):
            best = min(best, _segment_distance(w, a, b)[0])
    return best


def route_path(start: complex, end: complex, eps_z: float = EPS_Z, tau: complex = 1j) -> tuple[complex, ...]:
    """Straight segment from start to end with square detours around nearby lattice points.

    Each detour stays 2 eps_z from the lattice point and always passes on the
    left of the direction of travel, so the routing fixes the homotopy class.
    """
    start, end = complex(start), complex(end)
    d = end - start
    if d == 0:
        return (start,)
    u = d / abs(d)
    n = 1j * u
    r = 2.0 * eps_z
    hits = []
    for w in _lattice_points_near(start, end, tau):
        dist, s = _segment_distance(w, start, end)
        if dist < r and 0.0 < s < 1.0:
            hits.append((s, w))
    verts = [start]
    for s, w in sorted(hits, key=lambda t: t[0]):
        along = ((w - start) * u.conjugate()).real
        foot = start + along * u
        verts += [foot - r * u, w + r * (n - u), w + r * (n + u), foot + r * u]
    verts.append(end)
    return tuple(verts)


@dataclass(frozen=True)
class LoopPath:
    """Polyline from a basepoint to its translate by the lattice vector of ``tag``."""

    vertices: tuple[complex, ...]
    tag: str  # alpha (z -> z + 1) | beta (z -> z + tau) | commutator | segment

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=complex)

    def check(self, tau: complex = 1j, eps_z: float = EPS_Z):
        shift = {"alpha": 1.0, "beta": tau, "commutator": 0.0}.get(self.tag)
        if shift is not None and abs(self.vertices[-1] - self.vertices[0] - shift) > 1e-12:
            raise ValueError(f"{self.tag} loop must end at its start translated by {shift}")
        if clearance(self.vertices, tau) < eps_z:
            raise PathTooClose(f"path passes within {clearance(self.vertices, tau):.3g} of the lattice")


def standard_loops(z0: complex = BASEPOINT, tau: complex = 1j, eps_z: float = EPS_Z) -> tuple[LoopPath, LoopPath]:
    z0 = complex(z0)
    return (LoopPath(route_path(z0, z0 + 1, eps_z, tau), "alpha"),
            LoopPath(route_path(z0, z0 + tau, eps_z, tau), "beta"))


def commutator_loop(z0: complex = BASEPOINT, tau: complex = 1j, eps_z: float = EPS_Z) -> LoopPath:
    """alpha, beta, alpha^-1, beta^-1 as one closed polyline around the puncture."""
    z0 = complex(z0)
    corners = [z0, z0 + 1, z0 + 1 + tau, z0 + tau, z0]
    verts = [z0]
    for a, b in zip(corners[:-1], corners[1:]):
        verts += route_path(a, b, eps_z, tau)[1:]
    return LoopPath(tuple(verts), "commutator")


def _mat(entries):
    return Mat2C(*entries[:4])


def integrate_transfer(p: SlicePoint, path: LoopPath, tol: float = LOCAL_TOL, eps_z: float = EPS_Z) -> Mat2C:
    """Transfer matrix of (u, u') along ``path``; concatenation multiplies on the left."""
    data = elliptic_data(p.lattice)
    path.check(data.tau, eps_z)
    res = _kernels.transfer_adaptive(path.as_array(), p.c, p.basis.theta, *data.kernel_args(), eps_z, tol, H_MIN,
                                     MAX_STEPS, np.empty((0, 3)))
    _raise_status(res[4], "integrate_transfer")
    return _mat(res)


@dataclass(frozen=True)
class HolonomyResult:
    m_alpha: Mat2C
    m_beta: Mat2C
    character: CharacterTriple
    error: float  # change in the traces when every accepted step is halved
    n_steps: int


@dataclass(eq=False)
class StepPlan:
    """Accepted step sequence of one adaptive run, replayable at other c."""

    lattice: LatticeSpec
    theta: float
    paths: tuple[LoopPath, LoopPath]
    plans: tuple[np.ndarray, np.ndarray] = field(repr=False)
    eps_z: float = EPS_Z

    def matrices(self, c: complex, subdivide: int = 1) -> tuple[Mat2C, Mat2C]:
        data = elliptic_data(self.lattice)
        out = []
        for path, plan in zip(self.paths, self.plans):
            res = _kernels.transfer_planned(path.as_array(), complex(c), self.theta, *data.kernel_args(),
                                            self.eps_z, plan, plan.shape[0], subdivide)
            _raise_status(res[4], "planned transfer")
            out.append(_mat(res))
        return out[0], out[1]

    def traces(self, c: complex, subdivide: int = 1) -> np.ndarray:
        ma, mb = self.matrices(c, subdivide)
        return np.array(CharacterTriple.from_matrices(ma, mb).as_tuple())


def _adaptive(p, path, tol, eps_z):
    data = elliptic_data(p.lattice)
    buf = np.empty((MAX_STEPS, 3))
    res = _kernels.transfer_adaptive(path.as_array(), p.c, p.basis.theta, *data.kernel_args(), eps_z, tol, H_MIN,
                                     MAX_STEPS, buf)
    _raise_status(res[4], f"holonomy along {path.tag}")
    return _mat(res), buf[:res[5]].copy()


def step_plan(p: SlicePoint, z0: complex = BASEPOINT, tol: float = LOCAL_TOL, eps_z: float = EPS_Z,
              paths: tuple[LoopPath, LoopPath] | None = None) -> StepPlan:
    if paths is None:
        paths = standard_loops(z0, p.lattice.tau, eps_z)
    for path in paths:
        path.check(p.lattice.tau, eps_z)
    plans = tuple(_adaptive(p, path, tol, eps_z)[1] for path in paths)
    return StepPlan(p.lattice, p.basis.theta, paths, plans, eps_z)


def holonomy(p: SlicePoint, z0: complex = BASEPOINT, tol: float = LOCAL_TOL, eps_z: float = EPS_Z,
             paths: tuple[LoopPath, LoopPath] | None = None, estimate_error: bool = True) -> HolonomyResult:
    """Monodromy along alpha and beta from ``z0`` and the character (x, y, z).

    q_c is doubly periodic, so the transfer along a loop from z0 to its
    translate is the monodromy itself.
    """
    if paths is None:
        paths = standard_loops(z0, p.lattice.tau, eps_z)
    for path in paths:
        path.check(p.lattice.tau, eps_z)
    (ma, plan_a), (mb, plan_b) = (_adaptive(p, path, tol, eps_z) for path in paths)
    char = CharacterTriple.from_matrices(ma, mb)
    error = 0.0
    if estimate_error:
        plan = StepPlan(p.lattice, p.basis.theta, paths, (plan_a, plan_b), eps_z)
        fine = plan.traces(p.c, subdivide=2)
        error = float(np.max(np.abs(fine - np.array(char.as_tuple()))))
    return HolonomyResult(ma, mb, char, error, plan_a.shape[0] + plan_b.shape[0])


def character_at(c: complex, lattice: LatticeSpec = LatticeSpec(), theta: float = 0.5, **kw) -> CharacterTriple:
    from .elliptic import BasisDifferential

    return holonomy(SlicePoint(c, BasisDifferential(theta), lattice), estimate_error=False, **kw).character


def cr_residual(p: SlicePoint, h: float, f=None) -> float:
    """Finite-difference Cauchy-Riemann defect of c -> f(c) at ``p.c``.

    ``f`` defaults to the three trace functions, evaluated on one frozen step
    plan so all four stencil points see the same quadrature nodes.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-6, 1e-2]")
    if f is None:
        f = step_plan(p).traces
    c = p.c
    d_real = (np.asarray(f(c + h)) - np.asarray(f(c - h))) / (2 * h)
    d_imag = (np.asarray(f(c + 1j * h)) - np.asarray(f(c - 1j * h))) / (2j * h)
    return float(np.max(np.abs(d_real - d_imag)))


def trace_grid(cs: np.ndarray, lattice: LatticeSpec = LatticeSpec(), theta: float = 0.5, tol: float = LOCAL_TOL,
               eps_z: float = EPS_Z, z0: complex = BASEPOINT):
    """Characters at many slice points; returns (traces (N, 3), status (N,), error sums (N,))."""
    data = elliptic_data(lattice)
    alpha, beta = standard_loops(z0, lattice.tau, eps_z)
    cs = np.ascontiguousarray(cs, dtype=complex).ravel()
    out = np.empty((cs.shape[0], 3), dtype=complex)
    status = np.empty(cs.shape[0], dtype=np.int64)
    errs = np.empty(cs.shape[0])
    _kernels.grid_traces(cs, out, status, errs, alpha.as_array(), beta.as_array(), theta, *data.kernel_args(),
                         eps_z, tol, H_MIN, MAX_STEPS)
    return out, status, errs
