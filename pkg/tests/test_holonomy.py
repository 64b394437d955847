import cmath

import numpy as np
import pytest

from bersslice.character import commutator_trace
from bersslice.elliptic import BasisDifferential, LatticeSpec, SlicePoint
from bersslice.holonomy import (LoopPath, PathTooClose, clearance, commutator_loop, cr_residual, holonomy,
                                integrate_transfer, route_path, standard_loops, step_plan, trace_grid)
from bersslice.moebius import Mat2C

FLAT = BasisDifferential(theta=0.0)  # q_c = c, a constant coefficient


def test_zero_coefficient_is_a_shear():
    a, b = 0.2 + 0.3j, 0.9 + 0.45j
    m = integrate_transfer(SlicePoint(0, FLAT), LoopPath((a, b), "segment"))
    assert m.distance(Mat2C(1, b - a, 0, 1)) < 1e-13


@pytest.mark.parametrize("k", [0.5, 2.0, 3.0 + 1.0j])
def test_constant_coefficient_is_an_oscillator(k):
    # u'' + k^2 u = 0 has transfer [[cos kd, sin kd / k], [-k sin kd, cos kd]]
    a, b = 0.2 + 0.3j, 0.8 + 0.7j
    d = b - a
    m = integrate_transfer(SlicePoint(2 * k * k, FLAT), LoopPath((a, b), "segment"))
    expect = Mat2C(cmath.cos(k * d), cmath.sin(k * d) / k, -k * cmath.sin(k * d), cmath.cos(k * d))
    assert abs(m.trace - 2 * cmath.cos(k * d)) < 1e-11
    assert m.distance(expect) < 1e-11


def test_reversed_path_undoes_the_transfer():
    p = SlicePoint(3 - 4j)
    path = LoopPath(route_path(0.5 + 0.5j, 2.3 + 1.6j), "segment")
    back = LoopPath(tuple(reversed(path.vertices)), "segment")
    m = integrate_transfer(p, back) @ integrate_transfer(p, path)
    assert m.distance(Mat2C.identity()) < 1e-10


def test_routing_keeps_clearance():
    verts = route_path(0.5 + 0.0j, 2.5 + 0.0j)  # passes straight through 1 and 2
    assert clearance(verts) >= 1.9e-3
    with pytest.raises(PathTooClose):
        LoopPath((0.5 + 0.0j, 1.5 + 0.0j), "alpha").check()


@pytest.mark.parametrize("c", [0, 1 + 1j, -2.5, 20 - 15j])
def test_parabolic_puncture_and_unit_determinant(c):
    h = holonomy(SlicePoint(c))
    assert abs(commutator_trace(h.character) + 2) <= 1e-8
    assert abs(h.m_alpha.det - 1) <= 1e-10
    assert abs(h.m_beta.det - 1) <= 1e-10


def test_commutator_loop_is_parabolic():
    p = SlicePoint(2 + 1j)
    m = integrate_transfer(p, commutator_loop())
    assert abs(m.trace + 2) < 1e-8
    assert m.distance(-Mat2C.identity()) > 1e-3  # parabolic, not -I


def test_fuchsian_point_is_the_square_torus():
    t = holonomy(SlicePoint(0)).character
    assert abs(t.x - 2 * np.sqrt(2)) < 1e-10
    assert abs(t.y - 2 * np.sqrt(2)) < 1e-10
    assert abs(t.z - 4) < 1e-10


@pytest.mark.parametrize("z0", [0.3 + 0.6j, 0.7 + 0.2j, 0.45 + 0.85j])
def test_basepoint_independence(z0):
    c = 4 - 7j
    ref = holonomy(SlicePoint(c)).character
    moved = holonomy(SlicePoint(c), z0=z0).character
    assert ref.distance(moved) <= 1e-8 * max(1, abs(ref.x), abs(ref.y), abs(ref.z))


def test_path_independence_within_homotopy_class():
    p = SlicePoint(-3 + 2j)
    z0 = 0.5 + 0.5j
    straight = standard_loops(z0)[0]
    bent = LoopPath((z0, 0.8 + 0.25j, 1.2 + 0.75j, z0 + 1), "alpha")
    assert integrate_transfer(p, straight).distance(integrate_transfer(p, bent)) <= 1e-9


def test_error_estimate_bounds_the_change_under_refinement():
    p = SlicePoint(30 + 20j)
    h = holonomy(p)
    plan = step_plan(p)
    finer = plan.traces(p.c, subdivide=4)
    change = np.max(np.abs(finer - np.array(h.character.as_tuple())))
    # below ~1e-13 both numbers are rounding noise
    assert change <= 10 * h.error + 1e-13 * max(1, *np.abs(finer))


def test_cr_residual():
    p = SlicePoint(12 - 9j)
    assert cr_residual(p, 1e-4) <= 1e-5
    assert cr_residual(p, 1e-3, f=lambda c: np.array([3.0, 3.0, 3.0])) == 0.0
    with pytest.raises(ValueError):
        cr_residual(p, 1e-1)
    # well above the rounding floor the defect is O(h^2)
    r1, r2 = cr_residual(p, 1e-2), cr_residual(p, 5e-3)
    assert 3.5 < r1 / r2 < 4.5


def test_grid_matches_pointwise_and_is_injective():
    re = np.linspace(-40, 40, 32)
    cs = (re[None, :] + 1j * re[:, None]).ravel()
    traces, status, _ = trace_grid(cs)
    assert (status == 0).all()
    for k in (0, 500, 1023):
        t = holonomy(SlicePoint(cs[k]), estimate_error=False).character
        assert np.allclose(traces[k], t.as_tuple(), rtol=1e-12, atol=1e-12)
    diff = np.abs(traces[:, None, :] - traces[None, :, :]).max(axis=-1)
    np.fill_diagonal(diff, np.inf)
    assert diff.min() > 1e-3


def test_other_lattice():
    lat = LatticeSpec(0.5 + 0.8660254037844386j)
    h = holonomy(SlicePoint(1 + 1j, lattice=lat))
    assert abs(commutator_trace(h.character) + 2) < 1e-8
