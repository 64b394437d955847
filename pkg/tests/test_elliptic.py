import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersslice.elliptic import (BasisDifferential, CutoffTooSmall, LatticeSpec, SlicePoint, TooCloseToPole,
                                eisenstein_invariants, lattice_sum_invariants, quad_diff_eval, wp, wp_prime)


def lemniscate_g2():
    # g2(i) = 4 varpi^4 with varpi = pi / agm(1, sqrt 2)
    a, b = 1.0, math.sqrt(2.0)
    for _ in range(10):
        a, b = (a + b) / 2, math.sqrt(a * b)
    return 4 * (math.pi / a) ** 4


def test_g2_matches_lemniscate_constant():
    inv = eisenstein_invariants(LatticeSpec())
    assert abs(inv.g2.imag) < 1e-12
    assert inv.g2.real == pytest.approx(lemniscate_g2(), rel=1e-12)
    assert inv.g2.real == pytest.approx(189.0727201292, rel=1e-10)
    assert abs(inv.g3) <= 1e-10
    assert inv.tail_bound < 1e-90


def test_against_direct_lattice_sum():
    lat = LatticeSpec(0.3 + 1.1j)
    fast = eisenstein_invariants(lat)
    slow = lattice_sum_invariants(lat, 400)
    assert abs(fast.g2 - slow.g2) < 1e-3
    assert abs(fast.g3 - slow.g3) < 1e-3


def test_cutoff_guard():
    with pytest.raises(CutoffTooSmall):
        eisenstein_invariants(LatticeSpec(cutoff=19))
    with pytest.raises(ValueError):
        LatticeSpec(-1j)


def test_special_values():
    g2 = eisenstein_invariants(LatticeSpec()).g2.real
    assert abs(wp((1 + 1j) / 2)) < 1e-12
    assert wp(0.5) == pytest.approx(math.sqrt(g2) / 2, rel=1e-12)
    assert wp(0.5) == pytest.approx(6.87519, abs=1e-5)
    assert abs(wp_prime(0.5)) < 1e-9


def test_half_period_by_direct_sum():
    # p(1/2) = 4 + sum' (1/(1/2 - w)^2 - 1/w^2), summed over a square of lattice points
    w = np.arange(-1000, 1001)[:, None] + 1j * np.arange(-1000, 1001)[None, :]
    w = w[w != 0]
    direct = 4 + np.sum(1 / (0.5 - w) ** 2 - 1 / w ** 2)
    assert abs(direct - wp(0.5)) < 1e-3


def test_pole_guard():
    with pytest.raises(TooCloseToPole):
        wp(1 + 1j + 1e-4)
    with pytest.raises(TooCloseToPole):
        quad_diff_eval(SlicePoint(0), 2e-4j)


def test_quad_diff_eval():
    assert abs(quad_diff_eval(SlicePoint(0), (1 + 1j) / 2)) < 1e-12
    assert quad_diff_eval(SlicePoint(5), (1 + 1j) / 2) == pytest.approx(5, abs=1e-12)


cell = st.tuples(st.floats(0.02, 0.98), st.floats(0.02, 0.98)).map(lambda t: complex(*t))
tau_values = st.sampled_from([1j, 0.5 + 0.8660254037844386j, 0.2 + 1.3j])


@settings(max_examples=200, deadline=None)
@given(cell, tau_values)
def test_differential_equation(z, tau):
    lat = LatticeSpec(tau)
    z = z.real + z.imag * tau
    inv = eisenstein_invariants(lat)
    p, dp = wp(z, lat), wp_prime(z, lat)
    assert abs(dp * dp - (4 * p ** 3 - inv.g2 * p - inv.g3)) <= 1e-9 * max(1, abs(p)) ** 3


@settings(max_examples=200)
@given(cell)
def test_periodicity_and_square_symmetry(z):
    p = wp(z)
    scale = max(1, abs(p))
    assert abs(wp(z + 1) - p) <= 1e-10 * scale
    assert abs(wp(z + 1j) - p) <= 1e-10 * scale
    assert abs(wp(z - 3 + 2j) - p) <= 1e-10 * scale
    assert abs(wp(1j * z) + p) <= 1e-10 * scale
    q = SlicePoint(2 - 1j)
    assert abs(quad_diff_eval(q, z + 1) - quad_diff_eval(q, z)) <= 1e-10 * scale


@settings(max_examples=100)
@given(cell)
def test_derivative_matches_finite_difference(z):
    h = 1e-5
    fd = (wp(z + h) - wp(z - h)) / (2 * h)
    assert abs(fd - wp_prime(z)) <= 1e-6 * max(1, abs(wp_prime(z)))


def test_basis_default_theta():
    assert BasisDifferential().theta == 0.5
