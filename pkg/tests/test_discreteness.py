import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersslice.character import CharacterTriple, commutator_trace
from bersslice.discreteness import (DepthExceeded, NotRelative, Slope, bq_test, christoffel_word,
                                    enumerate_weighted_curves, simple_trace, trace_flip, word_matrix)
from bersslice.moebius import Mat2C
from conftest import markov_triple

A = Mat2C(1, 1, 1, 2)
B = Mat2C(1, -1, -1, 2)
MODULAR = CharacterTriple(3, 3, 3)


def test_flip_examples():
    assert trace_flip(MODULAR) == CharacterTriple(3, 3, 6)
    assert commutator_trace(trace_flip(MODULAR)) == -2
    assert trace_flip(CharacterTriple(0, 0, 0)) == CharacterTriple(0, 0, 0)
    t = CharacterTriple(1.5 + 2j, -0.3j, 4)
    assert trace_flip(trace_flip(t)) == t


def test_slope_normalisation():
    assert Slope(-1, -2) == Slope(1, 2)
    assert Slope(-1, 0) == Slope(1, 0)
    assert Slope.parse("inf") == Slope(1, 0)
    assert Slope.parse("-2/3") == Slope(-2, 3)
    with pytest.raises(ValueError):
        Slope(2, 4)


def test_simple_trace_examples():
    t = CharacterTriple(1.1, 2.2, 3.3)
    assert simple_trace(Slope(0, 1), t) == t.x
    assert simple_trace(Slope(1, 0), t) == t.y
    assert simple_trace(Slope(1, 1), t) == t.z
    assert simple_trace(Slope(1, 1), MODULAR) == 3
    assert simple_trace(Slope(2, 1), MODULAR) == 6
    assert simple_trace(Slope(-1, 1), MODULAR) == 6  # tr AB^-1 = xy - z
    with pytest.raises(DepthExceeded):
        simple_trace(Slope(1, 40), t, depth_guard=10)


def test_word_convention():
    # 2/1 is A B B, i.e. two B's and one A in cyclic order
    assert sorted(christoffel_word(Slope(2, 1))) == ["A", "B", "B"]
    assert word_matrix(christoffel_word(Slope(2, 1)), A, B).trace == pytest.approx(6)


def slopes_up_to(h):
    return [s for s, _ in enumerate_weighted_curves(h, 1)]


def test_simple_traces_match_matrix_words(rng):
    slopes = slopes_up_to(8)
    worst = 0.0
    for _ in range(20):
        a = Mat2C(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        a = a.normalized()
        b = Mat2C(*(rng.normal(size=4) + 1j * rng.normal(size=4))).normalized()
        base = CharacterTriple.from_matrices(a, b)
        for s in slopes:
            w = word_matrix(christoffel_word(s), a, b).trace
            worst = max(worst, abs(simple_trace(s, base) - w) / max(1.0, abs(w)))
    assert worst <= 1e-9


def test_modular_torus_traces_grow():
    # walk the Farey tree by mediants; every new curve has a larger trace than both parents
    frontier = [((0, 1), (1, 0)), ((0, 1), (-1, 0))]
    for _ in range(6):
        nxt = []
        for (a, b), (c, d) in frontier:
            child = (a + c, b + d)
            tc = simple_trace(Slope(*child), MODULAR)
            parents = [simple_trace(Slope(*v), MODULAR) for v in ((a, b), (c, d))]
            assert tc.imag == 0 and tc.real >= 3
            assert tc.real > max(p.real for p in parents) or child in ((1, 1), (-1, 1))
            nxt += [((a, b), child), (child, (c, d))]
        frontier = nxt


def test_bq_examples():
    v = bq_test(MODULAR)
    assert v.tag == "fuchsian"
    v = bq_test(CharacterTriple(0, 0, 0))
    assert v.tag == "not-discrete" and v.witness == Slope(0, 1) and v.witness_trace == 0
    with pytest.raises(NotRelative):
        bq_test(CharacterTriple(3, 3, 4))
    # a complex quasifuchsian deformation of the modular torus
    t = markov_triple(3 + 0.4j, 3)
    assert bq_test(t).tag == "quasifuchsian"


def test_budget_gives_inconclusive():
    t = markov_triple(2.1 + 0.02j, 2.1)
    assert bq_test(t, max_depth=1).tag == "inconclusive"
    assert bq_test(t, node_budget=2).tag == "inconclusive"


@settings(max_examples=150, deadline=None)
@given(st.floats(2.05, 10), st.floats(2.05, 10))
def test_teichmueller_triples_are_never_rejected(x, y):
    t = markov_triple(x, y)
    if abs(t.z.imag) > 0 or not 2 < t.z.real <= 10:
        return
    assert bq_test(t).tag != "not-discrete"


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(max_magnitude=6, allow_nan=False), st.complex_numbers(max_magnitude=6, allow_nan=False))
def test_witness_persists_with_depth(x, y):
    t = markov_triple(x, y)
    v = bq_test(t, max_depth=8)
    if v.tag == "not-discrete":
        deeper = bq_test(t, max_depth=30)
        assert deeper.tag == "not-discrete"
        assert abs(deeper.witness_trace.imag) <= 1e-9 and abs(deeper.witness_trace.real) <= 2 + 1e-9


def test_enumeration():
    one = enumerate_weighted_curves(1, 1)
    assert {str(s) for s, _ in one} == {"0/1", "1/1", "1/0", "-1/1"}
    assert len(enumerate_weighted_curves(2, 2)) == 16
    for s, w in enumerate_weighted_curves(3, 4):
        n = w / (2 * math.pi)
        assert abs(n - round(n)) < 1e-12 and 1 <= round(n) <= 4
    assert enumerate_weighted_curves(3, 2) == enumerate_weighted_curves(3, 2)
    with pytest.raises(ValueError):
        enumerate_weighted_curves(0, 1)


def test_enumeration_count_matches_totients():
    def phi(n):
        return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)

    for h in range(1, 7):
        # p/q with q <= h, |p| <= h: 1/0, 0/1, and 2 * sum over max(|p|, q) = k of phi-type counts
        expected = 2 + sum(4 * phi(k) for k in range(2, h + 1)) + 2
        assert len(enumerate_weighted_curves(h, 1)) == expected
