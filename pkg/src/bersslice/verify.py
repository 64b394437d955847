"""Invariant suites run by ``bersslice verify``.

Each suite is a list of named checks; a check returns (ok, detail).  Checks are
cheap (seconds in total) and deterministic: random inputs use a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .character import CharacterTriple, classify_real_point, commutator_trace, evaluate_character, word_list
from .discreteness import Slope, bq_test, christoffel_word, enumerate_weighted_curves, simple_trace, trace_flip, \
    word_matrix
from .elliptic import (BasisDifferential, LatticeSpec, SlicePoint, eisenstein_invariants, wp, wp_prime)
from .holonomy import cr_residual, holonomy
from .moebius import Mat2C, compose, length_from_trace
from .scan import RasterConfig, classify_point

SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str


def _rand_sl2(rng):
    a, b, c = rng.normal(size=3) + 1j * rng.normal(size=3)
    return Mat2C(a, b, c, (1 + b * c) / a)


def _lemniscate_g2():
    agm_a, agm_b = 1.0, math.sqrt(2.0)
    for _ in range(8):
        agm_a, agm_b = (agm_a + agm_b) / 2, math.sqrt(agm_a * agm_b)
    return 4 * (math.pi / agm_a) ** 4


def suite_moebius(rng, theta):
    out = []
    errs = []
    for _ in range(200):
        m1, m2 = _rand_sl2(rng), _rand_sl2(rng)
        errs.append(abs(compose(m1, m2).det - 1))
        errs.append(abs(compose(m1, m2).trace - compose(m2, m1).trace) / max(1, abs(compose(m1, m2).trace)))
    out.append(("det and trace of products", max(errs) <= 1e-12, f"max error {max(errs):.2e}"))
    ell = length_from_trace(3.0)
    out.append(("length of trace 3", abs(ell - 1.924847) < 1e-6, f"{ell:.9f}"))
    return out


def suite_character(rng, theta):
    out = []
    errs = []
    wl = word_list(2)
    for _ in range(1000):
        a, b = _rand_sl2(rng), _rand_sl2(rng)
        t = CharacterTriple(*evaluate_character([a, b], wl))
        comm = compose(compose(a, b), compose(a.inverse(), b.inverse())).trace
        errs.append(abs(commutator_trace(t) - comm) / max(1, abs(comm)))
    out.append(("Fricke commutator identity", max(errs) <= 1e-9, f"max relative error {max(errs):.2e}"))
    tags = [classify_real_point(CharacterTriple(*t)).tag for t in ((3, 3, 3), (0, 0, 0), (3, 3, 4))]
    out.append(("real point classes", tags == ["fuchsian-teich", "su2", "not-relative"], ", ".join(tags)))
    return out


def suite_elliptic(rng, theta):
    out = []
    lat = LatticeSpec()
    inv = eisenstein_invariants(lat)
    g2_ref = _lemniscate_g2()
    rel = abs(inv.g2 - g2_ref) / g2_ref
    out.append(("g2 against the lemniscate constant", rel <= 1e-8, f"relative error {rel:.2e}"))
    out.append(("g3 vanishes on the square lattice", abs(inv.g3) <= 1e-10, f"|g3| = {abs(inv.g3):.2e}"))
    zs = rng.uniform(0.05, 0.95, 50) + 1j * rng.uniform(0.05, 0.95, 50)
    res = max(abs(wp_prime(z) ** 2 - (4 * wp(z) ** 3 - inv.g2 * wp(z) - inv.g3)) / max(1, abs(wp(z)) ** 3)
              for z in zs)
    out.append(("Weierstrass differential equation", res <= 1e-9, f"max scaled residual {res:.2e}"))
    per = max(max(abs(wp(z + 1) - wp(z)), abs(wp(z + 1j) - wp(z))) / max(1, abs(wp(z))) for z in zs)
    out.append(("double periodicity", per <= 1e-10, f"max relative error {per:.2e}"))
    return out


def suite_holonomy(rng, theta):
    out = []
    pts = [0, 1 + 1j, -2.5]
    kappas = []
    dets = []
    for c in pts:
        h = holonomy(SlicePoint(c, BasisDifferential(theta), LatticeSpec()), estimate_error=False)
        kappas.append(abs(commutator_trace(h.character) + 2))
        dets += [abs(h.m_alpha.det - 1), abs(h.m_beta.det - 1)]
    out.append(("parabolic puncture", max(kappas) <= 1e-8, f"max |kappa + 2| {max(kappas):.2e}"))
    out.append(("unit determinant", max(dets) <= 1e-10, f"max |det - 1| {max(dets):.2e}"))
    p = SlicePoint(3 - 2j, BasisDifferential(theta), LatticeSpec())
    r1, r2 = cr_residual(p, 1e-4), cr_residual(p, 5e-5)
    out.append(("Cauchy-Riemann defect", r1 <= 1e-5, f"h=1e-4: {r1:.2e}, h=5e-5: {r2:.2e}"))
    return out


def suite_discreteness(rng, theta):
    out = []
    errs = []
    for _ in range(5):
        a, b = _rand_sl2(rng), _rand_sl2(rng)
        base = CharacterTriple.from_matrices(a, b)
        for s, _ in enumerate_weighted_curves(5, 1):
            w = word_matrix(christoffel_word(s), a, b).trace
            errs.append(abs(simple_trace(s, base) - w) / max(1, abs(w)))
    out.append(("simple traces against matrix words", max(errs) <= 1e-9, f"max relative error {max(errs):.2e}"))
    t = CharacterTriple(3, 3, 3)
    out.append(("flip keeps kappa", abs(commutator_trace(trace_flip(t)) + 2) <= 1e-12,
                f"{commutator_trace(trace_flip(t))}"))
    v1, v2 = bq_test(t), bq_test(CharacterTriple(0, 0, 0))
    out.append(("modular torus and SU(2) point", v1.tag == "fuchsian" and v2.tag == "not-discrete"
                and v2.witness == Slope(0, 1), f"{v1.tag}, {v2.tag} at {v2.witness}"))
    return out


def suite_scan(rng, theta):
    cfg = RasterConfig(width=4.0, height=4.0, resolution=8, theta=theta)
    pc = classify_point(0.0, cfg)
    far = classify_point(1000.0, cfg)
    return [("Fuchsian point is a center", pc.tag == "center-black", pc.tag),
            ("far point is not gray", far.tag in ("outside-white", "inconclusive"), far.tag)]


SUITES = {
    "moebius": suite_moebius,
    "character": suite_character,
    "elliptic": suite_elliptic,
    "holonomy": suite_holonomy,
    "discreteness": suite_discreteness,
    "scan": suite_scan,
}


def run_suites(names=None, theta: float = 0.5) -> list[CheckResult]:
    """Run the named suites (all by default); ``theta`` exists for negative controls."""
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    results = []
    for name in names:
        rng = np.random.default_rng(SEED)
        try:
            checks = SUITES[name](rng, theta)
        except Exception as exc:  # a crashing suite is a failing suite
            checks = [("suite raised", False, f"{type(exc).__name__}: {exc}")]
        results += [CheckResult(name, n, bool(ok), d) for n, ok, d in checks]
    return results
