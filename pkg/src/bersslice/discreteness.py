"""Simple-curve traces on the Farey tree and a Bowditch-style discreteness test.

Slope p/q names the simple closed curve in the homology class q[A] + p[B], so
0/1 is A, 1/0 (infinity) is B, 1/1 is AB and -1/1 is AB^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import _kernels
from .character import CharacterTriple, commutator_trace
from .moebius import Mat2C, compose

MAX_DEPTH = 40
GROWTH_BOUND = 4.0
NODE_BUDGET = 4096
BAD_REGION_FATTEN = 1e-9
RELATIVE_TOL = 1e-6


class DepthExceeded(RuntimeError):
    pass


class NotRelative(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Slope:
    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        g = math.gcd(p, q)
        if g != 1:
            raise ValueError(f"slope {p}/{q} is not in lowest terms")
        if q < 0 or (q == 0 and p < 0):
            object.__setattr__(self, "p", -p)
            object.__setattr__(self, "q", -q)

    @classmethod
    def parse(cls, text: str) -> Slope:
        text = text.strip()
        if text in ("inf", "oo", "infinity"):
            return cls(1, 0)
        p, _, q = text.partition("/")
        return cls(int(p), int(q or 1))

    @property
    def height(self) -> int:
        return max(abs(self.p), self.q)

    @property
    def angle(self) -> float:
        """Direction of the line in [0, pi)."""
        return math.atan2(self.p, self.q) % math.pi

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class FareyNode:
    """A superbase: three slopes pairwise at Farey distance one, with their traces."""

    slopes: tuple[Slope, Slope, Slope]
    traces: CharacterTriple


def trace_flip(t: CharacterTriple) -> CharacterTriple:
    """Replace z by the trace of the other neighbour of x and y: (x, y, xy - z)."""
    return CharacterTriple(t.x, t.y, t.x * t.y - t.z)


def _descent(slope: Slope, guard: int):
    """Stern-Brocot path to |p|/q as a string of 'L'/'R' moves."""
    target = Fraction(abs(slope.p), slope.q)
    lo, hi = (0, 1), (1, 0)
    moves = []
    while True:
        mp, mq = lo[0] + hi[0], lo[1] + hi[1]
        med = Fraction(mp, mq)
        if med == target:
            return moves
        if len(moves) >= guard:
            raise DepthExceeded(f"slope {slope} is more than {guard} flips from the base superbase")
        if target < med:
            hi = (mp, mq)
            moves.append("L")
        else:
            lo = (mp, mq)
            moves.append("R")


def simple_trace(slope: Slope, base: CharacterTriple, depth_guard: int = 64) -> complex:
    """Trace of the simple closed curve of ``slope`` given the traces at (0/1, 1/0, 1/1)."""
    if slope == Slope(0, 1):
        return base.x
    if slope == Slope(1, 0):
        return base.y
    x, y = base.x, base.y
    # (U, V, UV) walks down the Stern-Brocot tree; negative slopes use B^-1 in place of B
    uv = base.z if slope.p > 0 else x * y - base.z
    u, v = x, y
    for move in _descent(slope, depth_guard):
        if move == "L":
            u, v, uv = u, uv, u * uv - v
        else:
            u, v, uv = uv, v, uv * v - u
    return uv


def christoffel_word(slope: Slope) -> str:
    """A primitive word for ``slope`` in the letters A, B (b stands for B^-1).

    Built from the cutting sequence of the line of slope |p|/q, independently of
    the Stern-Brocot recursion in :func:`simple_trace`.
    """
    p, q = abs(slope.p), slope.q
    if q == 0:
        return "B"
    if p == 0:
        return "A"
    letter = "B" if slope.p > 0 else "b"
    n = p + q
    return "".join(letter if (i * p) // n > ((i - 1) * p) // n else "A" for i in range(1, n + 1))


def word_matrix(word: str, a: Mat2C, b: Mat2C) -> Mat2C:
    letters = {"A": a, "B": b, "a": a.inverse(), "b": b.inverse()}
    m = Mat2C.identity()
    for ch in word:
        m = compose(m, letters[ch])
    return m


@dataclass(frozen=True)
class BQVerdict:
    tag: str  # quasifuchsian | fuchsian | not-discrete | inconclusive
    depth: int
    nodes: int
    witness: Slope | None = None
    witness_trace: complex | None = None


_TAGS = {_kernels.V_QUASIFUCHSIAN: "quasifuchsian", _kernels.V_NOT_DISCRETE: "not-discrete",
         _kernels.V_INCONCLUSIVE: "inconclusive"}


def is_real(t: CharacterTriple, tol: float = RELATIVE_TOL) -> bool:
    vals = t.as_tuple()
    scale = max(1.0, *(abs(v) for v in vals))
    return max(abs(v.imag) for v in vals) <= tol * scale


def check_relative(t: CharacterTriple, tol: float = RELATIVE_TOL):
    scale = max(1.0, *(abs(v) ** 2 for v in t.as_tuple()))
    if abs(commutator_trace(t) + 2) > tol * scale:
        raise NotRelative(f"commutator trace {commutator_trace(t)} is not -2")


def bq_test(t: CharacterTriple, max_depth: int = MAX_DEPTH, growth_bound: float = GROWTH_BOUND,
            node_budget: int = NODE_BUDGET, fatten: float = BAD_REGION_FATTEN) -> BQVerdict:
    """Search the Farey tree for a simple trace in [-2, 2] or prove none exists.

    ``quasifuchsian`` means every branch reached a node past which traces grow
    monotonically (so Bowditch's conditions hold); ``fuchsian`` adds a real
    character.  ``inconclusive`` is returned when the depth or node budget runs
    out first.
    """
    check_relative(t)
    code, depth, nodes, wp, wq = _kernels.bowditch_search(t.x, t.y, t.z, max_depth, growth_bound, fatten,
                                                           node_budget)
    tag = _TAGS[code]
    if tag == "not-discrete":
        w = Slope(int(wp), int(wq))
        return BQVerdict(tag, int(depth), int(nodes), w, simple_trace(w, t, depth_guard=max_depth + 8))
    if tag == "quasifuchsian" and is_real(t):
        tag = "fuchsian"
    return BQVerdict(tag, int(depth), int(nodes))


def enumerate_weighted_curves(max_height: int, max_weight_multiple: int) -> list[tuple[Slope, float]]:
    """(slope, 2 pi n) for every slope of height <= max_height and 1 <= n <= max_weight_multiple.

    Ordered by the direction of the slope in [0, pi), then by n.
    """
    if max_height < 1 or max_weight_multiple < 1:
        raise ValueError("bounds must be >= 1")
    slopes = {Slope(1, 0)}
    for q in range(1, max_height + 1):
        for p in range(-max_height, max_height + 1):
            if math.gcd(p, q) == 1:
                slopes.add(Slope(p, q))
    ordered = sorted(slopes, key=lambda s: (s.angle, s.height))
    return [(s, 2 * math.pi * n) for s in ordered for n in range(1, max_weight_multiple + 1)]
