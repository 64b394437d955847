"""Rasterise the slice plane, locate Fuchsian centers and follow them along rays."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .character import CharacterTriple, canonical_signs, classify_real_point
from .discreteness import (BAD_REGION_FATTEN, GROWTH_BOUND, MAX_DEPTH, NODE_BUDGET, Slope, bq_test,
                           enumerate_weighted_curves, is_real, simple_trace)
from .elliptic import EPS_Z, BasisDifferential, LatticeSpec, SlicePoint, elliptic_data
from .holonomy import BASEPOINT, H_MIN, LOCAL_TOL, MAX_STEPS, StepUnderflow, standard_loops, step_plan
from .moebius import NotHyperbolic, length_from_trace

GRAY, BLACK, WHITE, INCONCLUSIVE = 0, 1, 2, 3
TAGS = ("qf-gray", "center-black", "outside-white", "inconclusive")
COLORS = np.array([[160, 160, 160], [0, 0, 0], [255, 255, 255], [255, 200, 0]], dtype=np.uint8)

GN_STEP = 1e-6
GN_TOL = 1e-10
GN_MAX_ITER = 50
MERGE_DIST = 1e-6
# allowance per unit of c for the growth of the seed residual between a pixel
# center and a center lying elsewhere in the pixel
SEED_SLOPE = 0.5
LENGTH_HEIGHT = 2


class NoneFound(LookupError):
    pass


class InsufficientCenters(ValueError):
    pass


@dataclass(frozen=True)
class RasterConfig:
    center: complex = 0j
    width: float = 100.0
    height: float = 100.0
    resolution: int = 400
    max_depth: int = MAX_DEPTH
    growth_bound: float = GROWTH_BOUND
    node_budget: int = NODE_BUDGET
    tol: float = LOCAL_TOL
    seed_threshold: float = 0.05
    workers: int = 1
    tau: complex = 1j
    theta: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "tau", complex(self.tau))
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("width and height must be positive")
        if self.max_depth < 1 or self.node_budget < 1 or self.workers < 1:
            raise ValueError("max_depth, node_budget and workers must be >= 1")
        if not (self.tol > 0 and self.seed_threshold > 0 and self.growth_bound > 0):
            raise ValueError("tolerances must be positive")

    @property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec(self.tau)

    @property
    def pixel_size(self) -> tuple[float, float]:
        return self.width / self.resolution, self.height / self.resolution

    def pixel_centers(self) -> np.ndarray:
        """(res, res) grid of c values, row-major from the top-left pixel."""
        n = self.resolution
        frac = (np.arange(n) + 0.5) / n - 0.5
        re = self.center.real + frac * self.width
        im = self.center.imag - frac * self.height
        return re[None, :] + 1j * im[:, None]

    def pixel_of(self, c: complex) -> tuple[int, int] | None:
        n = self.resolution
        j = math.floor(((c.real - self.center.real) / self.width + 0.5) * n)
        i = math.floor((0.5 - (c.imag - self.center.imag) / self.height) * n)
        if 0 <= i < n and 0 <= j < n:
            return i, j
        return None

    def contains(self, c: complex) -> bool:
        return (abs(c.real - self.center.real) <= self.width / 2
                and abs(c.imag - self.center.imag) <= self.height / 2)

    def slice_point(self, c: complex) -> SlicePoint:
        return SlicePoint(c, BasisDifferential(self.theta), self.lattice)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = [self.center.real, self.center.imag]
        d["tau"] = [self.tau.real, self.tau.imag]
        return d


def imag_residual(traces) -> np.ndarray:
    """max_k |Im t_k| / max(1, |t_k|) along the last axis."""
    traces = np.asarray(traces)
    return np.max(np.abs(traces.imag) / np.maximum(1.0, np.abs(traces)), axis=-1)


# ---------------------------------------------------------------------------
# grid evaluation


@dataclass
class ScanGrid:
    cfg: RasterConfig
    cs: np.ndarray
    traces: np.ndarray  # (res, res, 3)
    status: np.ndarray
    ode_error: np.ndarray
    verdicts: np.ndarray
    depths: np.ndarray


def _row_block(cfg, rows, cs, out, status, errs, verdicts, depths):
    data = elliptic_data(cfg.lattice)
    alpha, beta = standard_loops(BASEPOINT, cfg.tau, EPS_Z)
    for i in rows:
        _kernels.grid_traces(cs[i], out[i], status[i], errs[i], alpha.as_array(), beta.as_array(), cfg.theta,
                             *data.kernel_args(), EPS_Z, cfg.tol, H_MIN, MAX_STEPS)
        _kernels.grid_search(out[i], verdicts[i], depths[i], cfg.max_depth, cfg.growth_bound, BAD_REGION_FATTEN,
                             cfg.node_budget)


def scan_grid(cfg: RasterConfig) -> ScanGrid:
    """Characters and search verdicts at every pixel center.

    Rows are handed to a thread pool; each pixel is computed independently, so
    the result does not depend on the number of workers or the scheduling.
    """
    n = cfg.resolution
    cs = np.ascontiguousarray(cfg.pixel_centers())
    out = np.zeros((n, n, 3), dtype=complex)
    status = np.zeros((n, n), dtype=np.int64)
    errs = np.zeros((n, n))
    verdicts = np.zeros((n, n), dtype=np.int64)
    depths = np.zeros((n, n), dtype=np.int64)
    blocks = [range(k, min(n, k + 4)) for k in range(0, n, 4)]
    if cfg.workers == 1:
        for rows in blocks:
            _row_block(cfg, rows, cs, out, status, errs, verdicts, depths)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(lambda rows: _row_block(cfg, rows, cs, out, status, errs, verdicts, depths), blocks))
    # pixels whose integration failed are not classified
    verdicts[status != _kernels.OK] = _kernels.V_INCONCLUSIVE
    return ScanGrid(cfg, cs, out, status, errs, verdicts, depths)


def _verdict_class(code):
    return {_kernels.V_QUASIFUCHSIAN: GRAY, _kernels.V_NOT_DISCRETE: WHITE}.get(int(code), INCONCLUSIVE)


# ---------------------------------------------------------------------------
# centers


@dataclass(frozen=True)
class CenterRecord:
    c: complex
    character: CharacterTriple
    residual: float
    lengths: dict = field(default_factory=dict)  # str(slope) -> translation length
    label: tuple | None = None  # (slope, n): advisory grafting attribution

    def to_json(self) -> dict:
        return {
            "c": [self.c.real, self.c.imag],
            "traces": [[t.real, t.imag] for t in self.character.as_tuple()],
            "residual": self.residual,
            "lengths": dict(self.lengths),
        }


@dataclass(frozen=True)
class Refinement:
    c: complex
    residual: float
    iterations: int
    converged: bool
    traces: np.ndarray


def _scaled_imag(traces):
    return traces.imag / np.maximum(1.0, np.abs(traces))


def refine_center(c0: complex, cfg: RasterConfig) -> Refinement:
    """Damped Gauss-Newton on (Im x, Im y, Im z) = 0 in the unknowns (Re c, Im c).

    Each iteration freezes the integrator's step plan at the current iterate so
    the central-difference Jacobian sees a smooth function of c.
    """
    c = complex(c0)
    traces = None
    res_norm = math.inf
    for it in range(1, GN_MAX_ITER + 1):
        plan = step_plan(cfg.slice_point(c), tol=cfg.tol)
        traces = plan.traces(c)
        r = _scaled_imag(traces)
        res_norm = float(np.linalg.norm(r))
        if res_norm < GN_TOL:
            return Refinement(c, res_norm, it, True, traces)
        h = GN_STEP
        jac = np.stack([
            (_scaled_imag(plan.traces(c + h)) - _scaled_imag(plan.traces(c - h))) / (2 * h),
            (_scaled_imag(plan.traces(c + 1j * h)) - _scaled_imag(plan.traces(c - 1j * h))) / (2 * h),
        ], axis=1)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        dc = complex(step[0], step[1])
        lam = 1.0
        while True:
            trial = c + lam * dc
            new = float(np.linalg.norm(_scaled_imag(plan.traces(trial))))
            if new < res_norm or lam < 1e-6:
                break
            lam /= 2
        if new >= res_norm:
            return Refinement(c, res_norm, it, False, traces)
        c = trial
    return Refinement(c, res_norm, GN_MAX_ITER, res_norm < GN_TOL, traces)


def _lengths(t: CharacterTriple, height: int = LENGTH_HEIGHT) -> dict:
    out = {}
    for slope, _ in enumerate_weighted_curves(height, 1):
        try:
            out[str(slope)] = length_from_trace(simple_trace(slope, t), tol=1e-6)
        except NotHyperbolic:
            out[str(slope)] = float("nan")
    return out


def validate_center(ref: Refinement, cfg: RasterConfig, depth: int | None = None) -> CenterRecord | None:
    """CenterRecord for a converged refinement whose character is Fuchsian, else None."""
    if not ref.converged:
        return None
    char = canonical_signs(CharacterTriple(*ref.traces))
    if not is_real(char):
        return None
    if classify_real_point(char).tag != "fuchsian-teich":
        return None
    verdict = bq_test(char, max_depth=depth or cfg.max_depth, growth_bound=cfg.growth_bound,
                      node_budget=cfg.node_budget)
    if verdict.tag != "fuchsian":
        return None
    real = CharacterTriple(*(complex(v.real, 0.0) for v in char.as_tuple()))
    return CenterRecord(ref.c, real, ref.residual, _lengths(real))


def _seeds(grid: ScanGrid) -> list[complex]:
    res = imag_residual(grid.traces)
    res[grid.status != _kernels.OK] = np.inf
    n = res.shape[0]
    padded = np.pad(res, 1, constant_values=np.inf)
    neigh = np.stack([padded[1 + di:n + 1 + di, 1 + dj:n + 1 + dj]
                      for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)])
    pw, ph = grid.cfg.pixel_size
    threshold = grid.cfg.seed_threshold + SEED_SLOPE * math.hypot(pw, ph) / 2
    is_min = (res <= neigh.min(axis=0)) & (res < threshold)
    return [complex(c) for c in grid.cs[is_min]]


def _merge(records: list[CenterRecord]) -> list[CenterRecord]:
    kept: list[CenterRecord] = []
    for rec in sorted(records, key=lambda r: (r.residual, r.c.real, r.c.imag)):
        if all(abs(rec.c - k.c) >= MERGE_DIST for k in kept):
            kept.append(rec)
    return sorted(kept, key=lambda r: (abs(r.c), r.c.real, r.c.imag))


def find_centers(cfg: RasterConfig, grid: ScanGrid | None = None, strict: bool = False) -> list[CenterRecord]:
    """Fuchsian centers inside the window, sorted by |c|.

    Seeds are local minima of the imaginary residual on the pixel grid; each is
    refined independently and the survivors are merged in a fixed order.  An
    empty window is a valid answer; ``strict`` turns it into NoneFound.
    """
    if grid is None:
        grid = scan_grid(cfg)
    seeds = _seeds(grid)

    def work(seed):
        try:
            return validate_center(refine_center(seed, cfg), cfg)
        except (StepUnderflow, ValueError):
            return None

    if cfg.workers == 1:
        found = [work(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            found = list(pool.map(work, seeds))
    centers = _merge([r for r in found if r is not None and cfg.contains(r.c)])
    if strict and not centers:
        raise NoneFound(f"no Fuchsian center in the {cfg.width} x {cfg.height} window at {cfg.center}")
    return centers


# ---------------------------------------------------------------------------
# pixel classification and raster


@dataclass(frozen=True)
class PixelClass:
    tag: str
    imag_residual: float
    verdict: str
    center: CenterRecord | None = None


def classify_point(c: complex, cfg: RasterConfig) -> PixelClass:
    """Classify one slice point; ``cfg`` supplies the pixel size used for center detection."""
    c = complex(c)
    plan = step_plan(cfg.slice_point(c), tol=cfg.tol)
    char = CharacterTriple(*plan.traces(c))
    resid = float(imag_residual(np.array(char.as_tuple())))
    verdict = bq_test(char, cfg.max_depth, cfg.growth_bound, cfg.node_budget)
    if resid < cfg.seed_threshold:
        rec = validate_center(refine_center(c, cfg), cfg)
        pw, ph = cfg.pixel_size
        if rec is not None and abs(rec.c.real - c.real) <= pw / 2 and abs(rec.c.imag - c.imag) <= ph / 2:
            return PixelClass("center-black", resid, verdict.tag, rec)
    tag = {"quasifuchsian": "qf-gray", "fuchsian": "qf-gray", "not-discrete": "outside-white"}.get(
        verdict.tag, "inconclusive")
    return PixelClass(tag, resid, verdict.tag)


@dataclass
class RasterResult:
    cfg: RasterConfig
    classes: np.ndarray  # (res, res) uint8 codes GRAY/BLACK/WHITE/INCONCLUSIVE
    centers: list[CenterRecord]
    stats: dict
    grid: ScanGrid = field(repr=False)

    def image(self) -> np.ndarray:
        return COLORS[self.classes]


def raster(cfg: RasterConfig) -> RasterResult:
    t0 = time.perf_counter()
    grid = scan_grid(cfg)
    classes = np.vectorize(_verdict_class, otypes=[np.uint8])(grid.verdicts)
    centers = find_centers(cfg, grid)
    for rec in centers:
        ij = cfg.pixel_of(rec.c)
        if ij is not None:
            classes[ij] = BLACK
    counts = {tag: int(np.sum(classes == k)) for k, tag in enumerate(TAGS)}
    ok = grid.status == _kernels.OK
    stats = {
        "counts": counts,
        "gray_fraction": (counts["qf-gray"] + counts["center-black"]) / classes.size,
        "centers": len(centers),
        "failed_pixels": int(np.sum(~ok)),
        "mean_ode_error": float(np.mean(grid.ode_error[ok])) if ok.any() else float("nan"),
        "wall_time": time.perf_counter() - t0,
        "config": cfg.to_dict(),
    }
    return RasterResult(cfg, classes, centers, stats, grid)


def gray_components(classes: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 8-connected components of gray-or-black pixels (0 = neither)."""
    mask = (classes == GRAY) | (classes == BLACK)
    return ndimage.label(mask, structure=np.ones((3, 3), dtype=int))


def component_at(classes: np.ndarray, cfg: RasterConfig, c: complex) -> np.ndarray | None:
    """Boolean mask of the gray component containing the pixel of ``c``, or None."""
    ij = cfg.pixel_of(complex(c))
    if ij is None:
        return None
    labels, _ = gray_components(classes)
    if labels[ij] == 0:
        return None
    return labels == labels[ij]


def ring_inside(mask: np.ndarray, cfg: RasterConfig, c: complex) -> bool:
    """Whether the 3x3 block of pixels around ``c`` lies in ``mask``."""
    ij = cfg.pixel_of(complex(c))
    if ij is None:
        return False
    i, j = ij
    n = cfg.resolution
    if not (0 < i < n - 1 and 0 < j < n - 1):
        return False
    return bool(mask[i - 1:i + 2, j - 1:j + 2].all())


# ---------------------------------------------------------------------------
# attribution to (slope, weight) and the length series


def flat_extremal_length(slope: Slope, tau: complex = 1j) -> float:
    """Extremal length of the slope's class on the closed flat torus C / (Z + tau Z)."""
    return abs(slope.q + slope.p * tau) ** 2 / tau.imag


def _ray_groups(centers, c_f, angle_tol):
    rays: list[list[CenterRecord]] = []
    angles: list[float] = []
    for rec in sorted((r for r in centers if abs(r.c - c_f) > MERGE_DIST), key=lambda r: abs(r.c - c_f)):
        a = math.atan2((rec.c - c_f).imag, (rec.c - c_f).real)
        for k, a0 in enumerate(angles):
            if abs(math.remainder(a - a0, 2 * math.pi)) <= angle_tol:
                rays[k].append(rec)
                break
        else:
            angles.append(a)
            rays.append([rec])
    return rays


def attribute_centers(centers: list[CenterRecord], c_f: complex = 0j, tau: complex = 1j, max_height: int = 3,
                      angle_tol: float = 0.15) -> list[CenterRecord]:
    """Label each center other than c_F with an advisory (slope, n).

    Centers are grouped into rays from c_F by direction and numbered n = 1, 2, ...
    outward.  The slope chosen for a ray is the one whose grafted annuli
    2 pi n / l_n come closest to, without exceeding, the flat-torus modulus bound
    1 / EL(slope); near ties go to the longer curve.  Labels never feed back into
    any check on the centers themselves.
    """
    labelled = []
    for ray in _ray_groups(centers, c_f, angle_tol):
        best, best_key = None, None
        for slope, _ in enumerate_weighted_curves(max_height, 1):
            ratios, lengths = [], []
            for n, rec in enumerate(ray, start=1):
                try:
                    ell = length_from_trace(simple_trace(slope, rec.character), tol=1e-6)
                except NotHyperbolic:
                    break
                ratios.append(2 * math.pi * n / ell * flat_extremal_length(slope, tau))
                lengths.append(ell)
            else:
                if max(ratios) <= 1.05:
                    key = (round(min(ratios), 3), lengths[0])
                    if best_key is None or key > best_key:
                        best, best_key = slope, key
        for n, rec in enumerate(ray, start=1):
            labelled.append(CenterRecord(rec.c, rec.character, rec.residual, rec.lengths,
                                         (best, n) if best is not None else None))
    return labelled


def center_length_series(slope: Slope, centers: list[CenterRecord]) -> list[tuple[int, float]]:
    """(n, l_n) along the centers attributed to ``slope``, in order of n."""
    series = sorted((rec.label[1], length_from_trace(simple_trace(slope, rec.character), tol=1e-6))
                    for rec in centers if rec.label is not None and rec.label[0] == slope)
    if len(series) < 2:
        raise InsufficientCenters(f"{len(series)} centers attributed to slope {slope}")
    return series


# ---------------------------------------------------------------------------
# output formats


def ppm_bytes(image: np.ndarray) -> bytes:
    h, w, _ = image.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def write_image(path, image: np.ndarray):
    path = str(path)
    if path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(path)
    else:
        with open(path, "wb") as fh:
            fh.write(ppm_bytes(image))


def _encode(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    close = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return f"{obj:.17g}" if math.isfinite(obj) else "null"
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{" + pad + sep.join(items) + close + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + close + "]"
    if isinstance(obj, (np.floating, np.integer)):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps17(obj, indent: int = 0) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become null."""
    return _encode(obj, indent, 0)


def centers_json(centers: list[CenterRecord]) -> str:
    return dumps17([rec.to_json() for rec in centers], indent=1)
