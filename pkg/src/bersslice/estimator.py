"""scikit-learn style wrappers: slice points in, trace features or pixel classes out.

Rows of ``X`` are points of the slice plane as (Re c, Im c).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import _kernels
from .discreteness import BAD_REGION_FATTEN, GROWTH_BOUND, MAX_DEPTH, NODE_BUDGET
from .elliptic import EPS_Z, LatticeSpec
from .holonomy import BASEPOINT, LOCAL_TOL, StepUnderflow, trace_grid
from .scan import TAGS, RasterConfig, _merge, find_centers, refine_center, validate_center


def _as_points(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_min_features=2)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (Re c, Im c), got {X.shape[1]}")
    return X[:, 0] + 1j * X[:, 1]


class CharacterTransformer(TransformerMixin, BaseEstimator):
    """Map c to the real and imaginary parts of its holonomy traces (x, y, z).

    Output columns: Re x, Im x, Re y, Im y, Re z, Im z.  Points whose
    integration fails come out as NaN rows.
    """

    def __init__(self, tau=1j, theta=0.5, tol=LOCAL_TOL, basepoint=BASEPOINT):
        self.tau = tau
        self.theta = theta
        self.tol = tol
        self.basepoint = basepoint

    def fit(self, X, y=None):
        _as_points(X)
        LatticeSpec(complex(self.tau))
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        cs = _as_points(X)
        traces, status, _ = trace_grid(cs, LatticeSpec(complex(self.tau)), self.theta, self.tol, EPS_Z,
                                       complex(self.basepoint))
        out = np.stack([traces.real, traces.imag], axis=-1).reshape(len(cs), 6)
        out[status != _kernels.OK] = np.nan
        return out


class SliceClassifier(ClassifierMixin, BaseEstimator):
    """Pixel classes of the slice plane with Fuchsian centers learned by ``fit``.

    ``fit(X)`` refines every row of ``X`` as a center seed; with ``X=None`` the
    seeds come from a raster of the configured window.  ``predict`` returns the
    search verdict as a class tag, or ``center-black`` within ``center_radius``
    of a fitted center.
    """

    def __init__(self, center=0j, width=100.0, height=100.0, resolution=100, max_depth=MAX_DEPTH,
                 growth_bound=GROWTH_BOUND, node_budget=NODE_BUDGET, tol=LOCAL_TOL, center_radius=1e-6,
                 workers=1):
        self.center = center
        self.width = width
        self.height = height
        self.resolution = resolution
        self.max_depth = max_depth
        self.growth_bound = growth_bound
        self.node_budget = node_budget
        self.tol = tol
        self.center_radius = center_radius
        self.workers = workers

    def _config(self) -> RasterConfig:
        return RasterConfig(center=complex(self.center), width=self.width, height=self.height,
                            resolution=self.resolution, max_depth=self.max_depth, growth_bound=self.growth_bound,
                            node_budget=self.node_budget, tol=self.tol, workers=self.workers)

    def fit(self, X=None, y=None):
        cfg = self._config()
        if X is None:
            self.centers_ = find_centers(cfg)
        else:
            found = []
            for seed in _as_points(X):
                try:
                    rec = validate_center(refine_center(seed, cfg), cfg)
                except (StepUnderflow, ValueError):
                    rec = None
                if rec is not None:
                    found.append(rec)
            self.centers_ = _merge(found)
        self.classes_ = np.array(TAGS)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "centers_")
        cs = _as_points(X)
        traces, status, _ = trace_grid(cs, tol=self.tol)
        verdicts = np.empty(len(cs), dtype=np.int64)
        depths = np.empty(len(cs), dtype=np.int64)
        _kernels.grid_search(traces, verdicts, depths, self.max_depth, self.growth_bound, BAD_REGION_FATTEN,
                             self.node_budget)
        verdicts[status != _kernels.OK] = _kernels.V_INCONCLUSIVE
        tags = np.array([{_kernels.V_QUASIFUCHSIAN: TAGS[0], _kernels.V_NOT_DISCRETE: TAGS[2]}.get(v, TAGS[3])
                         for v in verdicts], dtype=object)
        for rec in self.centers_:
            tags[np.abs(cs - rec.c) <= self.center_radius] = TAGS[1]
        return tags.astype(str)
