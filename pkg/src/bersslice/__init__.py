"""Holonomy of projective structures on the square punctured torus.

Traces of the monodromy of u'' + q_c u / 2 = 0 with q_c = wp / 2 + c, a
Bowditch-style discreteness search on the Farey tree, and a raster of the
c-plane marking quasifuchsian points and Fuchsian centers.
"""

from .character import CharacterTriple, classify_real_point, commutator_trace, evaluate_character, fourth_trace, \
    word_list
from .discreteness import Slope, bq_test, enumerate_weighted_curves, simple_trace, trace_flip
from .elliptic import BasisDifferential, LatticeSpec, SlicePoint, eisenstein_invariants, quad_diff_eval, wp, wp_prime
from .estimator import CharacterTransformer, SliceClassifier
from .holonomy import LoopPath, character_at, cr_residual, holonomy, integrate_transfer
from .moebius import Mat2C, classify, compose, length_from_trace, translation_length
from .scan import RasterConfig, attribute_centers, center_length_series, classify_point, find_centers, raster

__version__ = "0.1.0"

__all__ = [
    "BasisDifferential", "CharacterTransformer", "CharacterTriple", "LatticeSpec", "LoopPath", "Mat2C",
    "RasterConfig", "SliceClassifier", "SlicePoint", "Slope", "attribute_centers", "bq_test",
    "center_length_series", "character_at", "classify", "classify_point", "classify_real_point",
    "commutator_trace", "compose", "cr_residual", "eisenstein_invariants", "enumerate_weighted_curves",
    "evaluate_character", "find_centers", "fourth_trace", "holonomy", "integrate_transfer", "length_from_trace",
    "quad_diff_eval", "raster", "simple_trace", "trace_flip", "translation_length", "word_list", "wp", "wp_prime",
]
