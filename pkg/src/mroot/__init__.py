"""Exact symbolic and numeric engine for m-th root Finsler metrics."""
from .aexpr import AContext, AExpr, IndependenceError, VerdictMismatch
from .metric import (ConformalBetaChange, GeneralizedMRoot, MetricError, MRootMetric,
                     fundamental_tensor, identity_suite, screen)
from .metricfile import MetricFile, MetricFileError, parse_metric_file, parse_metric_text
from .polyalg import Derivation, Poly, RatFn, Ring
from .upsilon import UContext, UExpr
from .verdict import CheckVerdict

__all__ = [
    "AContext", "AExpr", "IndependenceError", "VerdictMismatch",
    "ConformalBetaChange", "GeneralizedMRoot", "MetricError", "MRootMetric",
    "fundamental_tensor", "identity_suite", "screen",
    "MetricFile", "MetricFileError", "parse_metric_file", "parse_metric_text",
    "Derivation", "Poly", "RatFn", "Ring", "UContext", "UExpr", "CheckVerdict",
]
__version__ = "0.1.0"
