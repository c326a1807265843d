"""Feature-model configuration, recommendation and diagnosis.

Models are passed as DSL text, tables as CSV text. Requirements may be a
dict or a sequence of (feature, value) pairs; order matters for diagnosis.
"""

from . import _fmrec
from ._fmrec import (
    DataError,
    FmrecError,
    InconsistentBackground,
    InvalidArgument,
    ParseError,
    UnknownName,
    binarize,
    loss_gradient,
    overall_utility,
    predict,
    rank,
    rank_similarity,
    recommend_next,
    recommend_value,
    regularized_loss,
    rmse,
    train,
    translate,
    variables,
)

__all__ = [
    "DataError", "FmrecError", "InconsistentBackground", "InvalidArgument", "ParseError", "UnknownName",
    "binarize", "diagnose", "enumerate", "loss_gradient", "overall_utility", "predict", "propagate", "rank",
    "rank_similarity", "recommend_next", "recommend_value", "regularized_loss", "repairs", "rmse", "solve",
    "train", "translate", "variables",
]


def _pairs(require):
    if require is None:
        return []
    items = require.items() if hasattr(require, "items") else require
    return [(str(f), bool(v)) for f, v in items]


def enumerate(model, require=None, limit=10000):
    return _fmrec.enumerate(model, _pairs(require), limit)


def solve(model, require=None, scores=None):
    """One configuration (1-first, or by preference scores), or None."""
    return _fmrec.solve(model, _pairs(require), dict(scores or {}))


def propagate(model, partial):
    return _fmrec.propagate(model, _pairs(partial))


def diagnose(model, require):
    return _fmrec.diagnose(model, _pairs(require))


def repairs(model, require, utilities_csv="", profile_csv=""):
    return _fmrec.repairs(model, _pairs(require), utilities_csv, profile_csv)
