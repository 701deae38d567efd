"""Entropy, separation and detail computations for self-similar measures."""

from ._core import (
    BudgetExceeded,
    Ifs,
    InvalidInput,
    ParseError,
    PreconditionFailed,
    Unsupported,
    __version__,
    bernoulli_criterion,
    detail,
)

__all__ = [
    "BudgetExceeded",
    "Ifs",
    "InvalidInput",
    "ParseError",
    "PreconditionFailed",
    "Unsupported",
    "__version__",
    "bernoulli_criterion",
    "detail",
]
