"""Signature tail asymptotics of exponential rough paths.

Sparse truncated tensor algebra, free Lie algebra over Lyndon bases,
signature tail estimates, Lie-algebraic developments with eigenvalue lower
bounds, target polynomial systems, and Hilbert-Schmidt orthogonality checks.
"""

__version__ = "0.1.0"

from .tensor import (
    GradedTensor,
    GaussianRational,
    TermBudgetError,
    tensor_mul,
    truncated_exp,
    truncated_log,
    project,
    norm,
    hs_inner,
    hs_norm_sq,
    shuffle_mul,
    alpha_involution,
    l1_dual_witness,
)
from .lie import LiePoly, hall_basis, expand_bracket, dim_free_lie, dynkin_check, parse_lie

__all__ = [
    "GradedTensor",
    "GaussianRational",
    "TermBudgetError",
    "tensor_mul",
    "truncated_exp",
    "truncated_log",
    "project",
    "norm",
    "hs_inner",
    "hs_norm_sq",
    "shuffle_mul",
    "alpha_involution",
    "l1_dual_witness",
    "LiePoly",
    "hall_basis",
    "expand_bracket",
    "dim_free_lie",
    "dynkin_check",
    "parse_lie",
    "__version__",
]
