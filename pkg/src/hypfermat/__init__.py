"""Exact Frobenius traces of rank-2 hypergeometric motives and related identities."""
from .cyclotomic import CyclotomicInteger, CyclotomicFraction
from .finite_char import build_ctx, get_ctx, gauss_sum, jacobi_sum, jacobi_motive
from .hgm_core import (HgmParameter, make_parameter, symmetry_group, monodromy,
                       monodromy_order, finite_hyp_value, finite_hyp_trace, motive_trace)

__version__ = "0.1.0"

__all__ = [
    "CyclotomicInteger", "CyclotomicFraction", "build_ctx", "get_ctx", "gauss_sum",
    "jacobi_sum", "jacobi_motive", "HgmParameter", "make_parameter", "symmetry_group",
    "monodromy", "monodromy_order", "finite_hyp_value", "finite_hyp_trace", "motive_trace",
]
