"""Exact jet-space symbolic algebra: expressions, parsing, total derivatives."""

from .expr import (DEFAULT_JET_ORDER, ExprError, JetExpr, OrderBoundError,
                   SumDenominatorError, clear_denominators, cos_k, exp_k,
                   is_zero, jv, mk_var, normalize, num, op_f, op_phi1,
                   op_vphi, sin_k, var_name)
from .parse import ExprSyntaxError, parse_expr, render
from .calculus import PDESpec, ProlongationError, diff_wrt, total_dt, total_dx

__all__ = [
    "DEFAULT_JET_ORDER", "ExprError", "JetExpr", "OrderBoundError",
    "SumDenominatorError", "clear_denominators", "cos_k", "exp_k", "is_zero",
    "jv", "mk_var", "normalize", "num", "op_f", "op_phi1", "op_vphi", "sin_k",
    "var_name", "ExprSyntaxError", "parse_expr", "render", "PDESpec",
    "ProlongationError", "diff_wrt", "total_dt", "total_dx",
]
