"""Expression parsing, symbolic differentiation, and Taylor-jet arithmetic."""

from .ast import COORDS, FUNCTIONS, BinOp, Call, Expr, Neg, Num, Pow, Var, as_expr, to_string, u, v, x, y
from .calculus import antideriv_poly, depends_on, diff_expr, is_zero_expr
from .jets import Jet, as_points, eval_jet, eval_scalar, fd_derivative, monomials
from .parser import parse_expr
from .randexpr import random_expr

__all__ = [
    "COORDS",
    "FUNCTIONS",
    "BinOp",
    "Call",
    "Expr",
    "Jet",
    "Neg",
    "Num",
    "Pow",
    "Var",
    "antideriv_poly",
    "as_expr",
    "as_points",
    "depends_on",
    "diff_expr",
    "eval_jet",
    "eval_scalar",
    "fd_derivative",
    "is_zero_expr",
    "monomials",
    "parse_expr",
    "random_expr",
    "to_string",
    "u",
    "v",
    "x",
    "y",
]
