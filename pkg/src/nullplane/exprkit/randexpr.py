"""Seeded random expression generator for oracle corpora."""

from __future__ import annotations

import numpy as np

from .ast import COORDS, BinOp, Call, Expr, Neg, Num, Pow, Var

_FUNCS = ("exp", "ln", "sin", "cos", "sinh", "cosh")


def random_expr(rng: np.random.Generator, depth: int = 5) -> Expr:
    """Random tree of depth <= depth; numerically tame on [0.5, 1.5]^4 most
    of the time (callers reject the rest by evaluating)."""
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Var(COORDS[rng.integers(4)])
        return Num(round(float(rng.uniform(-2.0, 2.0)), 2))
    kind = rng.random()
    if kind < 0.30:
        return BinOp("+", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if kind < 0.45:
        return BinOp("-", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if kind < 0.70:
        return BinOp("*", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if kind < 0.78:
        return BinOp("/", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if kind < 0.86:
        return Pow(random_expr(rng, depth - 1), int(rng.choice([-2, -1, 2, 3])))
    if kind < 0.93:
        return Neg(random_expr(rng, depth - 1))
    return Call(_FUNCS[rng.integers(len(_FUNCS))], random_expr(rng, depth - 1))
