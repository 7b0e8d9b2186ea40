"""Expression trees over the four coordinates (u, v, x, y).

Nodes are immutable; ``==`` is structural. Arithmetic operators on nodes
build new trees, so metric components can be written directly in Python:

    >>> a = u**2 + 2 * x * v
    >>> str(a)
    'u^2 + 2 * x * v'

Exponents are Python ints only. ``to_string`` emits text that reparses to
an equivalent tree (and to a structurally identical one for parser output).
"""

from __future__ import annotations

from dataclasses import dataclass

COORDS = ("u", "v", "x", "y")
FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh")


def as_expr(value) -> "Expr":
    """Coerce a Python number to a literal node; pass expressions through."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Num(float(value))
    raise TypeError(f"cannot treat {type(value).__name__} as an expression")


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other):
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other):
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other):
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other):
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other):
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return BinOp("/", as_expr(other), self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("exponents must be Python ints")
        return Pow(self, n)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in COORDS:
            raise ValueError(f"unknown coordinate {self.name!r}")


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str  # one of + - * /
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


u, v, x, y = Var("u"), Var("v"), Var("x"), Var("y")

ZERO = Num(0.0)
ONE = Num(1.0)

_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(e: Expr) -> int:
    if isinstance(e, Num):
        # negative literals print with a leading '-', bind like a unary minus
        return _NEG_PREC if e.value < 0 else _ATOM_PREC
    if isinstance(e, (Var, Call)):
        return _ATOM_PREC
    if isinstance(e, Pow):
        return _POW_PREC
    if isinstance(e, Neg):
        return _NEG_PREC
    return _BIN_PREC[e.op]


def _fmt_num(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(e: Expr) -> str:
    """Render with the fewest parentheses that preserve the parse."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        if _prec(e.arg) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < _POW_PREC:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    lhs, rhs = to_string(e.lhs), to_string(e.rhs)
    prec = _BIN_PREC[e.op]
    if _prec(e.lhs) < prec:
        lhs = f"({lhs})"
    # right operand: parenthesize on ties (operators are left-associative)
    # and around unary minus for readability
    if _prec(e.rhs) <= prec or isinstance(e.rhs, Neg) or _prec(e.rhs) == _NEG_PREC:
        rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}"
