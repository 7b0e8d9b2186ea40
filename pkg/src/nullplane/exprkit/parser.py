"""Recursive-descent parser for the coordinate expression grammar.

Grammar (EBNF, also documented in the README):

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom { "^" exponent } ;
    exponent = [ "-" ] INT | "(" [ "-" ] INT ")" ;
    atom     = NUMBER | COORD | FUNC "(" expr ")" | "(" expr ")" ;
    COORD    = "u" | "v" | "x" | "y" ;
    FUNC     = "exp" | "ln" | "sin" | "cos" | "sinh" | "cosh" ;

All binary operators are left-associative; precedence is
^  >  unary -  >  * /  >  + -.  Division by the literal zero is rejected
at parse time.  The unicode operators − × ÷ are accepted as aliases.
"""

from __future__ import annotations

import re

from ..errors import ExprSyntaxError, UnknownIdentifier
from .ast import COORDS, FUNCTIONS, BinOp, Call, Expr, Neg, Num, Pow, Var

_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

_UNICODE_OPS = str.maketrans({"−": "-", "×": "*", "÷": "/"})


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", m.group(), pos))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group(), pos))
        else:
            tokens.append((m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _is_literal_zero(e: Expr) -> bool:
    while isinstance(e, Neg):
        e = e.arg
    return isinstance(e, Num) and e.value == 0.0


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {what}", tok[2])
        return tok

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.advance()
            rhs = self.parse_unary()
            if op == "/" and _is_literal_zero(rhs):
                raise ExprSyntaxError("division by literal zero", pos)
            node = BinOp(op, node, rhs)
        return node

    def parse_unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        node = self.parse_atom()
        while self.peek()[0] == "^":
            self.advance()
            node = Pow(node, self.parse_exponent())
        return node

    def parse_exponent(self) -> int:
        wrapped = False
        if self.peek()[0] == "(":
            self.advance()
            wrapped = True
        sign = 1
        if self.peek()[0] == "-":
            self.advance()
            sign = -1
        kind, text, pos = self.advance()
        if kind != "num" or not re.fullmatch(r"\d+", text):
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        if wrapped:
            self.expect(")", "')' after exponent")
        return sign * int(text)

    def parse_atom(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[0] == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {text!r}", pos)
                self.advance()
                arg = self.parse_expr()
                self.expect(")", "')' closing function argument")
                return Call(text, arg)
            if text not in COORDS:
                raise UnknownIdentifier(f"unknown identifier {text!r}", pos)
            return Var(text)
        if kind == "(":
            node = self.parse_expr()
            self.expect(")", "closing ')'")
            return node
        raise ExprSyntaxError("expected a number, coordinate, or '('", pos)


def parse_expr(text: str) -> Expr:
    """Parse expression text; raises ExprSyntaxError / UnknownIdentifier."""
    if not isinstance(text, str):
        raise TypeError("expression source must be a string")
    if not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(text.translate(_UNICODE_OPS)))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise ExprSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
    return node
