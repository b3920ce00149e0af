"""Expression trees for parameter-dependent constraint data.

Grammar (standard precedence, unary minus binds tightest)::

    expr := number | "p"INT | expr "+" expr | expr "-" expr | expr "*" expr
          | "-" expr | "abs(" expr ")" | "min(" expr "," expr ")"
          | "max(" expr "," expr ")" | "(" expr ")"

Only operations that keep an expression locally Lipschitz in ``p`` are
available, so every parsed scenario satisfies the standing regularity
assumption by construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Union

from .errors import ExprError


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Param:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * min max
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Param, Neg, Abs, BinOp]

_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "min": min,
    "max": max,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<param>p\d+)|(?P<func>abs|min|max)\s*\(|(?P<op>[-+*(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprError(f"unexpected input at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, d: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.d = d
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value: str | None = None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ExprError(f"expected {value or 'token'} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.additive()
        if self.i != len(self.toks):
            raise ExprError(f"trailing input in {self.text!r}")
        return e

    def additive(self) -> Expr:
        e = self.multiplicative()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            e = BinOp(op, e, self.multiplicative())
        return e

    def multiplicative(self) -> Expr:
        e = self.unary()
        while self.peek()[1] == "*":
            self.take()
            e = BinOp("*", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            arg = self.unary()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        return self.atom()

    def atom(self) -> Expr:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Const(float(val))
        if kind == "param":
            self.take()
            j = int(val[1:])
            if self.d is not None and j >= self.d:
                raise ExprError(f"parameter index {val} out of range for d={self.d}")
            return Param(j)
        if kind == "func":
            self.take()
            name = val.split("(")[0].strip()
            first = self.additive()
            if name == "abs":
                self.take(")")
                return Abs(first)
            self.take(",")
            second = self.additive()
            self.take(")")
            return BinOp(name, first, second)
        if val == "(":
            self.take()
            e = self.additive()
            self.take(")")
            return e
        raise ExprError(f"unexpected token {val!r} in {self.text!r}")


def parse_expr(text: str, d: int | None = None) -> Expr:
    if not isinstance(text, str):
        raise ExprError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text, d).parse()


def _fmt_number(x: float) -> str:
    s = format(Decimal(repr(float(x))), "f")
    return s


def to_string(e: Expr) -> str:
    """Fully parenthesised rendering; ``parse_expr(to_string(e)) == e``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Param):
        return f"p{e.index}"
    if isinstance(e, Neg):
        return f"-({to_string(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_string(e.arg)})"
    if e.op in ("min", "max"):
        return f"{e.op}({to_string(e.left)}, {to_string(e.right)})"
    return f"({to_string(e.left)} {e.op} {to_string(e.right)})"


def max_param(e: Expr) -> int:
    """Largest parameter index used, -1 for parameter-free expressions."""
    if isinstance(e, Param):
        return e.index
    if isinstance(e, Const):
        return -1
    if isinstance(e, (Neg, Abs)):
        return max_param(e.arg)
    return max(max_param(e.left), max_param(e.right))


def compile_expr(e: Expr) -> Callable[[tuple], float]:
    """Turn a tree into a closure over the parameter tuple."""
    if isinstance(e, Const):
        v = e.value
        return lambda p: v
    if isinstance(e, Param):
        j = e.index
        return lambda p: p[j]
    if isinstance(e, Neg):
        f = compile_expr(e.arg)
        return lambda p: -f(p)
    if isinstance(e, Abs):
        f = compile_expr(e.arg)
        return lambda p: abs(f(p))
    op = _BINARY[e.op]
    fl, fr = compile_expr(e.left), compile_expr(e.right)
    return lambda p: op(fl(p), fr(p))


def evaluate(e: Expr, p) -> float:
    return float(compile_expr(e)(tuple(float(t) for t in p)))
