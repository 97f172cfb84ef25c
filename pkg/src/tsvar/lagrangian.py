"""Parsing, symbolic differentiation and evaluation of integrand expressions.

Expressions are built over the variables t, y, v with + - * / ^, unary minus
and the functions sin, cos, exp, log, sqrt. Grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | var | func '(' expr ')' | '(' expr ')' | '-' base

'^' is right associative. A power with a non-constant exponent is rewritten
through exp/log at parse time so symbolic derivatives stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .errors import (
    EvaluationError,
    ExpressionSyntaxError,
    ParameterError,
    UnknownIdentifierError,
)

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expr",
    "parse", "differentiate", "evaluate", "evaluate_array", "to_text",
    "Lagrangian",
]

VARIABLES = ("t", "y", "v")
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}

_NUMPY = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}


# -- tokenizer ---------------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r} at offset {i}",
                                    offset=i)
    tokens.append(("end", "", n))
    return tokens


# -- folding constructors ------------------------------------------------------

def _neg(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


_APPLY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
}


def _make(op: str, left: Expr, right: Expr) -> Expr:
    lv = left.value if isinstance(left, Num) else None
    rv = right.value if isinstance(right, Num) else None
    if lv is not None and rv is not None:
        try:
            folded = _APPLY[op](lv, rv)
        except ZeroDivisionError:
            folded = math.nan
        if math.isfinite(folded):
            return Num(folded)
    if op == "+":
        if lv == 0.0:
            return right
        if rv == 0.0:
            return left
    elif op == "-":
        if rv == 0.0:
            return left
        if lv == 0.0:
            return _neg(right)
    elif op == "*":
        if lv == 0.0 or rv == 0.0:
            return Num(0.0)
        if lv == 1.0:
            return right
        if rv == 1.0:
            return left
    elif op == "/":
        if lv == 0.0:
            return Num(0.0)
        if rv == 1.0:
            return left
    return BinOp(op, left, right)


def _call(func: str, arg: Expr) -> Expr:
    if isinstance(arg, Num):
        try:
            folded = _MATH[func](arg.value)
        except (ValueError, OverflowError):
            folded = math.nan
        if math.isfinite(folded):
            return Num(folded)
    return Call(func, arg)


def _pow(base: Expr, exponent: Expr) -> Expr:
    if isinstance(exponent, Num):
        c = exponent.value
        if isinstance(base, Num):
            try:
                folded = math.pow(base.value, c)
            except (ValueError, OverflowError):
                folded = math.nan
            if math.isfinite(folded):
                return Num(folded)
        if c == 1.0:
            return base
        if c == 0.0:
            return Num(1.0)
        return BinOp("^", base, exponent)
    # variable exponent: rewrite b^e as exp(e * log(b))
    return _call("exp", _make("*", exponent, _call("log", base)))


# -- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            found = repr(tok[1]) if tok[0] != "end" else "end of input"
            raise ExpressionSyntaxError(
                f"expected {what}, found {found} at offset {tok[2]}", offset=tok[2])
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExpressionSyntaxError(
                f"unexpected trailing input {tok[1]!r} at offset {tok[2]}",
                offset=tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            e = _make(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            e = _make(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[0] == "^":
            self.take()
            return _pow(b, self.factor())
        return b

    def base(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "name":
            self.take()
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(", "'(' after function name")
                arg = self.expr()
                self.expect(")", "')'")
                return _call(text, arg)
            raise UnknownIdentifierError(
                f"unknown identifier {text!r} at offset {offset}", offset=offset)
        if kind == "(":
            self.take()
            e = self.expr()
            self.expect(")", "')'")
            return e
        if kind == "-":
            self.take()
            return _neg(self.base())
        found = repr(text) if kind != "end" else "end of input"
        raise ExpressionSyntaxError(
            f"expected a number, variable, function or '(', found {found} "
            f"at offset {offset}", offset=offset)


def parse(text: str) -> Expr:
    """Parse expression text into a syntax tree."""
    return _Parser(text).parse()


# -- differentiation --------------------------------------------------------------

def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative with constant folding of literal subtrees."""
    if var not in VARIABLES:
        raise ParameterError(f"cannot differentiate with respect to {var!r}")
    return _d(e, var)


def _d(e: Expr, var: str) -> Expr:
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return _neg(_d(e.arg, var))
    if isinstance(e, Call):
        da = _d(e.arg, var)
        if e.func == "sin":
            return _make("*", _call("cos", e.arg), da)
        if e.func == "cos":
            return _make("*", _neg(_call("sin", e.arg)), da)
        if e.func == "exp":
            return _make("*", _call("exp", e.arg), da)
        if e.func == "log":
            return _make("/", da, e.arg)
        if e.func == "sqrt":
            return _make("/", da, _make("*", Num(2.0), _call("sqrt", e.arg)))
        raise ParameterError(f"unknown function {e.func!r}")
    da, db = _d(e.left, var), _d(e.right, var)
    if e.op == "+":
        return _make("+", da, db)
    if e.op == "-":
        return _make("-", da, db)
    if e.op == "*":
        return _make("+", _make("*", da, e.right), _make("*", e.left, db))
    if e.op == "/":
        num = _make("-", _make("*", da, e.right), _make("*", e.left, db))
        return _make("/", num, _make("*", e.right, e.right))
    # '^' always has a constant exponent after parsing
    c = e.right.value  # type: ignore[union-attr]
    return _make("*", _make("*", Num(c), _pow(e.left, Num(c - 1.0))), da)


# -- evaluation ---------------------------------------------------------------------

def evaluate(e: Expr, t: float, y: float, v: float) -> float:
    """IEEE double evaluation; singular arguments raise EvaluationError."""
    try:
        return _ev(e, t, y, v)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(
            f"cannot evaluate expression at t={t!r}, y={y!r}, v={v!r}: {exc}",
            t=t, y=y, v=v) from exc


def _ev(e: Expr, t: float, y: float, v: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return t if e.name == "t" else (y if e.name == "y" else v)
    if isinstance(e, Neg):
        return -_ev(e.arg, t, y, v)
    if isinstance(e, Call):
        return _MATH[e.func](_ev(e.arg, t, y, v))
    lv = _ev(e.left, t, y, v)
    rv = _ev(e.right, t, y, v)
    if e.op == "+":
        return lv + rv
    if e.op == "-":
        return lv - rv
    if e.op == "*":
        return lv * rv
    if e.op == "/":
        return lv / rv
    return math.pow(lv, rv)


def evaluate_array(e: Expr, t: Any, y: Any, v: Any) -> Any:
    """Vectorized numpy evaluation; singular points yield nan or inf silently."""
    with np.errstate(all="ignore"):
        return _ev_arr(e, t, y, v)


def _ev_arr(e: Expr, t: Any, y: Any, v: Any) -> Any:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return t if e.name == "t" else (y if e.name == "y" else v)
    if isinstance(e, Neg):
        return -_ev_arr(e.arg, t, y, v)
    if isinstance(e, Call):
        return _NUMPY[e.func](_ev_arr(e.arg, t, y, v))
    lv = _ev_arr(e.left, t, y, v)
    rv = _ev_arr(e.right, t, y, v)
    if e.op == "+":
        return lv + rv
    if e.op == "-":
        return lv - rv
    if e.op == "*":
        return lv * rv
    if e.op == "/":
        return np.divide(lv, rv)
    return np.power(lv, rv)


# -- printing ------------------------------------------------------------------------

def to_text(e: Expr) -> str:
    """Render a tree back to parseable text (fully parenthesized)."""
    if isinstance(e, Num):
        return f"{e.value:.17g}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    return f"({to_text(e.left)} {e.op} {to_text(e.right)})"


# -- Lagrangians ------------------------------------------------------------------------

@dataclass(frozen=True)
class Lagrangian:
    """An integrand L(t, y, v) with exact symbolic partials in y and v."""

    L: Expr
    dL_dy: Expr
    dL_dv: Expr

    @classmethod
    def from_expr(cls, L: Expr) -> "Lagrangian":
        return cls(L, differentiate(L, "y"), differentiate(L, "v"))

    @classmethod
    def from_text(cls, text: str) -> "Lagrangian":
        return cls.from_expr(parse(text))

    def value(self, t: float, y: float, v: float) -> float:
        return evaluate(self.L, t, y, v)

    def partial_y(self, t: float, y: float, v: float) -> float:
        return evaluate(self.dL_dy, t, y, v)

    def partial_v(self, t: float, y: float, v: float) -> float:
        return evaluate(self.dL_dv, t, y, v)
