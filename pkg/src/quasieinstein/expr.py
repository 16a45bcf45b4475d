"""Closed-form scalar expressions for declarative metric and field input.

A small recursive-descent parser producing an immutable tree, a printer that
emits the minimal parenthesization, and an evaluator that works on floats or
numpy arrays (one value per grid node).

Precedence, loosest first: ``+ -``, ``* /``, unary minus, ``^`` (right
associative). ``pow(x, y)`` is accepted as a spelling of ``x ^ y``.
Implicit multiplication is rejected.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


class ExprError(ValueError):
    """Base class for parse and evaluation failures."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnboundSymbolError(ExprError):
    pass


class DomainError(ExprError):
    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in '{pretty(subexpr)}'")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Const:
    value: float
    name: str | None = None


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Symbol, Unary, Binary]


def free_symbols(e: Expr) -> frozenset[str]:
    if isinstance(e, Symbol):
        return frozenset([e.name])
    if isinstance(e, Unary):
        return free_symbols(e.arg)
    if isinstance(e, Binary):
        return free_symbols(e.left) | free_symbols(e.right)
    return frozenset()


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", _byte_offset(text, bad), text)
        kind = m.lastgroup
        if kind is None:  # trailing whitespace only
            break
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, _byte_offset(self.text, tok[2]), self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[0] == "eof":
            raise self.error(f"expected {value!r} but input ended")
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1]!r}")
        return self.advance()

    def parse(self) -> Expr:
        if self.peek()[0] == "eof":
            raise self.error("empty expression")
        e = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise self.error(f"unexpected token {tok[1]!r}")
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            left = Binary(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            left = Binary(op, left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Unary("neg", self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        tok = self.advance()
        kind, value, _ = tok
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.advance()
                return self.call(value, tok)
            if value in FUNCTIONS or value == "pow":
                raise self.error(f"function {value!r} needs an argument list", tok)
            if value in CONSTANTS:
                return Const(CONSTANTS[value], value)
            return Symbol(value)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "eof":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected token {value!r}", tok)

    def call(self, name, tok):
        if name == "pow":
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Binary("^", a, b)
        if name not in FUNCTIONS:
            raise self.error(f"unknown function {name!r}", tok)
        arg = self.expr()
        self.expect(")")
        return Unary(name, arg)


def parse(text: str) -> Expr:
    """Parse one infix expression. Raises :class:`ParseError` with a byte offset."""
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing

def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["neg"]
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _PREC["neg"]
    return _ATOM


def _fmt_const(c: Const) -> str:
    if c.name is not None:
        return c.name
    text = repr(float(c.value))
    return text[:-2] if text.endswith(".0") else text


def pretty(e: Expr) -> str:
    """Print with the fewest parentheses that still reparse to the same tree."""
    if isinstance(e, Const):
        return _fmt_const(e)
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = pretty(e.arg)
            if _prec(e.arg) < _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({pretty(e.arg)})"
    p = _PREC[e.op]
    left, right = pretty(e.left), pretty(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < _PREC["neg"]:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left}{e.op}{right}"


# --------------------------------------------------------------------------
# evaluation

Number = Union[float, np.ndarray]


def evaluate(e: Expr, bindings: Mapping[str, Number]) -> Number:
    """Evaluate ``e``; array bindings broadcast. Any NaN or inf is an error."""
    missing = sorted(free_symbols(e) - set(bindings))
    if missing:
        raise UnboundSymbolError(f"unbound symbol(s): {', '.join(missing)}")
    with np.errstate(all="ignore"):
        out = _eval(e, bindings)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def _finite(value, e):
    if not np.all(np.isfinite(value)):
        raise DomainError("non-finite result", e)
    return value


def _eval(e: Expr, b):
    if isinstance(e, Const):
        return np.float64(e.value)
    if isinstance(e, Symbol):
        return np.asarray(b[e.name], dtype=float) if np.ndim(b[e.name]) else np.float64(b[e.name])
    if isinstance(e, Unary):
        x = _eval(e.arg, b)
        if e.op == "neg":
            return -x
        if e.op == "log" and np.any(x <= 0):
            raise DomainError("log of non-positive value", e)
        if e.op == "sqrt" and np.any(x < 0):
            raise DomainError("sqrt of negative value", e)
        return _finite(FUNCTIONS[e.op](x), e)
    x = _eval(e.left, b)
    y = _eval(e.right, b)
    if e.op == "+":
        return _finite(x + y, e)
    if e.op == "-":
        return _finite(x - y, e)
    if e.op == "*":
        return _finite(x * y, e)
    if e.op == "/":
        if np.any(y == 0):
            raise DomainError("division by zero", e)
        return _finite(x / y, e)
    if np.any((x < 0) & (np.asarray(y) != np.round(y))):
        raise DomainError("negative base with non-integer exponent", e)
    if np.any((x == 0) & (np.asarray(y) < 0)):
        raise DomainError("zero raised to a negative power", e)
    return _finite(np.power(x, y), e)


__all__ = [
    "Binary",
    "Const",
    "DomainError",
    "Expr",
    "ExprError",
    "ParseError",
    "Symbol",
    "UnboundSymbolError",
    "Unary",
    "evaluate",
    "free_symbols",
    "parse",
    "pretty",
]
