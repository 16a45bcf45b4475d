from __future__ import annotations

import math
import operator
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasieinstein import expr
from quasieinstein.expr import Binary, Const, Symbol, Unary


@pytest.mark.parametrize(
    "text, symbols",
    [
        ("sin(u1)*2 + c", {"u1", "c"}),
        ("1/(R + r*cos(u2))", {"R", "r", "u2"}),
        ("pi * e", set()),
        ("pow(a, b)", {"a", "b"}),
    ],
)
def test_free_symbols(text, symbols):
    assert expr.free_symbols(expr.parse(text)) == symbols


@pytest.mark.parametrize(
    "text, offset",
    [("sin(", 4), ("2u1", 1), ("1 +", 3), ("(1", 2), ("1)", 1), ("", 0)],
)
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(expr.ParseError) as info:
        expr.parse(text)
    assert info.value.offset == offset


def test_unknown_function():
    with pytest.raises(expr.ParseError, match="unknown function"):
        expr.parse("sinh(u1)")


@pytest.mark.parametrize(
    "text, bindings, value",
    [
        ("sin(pi/2)", {}, 1.0),
        ("(R + r*cos(u2))^2", {"R": 2, "r": 1, "u2": 0}, 9.0),
        ("-2^2", {}, -4.0),
        ("2^3^2", {}, 512.0),
        ("a - b - c", {"a": 1, "b": 2, "c": 3}, -4.0),
        ("8 / 4 / 2", {}, 1.0),
        ("pow(2, -1)", {}, 0.5),
        ("abs(-3) + sqrt(4) + exp(0) + log(e) + tan(0)", {}, 7.0),
    ],
)
def test_evaluate(text, bindings, value):
    assert expr.evaluate(expr.parse(text), bindings) == value


@pytest.mark.parametrize(
    "text, bindings",
    [
        ("log(u1)", {"u1": -1.0}),
        ("1/(u1 - 1)", {"u1": 1.0}),
        ("sqrt(u1)", {"u1": -4.0}),
        ("u1^0.5", {"u1": -4.0}),
        ("0^(-1)", {}),
        ("exp(u1)", {"u1": 1e4}),
    ],
)
def test_domain_errors(text, bindings):
    with pytest.raises(expr.DomainError) as info:
        expr.evaluate(expr.parse(text), bindings)
    assert info.value.subexpr is not None


def test_unbound_symbol():
    with pytest.raises(expr.UnboundSymbolError, match="r"):
        expr.evaluate(expr.parse("R + r"), {"R": 1.0})


def test_array_bindings_broadcast():
    u = np.linspace(0, 1, 5)
    out = expr.evaluate(expr.parse("2*u1 + c"), {"u1": u, "c": 1.0})
    np.testing.assert_array_equal(out, 2 * u + 1)


def test_domain_error_on_any_node():
    u = np.array([1.0, 0.0])
    with pytest.raises(expr.DomainError):
        expr.evaluate(expr.parse("log(u1)"), {"u1": u})


# ---------------------------------------------------------------- properties

NAMES = ("a", "b", "c", "u1")
leaves = st.one_of(
    st.sampled_from(NAMES).map(Symbol),
    st.floats(0, 100, allow_nan=False).map(lambda v: Const(float(v))),
    st.sampled_from(["pi", "e"]).map(lambda k: Const(expr.CONSTANTS[k], k)),
)
trees = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.tuples(st.sampled_from(["neg", "sin", "cos", "exp", "abs"]), sub).map(lambda t: Unary(*t)),
        st.tuples(st.sampled_from(list("+-*/^")), sub, sub).map(lambda t: Binary(*t)),
    ),
    max_leaves=12,
)


@given(trees)
@settings(max_examples=300, deadline=None)
def test_pretty_round_trip(tree):
    text = expr.pretty(tree)
    again = expr.parse(text)
    assert expr.pretty(again) == text
    assert expr.free_symbols(again) == expr.free_symbols(tree)


BINOPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


def _shunting_yard(text: str, env: dict) -> float:
    """Reference evaluator for + - * / over names and numbers."""
    prec = {"+": 1, "-": 1, "*": 2, "/": 2}
    out, ops = [], []
    for tok in re.findall(r"[A-Za-z_]\w*|\d+\.?\d*|[-+*/()]", text):
        if tok in prec:
            while ops and ops[-1] in prec and prec[ops[-1]] >= prec[tok]:
                out.append(ops.pop())
            ops.append(tok)
        elif tok == "(":
            ops.append(tok)
        elif tok == ")":
            while ops[-1] != "(":
                out.append(ops.pop())
            ops.pop()
        else:
            out.append(tok)
    out.extend(reversed(ops))
    stack = []
    for tok in out:
        if tok in prec:
            y, x = stack.pop(), stack.pop()
            stack.append(BINOPS[tok](x, y))
        else:
            stack.append(env[tok] if tok in env else float(tok))
    return stack[0]


binding = st.floats(0.25, 4.0, allow_nan=False)


@given(binding, binding, binding)
@settings(max_examples=100, deadline=None)
def test_precedence_matches_shunting_yard(a, b, c):
    env = {"a": a, "b": b, "c": c}
    for text in ("a+b*c", "a-b/c", "a*b-c", "a/b/c", "a-b-c", "(a+b)*c", "a*(b-c)/a"):
        got = expr.evaluate(expr.parse(text), env)
        ref = _shunting_yard(text, env)
        assert got == ref, text
    assert expr.evaluate(expr.parse("a+b*c"), env) == a + (b * c)


@given(trees, st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_evaluation_total_or_domain_error(tree, a, u1):
    env = {"a": a, "b": 0.5, "c": 2.0, "u1": u1}
    try:
        v = expr.evaluate(tree, env)
    except expr.DomainError:
        return
    assert math.isfinite(v)
    assert expr.evaluate(tree, env) == v
