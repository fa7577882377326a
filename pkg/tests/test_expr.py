import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chi_spt.errors import ExprSyntaxError, NonFiniteError, UnknownIdentifierError
from chi_spt.model.expr import (
    BinOp, Call, Neg, Num, Var, compile_vector, evaluate, parse_expr, to_source,
)

DIMS = {"x": 2, "z": 2, "w": 2}


def test_precedence_and_unary_minus():
    node = parse_expr("1 + 2*x1 - -z2/w1", DIMS)
    assert node == BinOp(
        "-",
        BinOp("+", Num(1.0), BinOp("*", Num(2.0), Var("x", 1))),
        BinOp("/", Neg(Var("z", 2)), Var("w", 1)),
    )


def test_left_associativity():
    assert parse_expr("8 / 4 / 2", {}) == BinOp("/", BinOp("/", Num(8.0), Num(4.0)), Num(2.0))
    assert evaluate(parse_expr("8 / 4 / 2", {}), {}) == 1.0


@pytest.mark.parametrize("text,value", [
    ("sat(3)", 1.0), ("sat(-3)", -1.0), ("sat(0.25)", 0.25),
    ("min(3, 1, 2)", 1.0), ("max(-1, -2)", -1.0), ("abs(-2.5)", 2.5),
    ("exp(0)", 1.0), ("cos(0)", 1.0), ("1.5e2", 150.0), (".5", 0.5),
])
def test_functions_and_literals(text, value):
    assert evaluate(parse_expr(text, {}), {}) == value


def test_dangling_operator_is_syntax_error():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("z1 +", {"z": 1}, line=3, col_offset=5)
    assert info.value.line == 3
    assert info.value.column == 5 + 4 + 1


def test_out_of_range_variable():
    with pytest.raises(UnknownIdentifierError, match="z2"):
        parse_expr("z1 + z2", {"z": 1})


def test_family_not_in_scope():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("x1", {"w": 1})


@pytest.mark.parametrize("text", ["foo(1)", "y1", "x0", "pi"])
def test_unknown_identifiers(text):
    with pytest.raises(UnknownIdentifierError):
        parse_expr(text, DIMS)


@pytest.mark.parametrize("text", ["(1 + 2", "1 2", "sin()", "sin(1, 2)", "min(1)", "1 $ 2", "*3", ""])
def test_malformed(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text, DIMS)


def test_division_by_zero_is_non_finite():
    node = parse_expr("1 / z1", {"z": 1})
    with pytest.raises(NonFiniteError):
        evaluate(node, {"z": [0.0]})
    fn = compile_vector([node], ("z",))
    with pytest.raises(ZeroDivisionError):
        fn([0.0])


# --- property tests ------------------------------------------------------------

numbers = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
leaves = st.one_of(
    numbers.map(Num),
    st.builds(Var, st.sampled_from("xzw"), st.integers(1, 2)),
)


def _extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Neg, children),
        st.builds(lambda a: Call("tanh", (a,)), children),
        st.builds(lambda a: Call("sat", (a,)), children),
        st.builds(lambda a, b: Call("max", (a, b)), children, children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
def test_print_parse_round_trip(tree):
    assert parse_expr(to_source(tree), DIMS) == tree


@given(trees, st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_compiled_matches_interpreter_bitwise(tree, vals):
    env = {"x": vals[0:2], "z": vals[2:4], "w": vals[4:6]}
    try:
        ref = evaluate(tree, env)
    except NonFiniteError:
        return
    fn = compile_vector([tree], ("x", "z", "w"))
    assert fn(env["x"], env["z"], env["w"])[0] == ref


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_matches_hand_coded(x, z, w):
    node = parse_expr("0.5*tanh(z1) + 0.25*x1 + w1 - sat(x1*z1)", {"x": 1, "z": 1, "w": 1})
    expected = 0.5 * math.tanh(z) + 0.25 * x + w - max(-1.0, min(1.0, x * z))
    got = evaluate(node, {"x": [x], "z": [z], "w": [w]})
    assert got == pytest.approx(expected, rel=1e-15, abs=1e-15)
