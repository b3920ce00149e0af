import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyproj.errors import ExprError
from polyproj.expr import Abs, BinOp, Const, Neg, Param, evaluate, max_param, parse_expr, to_string


def test_precedence():
    assert evaluate(parse_expr("1 + 2 * 3"), ()) == 7
    assert evaluate(parse_expr("-2 * 3 + 1"), ()) == -5
    assert evaluate(parse_expr("(1 + 2) * 3"), ()) == 9
    assert evaluate(parse_expr("1 - 2 - 3"), ()) == -4
    assert evaluate(parse_expr("--1"), ()) == 1


def test_functions_and_params():
    e = parse_expr("abs(p0) + min(p1, 0) - max(p0, p1)", 2)
    assert evaluate(e, (-2.0, 1.0)) == 2 + 0 - 1
    assert max_param(e) == 1


def test_unary_binds_tighter_than_mul():
    assert parse_expr("-p0*p1", 2) == BinOp("*", Neg(Param(0)), Param(1))


@pytest.mark.parametrize("bad", ["1 +", "p", "abs 1", "min(1)", "1e3", "x0", "(1", "1 2", ""])
def test_bad_grammar(bad):
    with pytest.raises(ExprError):
        parse_expr(bad)


def test_param_out_of_range():
    with pytest.raises(ExprError):
        parse_expr("p1", 1)


def test_non_string():
    with pytest.raises(ExprError):
        parse_expr(3)


numbers = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).map(lambda x: Const(round(x, 6)))
leaves = numbers | st.integers(0, 2).map(Param)
trees = st.recursive(
    leaves,
    lambda sub: st.one_of(
        sub.map(Neg), sub.map(Abs),
        st.tuples(st.sampled_from(["+", "-", "*", "min", "max"]), sub, sub).map(lambda t: BinOp(*t)),
    ),
    max_leaves=12,
)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_round_trip(e):
    back = parse_expr(to_string(e), 3)
    # negative constants under Neg fold differently, so compare by value and by re-rendering
    assert to_string(back) == to_string(parse_expr(to_string(back), 3))
    for p in [(0.5, -1.0, 2.0), (-3.0, 0.0, 1.25)]:
        a, b = evaluate(e, p), evaluate(back, p)
        assert a == b or (a != a and b != b)


def test_round_trip_exact_on_parsed_trees():
    for text in ["p0*(1 - p0) - p1*p1", "min(p0, 0)", "-(p0 + 1)", "abs(-2.5)", "0.1 + 1"]:
        e = parse_expr(text, 2)
        assert parse_expr(to_string(e), 2) == e
