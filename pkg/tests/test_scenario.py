import json

import numpy as np
import pytest

from polyproj.builtins import NAMES, builtin, builtin_doc
from polyproj.errors import ExprError, NonFinite, SchemaError
from polyproj.expr import parse_expr
from polyproj.scenario import (
    instantiate, load_scenario, local_lipschitz_probe, parse_scenario, scenario_from_dict, serialize_scenario,
)


def test_parse_single_constraint():
    s = parse_scenario(json.dumps({"n": 2, "d": 1, "constraints": [{"kind": "ineq", "g": ["1", "0"], "f": "0"}]}))
    assert s.m == 1 and s.q == 0 and s.ineq_indices == (0,)


def test_eq_after_ineq_rejected():
    doc = {"n": 1, "d": 1, "constraints": [
        {"kind": "ineq", "g": ["1"], "f": "0"}, {"kind": "eq", "g": ["1"], "f": "0"}]}
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


@pytest.mark.parametrize("doc", [
    {"n": 1, "d": 1, "constraints": [{"kind": "ineq", "g": ["1"], "f": "0"}], "extra": 1},
    {"n": 2, "d": 1, "constraints": [{"kind": "ineq", "g": ["1"], "f": "0"}]},
    {"n": 1, "d": 1, "constraints": [{"kind": "both", "g": ["1"], "f": "0"}]},
    {"n": 1, "d": 1, "constraints": []},
    {"n": 1, "d": 1, "constraints": [{"kind": "ineq", "g": ["1"], "f": "0"}], "anchors": {"p": [0, 1], "v": [0]}},
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


def test_param_index_error():
    with pytest.raises(ExprError):
        scenario_from_dict({"n": 1, "d": 1, "constraints": [{"kind": "ineq", "g": ["p1"], "f": "0"}]})


def test_invalid_json():
    with pytest.raises(SchemaError):
        parse_scenario("{not json")


@pytest.mark.parametrize("name", NAMES)
def test_builtin_round_trip(name, tmp_path):
    s = builtin(name)
    back = parse_scenario(serialize_scenario(s))
    assert back == s
    path = tmp_path / "s.json"
    path.write_text(serialize_scenario(s))
    assert load_scenario(path) == s


def test_builtin_count():
    assert len(NAMES) == 6


def test_instantiate_ex1():
    P = instantiate(builtin("ex1"), [0.5])
    np.testing.assert_array_equal(P.G, [[-0.5, 0], [0, 0.5]])
    np.testing.assert_array_equal(P.b, [0, 0])


def test_instantiate_ex5():
    P = instantiate(builtin("ex5"), [-2])
    np.testing.assert_array_equal(P.G, [[0, 1], [1, 0], [-1, 0]])
    np.testing.assert_array_equal(P.b, [0, 2, 2])


def test_instantiate_ex6s():
    assert instantiate(builtin("ex6s"), [-0.3]).b[2] == -0.3
    assert instantiate(builtin("ex6s"), [0.7]).b[2] == 0.0


def test_instantiate_nonfinite():
    with pytest.raises(NonFinite):
        instantiate(builtin("ex1"), [np.inf])


# constraint data written out by hand, used as an independent oracle
HAND = {
    "ex1": lambda p: ([[-1 + p[0], 0], [0, p[0]]], [0, 0], 0),
    "ex2": lambda p: (
        [[1 - p[0], -p[1]], [-p[0], 1 - p[1]], [-1 - p[0], -1 - p[1]]],
        [np.dot(p, [1 - p[0], -p[1]]), np.dot(p, [-p[0], 1 - p[1]]), np.dot(p, [-1 - p[0], -1 - p[1]])], 0),
    "ex5": lambda p: ([[0, 1], [1, 0], [-1, 0]], [0, abs(p[0]), abs(p[0])], 0),
    "ex6": lambda p: ([[1, 0], [0, 1], [1, 1]], [0, 0, p[0]], 0),
    "ex6s": lambda p: ([[1, 0], [0, 1], [1, 1]], [0, 0, min(p[0], 0)], 0),
    "hatc-demo": lambda p: (
        [[1, 1, 1], [1, 0, 0], [0, -1, 0], [1, 1, 0]],
        [p[0], abs(p[1]), max(p[1], 0), min(p[0], p[1])], 1),
}


@pytest.mark.parametrize("name", NAMES)
def test_builtin_data_on_grid(name):
    s = builtin(name)
    for t in np.linspace(-0.8, 0.8, 5):
        p = np.full(s.d, t) if s.d == 1 else np.array([t, -0.5 * t])
        rows, rhs, q = HAND[name](p)
        P = instantiate(s, p)
        assert P.q == q
        np.testing.assert_allclose(P.rows, rows, atol=1e-12, rtol=0)
        np.testing.assert_allclose(P.rhs, rhs, atol=1e-12, rtol=0)


def test_builtin_docs_have_anchors():
    for name in NAMES:
        assert "anchors" in builtin_doc(name)


def test_lipschitz_probe():
    assert local_lipschitz_probe(parse_expr("3"), [0.0], 1.0, 10) == 0.0
    assert local_lipschitz_probe(parse_expr("p0", 1), [0.0], 1.0, 10) == pytest.approx(1.0, abs=1e-6)
    assert local_lipschitz_probe(parse_expr("abs(p0)", 1), [0.0], 1.0, 50) == pytest.approx(1.0, abs=1e-3)
    g = [parse_expr("p0", 2), parse_expr("p1", 2)]
    assert local_lipschitz_probe(g, [0.0, 0.0], 1.0, 20) == pytest.approx(1.0, abs=1e-9)


def test_lipschitz_probe_deterministic_and_bad_args():
    e = parse_expr("p0*p0", 1)
    assert local_lipschitz_probe(e, [0.3], 0.5, 20, seed=1) == local_lipschitz_probe(e, [0.3], 0.5, 20, seed=1)
    with pytest.raises(ValueError):
        local_lipschitz_probe(e, [0.0], 0.0, 5)
    with pytest.raises(ValueError):
        local_lipschitz_probe(e, [0.0], 1.0, 1)


def test_scenario_evaluation_is_reproducible():
    s = builtin("ex2")
    a = s.evaluate([0.1234567, -0.7654321])
    b = s.evaluate([0.1234567, -0.7654321])
    assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()
