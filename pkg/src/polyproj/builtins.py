"""Built-in scenarios with known closed-form projections.

Names: ``ex1`` (discontinuous projection), ``ex2`` (singleton sets, MFCQ
fails), ``ex5`` (non-unique multiplier representation), ``ex6`` (unstable
representation), ``ex6s`` (stable reformulation of ``ex6``) and
``hatc-demo`` (fixed normals, parameter only in right-hand sides).
"""

from __future__ import annotations

import numpy as np

from .scenario import Scenario, scenario_from_dict

_DOCS: dict[str, dict] = {
    "ex1": {
        "name": "ex1",
        "n": 2,
        "d": 1,
        "constraints": [
            {"kind": "ineq", "g": ["-1 + p0", "0"], "f": "0"},
            {"kind": "ineq", "g": ["0", "p0"], "f": "0"},
        ],
        "anchors": {"p": [0.0], "v": [-1.0, -1.0]},
        "domain": {"center": [0.0], "radius": 0.9},
    },
    "ex2": {
        "name": "ex2",
        "n": 2,
        "d": 2,
        "constraints": [
            {"kind": "ineq", "g": ["1 - p0", "-p1"], "f": "p0*(1 - p0) - p1*p1"},
            {"kind": "ineq", "g": ["-p0", "1 - p1"], "f": "-p0*p0 + p1*(1 - p1)"},
            {"kind": "ineq", "g": ["-1 - p0", "-1 - p1"], "f": "p0*(-1 - p0) + p1*(-1 - p1)"},
        ],
        "anchors": {"p": [0.0, 0.0], "v": [1.0, 1.0]},
        # C(p) = {p} exactly while p is inside the triangle spanned by the three
        # fixed points; 0.44 < 1/sqrt(5), the radius of the largest ball inside it
        "domain": {"center": [0.0, 0.0], "radius": 0.44},
    },
    "ex5": {
        "name": "ex5",
        "n": 2,
        "d": 1,
        "constraints": [
            {"kind": "ineq", "g": ["0", "1"], "f": "0"},
            {"kind": "ineq", "g": ["1", "0"], "f": "abs(p0)"},
            {"kind": "ineq", "g": ["-1", "0"], "f": "abs(p0)"},
        ],
        "anchors": {"p": [0.0], "v": [0.0, 1.0]},
    },
    "ex6": {
        "name": "ex6",
        "n": 2,
        "d": 1,
        "constraints": [
            {"kind": "ineq", "g": ["1", "0"], "f": "0"},
            {"kind": "ineq", "g": ["0", "1"], "f": "0"},
            {"kind": "ineq", "g": ["1", "1"], "f": "p0"},
        ],
        "anchors": {"p": [0.0], "v": [1.0, 1.0]},
    },
    "ex6s": {
        "name": "ex6s",
        "n": 2,
        "d": 1,
        "constraints": [
            {"kind": "ineq", "g": ["1", "0"], "f": "0"},
            {"kind": "ineq", "g": ["0", "1"], "f": "0"},
            {"kind": "ineq", "g": ["1", "1"], "f": "min(p0, 0)"},
        ],
        "anchors": {"p": [0.0], "v": [1.0, 1.0]},
    },
    "hatc-demo": {
        "name": "hatc-demo",
        "n": 3,
        "d": 2,
        "constraints": [
            {"kind": "eq", "g": ["1", "1", "1"], "f": "p0"},
            {"kind": "ineq", "g": ["1", "0", "0"], "f": "abs(p1)"},
            {"kind": "ineq", "g": ["0", "-1", "0"], "f": "max(p1, 0)"},
            {"kind": "ineq", "g": ["1", "1", "0"], "f": "min(p0, p1)"},
        ],
        "anchors": {"p": [0.0, 0.0], "v": [2.0, 1.0, 0.0]},
        "domain": {"center": [0.0, 0.0], "radius": 1.0},
    },
}

CLOSED_FORMS: dict[str, str] = {
    "ex1": "P(v,p) = (0,0) if -1<p<0; (0,v2) if 0<=p<1  (v near (-1,-1)); discontinuous at p=0",
    "ex2": "C(p) = {p} for |p|<1/sqrt(5), so P(v,p) = p for every v",
    "ex5": "P((0,1),p) = (0,0) for every p; v-x = 1*(0,1) + 0*(1,0) = 1*(0,1) + 0*(-1,0)",
    "ex6": "P((1,1),p) = (0,0) if p>=0; (p/2,p/2) if p<0; Kbar in {{1,2},{3}}, both unstable",
    "ex6s": "same sets as ex6 with rhs min(p,0) on row 3; P((1,1),p) = (min(p,0)/2)(1,1); stable",
    "hatc-demo": "fixed normals (1,1,1),(1,0,0),(0,-1,0),(1,1,0); RCRCQ holds at every point",
}

NAMES = tuple(_DOCS)


def builtin(name: str) -> Scenario:
    key = name.lower()
    if key not in _DOCS:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(NAMES)}")
    return scenario_from_dict(_DOCS[key])


def builtin_doc(name: str) -> dict:
    return _DOCS[name.lower()]


def ex1_projection(v, p: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.array([0.0, 0.0]) if p < 0 else np.array([0.0, v[1]])


def ex6_projection(p: float) -> np.ndarray:
    m = min(p, 0.0)
    return np.array([m / 2, m / 2])
