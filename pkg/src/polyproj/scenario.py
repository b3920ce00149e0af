"""Parametric constraint families and their instantiation at a parameter.

A :class:`Scenario` describes ``C(p) = {x : <g_i(p), x> = f_i(p), i in I1;
<g_i(p), x> <= f_i(p), i in I2}`` with every ``g_i`` and ``f_i`` an
expression tree in the parameter.  Constraint indices are 0-based and the
equalities always come first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import ExprError, NonFinite, SchemaError

EQ = "eq"
INEQ = "ineq"


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str
    g: tuple[ex.Expr, ...]
    f: ex.Expr

    def __post_init__(self):
        if self.kind not in (EQ, INEQ):
            raise SchemaError(f"constraint kind must be 'eq' or 'ineq', got {self.kind!r}")


@dataclass(frozen=True)
class Domain:
    """Closed ball in parameter space."""

    center: tuple[float, ...]
    radius: float

    def contains(self, p, slack: float = 1e-12) -> bool:
        return float(np.linalg.norm(np.asarray(p) - np.asarray(self.center))) <= self.radius + slack


@dataclass(frozen=True)
class Polyhedron:
    """C(p) at a fixed p: ``E x = d`` and ``G x <= b``."""

    E: np.ndarray
    d: np.ndarray
    G: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def q(self) -> int:
        return self.E.shape[0]

    @property
    def m(self) -> int:
        return self.E.shape[0] + self.G.shape[0]

    @property
    def rows(self) -> np.ndarray:
        """All constraint normals, equalities first."""
        return np.vstack([self.E, self.G])

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.d, self.b])

    @property
    def eq_indices(self) -> tuple[int, ...]:
        return tuple(range(self.q))

    @property
    def ineq_indices(self) -> tuple[int, ...]:
        return tuple(range(self.q, self.m))

    def is_eq(self, i: int) -> bool:
        return i < self.q

    @classmethod
    def from_arrays(cls, E=None, d=None, G=None, b=None, n: int | None = None) -> "Polyhedron":
        if n is None:
            for a in (E, G):
                if a is not None and np.size(a):
                    n = np.asarray(a, dtype=float).reshape(-1, np.shape(a)[-1]).shape[1]
                    break
        if n is None:
            raise ValueError("cannot infer dimension of an empty polyhedron")

        def mat(a):
            if a is None or np.size(a) == 0:
                return np.zeros((0, n))
            return np.asarray(a, dtype=float).reshape(-1, n)

        def vec(a):
            if a is None or np.size(a) == 0:
                return np.zeros(0)
            return np.asarray(a, dtype=float).reshape(-1)

        E_, G_ = mat(E), mat(G)
        d_, b_ = vec(d), vec(b)
        if E_.shape[0] != d_.shape[0] or G_.shape[0] != b_.shape[0]:
            raise SchemaError("row counts and right-hand sides disagree")
        for a in (E_, G_, d_, b_):
            if not np.all(np.isfinite(a)):
                raise NonFinite("polyhedron data has NaN/Inf entries")
        return cls(E_, d_, G_, b_)


@dataclass(frozen=True, eq=True)
class Scenario:
    n: int
    d: int
    constraints: tuple[ConstraintSpec, ...]
    anchor_p: tuple[float, ...] | None = None
    anchor_v: tuple[float, ...] | None = None
    domain: Domain | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1 or self.d < 0:
            raise SchemaError("need n >= 1 and d >= 0")
        if not self.constraints:
            raise SchemaError("a scenario needs at least one constraint")
        seen_ineq = False
        for c in self.constraints:
            if len(c.g) != self.n:
                raise SchemaError(f"constraint normal has {len(c.g)} components, expected n={self.n}")
            for e in (*c.g, c.f):
                if ex.max_param(e) >= self.d:
                    raise ExprError(f"parameter index {ex.max_param(e)} out of range for d={self.d}")
            if c.kind == INEQ:
                seen_ineq = True
            elif seen_ineq:
                raise SchemaError("equality constraints must precede inequality constraints")
        if (self.anchor_p is None) != (self.anchor_v is None):
            raise SchemaError("anchors need both p and v")
        if self.anchor_p is not None:
            if len(self.anchor_p) != self.d or len(self.anchor_v) != self.n:
                raise SchemaError("anchor dimensions do not match n, d")
        if self.domain is not None and len(self.domain.center) != self.d:
            raise SchemaError("domain center dimension does not match d")

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def q(self) -> int:
        return sum(1 for c in self.constraints if c.kind == EQ)

    @property
    def eq_indices(self) -> tuple[int, ...]:
        return tuple(range(self.q))

    @property
    def ineq_indices(self) -> tuple[int, ...]:
        return tuple(range(self.q, self.m))

    @property
    def has_anchors(self) -> bool:
        return self.anchor_p is not None

    @cached_property
    def _compiled(self):
        return [
            ([ex.compile_expr(e) for e in c.g], ex.compile_expr(c.f)) for c in self.constraints
        ]

    def evaluate(self, p) -> tuple[np.ndarray, np.ndarray]:
        """All normals (m x n) and right-hand sides (m,) at ``p``."""
        pt = _param_tuple(p, self.d)
        rows = np.array([[gj(pt) for gj in g] for g, _ in self._compiled], dtype=float)
        rhs = np.array([f(pt) for _, f in self._compiled], dtype=float)
        if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(rhs))):
            raise NonFinite(f"constraint data not finite at p={pt}")
        return rows, rhs

    def normals(self, p, indices: Sequence[int] | None = None) -> np.ndarray:
        rows, _ = self.evaluate(p)
        return rows if indices is None else rows[list(indices)].reshape(-1, self.n)

    def with_constraints(self, constraints, name: str = "") -> "Scenario":
        return Scenario(
            self.n, self.d, tuple(constraints), self.anchor_p, self.anchor_v, self.domain, name
        )

    def subset(self, keep: Sequence[int]) -> "Scenario":
        """Scenario view keeping only the listed constraints (order preserved)."""
        keep = sorted(set(keep))
        return self.with_constraints([self.constraints[i] for i in keep], self.name)


def _param_tuple(p, d: int) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(p, dtype=float)).reshape(-1)
    if arr.shape[0] != d:
        raise ValueError(f"parameter has dimension {arr.shape[0]}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("parameter has NaN/Inf entries")
    return tuple(float(t) for t in arr)


def instantiate(s: Scenario, p) -> Polyhedron:
    rows, rhs = s.evaluate(p)
    q = s.q
    return Polyhedron(rows[:q], rhs[:q], rows[q:], rhs[q:])


# -- file format -------------------------------------------------------------

_TOP_KEYS = {"n", "d", "constraints", "anchors", "domain", "name"}


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}")
    try:
        n, d = int(doc["n"]), int(doc["d"])
        raw = doc["constraints"]
    except (KeyError, TypeError, ValueError) as err:
        raise SchemaError(f"missing or malformed n/d/constraints: {err}") from None
    if not isinstance(raw, list):
        raise SchemaError("constraints must be a list")
    cons = []
    for k, c in enumerate(raw):
        if not isinstance(c, dict) or set(c) - {"kind", "g", "f"} or not {"kind", "g", "f"} <= set(c):
            raise SchemaError(f"constraint {k} must have exactly kind, g, f")
        if not isinstance(c["g"], list) or len(c["g"]) != n:
            raise SchemaError(f"constraint {k}: g must list n={n} expressions")
        g = tuple(ex.parse_expr(s, d) for s in c["g"])
        cons.append(ConstraintSpec(c["kind"], g, ex.parse_expr(c["f"], d)))
    ap = av = None
    if "anchors" in doc:
        a = doc["anchors"]
        if not isinstance(a, dict) or set(a) != {"p", "v"}:
            raise SchemaError("anchors must be {p: [...], v: [...]}")
        ap, av = tuple(map(float, a["p"])), tuple(map(float, a["v"]))
    dom = None
    if "domain" in doc:
        dm = doc["domain"]
        if not isinstance(dm, dict) or set(dm) != {"center", "radius"}:
            raise SchemaError("domain must be {center: [...], radius: r}")
        dom = Domain(tuple(map(float, dm["center"])), float(dm["radius"]))
        if not dom.radius > 0:
            raise SchemaError("domain radius must be positive")
    return Scenario(n, d, tuple(cons), ap, av, dom, str(doc.get("name", "")))


def scenario_to_dict(s: Scenario) -> dict:
    doc: dict = {
        "n": s.n,
        "d": s.d,
        "constraints": [
            {"kind": c.kind, "g": [ex.to_string(e) for e in c.g], "f": ex.to_string(c.f)}
            for c in s.constraints
        ],
    }
    if s.name:
        doc["name"] = s.name
    if s.has_anchors:
        doc["anchors"] = {"p": list(s.anchor_p), "v": list(s.anchor_v)}
    if s.domain is not None:
        doc["domain"] = {"center": list(s.domain.center), "radius": s.domain.radius}
    return doc


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON: {err}") from None
    return scenario_from_dict(doc)


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- Lipschitz probing ---------------------------------------------------------


def local_lipschitz_probe(e, p_bar, radius: float, samples: int, seed: int = 42) -> float:
    """Lower bound on the local Lipschitz constant of ``e`` around ``p_bar``.

    ``e`` is an expression or a sequence of expressions (a vector map).
    ``samples`` points are drawn uniformly in the ball and every pair is used.
    """
    from .sampling import ball_points

    if radius <= 0 or samples < 2:
        raise ValueError("need radius > 0 and samples >= 2")
    exprs = [e] if not isinstance(e, (tuple, list)) else list(e)
    funcs = [ex.compile_expr(t) for t in exprs]
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    pts = ball_points(p_bar, radius, samples, seed, tag=11)
    vals = np.array([[f(tuple(p)) for f in funcs] for p in pts], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("expression not finite on the sampled ball")
    best = 0.0
    for i in range(samples):
        dp = np.linalg.norm(pts[i + 1 :] - pts[i], axis=1)
        dv = np.linalg.norm(vals[i + 1 :] - vals[i], axis=1)
        ok = dp > 1e-12
        if np.any(ok):
            best = max(best, float(np.max(dv[ok] / dp[ok])))
    return best
