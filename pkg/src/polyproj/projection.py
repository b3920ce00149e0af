"""Euclidean projection onto a polyhedron.

:func:`project` is a dual active-set method (Goldfarb-Idnani specialised to
the identity Hessian): it starts from the projection onto the equality
constraints, which is dual feasible, and repeatedly brings the most violated
inequality into the working set, dropping inequalities whose multipliers
reach zero on the way.  :func:`project_bruteforce` enumerates candidate
active sets and serves as an independent oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CycleLimit, Inconsistent, Infeasible, NonFinite, NotFeasible, NumericError, TooManyConstraints
from .numerics import TAU_RANK, greedy_independent, recover_coefficients, solve_equality_kkt
from .scenario import Polyhedron

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TOL_ACT = 1e-8
BRUTEFORCE_MAX_M = 20


@dataclass
class ProjectionResult:
    x: np.ndarray | None
    lam: np.ndarray
    active: tuple[int, ...]
    status: str
    iterations: int = 0
    # Farkas weights y (y >= 0 on inequalities) with sum y_i g_i = 0, <y, rhs> < 0
    certificate: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def kkt_residual(self, poly: Polyhedron, v) -> float:
        return float(np.linalg.norm(np.asarray(v) - self.x - poly.rows.T @ self.lam))


def _check_vector(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise ValueError(f"vector has dimension {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise NonFinite("vector has NaN/Inf entries")
    return v


def _equality_certificate(poly: Polyhedron) -> np.ndarray | None:
    """Weights on equality rows proving {E x = d} empty, if it is."""
    E, d = poly.E, poly.d
    keep = greedy_independent(E)
    for j in range(E.shape[0]):
        if j in keep:
            continue
        c = recover_coefficients(E[keep], E[j], tol=1e-6 * (1 + np.linalg.norm(E[j])))
        gap = d[j] - c @ d[keep]
        if abs(gap) > 1e-9 * (1 + abs(d[j])):
            y = np.zeros(poly.m)
            y[j] = 1.0
            y[keep] = -c
            return -y if gap > 0 else y
    return None


def _infeasible(m: int, iterations: int, cert: np.ndarray | None) -> ProjectionResult:
    return ProjectionResult(None, np.zeros(m), (), INFEASIBLE, iterations, cert)


def project(poly: Polyhedron, v, tol_feas: float = 1e-9, max_iter: int | None = None) -> ProjectionResult:
    """Projection of ``v`` onto ``poly`` with its multipliers.

    Returns a result with ``status == "infeasible"`` (and a Farkas
    certificate) when the polyhedron is empty.
    """
    n, q, m = poly.n, poly.q, poly.m
    v = _check_vector(v, n)
    rows, rhs = poly.rows, poly.rhs
    row_norm = np.linalg.norm(rows, axis=1)
    cap = max_iter if max_iter is not None else 50 * max(m, 1)

    try:
        x, mu = solve_equality_kkt(poly.E, poly.d, v, allow_dependent=True)
    except Inconsistent:
        return _infeasible(m, 0, _equality_certificate(poly))
    work = greedy_independent(poly.E) if q else []
    u = {i: float(mu[i]) for i in work}

    it = 0
    while True:
        viol = rows[q:] @ x - rhs[q:]
        thresh = tol_feas * (1.0 + np.abs(rhs[q:]))
        bad = np.flatnonzero(viol > thresh)
        if bad.size == 0:
            break
        score = viol[bad] / np.maximum(row_norm[q:][bad], 1e-300)
        k = q + int(bad[int(np.argmax(score))])  # argmax returns the first (smallest) index on ties
        gk = rows[k]
        tk = 0.0
        while True:
            it += 1
            if it > cap:
                raise CycleLimit(f"active-set iteration cap {cap} reached")
            if work:
                N = rows[work]
                r = np.linalg.solve(N @ N.T, N @ gk)
                z = N.T @ r - gk
            else:
                r = np.zeros(0)
                z = -gk
            zz = -(gk @ z)
            dependent = zz <= 1e-20 * max(gk @ gk, 1e-300) or np.linalg.norm(z) <= 1e-10 * row_norm[k]
            slack = gk @ x - rhs[k]
            t_full = np.inf if dependent else max(slack, 0.0) / zz
            t_part, drop = np.inf, None
            for j, idx in enumerate(work):
                if idx >= q and r[j] > 1e-14:
                    ratio = u[idx] / r[j]
                    if ratio < t_part or (ratio == t_part and idx < drop):
                        t_part, drop = ratio, idx
            if not np.isfinite(t_full) and not np.isfinite(t_part):
                y = np.zeros(m)
                y[k] = 1.0
                for j, idx in enumerate(work):
                    y[idx] = -r[j]
                cert = _verified_certificate(poly, y)
                if cert is None:
                    raise NumericError("dual step unbounded but Farkas certificate failed verification")
                return _infeasible(m, it, cert)
            t = min(t_full, t_part)
            if not dependent:
                x = x + t * z
            for j, idx in enumerate(work):
                u[idx] -= t * r[j]
                if idx >= q and u[idx] < 0.0:
                    u[idx] = 0.0
            tk += t
            if t_full <= t_part:
                work.append(k)
                u[k] = tk
                break
            work.remove(drop)
            del u[drop]

    # polish on the final working set
    work_sorted = sorted(work)
    lam = np.zeros(m)
    if work_sorted:
        x, mu = solve_equality_kkt(rows[work_sorted], rhs[work_sorted], v)
        lam[work_sorted] = mu
    else:
        x = v.copy()
    if not np.all(np.isfinite(x)):
        raise NonFinite("projection produced non-finite values")
    return ProjectionResult(x, lam, tuple(work_sorted), OPTIMAL, it)


def _verified_certificate(poly: Polyhedron, y: np.ndarray) -> np.ndarray | None:
    rows, rhs = poly.rows, poly.rhs
    if np.any(y[poly.q :] < -1e-12):
        return None
    scale = max(1.0, float(np.max(np.abs(y)) * np.max(np.linalg.norm(rows, axis=1), initial=1.0)))
    if np.linalg.norm(rows.T @ y) > TAU_RANK * scale:
        return None
    if not (y @ rhs < -TAU_RANK * max(1.0, float(np.abs(y) @ np.abs(rhs)))):
        return None
    return y


def is_feasible(poly: Polyhedron, x, tol: float = TOL_ACT) -> bool:
    x = np.asarray(x, dtype=float)
    eq = np.abs(poly.E @ x - poly.d) <= tol * (1 + np.abs(poly.d))
    ineq = poly.G @ x - poly.b <= tol * (1 + np.abs(poly.b))
    return bool(np.all(eq) and np.all(ineq))


def project_bruteforce(poly: Polyhedron, v, tol: float = 1e-9) -> ProjectionResult:
    """Oracle: try every candidate active set containing all equalities."""
    n, q, m = poly.n, poly.q, poly.m
    if m > BRUTEFORCE_MAX_M:
        raise TooManyConstraints(f"m={m} exceeds enumeration guard {BRUTEFORCE_MAX_M}")
    v = _check_vector(v, n)
    rows, rhs = poly.rows, poly.rhs
    best: ProjectionResult | None = None
    best_dist = np.inf
    count = 0
    ineq = list(range(q, m))
    for size in range(len(ineq) + 1):
        for extra in itertools.combinations(ineq, size):
            S = list(range(q)) + list(extra)
            count += 1
            try:
                x, mu = solve_equality_kkt(rows[S], rhs[S], v, allow_dependent=True)
            except Inconsistent:
                continue
            if not is_feasible(poly, x, tol):
                continue
            if np.any(mu[q:] < -1e-9 * (1 + np.linalg.norm(v))):
                continue
            dist = np.linalg.norm(x - v)
            if dist < best_dist - 1e-12:
                lam = np.zeros(m)
                lam[S] = mu
                best_dist = dist
                best = ProjectionResult(x, lam, tuple(i for i in S if lam[i] != 0 or i < q), OPTIMAL, count)
    if best is None:
        raise Infeasible("no candidate active set yields a feasible KKT point")
    best.iterations = count
    return best


def active_set(poly: Polyhedron, x, tol_act: float = TOL_ACT) -> tuple[int, ...]:
    """Indices of constraints holding with equality at ``x`` (equalities always)."""
    x = _check_vector(x, poly.n)
    q = poly.q
    eq_res = np.abs(poly.E @ x - poly.d)
    if np.any(eq_res > tol_act * (1 + np.abs(poly.d))):
        raise NotFeasible("an equality constraint is violated")
    s = poly.G @ x - poly.b
    scale = tol_act * (1 + np.abs(poly.b))
    if np.any(s > scale):
        raise NotFeasible("an inequality constraint is violated")
    return tuple(range(q)) + tuple(q + int(i) for i in np.flatnonzero(np.abs(s) <= scale))


def normal_cone_contains(poly: Polyhedron, x, w, tol: float = TOL_ACT) -> bool:
    """``w`` is in N(x; C) iff x is the projection of x + w."""
    x = _check_vector(x, poly.n)
    w = _check_vector(w, poly.n)
    if not is_feasible(poly, x, tol):
        raise NotFeasible("x is not in the polyhedron")
    res = project(poly, x + w)
    if not res.optimal:
        raise NotFeasible("polyhedron is empty")
    return bool(np.linalg.norm(res.x - x) <= tol * (1 + np.linalg.norm(w)))


def distance(poly: Polyhedron, x) -> float:
    """Euclidean distance from ``x`` to the polyhedron (inf when empty)."""
    res = project(poly, x)
    if not res.optimal:
        return float("inf")
    return float(np.linalg.norm(res.x - np.asarray(x, dtype=float)))
