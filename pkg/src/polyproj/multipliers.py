"""Lagrange multipliers: membership, reduction to independent supports, bounds.

A vector ``w`` in the normal cone N(x; C) is written as ``sum lam_i g_i`` over
the active constraints with ``lam_i >= 0`` on inequalities.  Multipliers are
found by Moreau decomposition: projecting ``w`` onto the polar cone
``{y : E_A y = 0, G_A y <= 0}`` leaves ``w - y`` in the cone generated by the
active rows, and the projection's own multipliers express it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DependentFreePart, Infeasible, NoRepresentation, NotInCone, ZeroSum
from .numerics import as_matrix, greedy_independent, recover_coefficients, row_rank
from .projection import active_set, project
from .sampling import DEFAULT_SEED, ball_point, stream
from .scenario import Polyhedron, Scenario, instantiate

TAU_POS = 1e-12
REPRO_TOL = 1e-9


@dataclass
class MultiplierVector:
    values: np.ndarray
    support: tuple[int, ...]


@dataclass
class ReducedCombination:
    indices: tuple[int, ...]
    coefficients: np.ndarray


def compute_multipliers(poly: Polyhedron, x, w, tol: float = 1e-8) -> MultiplierVector:
    """One multiplier vector expressing ``w`` over the constraints active at ``x``."""
    w = np.asarray(w, dtype=float).reshape(-1)
    act = active_set(poly, x)
    q = poly.q
    rows = poly.rows
    eq = [i for i in act if i < q]
    ineq = [i for i in act if i >= q]
    polar = Polyhedron.from_arrays(rows[eq], np.zeros(len(eq)), rows[ineq], np.zeros(len(ineq)), n=poly.n)
    res = project(polar, w)
    y = res.x
    if np.linalg.norm(y) > tol * (1 + np.linalg.norm(w)):
        raise NotInCone(f"w is not a cone combination of active normals (residual {np.linalg.norm(y):.3g})")
    lam = np.zeros(poly.m)
    lam[eq + ineq] = res.lam
    lam[ineq] = np.maximum(lam[ineq], 0.0)
    return MultiplierVector(lam, tuple(int(i) for i in np.flatnonzero(lam)))


def _solve_on(V: np.ndarray, idx: tuple[int, ...], target: np.ndarray) -> np.ndarray | None:
    """Exact coefficients of ``target`` over rows ``idx`` of V, or None."""
    if not idx:
        return np.zeros(0) if np.linalg.norm(target) <= REPRO_TOL * (1 + np.linalg.norm(target)) else None
    B = V[list(idx)]
    if row_rank(B) < len(idx):
        return None
    coef, *_ = np.linalg.lstsq(B.T, target, rcond=None)
    if np.linalg.norm(B.T @ coef - target) > REPRO_TOL * (1 + np.linalg.norm(target)):
        return None
    return coef


def reduce_positive_combination(vectors, lam) -> ReducedCombination:
    """Independent subset with strictly positive coefficients giving the same sum.

    Among valid subsets of the support the smallest one wins, ties broken by
    lexicographic order of the index tuple.
    """
    V = as_matrix(vectors)
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if lam.shape[0] != V.shape[0]:
        raise ValueError("one coefficient per vector required")
    if np.any(lam < -TAU_POS):
        raise ValueError("coefficients must be nonnegative")
    target = V.T @ lam
    scale = float(np.abs(lam) @ np.linalg.norm(V, axis=1)) if V.size else 0.0
    if np.linalg.norm(target) <= 1e-12 * max(scale, 1.0):
        raise ZeroSum("the combination sums to zero")
    support = [i for i in range(len(lam)) if lam[i] > TAU_POS]
    for size in range(1, len(support) + 1):
        for idx in itertools.combinations(support, size):
            coef = _solve_on(V, idx, target)
            if coef is not None and np.all(coef > TAU_POS):
                return ReducedCombination(idx, coef)
    raise ZeroSum("no positive independent subcombination found")  # unreachable by Caratheodory


def reduce_mixed_combination(free_vectors, free_lambda, nonneg_vectors, nonneg_lambda) -> ReducedCombination:
    """Keep every free vector and an independent, positively weighted part of the rest.

    Indices refer to the concatenation ``free_vectors + nonneg_vectors``.
    """
    F = as_matrix(free_vectors)
    Nn = as_matrix(nonneg_vectors)
    n = max(F.shape[1], Nn.shape[1])
    F = F if F.size else np.zeros((0, n))
    Nn = Nn if Nn.size else np.zeros((0, n))
    fl = np.asarray(free_lambda, dtype=float).reshape(-1)
    nl = np.asarray(nonneg_lambda, dtype=float).reshape(-1)
    k = F.shape[0]
    if k == 0:
        return reduce_positive_combination(Nn, nl)
    if row_rank(F) < k:
        raise DependentFreePart("free vectors are linearly dependent")
    if np.any(nl < -TAU_POS):
        raise ValueError("nonnegative part has negative coefficients")
    V = np.vstack([F, Nn]).reshape(-1, n)
    target = F.T @ fl + Nn.T @ nl
    support = [k + i for i in range(len(nl)) if nl[i] > TAU_POS]
    base = tuple(range(k))
    for size in range(len(support) + 1):
        for extra in itertools.combinations(support, size):
            idx = base + extra
            coef = _solve_on(V, idx, target)
            if coef is not None and np.all(coef[k:] > TAU_POS):
                return ReducedCombination(idx, coef)
    raise NoRepresentation("no reduced mixed combination found")  # unreachable for valid input


def reduce_signed_combination(vectors, lam) -> ReducedCombination:
    """Reduce a combination with arbitrary signs by flipping negative terms.

    ``sum lam_i a_i = sum |lam_i| (sign(lam_i) a_i)`` is a positive combination;
    the returned coefficients carry the original signs again.
    """
    V = as_matrix(vectors)
    lam = np.asarray(lam, dtype=float).reshape(-1)
    sign = np.where(lam < 0, -1.0, 1.0)
    red = reduce_positive_combination(V * sign[:, None], np.abs(lam))
    return ReducedCombination(red.indices, red.coefficients * sign[list(red.indices)])


def reduced_support(poly: Polyhedron, lam: np.ndarray) -> ReducedCombination:
    """Reduce a multiplier vector: equality part on an independent subset, then the mixed reduction."""
    rows = poly.rows
    q = poly.q
    eq_target = rows[:q].T @ lam[:q]
    keep = greedy_independent(rows[:q]) if q else []
    fl = recover_coefficients(rows[keep], eq_target, tol=1e-8 * (1 + np.linalg.norm(eq_target))) if keep else np.zeros(0)
    ineq = [i for i in range(q, poly.m) if lam[i] > TAU_POS]
    if not keep and not ineq:
        return ReducedCombination((), np.zeros(0))
    red = reduce_mixed_combination(rows[keep], fl, rows[ineq], lam[ineq])
    index_of = list(keep) + ineq
    return ReducedCombination(tuple(index_of[i] for i in red.indices), red.coefficients)


@dataclass
class BoundReport:
    ok: bool
    max_l1: float
    witnesses: list = field(default_factory=list)


def multiplier_bound_check(
    s: Scenario, p_bar, v_bar, M: float, radius_p: float = 0.1, radius_v: float = 0.1,
    samples: int = 64, seed: int = DEFAULT_SEED,
) -> BoundReport:
    """Sampled check that some multiplier vector of l1-norm <= M exists near the anchor."""
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    worst = 0.0
    wit = []
    for k in range(samples):
        if k == 0:
            p, v = p_bar, v_bar
        else:
            p = ball_point(stream(seed, 21, k), p_bar, radius_p, s.domain)
            v = ball_point(stream(seed, 22, k), v_bar, radius_v)
        poly = instantiate(s, p)
        res = project(poly, v)
        if not res.optimal:
            raise Infeasible(f"C(p) is empty at p={p.tolist()}")
        if np.linalg.norm(v - res.x) <= 1e-12:
            l1 = 0.0
        else:
            red = reduced_support(poly, res.lam)
            l1 = float(np.abs(red.coefficients).sum())
        worst = max(worst, l1)
        wit.append({"p": p, "v": v, "l1": l1})
    return BoundReport(worst <= M, worst, wit)


def admissible_L(rows: np.ndarray, base: list[int], candidates: list[int]) -> list[tuple[int, ...]]:
    """Subsets L of ``candidates`` with rows ``base + L`` independent, by (size, lex)."""
    out = []
    if row_rank(rows[base]) < len(base):
        return out
    for size in range(len(candidates) + 1):
        for L in itertools.combinations(candidates, size):
            if row_rank(rows[base + list(L)]) == len(base) + size:
                out.append(L)
    return out


def band_violation(coef: np.ndarray, lam_bar: np.ndarray, n_fixed: int, eps: float) -> float:
    """How far ``coef`` leaves the band: |c - lam_bar| <= eps on the fixed part, [0, eps] on L."""
    fixed = np.abs(coef[:n_fixed] - lam_bar) - eps
    extra = coef[n_fixed:]
    parts = [fixed, -extra, extra - eps]
    return float(max(0.0, *(float(np.max(t, initial=0.0)) for t in parts)))


def best_band_representation(poly: Polyhedron, x, w, fixed: list[int], lam_bar, eps: float):
    """(violation, L, coefficients) minimising the band violation over admissible L.

    Returns ``(inf, None, None)`` if ``fixed`` is not active or no L
    reproduces ``w``.
    """
    act = active_set(poly, x)
    if not set(fixed) <= set(act):
        return np.inf, None, None
    q = poly.q
    rows = poly.rows
    cands = [i for i in act if i >= q and i not in fixed]
    best = (np.inf, None, None)
    for L in admissible_L(rows, list(fixed), cands):
        idx = tuple(fixed) + L
        coef = _solve_on(rows, idx, w)
        if coef is None:
            continue
        viol = band_violation(coef, lam_bar, len(fixed), eps)
        if viol < best[0]:
            best = (viol, L, coef)
            if viol == 0.0:
                break
    return best


@dataclass
class BandReport:
    max_band_violation: float
    per_sample: list = field(default_factory=list)


def coefficient_band_probe(
    s: Scenario, p_bar, v_bar, kbar, lam_bar, eps: float, radius: float,
    samples: int = 32, seed: int = DEFAULT_SEED,
) -> BandReport:
    """Worst distance of nearby multipliers from the band around ``lam_bar``.

    ``lam_bar`` lists coefficients on the equalities followed by ``kbar``.
    """
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    fixed = list(range(s.q)) + sorted(kbar)
    lam_bar = np.asarray(lam_bar, dtype=float).reshape(-1)
    if lam_bar.shape[0] != len(fixed):
        raise ValueError("lam_bar must have one entry per equality and per index in kbar")
    worst = 0.0
    per = []
    for k in range(samples):
        p = ball_point(stream(seed, 31, k), p_bar, radius, s.domain)
        poly = instantiate(s, p)
        res = project(poly, v_bar)
        if not res.optimal:
            raise Infeasible(f"C(p) is empty at p={p.tolist()}")
        w = v_bar - res.x
        viol, L, coef = best_band_representation(poly, res.x, w, fixed, lam_bar, eps)
        if L is None:
            try:
                compute_multipliers(poly, res.x, w)
            except NotInCone as err:
                raise NoRepresentation(f"no multipliers at p={p.tolist()}") from err
        worst = max(worst, viol)
        per.append({"p": p, "violation": viol, "L": L, "coefficients": coef})
    return BandReport(worst, per)


__all__ = [
    "TAU_POS", "MultiplierVector", "ReducedCombination", "compute_multipliers",
    "reduce_positive_combination", "reduce_mixed_combination", "reduce_signed_combination",
    "reduced_support", "multiplier_bound_check", "coefficient_band_probe", "BandReport",
    "BoundReport", "admissible_L", "best_band_representation",
]
