"""Base representations of the anchor normal and the derived scenarios R_{K,L}.

At the anchor, ``v_bar - x_bar`` is written over the equalities plus a set
``kbar`` of active inequalities with strictly positive coefficients.  For a
chosen ``kbar`` and an admissible ``L``, ``build_rkl`` re-tags the
inequalities in ``kbar | L`` as equalities.  A representation is stable when
``x_bar`` is a lower limit of every such derived set as ``p -> p_bar``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import AnchorInfeasible, AnchorInsideSet, InadmissibleL, NoRepresentation
from .multipliers import TAU_POS, admissible_L
from .numerics import row_rank
from .projection import active_set, is_feasible, project
from .sampling import DEFAULT_R0, DEFAULT_SEED, DEFAULT_SHELLS, ball_point, geometric_radii, shell_vanishes, sphere_point, stream
from .scenario import EQ, INEQ, ConstraintSpec, Scenario, instantiate

DIST_TOL = 1e-4
SHELL_SAMPLES = 32


@dataclass
class RepresentationChoice:
    kbar: tuple[int, ...]
    lambda_bar: np.ndarray  # on equalities then kbar
    x_bar: np.ndarray

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(range(len(self.lambda_bar) - len(self.kbar))) + self.kbar


def anchor_projection(s: Scenario, p_bar, v_bar) -> np.ndarray:
    res = project(instantiate(s, p_bar), v_bar)
    if not res.optimal:
        raise AnchorInfeasible("C(p) is empty at the anchor")
    return res.x


def enumerate_kbar(s: Scenario, p_bar, v_bar) -> list[RepresentationChoice]:
    """Every K with the equalities plus K independent and positive coefficients on K."""
    poly = instantiate(s, p_bar)
    v_bar = np.asarray(v_bar, dtype=float)
    x_bar = anchor_projection(s, p_bar, v_bar)
    w = v_bar - x_bar
    if np.linalg.norm(w) <= 1e-12 * (1 + np.linalg.norm(v_bar)):
        raise AnchorInsideSet("v_bar lies in C(p_bar); the normal is zero")
    rows = poly.rows
    eq = list(range(s.q))
    cands = [i for i in active_set(poly, x_bar) if i >= s.q]
    tol = 1e-9 * (1 + np.linalg.norm(w))
    out = []
    for size in range(len(cands) + 1):
        for K in itertools.combinations(cands, size):
            idx = eq + list(K)
            B = rows[idx].reshape(len(idx), s.n)
            if row_rank(B) < len(idx):
                continue
            if idx:
                lam, *_ = np.linalg.lstsq(B.T, w, rcond=None)
            else:
                lam = np.zeros(0)
            if np.linalg.norm(B.T @ lam - w) > tol:
                continue
            if np.all(lam[len(eq):] > TAU_POS):
                out.append(RepresentationChoice(tuple(K), lam, x_bar))
    if not out:
        raise NoRepresentation("no base representation of the anchor normal")
    return out


def enumerate_L(s: Scenario, p_bar, x_bar, kbar) -> list[tuple[int, ...]]:
    """Admissible L: active inequalities outside kbar keeping the rows independent."""
    poly = instantiate(s, p_bar)
    kbar = sorted(kbar)
    cands = [i for i in active_set(poly, x_bar) if i >= s.q and i not in kbar]
    return admissible_L(poly.rows, list(range(s.q)) + kbar, cands)


@dataclass
class RKLScenario:
    base: Scenario
    kbar: tuple[int, ...]
    L: tuple[int, ...]
    scenario: Scenario
    index_map: tuple[int, ...]  # derived index -> base index


def build_rkl(s: Scenario, kbar, L, p_bar=None) -> RKLScenario:
    """Re-tag ``kbar | L`` as equalities; expressions are kept unchanged.

    Order: original equalities, then ``kbar | L`` (ascending), then the
    remaining inequalities.  When ``p_bar`` is given the new equality rows
    must be independent there.
    """
    kbar, L = tuple(sorted(kbar)), tuple(sorted(L))
    ineq = set(s.ineq_indices)
    if not (set(kbar) <= ineq and set(L) <= ineq):
        raise InadmissibleL("kbar and L must index inequality constraints")
    if set(kbar) & set(L) or len(set(kbar)) != len(kbar) or len(set(L)) != len(L):
        raise InadmissibleL("kbar and L must be disjoint sets")
    moved = sorted(kbar + L)
    order = list(s.eq_indices) + moved + [i for i in s.ineq_indices if i not in moved]
    if p_bar is not None:
        new_eq = list(s.eq_indices) + moved
        if row_rank(s.normals(p_bar, new_eq)) < len(new_eq):
            raise InadmissibleL(f"rows {new_eq} are dependent at the anchor")
    cons = []
    for i in order:
        c = s.constraints[i]
        kind = EQ if (i < s.q or i in moved) else INEQ
        cons.append(ConstraintSpec(kind, c.g, c.f))
    name = f"{s.name}[K={list(kbar)},L={list(L)}]" if s.name else ""
    return RKLScenario(s, kbar, L, s.with_constraints(cons, name), tuple(order))


@dataclass
class LiminfReport:
    holds: bool
    shell_max_dist: list[float]
    fitted_rate: float
    radii: list[float]


def _shell_points(s: Scenario, p_bar, r: float, samples: int, seed: int, tag: int, j: int):
    return [sphere_point(stream(seed, tag, j, k), p_bar, r, s.domain) for k in range(samples)]


def _fitted_rate(radii, maxima) -> float:
    rates = [m / r for r, m in zip(radii, maxima) if np.isfinite(m)]
    return float(max(rates)) if len(rates) == len(radii) else float("inf")


def liminf_check(
    s: Scenario, p_bar, x_bar, radii=None, samples_per_radius: int = SHELL_SAMPLES,
    seed: int = DEFAULT_SEED, dist_tol: float = DIST_TOL,
) -> LiminfReport:
    """Is x_bar approached by C(p) as p -> p_bar?  Shell maxima of dist(x_bar, C(p))."""
    radii = list(radii) if radii is not None else geometric_radii(DEFAULT_R0, DEFAULT_SHELLS)
    if any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly decreasing")
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    x_bar = np.asarray(x_bar, dtype=float)
    maxima = []
    for j, r in enumerate(radii):
        worst = 0.0
        for p in _shell_points(s, p_bar, r, samples_per_radius, seed, 51, j):
            res = project(instantiate(s, p), x_bar)
            worst = max(worst, float(np.linalg.norm(res.x - x_bar)) if res.optimal else np.inf)
        maxima.append(worst)
    return LiminfReport(shell_vanishes(radii, maxima, dist_tol), maxima, _fitted_rate(radii, maxima), radii)


@dataclass
class StableReport:
    stable: bool
    kbar: tuple[int, ...]
    x_bar: np.ndarray
    per_L: list = field(default_factory=list)  # (L, LiminfReport)


def stable_representation_check(
    s: Scenario, p_bar, v_bar, kbar, radii=None, samples_per_radius: int = SHELL_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> StableReport:
    """Lower-limit check for every derived scenario R_{kbar, L}."""
    x_bar = anchor_projection(s, p_bar, v_bar)
    kbar = tuple(sorted(kbar))
    per = []
    for L in enumerate_L(s, p_bar, x_bar, kbar):
        rkl = build_rkl(s, kbar, L, p_bar)
        per.append((L, liminf_check(rkl.scenario, p_bar, x_bar, radii, samples_per_radius, seed)))
    return StableReport(all(rep.holds for _, rep in per), kbar, x_bar, per)


def rkl_contained(rkl: RKLScenario, p, v) -> bool:
    """Projection of v onto R_{K,L}(p) satisfies the base constraints (vacuous when empty)."""
    res = project(instantiate(rkl.scenario, p), v)
    return True if not res.optimal else is_feasible(instantiate(rkl.base, p), res.x)


@dataclass
class EquivalenceReport:
    equivalent: bool
    max_dist: float
    samples: int


def equivalence_spot_check(
    s1: Scenario, s2: Scenario, p_center=None, radius_p: float = 0.5, v_center=None,
    radius_v: float = 2.0, samples: int = 50, seed: int = DEFAULT_SEED, tol: float = 1e-7,
) -> EquivalenceReport:
    """Projections onto either set lie in the other at sampled (p, v)."""
    if (s1.n, s1.d) != (s2.n, s2.d):
        return EquivalenceReport(False, float("inf"), 0)
    pc = np.atleast_1d(np.asarray(p_center if p_center is not None else (s1.anchor_p or np.zeros(s1.d)), dtype=float))
    vc = np.asarray(v_center if v_center is not None else (s1.anchor_v or np.zeros(s1.n)), dtype=float)
    worst = 0.0
    for k in range(samples):
        p = ball_point(stream(seed, 61, k), pc, radius_p, s1.domain)
        v = ball_point(stream(seed, 62, k), vc, radius_v)
        r1 = project(instantiate(s1, p), v)
        r2 = project(instantiate(s2, p), v)
        if r1.optimal != r2.optimal:
            return EquivalenceReport(False, float("inf"), k + 1)
        if not r1.optimal:
            continue
        d12 = project(instantiate(s2, p), r1.x).x - r1.x
        d21 = project(instantiate(s1, p), r2.x).x - r2.x
        worst = max(worst, float(np.linalg.norm(d12)), float(np.linalg.norm(d21)))
    return EquivalenceReport(worst <= tol, worst, samples)
