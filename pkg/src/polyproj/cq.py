"""Constraint-qualification diagnostics: LICQ, MFCQ and RCRCQ.

RCRCQ quantifies over a neighbourhood of the anchor parameter, so it is
checked by sampling and the verdict is labelled ``"sampled-certified"``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DependentAtAnchor, IndependenceViolation, Infeasible, SubsetBlowup
from .lp import OPTIMAL, linprog_max
from .numerics import greedy_independent, row_rank
from .projection import active_set, project
from .sampling import DEFAULT_SEED, ball_points, pmap
from .scenario import Polyhedron, Scenario, instantiate

MFCQ_MARGIN = 1e-9
SUBSET_CAP = 4096
SAMPLED = "sampled-certified"


def licq_check(poly: Polyhedron, x) -> bool:
    act = list(active_set(poly, x))
    return row_rank(poly.rows[act]) == len(act)


@dataclass
class MfcqResult:
    holds: bool
    certificate_h: np.ndarray | None
    margin: float


def mfcq_check(poly: Polyhedron, x) -> MfcqResult:
    """Solve max s s.t. E h = 0, <g_i, h> <= -s (active i), |h_j| <= 1."""
    act = active_set(poly, x)
    q, n = poly.q, poly.n
    E = poly.E
    if q and row_rank(E) < q:
        raise IndependenceViolation("equality normals are linearly dependent")
    G = poly.rows[[i for i in act if i >= q]]
    if G.shape[0] == 0:
        return MfcqResult(True, np.zeros(n), float("inf"))
    # substitute h = y - 1 with 0 <= y <= 2; variables (y, s), s >= 0 suffices since h = 0 gives s = 0
    k = G.shape[0]
    ones = np.ones(n)
    A_ub = np.vstack([
        np.hstack([G, np.ones((k, 1))]),
        np.hstack([np.eye(n), np.zeros((n, 1))]),
    ])
    b_ub = np.concatenate([G @ ones, 2 * ones])
    A_eq = np.hstack([E, np.zeros((q, 1))]) if q else None
    b_eq = E @ ones if q else None
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = linprog_max(c, A_ub, b_ub, A_eq, b_eq)
    if res.status != OPTIMAL:
        raise Infeasible(f"MFCQ linear program ended with status {res.status}")
    s = max(float(res.z[-1]), 0.0) + 0.0
    if s <= MFCQ_MARGIN:
        return MfcqResult(False, None, s)
    return MfcqResult(True, _sparsest_direction(E, G, s), s)


def _sparsest_direction(E: np.ndarray, G: np.ndarray, s: float) -> np.ndarray:
    """Among box-bounded h reaching margin ``s``, one of least l1 norm (canonical certificate)."""
    n = G.shape[1]
    k, q = G.shape[0], E.shape[0]
    A_ub = np.vstack([np.hstack([G, -G]), np.eye(2 * n)])
    b_ub = np.concatenate([np.full(k, -s * (1 - 1e-9)), np.ones(2 * n)])
    A_eq = np.hstack([E, -E]) if q else None
    b_eq = np.zeros(q) if q else None
    res = linprog_max(-np.ones(2 * n), A_ub, b_ub, A_eq, b_eq)
    return res.z[:n] - res.z[n:] + 0.0


@dataclass
class SubsetRank:
    J: tuple[int, ...]
    rank_at_anchor: int
    min_rank_sampled: int
    max_rank_sampled: int
    holds: bool
    witness_p: np.ndarray | None = None


@dataclass
class RcrcqReport:
    subsets: list[SubsetRank]
    holds: bool
    label: str = SAMPLED
    radius: float = 0.0
    samples: int = 0

    def failing(self) -> list[SubsetRank]:
        return [r for r in self.subsets if not r.holds]


def candidate_subsets(eq: list[int], free: list[int], cap: int = SUBSET_CAP):
    count = 2 ** len(free)
    if count > cap:
        raise SubsetBlowup(f"{count} subsets exceed the cap {cap}")
    for size in range(len(free) + 1):
        for extra in itertools.combinations(free, size):
            yield tuple(eq) + extra


def rcrcq_check(
    s: Scenario, p_bar, x_bar, radius: float = 0.1, samples: int = 32,
    subset_cap: int = SUBSET_CAP, seed: int = DEFAULT_SEED, extra_points=None,
) -> RcrcqReport:
    """Ranks of every J with I1 <= J <= active set, at the anchor and at sampled p.

    ``extra_points`` (e.g. earlier failure witnesses) are always re-checked,
    and the per-index sample streams make the sample set grow monotonically
    with ``samples``.
    """
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    poly = instantiate(s, p_bar)
    act = active_set(poly, x_bar)
    eq = list(range(s.q))
    free = [i for i in act if i >= s.q]
    subsets = list(candidate_subsets(eq, free, subset_cap))
    pts = ball_points(p_bar, radius, samples, seed, tag=41, domain=s.domain)
    if extra_points is not None and len(extra_points):
        pts = np.vstack([pts, np.asarray(extra_points, dtype=float).reshape(-1, s.d)])
    anchor_rows = poly.rows
    sampled_rows = [s.normals(p) for p in pts]

    def scan(J):
        J = list(J)
        r0 = row_rank(anchor_rows[J])
        ranks = [row_rank(R[J]) for R in sampled_rows]
        lo = min(ranks, default=r0)
        hi = max(ranks, default=r0)
        witness = None
        for p, r in zip(pts, ranks):
            if r != r0:
                witness = p
                break
        return SubsetRank(tuple(J), r0, lo, hi, lo == hi == r0, witness)

    rows = pmap(scan, subsets)
    return RcrcqReport(rows, all(r.holds for r in rows), SAMPLED, radius, len(pts))


def reduce_equalities(s: Scenario, p_bar) -> tuple[tuple[int, ...], Scenario]:
    """Independent subset of the equalities (smallest indices kept) and the reduced scenario."""
    rows = s.normals(p_bar, list(range(s.q)))
    keep = tuple(greedy_independent(rows)) if s.q else ()
    return keep, s.subset(list(keep) + list(s.ineq_indices))


def rank_persistence_check(
    s: Scenario, indices, p_bar, radius: float = 0.1, samples: int = 32, seed: int = DEFAULT_SEED,
) -> bool:
    """Rows independent at the anchor stay independent at every sampled p."""
    idx = list(indices)
    if row_rank(s.normals(p_bar, idx)) < len(idx):
        raise DependentAtAnchor(f"rows {idx} are dependent at the anchor")
    pts = ball_points(p_bar, radius, samples, seed, tag=43, domain=s.domain)
    return all(row_rank(s.normals(p, idx)) == len(idx) for p in pts)


@dataclass
class InclusionReport:
    holds: bool
    radius_used: float
    anchor_active: tuple[int, ...]
    violations: list = field(default_factory=list)
    halvings: int = 0


def active_set_inclusion_check(
    s: Scenario, p_bar, v_bar, radius: float = 0.1, samples: int = 32,
    seed: int = DEFAULT_SEED, max_halvings: int = 6,
) -> InclusionReport:
    """Active sets of P(v_bar, p) for p near p_bar stay inside the anchor's active set.

    The radius is halved (up to ``max_halvings`` times) until no sample
    violates the inclusion.
    """
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    poly = instantiate(s, p_bar)
    res = project(poly, v_bar)
    if not res.optimal:
        raise Infeasible("C(p) is empty at the anchor")
    anchor = set(active_set(poly, res.x))
    r = radius
    violations: list = []
    for h in range(max_halvings + 1):
        violations = []
        for p in ball_points(p_bar, r, samples, seed, tag=45, domain=s.domain):
            pk = instantiate(s, p)
            rk = project(pk, v_bar)
            if not rk.optimal:
                violations.append({"p": p, "extra": None})
                continue
            extra = set(active_set(pk, rk.x)) - anchor
            if extra:
                violations.append({"p": p, "extra": tuple(sorted(extra))})
        if not violations:
            return InclusionReport(True, r, tuple(sorted(anchor)), [], h)
        r /= 2
    return InclusionReport(False, r * 2, tuple(sorted(anchor)), violations, max_halvings)


@dataclass
class CQReport:
    licq: bool
    mfcq: MfcqResult | None
    rcrcq: RcrcqReport
    x_bar: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def overall_rcrcq(self) -> bool:
        return self.rcrcq.holds


def cq_report(
    s: Scenario, p_bar, v_bar=None, x_bar=None, radius: float = 0.1, samples: int = 32,
    seed: int = DEFAULT_SEED,
) -> CQReport:
    """All three diagnostics at (p_bar, x_bar); x_bar defaults to P(v_bar, p_bar)."""
    poly = instantiate(s, p_bar)
    if x_bar is None:
        res = project(poly, v_bar)
        if not res.optimal:
            raise Infeasible("C(p) is empty at the anchor")
        x_bar = res.x
    notes = []
    try:
        mf = mfcq_check(poly, x_bar)
    except IndependenceViolation as err:
        mf = None
        notes.append(f"mfcq not applicable: {err}")
    if s.q == 0:
        notes.append("no equalities: RCRCQ coincides with CRCQ")
    rc = rcrcq_check(s, p_bar, x_bar, radius, samples, seed=seed)
    return CQReport(licq_check(poly, x_bar), mf, rc, np.asarray(x_bar, dtype=float), notes)
