"""Empirical certification of continuity estimates for the projection map.

The central estimate is

    ||(v1 - v2) - 2 [P(v1,p1) - P(v2,p2)]|| <= ||v1 - v2|| + l0 ||p1 - p2||**alpha

with alpha = 1/2 (Hoelder) or alpha = 1 (Lipschitz).  Moduli are fitted as
sample maxima on geometric shells around the anchor, so every reported
constant is a lower bound and verdicts depend on the fit staying bounded as
the shells shrink.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AnchorInsideSet, Infeasible
from .multipliers import best_band_representation
from .projection import is_feasible, normal_cone_contains, project
from .representations import anchor_projection, build_rkl, enumerate_kbar
from .sampling import (
    DEFAULT_R0, DEFAULT_SEED, DEFAULT_SHELLS, ball_point, geometric_radii, non_increasing, pmap,
    shell_vanishes, sphere_point, stream,
)
from .scenario import Scenario, instantiate

KAPPA0 = 1.0
P_GUARD = 1e-12
FIT_SLACK = 0.20
PAIRS = 64
COINCIDENT_EVERY = 8


def _project(s: Scenario, v, p) -> np.ndarray:
    res = project(instantiate(s, p), v)
    if not res.optimal:
        raise Infeasible(f"C(p) is empty at p={np.atleast_1d(p).tolist()}")
    return res.x


def _verdict(alpha: float, ok: bool) -> str:
    if alpha == 1:
        return "lipschitz-certified" if ok else "not-lipschitz"
    return "holder-certified" if ok else "not-holder"


@dataclass
class ShellFit:
    radius: float
    fitted_l0: float
    max_lhs_excess: float  # max of LHS - ||dv|| over pairs with p1 != p2
    fne_violation: float  # max of LHS - ||dv|| over pairs with p1 == p2
    pairs: int


@dataclass
class StabilityReport:
    alpha: float
    fitted_l0: float
    kappa0: float
    shells: list[ShellFit]
    verdict: str
    max_violation_at: float | None = None
    l0_input: float | None = None
    fne_violation: float = 0.0
    worst_pair: dict | None = None


def _pair(s, p_bar, v_bar, r, radius_v, seed, j, k):
    rng = stream(seed, 71, j, k)
    p1 = ball_point(rng, p_bar, r, s.domain)
    p2 = p1.copy() if k % COINCIDENT_EVERY == COINCIDENT_EVERY - 1 else ball_point(rng, p_bar, r, s.domain)
    if radius_v > 0:
        return p1, p2, ball_point(rng, v_bar, radius_v), ball_point(rng, v_bar, radius_v)
    return p1, p2, v_bar, v_bar


def fit_estimate(
    s: Scenario, p_bar, v_bar, alpha: float = 1.0, radius_p: float = DEFAULT_R0, radius_v: float = 0.0,
    n_pairs: int = PAIRS, seed: int = DEFAULT_SEED, shells: int = DEFAULT_SHELLS, l0_input: float | None = None,
) -> StabilityReport:
    """Fit l0 in the continuity estimate over pairs on shrinking parameter balls.

    ``radius_v = 0`` keeps v fixed at the anchor, which isolates the
    parameter dependence.
    """
    if alpha not in (0.5, 1, 1.0):
        raise ValueError("alpha must be 0.5 or 1")
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    fits: list[ShellFit] = []
    worst_pair = None
    worst_ratio = -np.inf
    max_viol = -np.inf
    fne = 0.0
    for j, r in enumerate(geometric_radii(radius_p, shells)):
        def one(k, j=j, r=r):
            p1, p2, v1, v2 = _pair(s, p_bar, v_bar, r, radius_v, seed, j, k)
            x1, x2 = _project(s, v1, p1), _project(s, v2, p2)
            dv = v1 - v2
            lhs = float(np.linalg.norm(dv - 2 * KAPPA0 * (x1 - x2)))
            return p1, p2, v1, v2, lhs, float(np.linalg.norm(dv)), float(np.linalg.norm(p1 - p2))

        fit, excess, shell_fne = 0.0, -np.inf, 0.0
        for p1, p2, v1, v2, lhs, ndv, ndp in pmap(one, range(n_pairs)):
            if ndp < P_GUARD:
                shell_fne = max(shell_fne, lhs - ndv)
                continue
            ratio = (lhs - ndv) / ndp**alpha
            fit = max(fit, ratio)
            excess = max(excess, lhs - ndv)
            if ratio > worst_ratio:
                worst_ratio = ratio
                worst_pair = {"p1": p1, "p2": p2, "v1": v1, "v2": v2, "lhs": lhs}
            if l0_input is not None:
                max_viol = max(max_viol, lhs - ndv - l0_input * ndp**alpha)
        fne = max(fne, shell_fne)
        fits.append(ShellFit(r, fit, excess, shell_fne, n_pairs))
    per_shell = [f.fitted_l0 for f in fits]
    overall = max(0.0, *per_shell)
    ok = bool(np.isfinite(overall)) and non_increasing(per_shell, FIT_SLACK, atol=1e-9)
    return StabilityReport(
        float(alpha), overall, KAPPA0, fits, _verdict(alpha, ok),
        float(max_viol) if l0_input is not None else None, l0_input, fne, worst_pair,
    )


@dataclass
class LipschitzLikeReport:
    l_est: float
    worst: dict | None
    shell_estimates: list[float] = field(default_factory=list)
    shell_stable: bool = True


def lipschitz_like_C(
    s: Scenario, p_bar, x_bar, radius_p: float = DEFAULT_R0, radius_x: float = 0.1,
    samples: int = PAIRS, seed: int = DEFAULT_SEED, shells: int = 1,
) -> LipschitzLikeReport:
    """Sampled Aubin constant: max dist(x1, C(p2)) / ||p1 - p2|| with x1 in C(p1) near x_bar."""
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    x_bar = np.asarray(x_bar, dtype=float)
    ests, worst, best = [], None, -1.0
    for j, r in enumerate(geometric_radii(radius_p, shells)):
        def one(k, j=j, r=r):
            rng = stream(seed, 81, j, k)
            p1 = ball_point(rng, p_bar, r, s.domain)
            p2 = ball_point(rng, p_bar, r, s.domain)
            x1 = _project(s, ball_point(rng, x_bar, radius_x), p1)
            res = project(instantiate(s, p2), x1)
            dist = float(np.linalg.norm(res.x - x1)) if res.optimal else np.inf
            return p1, p2, x1, dist, float(np.linalg.norm(p1 - p2))

        est = 0.0
        for p1, p2, x1, dist, ndp in pmap(one, range(samples)):
            if ndp < P_GUARD:
                continue
            ratio = dist / ndp
            est = max(est, ratio)
            if ratio > best:
                best = ratio
                worst = {"p1": p1, "p2": p2, "x1": x1, "dist": dist}
        ests.append(est)
    l_est = max(ests)
    stable = bool(np.isfinite(l_est)) and non_increasing(ests, FIT_SLACK, atol=1e-9)
    return LipschitzLikeReport(float(l_est), worst, ests, stable)


@dataclass
class GrWitness:
    p1: np.ndarray
    p2: np.ndarray
    x1: np.ndarray
    x1_normal: np.ndarray
    x2: np.ndarray | None
    x2_normal: np.ndarray | None
    L: tuple[int, ...] | None
    dist_x: float
    dist_normal: float
    dp: float
    shell: int
    bound: float = float("nan")
    passed: bool = False
    reason: str = ""


@dataclass
class GrReport:
    witnesses: list[GrWitness]
    ell: float
    pass_rate: float
    shell_ratios: list[float]
    flags: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.pass_rate == 1.0


def gr_transplant_check(
    s: Scenario, p_bar, v_bar, kbar, radius: float = DEFAULT_R0, samples: int = 32,
    seed: int = DEFAULT_SEED, shells: int = 4, radius_v: float = 0.0, eps: float = 0.2,
    stability_checked: bool = False, ell_margin: float = 1.2,
) -> GrReport:
    """Transplant points of gph N(.; C(p1)) to gph N(.; C(p2)) through R_{K,L}.

    For each pair the representation of ``x1'`` closest to the anchor band
    identifies L; then ``x2`` projects ``x1`` onto R_{K,L}(p2) and ``x2'``
    reuses the coefficients with the normals at p2.  l is fitted on the
    outermost shell (times ``ell_margin``) and verified on the inner ones.
    """
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    kbar = tuple(sorted(kbar))
    base = next((c for c in enumerate_kbar(s, p_bar, v_bar) if c.kbar == kbar), None)
    flags = [] if stability_checked else ["unverified-hypothesis"]
    if base is None:
        flags.append("kbar-not-a-base-representation")
        lam_bar = np.zeros(s.q + len(kbar))
    else:
        lam_bar = base.lambda_bar
    fixed = list(range(s.q)) + list(kbar)

    def one(args):
        j, r, k = args
        rng = stream(seed, 91, j, k)
        p1 = ball_point(rng, p_bar, r, s.domain)
        p2 = ball_point(rng, p_bar, r, s.domain)
        v1 = ball_point(rng, v_bar, radius_v) if radius_v > 0 else v_bar
        poly1 = instantiate(s, p1)
        x1 = _project(s, v1, p1)
        n1 = v1 - x1
        dp = float(np.linalg.norm(p1 - p2))
        w = GrWitness(p1, p2, x1, n1, None, None, None, np.inf, np.inf, dp, j)
        _, L, coef = best_band_representation(poly1, x1, n1, fixed, lam_bar, eps)
        if L is None or np.any(coef[s.q:] < -1e-12):
            w.reason = "no-representation"
            return w
        w.L = L
        rkl = build_rkl(s, kbar, L)
        res = project(instantiate(rkl.scenario, p2), x1)
        if not res.optimal:
            w.reason = "empty-derived-set"
            return w
        idx = fixed + list(L)
        poly2 = instantiate(s, p2)
        w.x2 = res.x
        w.x2_normal = poly2.rows[idx].T @ coef
        w.dist_x = float(np.linalg.norm(x1 - w.x2))
        w.dist_normal = float(np.linalg.norm(n1 - w.x2_normal))
        if not is_feasible(poly2, w.x2):
            w.reason = "x2-infeasible"
        elif not normal_cone_contains(poly2, w.x2, w.x2_normal):
            w.reason = "x2-normal-outside-cone"
        return w

    radii = geometric_radii(radius, shells)
    tasks = [(j, r, k) for j, r in enumerate(radii) for k in range(samples)]
    wits = pmap(one, tasks)

    def ratio(w: GrWitness) -> float:
        if w.dp < P_GUARD:
            return 0.0 if max(w.dist_x, w.dist_normal) <= 1e-9 else np.inf
        return max(w.dist_x, w.dist_normal) / w.dp

    shell_ratios = [max((ratio(w) for w in wits if w.shell == j), default=0.0) for j in range(len(radii))]
    ell = ell_margin * shell_ratios[0]
    for w in wits:
        w.bound = ell * w.dp
        if not w.reason:
            ok = w.dist_x <= w.bound + 1e-9 and w.dist_normal <= w.bound + 1e-9
            w.passed = ok
            if not ok:
                w.reason = "distance-bound"
    rate = sum(w.passed for w in wits) / len(wits) if wits else 1.0
    return GrReport(wits, float(ell), rate, shell_ratios, flags)


@dataclass
class DiscontinuityReport:
    max_jump: float
    jump_pair: dict | None
    shell_jumps: list[float]
    radii: list[float]
    discontinuous: bool


def discontinuity_probe(
    s: Scenario, p_bar, v_bar, radius: float = DEFAULT_R0, samples: int = PAIRS,
    seed: int = DEFAULT_SEED, shells: int = DEFAULT_SHELLS,
) -> DiscontinuityReport:
    """Largest ||P(v_bar,p1) - P(v_bar,p2)|| over pairs in each shrinking ball.

    ``max_jump`` is the innermost shell's value; a jump that does not shrink
    with the shells flags a discontinuity.
    """
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    radii = geometric_radii(radius, shells)
    jumps, pair, best = [], None, -1.0
    for j, r in enumerate(radii):
        def one(k, j=j, r=r):
            rng = stream(seed, 101, j, k)
            p1 = ball_point(rng, p_bar, r, s.domain)
            p2 = ball_point(rng, p_bar, r, s.domain)
            x1, x2 = _project(s, v_bar, p1), _project(s, v_bar, p2)
            return p1, p2, x1, x2, float(np.linalg.norm(x1 - x2))

        jmax = 0.0
        for p1, p2, x1, x2, jump in pmap(one, range(samples)):
            jmax = max(jmax, jump)
            if j == len(radii) - 1 and jump > best:
                best = jump
                pair = {"p1": p1, "p2": p2, "x1": x1, "x2": x2}
        jumps.append(jmax)
    inner, outer = jumps[-1], jumps[0]
    disc = bool(inner > 1e-8 and inner >= 0.5 * outer)
    return DiscontinuityReport(float(inner), pair, jumps, radii, disc)


@dataclass
class GphLiminfReport:
    holds: bool
    shell_max_dist: list[float]
    radii: list[float]


def gph_liminf_check(
    s: Scenario, p_bar, v_bar, radii=None, samples: int = 32, seed: int = DEFAULT_SEED,
) -> GphLiminfReport:
    """(P(v_bar,p), v_bar - P(v_bar,p)) tends to the anchor pair as p -> p_bar."""
    radii = list(radii) if radii is not None else geometric_radii(DEFAULT_R0, DEFAULT_SHELLS)
    p_bar = np.atleast_1d(np.asarray(p_bar, dtype=float))
    v_bar = np.asarray(v_bar, dtype=float)
    x_bar = anchor_projection(s, p_bar, v_bar)
    if np.linalg.norm(v_bar - x_bar) <= 1e-12 * (1 + np.linalg.norm(v_bar)):
        raise AnchorInsideSet("v_bar lies in C(p_bar)")
    maxima = []
    for j, r in enumerate(radii):
        worst = 0.0
        for k in range(samples):
            p = sphere_point(stream(seed, 111, j, k), p_bar, r, s.domain)
            res = project(instantiate(s, p), v_bar)
            if not res.optimal:
                worst = np.inf
                break
            dx = res.x - x_bar
            # the normal component differs by -dx, so the pair distance is sqrt(2)||dx||
            worst = max(worst, float(np.sqrt(2.0) * np.linalg.norm(dx)))
        maxima.append(worst)
    return GphLiminfReport(shell_vanishes(radii, maxima), maxima, radii)
