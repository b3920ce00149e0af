"""The ten acceptance criteria, each at its stated tolerance and runtime limit.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import re

import numpy as np

from conftest import random_polyhedron
from polyproj.builtins import NAMES, builtin, ex1_projection, ex6_projection
from polyproj.cli import execute
from polyproj.cq import active_set_inclusion_check, licq_check, mfcq_check, rcrcq_check
from polyproj.numerics import recover_coefficients
from polyproj.projection import project, project_bruteforce
from polyproj.errors import Infeasible
from polyproj.representations import anchor_projection, enumerate_kbar, enumerate_L, stable_representation_check
from polyproj.sampling import ball_point, stream
from polyproj.scenario import instantiate
from polyproj.stability import discontinuity_probe, fit_estimate, gr_transplant_check, lipschitz_like_C


def test_criterion_01_example1(criterion):
    c = criterion(1, "ex1 discontinuous projection", limit=5)
    with c.run():
        s = builtin("ex1")
        v = np.array([-1.0, -1.0])
        for p, want in [(-0.5, (0, 0)), (-0.1, (0, 0)), (-0.01, (0, 0)), (0, (0, -1)), (0.01, (0, -1)), (0.5, (0, -1))]:
            x = project(instantiate(s, [p]), v).x
            assert np.max(np.abs(x - np.array(want))) <= 1e-8, (p, x)
            assert np.max(np.abs(x - ex1_projection(v, p))) <= 1e-8
        disc = discontinuity_probe(s, [0.0], v)
        c.note(f"innermost jump {disc.max_jump:.4f}")
        assert disc.max_jump >= 0.99
        fit = fit_estimate(s, [0.0], v, alpha=1)
        c.note(f"verdict {fit.verdict}")
        assert fit.verdict == "not-lipschitz"


def test_criterion_02_example2(criterion):
    c = criterion(2, "ex2 singleton sets", limit=5)
    with c.run():
        s = builtin("ex2")
        worst = 0.0
        # p ranges over the scenario domain, the largest ball where C(p) = {p}
        for k in range(100):
            p = ball_point(stream(2, 1, k), [0, 0], s.domain.radius, s.domain)
            v = ball_point(stream(2, 2, k), [0, 0], 5.0)
            worst = max(worst, float(np.max(np.abs(project(instantiate(s, p), v).x - p))))
        c.note(f"max |P(v,p) - p| {worst:.2e}")
        assert worst <= 1e-8
        poly = instantiate(s, [0, 0])
        assert not mfcq_check(poly, [0, 0]).holds
        assert not licq_check(poly, [0, 0])
        ll = lipschitz_like_C(s, [0, 0], [0, 0])
        c.note(f"l_est {ll.l_est:.4f}")
        assert 0.9 <= ll.l_est <= 1.1


def test_criterion_03_example5(criterion):
    c = criterion(3, "ex5 representations", limit=2)
    with c.run():
        s = builtin("ex5")
        for p in (-1, -0.1, 0, 0.1, 1):
            x = project(instantiate(s, [p]), [0, 1]).x
            assert np.max(np.abs(x)) <= 1e-8
        kb = [r.kbar for r in enumerate_kbar(s, [0], [0, 1])]
        assert kb == [(0,)]
        Ls = enumerate_L(s, [0], [0, 0], (0,))
        assert set(Ls) == {(), (1,), (2,)}
        c.note(f"kbar {kb} L {Ls} (0-based)")


def test_criterion_04_example6_pair(criterion):
    c = criterion(4, "ex6 / ex6s pair", limit=30)
    with c.run():
        ex6, ex6s = builtin("ex6"), builtin("ex6s")
        for p in (-0.9, -0.5, -0.1, 0, 0.1, 0.5, 0.9):
            for s in (ex6, ex6s):
                x = project(instantiate(s, [p]), [1, 1]).x
                assert np.max(np.abs(x - ex6_projection(p))) <= 1e-8
        for kbar in ((0, 1), (2,)):
            assert not stable_representation_check(ex6, [0], [1, 1], kbar).stable
        assert stable_representation_check(ex6s, [0], [1, 1], (2,)).stable
        fit = fit_estimate(ex6s, [0], [1, 1], alpha=1)
        c.note(f"EX6S fitted_l0 {fit.fitted_l0:.5f} {fit.verdict}")
        assert 1.34 <= fit.fitted_l0 <= 1.49 and fit.verdict == "lipschitz-certified"
        gr = gr_transplant_check(ex6s, [0], [1, 1], (2,), stability_checked=True)
        c.note(f"Gr pass rate {gr.pass_rate:.2f}")
        assert gr.pass_rate == 1.0


def test_criterion_05_oracle_equivalence(criterion):
    c = criterion(5, "projection vs brute-force oracle", limit=30)
    with c.run():
        rng = np.random.default_rng(5)
        disagreements = 0
        for _ in range(500):
            poly = random_polyhedron(rng, n=int(rng.integers(1, 5)), m=int(rng.integers(1, 7)))
            v = rng.normal(size=poly.n) * 2
            r = project(poly, v)
            try:
                o = project_bruteforce(poly, v)
            except Infeasible:
                disagreements += int(r.optimal)
                continue
            disagreements += int(not r.optimal or np.max(np.abs(r.x - o.x)) > 1e-7)
        c.note(f"{disagreements} disagreements on 500 instances")
        assert disagreements == 0


def test_criterion_06_firm_nonexpansiveness(criterion):
    c = criterion(6, "firm nonexpansiveness")
    with c.run():
        violations = 0
        cases = []
        for name in NAMES:
            s = builtin(name)
            cases.append((name, s, np.asarray(s.anchor_p, float), np.asarray(s.anchor_v, float)))
        rng = np.random.default_rng(6)
        polys = [random_polyhedron(rng, feasible=True) for _ in range(20)]
        for j, (name, s, p_bar, v_bar) in enumerate(cases):
            for k in range(200):
                rs = stream(6, j, k)
                p = ball_point(rs, p_bar, 0.1, s.domain)
                v1, v2 = ball_point(rs, v_bar, 2.0), ball_point(rs, v_bar, 2.0)
                poly = instantiate(s, p)
                dx = project(poly, v1).x - project(poly, v2).x
                violations += int(np.linalg.norm((v1 - v2) - 2 * dx) > np.linalg.norm(v1 - v2) + 1e-9)
        for poly in polys:
            for _ in range(200):
                v1, v2 = rng.normal(size=(2, poly.n)) * 3
                dx = project(poly, v1).x - project(poly, v2).x
                violations += int(np.linalg.norm((v1 - v2) - 2 * dx) > np.linalg.norm(v1 - v2) + 1e-9)
        c.note(f"{violations} violations over {200 * (len(cases) + len(polys))} pairs")
        assert violations == 0


def test_criterion_07_rcrcq_scan(criterion):
    c = criterion(7, "RCRCQ scan", limit=10)
    with c.run():
        h = builtin("hatc-demo")
        x = anchor_projection(h, h.anchor_p, h.anchor_v)
        for r in (0.5, 0.1, 0.02):
            rep = rcrcq_check(h, h.anchor_p, x, radius=r)
            assert rep.holds and all(sr.holds for sr in rep.subsets)
        rep = rcrcq_check(builtin("ex1"), [0.0], [0.0, 0.0], radius=0.1)
        bad = {sr.J: sr for sr in rep.failing()}
        assert (1,) in bad
        pair = (bad[(1,)].rank_at_anchor, bad[(1,)].max_rank_sampled)
        c.note(f"EX1 J=(1,) ranks {pair}")
        assert pair == (0, 1)


def test_criterion_08_coefficient_recovery_rate(criterion):
    c = criterion(8, "coefficient recovery rate")
    with c.run():
        # perturbed basis u_i + w_i/n, fixed target expressed over the limit basis
        rng = np.random.default_rng(0)
        U = rng.normal(size=(4, 4))
        W = rng.normal(size=(4, 4))
        lam_bar = rng.uniform(0.5, 2.0, size=4)
        target = lam_bar @ U
        ns = (10, 100, 1000)
        errs = [float(np.max(np.abs(recover_coefficients(U + W / n, target) - lam_bar))) for n in ns]
        C = errs[0] * ns[0]
        c.note("C fitted at n=10: %.3g; n*err = %s" % (C, ", ".join("%.3g" % (n * e) for n, e in zip(ns, errs))))
        assert all(e <= C / n * (1 + 1e-12) for n, e in zip(ns[1:], errs[1:]))
        assert errs[0] > errs[1] > errs[2]
        assert errs[1] * 5 <= errs[0] and errs[2] * 5 <= errs[1]


def test_criterion_09_active_set_inclusion(criterion):
    c = criterion(9, "active-set inclusion")
    with c.run():
        for name in ("ex2", "ex5", "ex6s"):
            s = builtin(name)
            rep = active_set_inclusion_check(s, s.anchor_p, s.anchor_v)
            c.note(f"{name} radius {rep.radius_used:g}")
            assert rep.holds and not rep.violations


def test_criterion_10_determinism(criterion):
    c = criterion(10, "certify determinism")
    with c.run():
        runs = [execute(["certify", "--scenario", "ex6s", "--seed", "42"]) for _ in range(2)]
        texts = [re.sub(r'"timestamp": "[^"]*"', "", t) for _, t, _ in runs]
        assert runs[0][0] == runs[1][0] == 0
        assert texts[0] == texts[1]
