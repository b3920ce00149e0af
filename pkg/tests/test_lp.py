import itertools

import numpy as np
import pytest

from polyproj.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog_max


def vertex_oracle(c, A, b):
    """Maximise c.z over {A z <= b} by enumerating basic solutions (bounded problems)."""
    n = len(c)
    best = -np.inf
    for rows in itertools.combinations(range(A.shape[0]), n):
        B = A[list(rows)]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        z = np.linalg.solve(B, b[list(rows)])
        if np.all(A @ z <= b + 1e-9):
            best = max(best, c @ z)
    return best


def test_small_example():
    r = linprog_max([1, 1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert r.status == OPTIMAL
    np.testing.assert_allclose(r.z, [1.6, 1.2])


def test_infeasible_and_unbounded():
    assert linprog_max([1], A_ub=[[1]], b_ub=[-1]).status == INFEASIBLE
    assert linprog_max([1, 0], A_ub=[[0, 1]], b_ub=[1]).status == UNBOUNDED


def test_degenerate_problem_terminates():
    # classic cycling example (Beale); Bland's rule must terminate
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    r = linprog_max(c, A_ub=A, b_ub=[0, 0, 1])
    assert r.status == OPTIMAL
    assert r.objective == pytest.approx(0.05)


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, 4))
        e = int(rng.integers(0, 2))
        c = rng.normal(size=n)
        Au = np.vstack([rng.normal(size=(k, n)), np.eye(n)])
        bu = np.concatenate([rng.normal(size=k) + 1, np.full(n, 2.0)])
        Ae = rng.normal(size=(e, n))
        be = Ae @ rng.uniform(0, 1, size=n)
        r = linprog_max(c, Au, bu, Ae if e else None, be if e else None)
        A_all = np.vstack([Au, -np.eye(n), Ae, -Ae])
        b_all = np.concatenate([bu, np.zeros(n), be, -be])
        ref = vertex_oracle(c, A_all, b_all)
        if ref == -np.inf:
            assert r.status == INFEASIBLE
        else:
            assert r.status == OPTIMAL
            assert r.objective == pytest.approx(ref, abs=1e-7)
            assert np.all(Au @ r.z <= bu + 1e-8) and np.all(r.z >= -1e-12)
