"""Small dense linear programs by the two-phase tableau simplex method.

Entering and leaving variables follow Bland's smallest-index rule, so the
method terminates on degenerate problems.  Sizes here are tiny (a handful of
rows), which is why a dense tableau is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CycleLimit

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    z: np.ndarray | None
    objective: float
    iterations: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0.0:
            T[i] -= T[i, c] * T[r]


def _iterate(T, basis, cost, allowed, max_iter, tol) -> tuple[str, int]:
    m = T.shape[0]
    for it in range(max_iter):
        rc = cost[:-1] - cost[basis] @ T[:, :-1]
        enter = next((j for j in allowed if rc[j] > tol), None)
        if enter is None:
            return OPTIMAL, it
        col = T[:, enter]
        leave, best = None, np.inf
        for i in range(m):
            if col[i] > tol:
                ratio = T[i, -1] / col[i]
                if ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            return UNBOUNDED, it
        _pivot(T, leave, enter)
        basis[leave] = enter
    raise CycleLimit(f"simplex iteration cap {max_iter} reached")


def simplex_max(c, A_eq, b_eq, max_iter: int = 5000, tol: float = 1e-11) -> LPResult:
    """Maximise ``c @ z`` subject to ``A_eq z = b_eq``, ``z >= 0``."""
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    m, N = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    # columns: N structural, m artificial, then rhs
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(N, N + m))
    cost1 = np.concatenate([np.zeros(N), -np.ones(m), [0.0]])
    status, it1 = _iterate(T, basis, cost1, range(N + m), max_iter, tol)
    if T[:, -1] @ cost1[basis] < -1e-9 * max(1.0, float(np.abs(b).max(initial=0.0))):
        return LPResult(INFEASIBLE, None, -np.inf, it1)
    # drive artificial variables out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= N:
            j = next((j for j in range(N) if abs(T[i, j]) > 1e-9), None)
            if j is None:
                continue
            _pivot(T, i, j)
            basis[i] = j
        keep.append(i)
    T = np.hstack([T[keep, :N], T[keep, -1:]])
    basis = [basis[i] for i in keep]
    cost2 = np.concatenate([c, [0.0]])
    status, it2 = _iterate(T, basis, cost2, range(N), max_iter, tol)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, np.inf, it1 + it2)
    z = np.zeros(N)
    z[basis] = T[:, -1]
    return LPResult(OPTIMAL, z, float(c @ z), it1 + it2)


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, **kw) -> LPResult:
    """Maximise ``c @ z`` with ``A_ub z <= b_ub``, ``A_eq z = b_eq``, ``z >= 0``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    N = c.shape[0]
    A_ub = np.zeros((0, N)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, N)
    A_eq = np.zeros((0, N)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, N)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    k = A_ub.shape[0]
    A = np.vstack([
        np.hstack([A_ub, np.eye(k)]),
        np.hstack([A_eq, np.zeros((A_eq.shape[0], k))]),
    ])
    res = simplex_max(np.concatenate([c, np.zeros(k)]), A, np.concatenate([b_ub, b_eq]), **kw)
    if res.z is not None:
        res.z = res.z[:N]
    return res
