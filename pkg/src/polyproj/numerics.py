"""Dense linear algebra kernel.

Rank decisions, Gram-Schmidt, coefficient recovery and the equality
constrained projection used by the active-set solver.  Everything is plain
numpy; nothing here calls an external optimisation routine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DependentInput, DependentRows, Inconsistent, NonFinite, NotInSpan

TAU_RANK = 1e-8
# rows whose largest entry is below this are treated as exact zero rows
ZERO_ROW = 1e-14
AUTO = "auto"


@dataclass(frozen=True)
class RankResult:
    rank: int
    pivots: tuple[float, ...]
    tolerance_used: float


def as_matrix(rows, n: int | None = None) -> np.ndarray:
    """Coerce ``rows`` to a finite 2-D float array (an empty list gives 0 x n)."""
    a = np.asarray(rows, dtype=float)
    if a.size == 0:
        return np.zeros((0, n if n is not None else (a.shape[-1] if a.ndim == 2 else 0)))
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has NaN/Inf entries")
    return a


def pivoted_qr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder triangularisation with column pivoting.

    Returns ``(R, perm)`` with ``a[:, perm] = Q @ R``; ``|diag(R)|`` is
    non-increasing, which is what makes it rank revealing.
    """
    r = np.array(a, dtype=float, copy=True)
    m, n = r.shape
    perm = np.arange(n)
    for k in range(min(m, n)):
        norms = np.linalg.norm(r[k:, k:], axis=0)
        j = k + int(np.argmax(norms))
        if j != k:
            r[:, [k, j]] = r[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
        x = r[k:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            break
        u = x.copy()
        u[0] += np.copysign(alpha, x[0]) if x[0] != 0 else alpha
        u /= np.linalg.norm(u)
        r[k:, k:] -= 2.0 * np.outer(u, u @ r[k:, k:])
        r[k + 1 :, k] = 0.0
    return r, perm


def rank_with_tolerance(rows, tol: float | str = AUTO) -> RankResult:
    """Numerical rank from pivot magnitudes of a column-pivoted QR.

    With ``tol="auto"`` the threshold is ``max(rows, cols) * eps * |r_11|``.
    """
    a = as_matrix(rows)
    if a.size == 0:
        raise ValueError("rank of an empty matrix is undefined")
    r, _ = pivoted_qr(a)
    k = min(a.shape)
    pivots = tuple(float(abs(r[i, i])) for i in range(k))
    if tol == AUTO:
        tol_used = float(max(a.shape) * np.finfo(float).eps * (pivots[0] if pivots else 0.0))
    else:
        tol_used = float(tol)
        if not tol_used > 0:
            raise ValueError("tol must be positive")
    rank = sum(1 for p in pivots if p > tol_used)
    return RankResult(rank, pivots, tol_used)


def scaled_rows(rows) -> np.ndarray:
    a = as_matrix(rows)
    if a.size == 0:
        return a
    scale = np.max(np.abs(a), axis=1)
    out = np.zeros_like(a)
    nz = scale > ZERO_ROW
    out[nz] = a[nz] / scale[nz, None]
    return out


def row_rank(rows, tol: float = TAU_RANK) -> int:
    """Rank of a family of vectors after scaling each to unit max-norm.

    Zero rows contribute nothing; an empty family has rank 0.
    """
    a = scaled_rows(rows)
    if a.shape[0] == 0:
        return 0
    if not np.any(a):
        return 0
    return rank_with_tolerance(a, tol).rank


def independent(rows, tol: float = TAU_RANK) -> bool:
    a = as_matrix(rows)
    return a.shape[0] == 0 or row_rank(a, tol) == a.shape[0]


def greedy_independent(rows, tol: float = TAU_RANK) -> list[int]:
    """Smallest-index greedy selection of a maximal independent subfamily."""
    a = as_matrix(rows)
    kept: list[int] = []
    for i in range(a.shape[0]):
        trial = kept + [i]
        if row_rank(a[trial], tol) == len(trial):
            kept = trial
    return kept


def gram_schmidt(vectors: Sequence, tol: float = TAU_RANK) -> list[np.ndarray]:
    """Orthogonal, unnormalised vectors e_k = u_k - sum_i <u_k, e_i>/|e_i|^2 e_i."""
    u = as_matrix(vectors)
    if not independent(u, tol):
        raise DependentInput("vectors are linearly dependent")
    es: list[np.ndarray] = []
    for uk in u:
        ek = uk.copy()
        for ei in es:
            ek -= (uk @ ei) / (ei @ ei) * ei
        es.append(ek)
    return es


def recover_coefficients(basis: Sequence, target, tol: float = 1e-9) -> np.ndarray:
    """Coefficients of ``target`` in an independent ``basis``.

    Expands the target in the Gram-Schmidt vectors and back-substitutes
    through the triangular relation between u_k and e_k.
    """
    u = as_matrix(basis)
    t = np.asarray(target, dtype=float)
    if not np.all(np.isfinite(t)):
        raise NonFinite("target has NaN/Inf entries")
    k = u.shape[0]
    if k == 0:
        if np.linalg.norm(t) > tol:
            raise NotInSpan("nonzero target with empty basis")
        return np.zeros(0)
    es = gram_schmidt(u)
    norms2 = [e @ e for e in es]
    coef_e = np.array([(t @ e) / n2 for e, n2 in zip(es, norms2)])
    lam = np.zeros(k)
    for j in range(k - 1, -1, -1):
        s = coef_e[j]
        for i in range(j + 1, k):
            s -= lam[i] * (u[i] @ es[j]) / norms2[j]
        lam[j] = s
    resid = np.linalg.norm(lam @ u - t)
    if resid > tol:
        raise NotInSpan(f"target not in span (residual {resid:.3e})")
    return lam


def solve_equality_kkt(E, d, v, *, allow_dependent: bool = False, tol: float = TAU_RANK):
    """Project ``v`` onto the affine set {x : E x = d}.

    Returns ``(x, mu)`` with ``v - x = E^T mu``.  Dependent rows raise
    :class:`DependentRows` unless ``allow_dependent``; then the greedy
    independent subset carries the multipliers and the remaining rows must be
    consistent with it.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFinite("v has NaN/Inf entries")
    n = v.shape[0]
    E = as_matrix(E, n)
    d = np.asarray(d, dtype=float).reshape(-1)
    m = E.shape[0]
    if m == 0:
        return v.copy(), np.zeros(0)
    keep = greedy_independent(E, tol)
    if len(keep) < m and not allow_dependent:
        raise DependentRows(f"rank {len(keep)} < {m} equality rows")
    Ek, dk = E[keep], d[keep]
    mu_k = np.zeros(0)
    x = v.copy()
    if keep:
        gram = Ek @ Ek.T
        mu_k = np.linalg.solve(gram, Ek @ v - dk)
        x = v - Ek.T @ mu_k
        # one step of iterative refinement
        corr = np.linalg.solve(gram, Ek @ x - dk)
        mu_k = mu_k + corr
        x = x - Ek.T @ corr
    mu = np.zeros(m)
    mu[keep] = mu_k
    if len(keep) < m:
        resid = np.abs(E @ x - d)
        if np.any(resid > 1e-9 * (1.0 + np.abs(d))):
            raise Inconsistent("dependent equality rows with incompatible right-hand sides")
    return x, mu
