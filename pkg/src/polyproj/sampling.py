"""Deterministic sampling helpers shared by the probes.

Every random draw comes from a generator keyed by ``(seed, tag, *indices)``
so that results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_SEED = 42
DEFAULT_R0 = 0.1
DEFAULT_SHELLS = 7


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *[int(k) for k in keys]])


def geometric_radii(r0: float = DEFAULT_R0, shells: int = DEFAULT_SHELLS) -> list[float]:
    return [r0 * 2.0**-j for j in range(shells)]


def _direction(rng: np.random.Generator, d: int) -> np.ndarray:
    while True:
        u = rng.standard_normal(d)
        nu = np.linalg.norm(u)
        if nu > 1e-12:
            return u / nu


def ball_point(rng, center, radius: float, domain=None, tries: int = 100) -> np.ndarray:
    """Uniform point in the ball, rejected until it lies in ``domain``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = center.shape[0]
    if d == 0:
        return center.copy()
    for _ in range(tries):
        p = center + radius * rng.uniform() ** (1.0 / d) * _direction(rng, d)
        if domain is None or domain.contains(p):
            return p
    return center.copy()


def sphere_point(rng, center, radius: float, domain=None, tries: int = 100) -> np.ndarray:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = center.shape[0]
    if d == 0:
        return center.copy()
    for _ in range(tries):
        p = center + radius * _direction(rng, d)
        if domain is None or domain.contains(p):
            return p
    return center.copy()


def ball_points(center, radius: float, count: int, seed: int, tag: int = 0, domain=None):
    return np.array(
        [ball_point(stream(seed, tag, k), center, radius, domain) for k in range(count)]
    ).reshape(count, -1)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("POLYPROJ_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map, threaded when ``POLYPROJ_THREADS`` > 1."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def non_increasing(values: Sequence[float], slack: float, atol: float = 1e-12) -> bool:
    """True when each value is at most (1 + slack) times its predecessor."""
    return all(b <= (1.0 + slack) * a + atol for a, b in zip(values, values[1:]))


def shell_vanishes(
    radii: Sequence[float], maxima: Sequence[float], dist_tol: float = 1e-4, slack: float = 0.10,
    min_slope: float = 0.25,
) -> bool:
    """Finite proxy for "the shell maxima tend to 0 as the radius shrinks".

    Requires maxima non-increasing (within ``slack``) and either an innermost
    value below ``dist_tol`` or a log-log decay slope of at least ``min_slope``
    between the outermost and innermost shells.
    """
    if not maxima or not all(np.isfinite(maxima)):
        return False
    if not non_increasing(maxima, slack):
        return False
    inner = maxima[-1]
    if inner <= dist_tol:
        return True
    outer = maxima[0]
    if len(radii) < 2 or outer <= 0:
        return False
    slope = np.log(inner / outer) / np.log(radii[-1] / radii[0])
    return bool(slope >= min_slope)
