import contextlib
import time

import numpy as np
import pytest

from polyproj.builtins import builtin

_ACCEPTANCE: list[tuple[int, bool, str, float]] = []


class Criterion:
    """Records one acceptance criterion; the outcome is printed at session end."""

    def __init__(self, number: int, title: str, limit: float | None = None):
        self.number = number
        self.title = title
        self.limit = limit
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    @contextlib.contextmanager
    def run(self):
        t0 = time.perf_counter()
        ok = False
        try:
            yield self
            ok = True
        finally:
            elapsed = time.perf_counter() - t0
            if ok and self.limit is not None and elapsed > self.limit:
                ok = False
                self.note(f"runtime {elapsed:.2f}s exceeds {self.limit}s")
            _ACCEPTANCE.append((self.number, ok, f"{self.title}; " + "; ".join(self.details), elapsed))
        if self.limit is not None:
            assert elapsed <= self.limit, f"runtime {elapsed:.2f}s exceeds {self.limit}s"


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, text, elapsed in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s) {text}")


@pytest.fixture
def ex(request):
    return builtin(request.param)


def random_polyhedron(rng, n=None, m=None, feasible=None):
    """Random mixed equality/inequality polyhedron for property tests."""
    from polyproj.scenario import Polyhedron

    n = n or int(rng.integers(1, 5))
    m = m or int(rng.integers(1, 7))
    q = int(rng.integers(0, min(m, n) + 1)) if rng.uniform() < 0.5 else 0
    A = rng.normal(size=(m, n))
    if rng.uniform() < 0.3:
        A[rng.integers(m)] = A[rng.integers(m)] * rng.choice([1.0, -1.0, 2.0])
    b = rng.normal(size=m)
    if feasible or (feasible is None and rng.uniform() < 0.5):
        x0 = rng.normal(size=n)
        b = A @ x0 + np.abs(rng.normal(size=m)) * (rng.uniform(size=m) < 0.5)
        b[:q] = A[:q] @ x0
    return Polyhedron.from_arrays(A[:q], b[:q], A[q:], b[q:], n=n)
