"""Shared generators and the acceptance-line reporter."""

from __future__ import annotations

import math

import numpy as np
import pytest

from spheretwobody.core import FullState

ACCEPTANCE_LINES: list[str] = []


def random_unit(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_full_state(rng, scale: float = 1.0, min_gap: float = 0.2) -> FullState:
    """Unit positions at angle in [min_gap, pi - min_gap] and random tangent momenta."""
    while True:
        q1, q2 = random_unit(rng), random_unit(rng)
        c = float(q1 @ q2)
        if math.cos(min_gap) > abs(c):
            break
    p1 = rng.normal(size=3) * scale
    p2 = rng.normal(size=3) * scale
    p1 -= (p1 @ q1) * q1
    p2 -= (p2 @ q2) * q2
    return FullState(tuple(q1), tuple(q2), tuple(p1), tuple(p2))


def random_poly(rng, n: int, radius: float = 5.0) -> np.ndarray:
    """States drawn uniformly from the 5-ball of ``radius``."""
    v = rng.normal(size=(n, 5))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(size=(n, 1)) ** 0.2


def random_reduced(rng, n: int, m_scale: float = 3.0, margin: float = 0.1) -> np.ndarray:
    m = rng.uniform(-m_scale, m_scale, (n, 3))
    q = rng.uniform(margin, math.pi - margin, (n, 1))
    p = rng.uniform(-m_scale, m_scale, (n, 1))
    return np.hstack([m, q, p])


def random_chart(rng, n: int, r_range=(0.05, 1.5), margin: float = 0.1) -> np.ndarray:
    m = rng.uniform(-2, 2, (n, 2))
    r = rng.uniform(*r_range, (n, 1))
    a1 = rng.uniform(margin, math.pi - margin, (n, 1))
    a2 = rng.uniform(0, 2 * math.pi, (n, 1))
    return np.hstack([m, r, a1, a2])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def report_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
