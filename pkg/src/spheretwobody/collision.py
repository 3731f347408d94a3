"""Numerical verification of the collision asymptotics on integrated runs.

Every check works on the final approach of a poly-coordinate collision run:
the stretch after the last local minimum of xi, along which xi grows
monotonically to the collision threshold.  Samples are drawn from the
dense output at log-uniform xi values so that every decade of xi carries
the same weight in the regressions.

Collisions are a codimension-one phenomenon on each level set, so generic
initial data bounce rather than collide.  ``tune_collision_seed`` moves one
component of a seed by bisection until the run lands on the collision
manifold to double precision, and ``COLLISION_SEEDS`` holds the results
tuned under ``COLLISION_CONFIG``.  The integrator is deterministic, so a
seed integrated with that configuration reproduces the tuned run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import stats

from . import vectorfields as vf
from .core import Chart, DomainError, chart_pullback, weighted_radius
from .integrate import (
    AmbiguousTailError,
    HandoffError,
    IntegratorConfig,
    Trajectory,
    _dense_eval,
    continue_regularised,
    integrate,
    pole_fit,
)

COLLISION_CONFIG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-16, xi_collision_threshold=1e7)

# Seeds (m1, m2, m3, xi, p) tuned in m3 onto the collision manifold under
# COLLISION_CONFIG.  The bracket is the last pair of floats on opposite
# sides of the manifold; each seed is the endpoint whose run reaches the
# threshold.
COLLISION_SEEDS: dict[str, tuple[float, float, float, float, float]] = {
    "seed-a": (2.0, 1.0, 0.3936790287087686, 1.0, 0.0),
    "seed-b": (1.0, 0.5, 0.19916842799080386, 1.0, 0.0),
    "seed-c": (0.5, -1.0, -0.8405950742928611, 0.5, 3.600215910088572e-13),
    "seed-d": (3.0, 0.2, -0.7488310282775836, 1.0, 1.0),
    "seed-e": (1.5, -0.7, -0.20564476198480372, 1.5, 0.3),
}

# The untuned seed (2, 1, 0.3, 1, 0) bounces; seed-a moves its m3 onto the manifold.
GENERIC_SEED = (2.0, 1.0, 0.3, 1.0, 0.0)

RELATIONS = ("precedes", "dominates", "comparable", "bounded-by", "at-least")
BOUNDED_SLOPE = 0.05
DEFAULT_WINDOW = (1e2, 1e6)
# Past xi ~ 1e4 a tuned seed's residual 2 m3 xi - m2 is dominated by roundoff
# pushed off the (unstable) collision manifold, growing like xi^1.5 from a
# floor near 1e-12.  Checks sensitive to that floor use two decades only.
RESOLVED_WINDOW = (1e2, 1e4)
CHECK_WINDOWS = {"(2*m3*xi-m2)*sqrt(xi)": RESOLVED_WINDOW}


class InsufficientTailError(ValueError):
    """The trajectory does not reach far enough into the collision tail."""


class WindowTooShortError(ValueError):
    """A fit window spans less than the required number of decades."""


class ExtrapolationError(ValueError):
    """The omega-limit extrapolation does not converge."""


# --- Records ---

@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    stderr: float
    intercept: float
    n_points: int


@dataclass(frozen=True)
class AsymptoticVerdict:
    """Outcome of one check; ``slope`` is None when no regression applies."""
    name: str
    relation: str | None
    window: tuple[float, float]
    max_ratio: float
    slope: float | None
    stderr: float | None
    passed: bool
    detail: str = ""

    def __post_init__(self) -> None:
        if self.relation is not None and self.relation not in RELATIONS:
            raise DomainError(f"unknown relation {self.relation!r}")

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "window": list(self.window),
            "max_ratio": _finite_or_none(self.max_ratio),
            "slope": _finite_or_none(self.slope),
            "stderr": _finite_or_none(self.stderr),
            "pass": bool(self.passed),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class IDiagnostics:
    t: np.ndarray
    xi: np.ndarray
    I: np.ndarray
    I_dot: np.ndarray
    I_ddot: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        """The series I_ddot / xi."""
        return self.I_ddot / self.xi


@dataclass(frozen=True)
class OmegaLimit:
    value: tuple[float, float, float]
    error: tuple[float, float, float]
    casimir: float
    window: tuple[float, float]

    @property
    def casimir_residual(self) -> float:
        m1, m2, _ = self.value
        return m1 * m1 + m2 * m2 - self.casimir

    @property
    def casimir_error(self) -> float:
        (m1, m2, _), (e1, e2, _) = self.value, self.error
        return 2 * abs(m1) * e1 + 2 * abs(m2) * e2 + self.error[2] ** 2


@dataclass(frozen=True)
class CollisionDiagnostics:
    I: IDiagnostics
    arclength_partial: dict[float, float]
    omega_limit: OmegaLimit | None


@dataclass(frozen=True)
class CollisionReport:
    name: str
    verdicts: tuple[AsymptoticVerdict, ...]
    t_star: float
    diagnostics: CollisionDiagnostics | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_record(self) -> dict:
        return {"name": self.name, "t_star": self.t_star, "pass": self.passed,
                "verdicts": [v.to_record() for v in self.verdicts], **self.extra}


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# --- Trajectory plumbing ---

def as_poly_trajectory(traj: Trajectory) -> Trajectory:
    """View a poly, reduced or invariant-plane (xi, p) run in poly coordinates."""
    if traj.system == "poly":
        return traj
    if traj.system == "invariant-plane":
        m1 = -vf._sign(traj.params["sign"]) * math.sqrt(traj.params["C"])
        n = len(traj.times)
        const = np.array([m1, 0.0, 0.0])
        states = np.column_stack([np.tile(const, (n, 1)), traj.states])
        dense = np.zeros((traj.dense.shape[0], 5, 5))
        dense[:, 0, :3] = const
        dense[:, :, 3:] = traj.dense
        return _derived(traj, states, dense)
    if traj.system == "reduced":
        raise DomainError("reduced runs carry no poly dense output; integrate the poly system")
    raise DomainError(f"no poly view of a {traj.system} trajectory")


def _derived(traj, states, dense) -> Trajectory:
    C = float(np.sum(states[0, :3] ** 2))
    H = float(vf.hamiltonian_poly(states[0]))
    return Trajectory("poly", ("m1", "m2", "m3", "xi", "p"), traj.times.copy(), states,
                      traj.drift.copy(), dense, traj.status, traj.terminal_event, (H, C),
                      dict(traj.params))


def final_approach_start(traj: Trajectory) -> int:
    """Index of the last local minimum of xi (start of the monotone final approach)."""
    xi = traj.component("xi")
    i = len(xi) - 1
    while i > 0 and xi[i - 1] < xi[i]:
        i -= 1
    return i


def tail_xi_max(traj: Trajectory) -> float:
    return float(traj.component("xi")[-1])


def sample_by_xi(traj: Trajectory, xi_values) -> tuple[np.ndarray, np.ndarray]:
    """Times and states where the final approach reaches each requested xi.

    Each crossing is located by bisection on the dense output of the step
    that contains it.
    """
    traj = as_poly_trajectory(traj)
    xs = np.asarray(xi_values, float)
    i0 = final_approach_start(traj)
    xi = traj.component("xi")[i0:]
    if xs.size and (xs.min() < xi[0] or xs.max() > xi[-1]):
        raise InsufficientTailError(
            f"requested xi range [{xs.min():.3g}, {xs.max():.3g}] outside final approach "
            f"[{xi[0]:.3g}, {xi[-1]:.3g}]")
    j = np.clip(np.searchsorted(xi, xs, side="right") - 1, 0, len(xi) - 2)
    coef = traj.dense[i0 + j]
    lo, hi = np.zeros(len(xs)), np.ones(len(xs))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        v = _dense_eval(coef, mid[:, None])[:, 3]
        below = v < xs
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    theta = 0.5 * (lo + hi)
    t0 = traj.times[i0 + j]
    h = traj.times[i0 + j + 1] - t0
    return t0 + theta * h, _dense_eval(coef, theta[:, None])


def log_grid(lo: float, hi: float, per_decade: int = 40) -> np.ndarray:
    n = max(int(math.ceil(per_decade * math.log10(hi / lo))) + 1, 3)
    return np.geomspace(lo, hi, n)


def _tail_window(traj: Trajectory, window, min_decades: float) -> tuple[float, float]:
    lo, hi = window
    hi = min(hi, tail_xi_max(traj))
    if hi < 1e4:
        raise InsufficientTailError(f"tail reaches only xi = {tail_xi_max(traj):.3g}; need 1e4")
    if math.log10(hi / lo) < min_decades - 1e-12:
        raise InsufficientTailError(f"window [{lo:.3g}, {hi:.3g}] spans under {min_decades} decades")
    return lo, hi


# --- I = 4 sin²(q/2) diagnostics ---

def i_diagnostics(traj: Trajectory) -> IDiagnostics:
    """Chord-gap quantity I, its derivatives and the ratio series along a run.

    I_ddot follows the closed form obtained by differentiating I twice
    along the equal-mass system.
    """
    if traj.system == "reduced":
        m1, m2, m3, q, p = traj.states.T
        xi = np.cos(q) / np.sin(q)
    else:
        m1, m2, m3, xi, p = as_poly_trajectory(traj).states.T
    return _i_series(traj.times, m1, m2, m3, xi, p)


def _i_series(t, m1, m2, m3, xi, p) -> IDiagnostics:
    w = np.sqrt(1 + xi * xi)
    sin_q = 1 / w
    cos_q = xi / w
    # 2(1 - cos q) without cancellation for large positive xi.
    I = np.where(xi > 0, 2 / (w * (w + xi)), 2 * (1 - cos_q))
    qdot = 2 * p - m1
    I_dot = 2 * sin_q * qdot
    I_ddot = (2 * cos_q * qdot**2 - 4 / sin_q * (1 + m2 * m3 - 2 * m3 * m3 * xi)
              - 2 * cos_q * (-m2 * m2 + m3 * m3 + 2 * m2 * m3 * xi))
    return IDiagnostics(np.asarray(t, float), xi, I, I_dot, I_ddot)


# --- Fitting ---

def fit_power_law(xs, ys, window: tuple[float, float] | None = None,
                  min_decades: float = 1.0) -> PowerLawFit:
    """Least-squares slope of log(ys) against log(xs) over ``window``."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if window is not None:
        sel = (xs >= window[0]) & (xs <= window[1])
        xs, ys = xs[sel], ys[sel]
    if xs.size < 3:
        raise WindowTooShortError("need at least three points in the window")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("power-law fit needs positive data")
    if math.log10(xs.max() / xs.min()) < min_decades - 1e-12:
        raise WindowTooShortError(f"window spans under {min_decades} decade(s) of x")
    res = stats.linregress(np.log(xs), np.log(ys))
    return PowerLawFit(float(res.slope), float(res.stderr), float(res.intercept), int(xs.size))


def bound_verdict(name: str, xi: np.ndarray, ratio: np.ndarray,
                  window: tuple[float, float]) -> AsymptoticVerdict:
    """Verdict for "numerator ≼ denominator" given the sampled ratio series."""
    a = np.abs(ratio)
    if not np.all(np.isfinite(a)):
        return AsymptoticVerdict(name, "bounded-by", window, math.inf, None, None, False,
                                 "non-finite ratio")
    mx = float(a.max())
    if mx == 0.0:
        return AsymptoticVerdict(name, "bounded-by", window, 0.0, None, None, True,
                                 "identically zero numerator")
    pos = a > 0
    fit = stats.linregress(np.log(xi[pos]), np.log(a[pos]))
    ok = bool(fit.slope <= BOUNDED_SLOPE)
    return AsymptoticVerdict(name, "bounded-by", window, mx, float(fit.slope), float(fit.stderr), ok)


BOUND_CHECKS: dict[str, Callable] = {
    "m3*xi": lambda m1, m2, m3, xi, p: m3 * xi,
    "(2*m3*xi-m2)*sqrt(xi)": lambda m1, m2, m3, xi, p: (2 * m3 * xi - m2) * np.sqrt(xi),
    "(p+sqrt(xi)-m1/2)*sqrt(xi)": lambda m1, m2, m3, xi, p: (p + np.sqrt(xi) - m1 / 2) * np.sqrt(xi),
}

NEGATIVE_CONTROL = {"m3*xi^2": lambda m1, m2, m3, xi, p: m3 * xi * xi}


def verify_bounds(traj: Trajectory, window: tuple[float, float] | None = None,
                  extra: dict[str, Callable] | None = None) -> list[AsymptoticVerdict]:
    """Bounded-ratio verdicts for the claimed tail estimates (plus ``extra``).

    With ``window`` None each check uses its entry in CHECK_WINDOWS, falling
    back to DEFAULT_WINDOW; an explicit window applies to every check.
    """
    traj = as_poly_trajectory(traj)
    checks = dict(BOUND_CHECKS)
    checks.update(extra or {})
    samples = {}
    out = []
    for name, fn in checks.items():
        w = window or CHECK_WINDOWS.get(name, DEFAULT_WINDOW)
        lo, hi = _tail_window(traj, w, 2.0)
        if (lo, hi) not in samples:
            samples[(lo, hi)] = sample_by_xi(traj, log_grid(lo, hi))[1]
        m1, m2, m3, xi, p = samples[(lo, hi)].T
        out.append(bound_verdict(name, xi, fn(m1, m2, m3, xi, p), (lo, hi)))
    return out


# --- Arclength on the Casimir sphere ---

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def casimir_sphere_arclength(traj: Trajectory, xi_max: float) -> float:
    """Length of the curve t -> m(t) up to the first time xi reaches ``xi_max``.

    Five-point Gauss-Legendre quadrature on every step of the dense output.
    """
    traj = as_poly_trajectory(traj)
    xi = traj.component("xi")
    if not xi_max > xi[0] or xi.max() < xi_max:
        raise DomainError(f"xi_max = {xi_max} outside the trajectory's range")
    k = int(np.argmax(xi >= xi_max))
    t_end = _first_crossing_time(traj, k, xi_max)
    theta = 0.5 * (_GL_X + 1)
    total = 0.0
    for i in range(k):
        t0, t1 = traj.times[i], min(traj.times[i + 1], t_end)
        if t1 <= t0:
            break
        frac = (t1 - t0) / (traj.times[i + 1] - t0)
        ys = _dense_eval(np.repeat(traj.dense[i][None], 5, 0), (theta * frac)[:, None])
        md = np.stack(vf.poly_field(*ys.T)[:3], axis=1)
        total += 0.5 * (t1 - t0) * float(_GL_W @ np.linalg.norm(md, axis=1))
    return total


def _first_crossing_time(traj: Trajectory, k: int, level: float) -> float:
    if k == 0:
        return float(traj.times[0])
    coef = traj.dense[k - 1]
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _dense_eval(coef[None], np.array([[mid]]))[0, 3] < level:
            lo = mid
        else:
            hi = mid
    t0 = traj.times[k - 1]
    return float(t0 + 0.5 * (lo + hi) * (traj.times[k] - t0))


def arclength_tail_constant(traj: Trajectory, window: tuple[float, float] = (1e2, 1e3)) -> float:
    """Constant c of the tail model |dm/dxi| <= c / xi², fitted on ``window``.

    K(xi) = xi² |m_dot| / xi_dot is sampled on the final approach and c is
    its maximum over the window.
    """
    _, ys = sample_by_xi(traj, log_grid(*window, per_decade=200))
    f = np.array(vf.poly_field(*ys.T))
    K = ys[:, 3] ** 2 * np.linalg.norm(f[:3], axis=0) / f[3]
    return float(np.max(K))


def arclength_cauchy_check(traj: Trajectory, fit_window: tuple[float, float] = (1e2, 1e3)
                           ) -> tuple[AsymptoticVerdict, dict[float, float]]:
    """Tail decrements L(xi_end) - L(xi_a) against c / xi_a for decades xi_a past the fit window."""
    traj = as_poly_trajectory(traj)
    end = tail_xi_max(traj)
    c = arclength_tail_constant(traj, fit_window)
    marks = [10.0**k for k in range(2, 20) if 10.0**k < end * (1 - 1e-12)]
    L = {x: casimir_sphere_arclength(traj, x) for x in marks}
    L[end] = casimir_sphere_arclength(traj, end * (1 - 1e-12))
    worst = 0.0
    for x in marks:
        if x >= fit_window[1]:
            dec = L[end] - L[x]
            # Constant m (c = 0) must give a zero decrement.
            worst = max(worst, dec * x / c if c > 0 else (0.0 if dec == 0 else math.inf))
    ok = worst <= 1.0
    v = AsymptoticVerdict("arclength tail decrement / (c/xi)", "bounded-by", (fit_window[1], end),
                          worst, None, None, ok, f"c = {c:.6g}")
    return v, L


# --- Omega limit ---

def estimate_omega_limit(traj: Trajectory, window: tuple[float, float] = (1e4, math.inf),
                         order: int = 3, per_decade: int = 60) -> OmegaLimit:
    """Extrapolate m(xi) to xi = infinity in powers of xi^(-1/2).

    Fits of orders ``order`` and ``order - 1`` are compared; their
    difference in the constant term is the error bar, floored by the
    Casimir drift of the run and a few ulps of the value.
    """
    traj = as_poly_trajectory(traj)
    end = tail_xi_max(traj)
    lo, hi = window[0], min(window[1], end)
    if end < 1e4 or hi / lo < 10 * (1 - 1e-12):
        raise InsufficientTailError(f"tail reaches only xi = {end:.3g}; need a decade past {lo:.3g}")
    C = float(traj.invariants0[1])
    m0 = traj.states[0, :3]
    if np.all(traj.states[:, :3] == m0):
        return OmegaLimit(tuple(float(v) for v in m0), (0.0, 0.0, 0.0), C, (lo, hi))
    _, ys = sample_by_xi(traj, log_grid(lo, hi, per_decade))
    s = ys[:, 3] ** -0.5
    fits = []
    for K in (order - 1, order):
        V = np.vander(s / s.max(), K + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, ys[:, :3], rcond=None)
        fits.append(coef[0])
    best, prev = fits[1], fits[0]
    dC = float(np.max(traj.drift[:, 1]))
    floor = dC / (2 * math.sqrt(C)) if C > 0 else 0.0
    err = np.maximum(np.abs(best - prev), floor + 8 * np.finfo(float).eps * max(1.0, math.sqrt(C)))
    if np.any(err > 1e-3 * max(1.0, math.sqrt(C))):
        raise ExtrapolationError(f"extrapolation orders disagree by {err.max():.3g}")
    return OmegaLimit(tuple(float(v) for v in best), tuple(float(v) for v in err), C, (lo, hi))


# --- Winding ---

def winding_count(traj: Trajectory, window: tuple[float, float] | None = None,
                  per_decade: int = 400) -> float:
    """Total variation of phi = atan2(m1, m2) along the final approach inside ``window``."""
    traj = as_poly_trajectory(traj)
    C = float(traj.invariants0[1])
    if C == 0:
        raise DomainError("phi is undefined when C = 0")
    xi = traj.component("xi")
    i0 = final_approach_start(traj)
    lo, hi = window or (float(xi[i0]), float(xi[-1]))
    hi = min(hi, float(xi[-1]))
    if np.all(traj.states[:, :2] == traj.states[0, :2]):
        return 0.0
    _, ys = sample_by_xi(traj, log_grid(max(lo, float(xi[i0])), hi, per_decade))
    phi = np.unwrap(np.arctan2(ys[:, 0], ys[:, 1]))
    return float(np.sum(np.abs(np.diff(phi))))


def winding_verdicts(traj: Trajectory) -> list[AsymptoticVerdict]:
    """Decreasing winding increments per decade and the equator approach of theta."""
    traj = as_poly_trajectory(traj)
    end = min(tail_xi_max(traj), RESOLVED_WINDOW[1])
    edges = [10.0**k for k in range(2, 20) if 10.0**k <= end * (1 + 1e-12)]
    inc = [winding_count(traj, (a, b)) for a, b in zip(edges, edges[1:])]
    ok = all(b <= a for a, b in zip(inc, inc[1:]))
    out = [AsymptoticVerdict("winding increments per decade non-increasing", None,
                             (edges[0], edges[-1]), float(max(inc, default=0.0)), None, None, ok,
                             "increments " + ", ".join(f"{v:.3g}" for v in inc))]
    lo, hi = _tail_window(traj, DEFAULT_WINDOW, 2.0)
    _, ys = sample_by_xi(traj, log_grid(lo, hi))
    m1, m2, m3, xi, _ = ys.T
    L = np.sqrt(m1 * m1 + m2 * m2 + m3 * m3)
    out.append(bound_verdict("(theta-pi/2)*xi", xi, (np.arccos(m3 / L) - math.pi / 2) * xi, (lo, hi)))
    return out


# --- Tail properties ---

def tail_property_verdicts(traj: Trajectory, xi_from: float = 1e2) -> list[AsymptoticVerdict]:
    """Sign and monotonicity properties of the final approach past ``xi_from``.

    Checks I_dot <= 0, q_dot <= 0, p < 0 with a decreasing trend after a
    median over blocks of 10 accepted steps, |m3| xi <= 10 sqrt(C), and the
    level-set identity to 1e-8 relative over the whole run.
    """
    traj = as_poly_trajectory(traj)
    i0 = final_approach_start(traj)
    xi_all = traj.component("xi")
    i1 = i0 + int(np.argmax(xi_all[i0:] > xi_from))
    tail = traj.states[i1:]
    m1, m2, m3, xi, p = tail.T
    win = (float(xi[0]), float(xi[-1]))
    d = _i_series(traj.times[i1:], m1, m2, m3, xi, p)
    out = [
        AsymptoticVerdict("I_dot <= 0", None, win, float(d.I_dot.max()), None, None,
                          bool(np.all(d.I_dot <= 0))),
        AsymptoticVerdict("q_dot <= 0", None, win, float(np.max(2 * p - m1)), None, None,
                          bool(np.all(2 * p - m1 <= 0))),
    ]
    nb = len(p) // 10
    med = np.median(p[: nb * 10].reshape(nb, 10), axis=1) if nb else p
    out.append(AsymptoticVerdict("p < 0, decreasing after 10-step medians", None, win,
                                 float(p.max()), None, None,
                                 bool(np.all(p < 0) and np.all(np.diff(med) < 0)),
                                 f"{nb} blocks"))
    h, C = traj.invariants0
    r = float(np.max(np.abs(m3) * xi)) / max(math.sqrt(C), np.finfo(float).tiny)
    out.append(AsymptoticVerdict("|m3| xi <= 10 sqrt(C)", "bounded-by", win, r, None, None, r <= 10))
    s = traj.states
    scale = 2 * s[:, 4] ** 2 + 2 * np.abs(s[:, 0] * s[:, 4]) + 2 * (s[:, 2] * s[:, 3]) ** 2 \
        + 2 * np.abs(s[:, 3]) * (1 + np.abs(s[:, 1] * s[:, 2])) + abs(2 * h - C)
    rel = float(np.max(np.abs(vf.level_set_residual(s, h, C)) / np.maximum(scale, 1.0)))
    out.append(AsymptoticVerdict("level-set identity", None, (float(xi_all.min()), float(xi_all.max())),
                                 rel, None, None, rel <= 1e-8))
    return out


# --- Battery ---

def run_collision(seed, cfg: IntegratorConfig = COLLISION_CONFIG, t_max: float = 100.0) -> Trajectory:
    traj = integrate("poly", np.asarray(seed, float), (0.0, t_max), cfg)
    if traj.status != "collision":
        raise InsufficientTailError(f"seed did not collide (status {traj.status})")
    return traj


def t_star_verdict(traj: Trajectory, cfg: IntegratorConfig = COLLISION_CONFIG,
                   thresholds=(1e5, 1e6, 1e7)) -> tuple[AsymptoticVerdict, dict]:
    """Pole-fit t* across thresholds and from the regularised clock, agreeing within 1%."""
    end = tail_xi_max(traj)
    used = [x for x in thresholds if x <= end * (1 + 1e-9)]
    if len(used) < 2:
        raise InsufficientTailError("need at least two pole-fit thresholds inside the tail")
    fits = {x: pole_fit(traj, xi_max=min(x, end)) for x in used}
    ts = [f[0] for f in fits.values()]
    info = {"pole_fit": {f"{x:g}": {"t_star": f[0], "beta": f[1], "stderr": f[2], "rms": f[3]}
                         for x, f in fits.items()}}
    if traj.system == "poly":
        try:
            cont = continue_regularised(traj, replace(cfg, abs_tol=min(cfg.abs_tol, 1e-16)))
            ts.append(cont.t_star)
            info["regularised_t_star"] = cont.t_star
        except (HandoffError, AmbiguousTailError) as e:
            info["regularised_error"] = str(e)
    ref = ts[-2] if "regularised_t_star" in info else ts[-1]
    spread = (max(ts) - min(ts)) / abs(ref)
    ok = math.isfinite(spread) and spread <= 0.01
    return AsymptoticVerdict("t* stable across thresholds (relative spread)", None,
                             (min(used), max(used)), spread, None, None, ok,
                             f"t* = {ref!r}"), info


def collision_battery(traj: Trajectory, name: str = "run",
                      cfg: IntegratorConfig = COLLISION_CONFIG,
                      extra_bounds: dict[str, Callable] | None = None) -> CollisionReport:
    """Every collision check on one run, in a fixed order."""
    poly = as_poly_trajectory(traj)
    end = tail_xi_max(poly)
    if end < 1e4 or poly.status != "collision":
        raise InsufficientTailError(f"{name}: run must collide with a tail past xi = 1e4")
    verdicts: list[AsymptoticVerdict] = []
    vt, info = t_star_verdict(poly, cfg)
    verdicts.append(vt)

    _, ys = sample_by_xi(poly, log_grid(1e2, 1e4))
    fit = fit_power_law(ys[:, 3], np.abs(ys[:, 4]), (1e2, 1e4))
    verdicts.append(AsymptoticVerdict("|p| ~ xi^0.5 exponent", "comparable", (1e2, 1e4),
                                      fit.exponent, fit.exponent, fit.stderr,
                                      0.45 <= fit.exponent <= 0.55))
    verdicts.extend(verify_bounds(poly, extra=extra_bounds))

    lo, hi = 1e2, end
    _, ys = sample_by_xi(poly, log_grid(lo, hi))
    d = _i_series(np.zeros(len(ys)), *ys.T)
    r = d.I_ddot / (4 * d.xi)
    dev = float(np.max(np.abs(r - 1)))
    verdicts.append(AsymptoticVerdict("I_ddot/(4 xi) in [0.95, 1.05]", "comparable", (lo, hi),
                                      float(r.max()), None, None, dev <= 0.05,
                                      f"min {r.min():.6g}"))

    va, L = arclength_cauchy_check(poly)
    verdicts.append(va)

    om = estimate_omega_limit(poly)
    verdicts.append(AsymptoticVerdict("|m3*| <= error bar", None, om.window, abs(om.value[2]),
                                      None, om.error[2], abs(om.value[2]) <= om.error[2]))
    verdicts.append(AsymptoticVerdict("m1*^2 + m2*^2 = C within 2 error bars", None, om.window,
                                      abs(om.casimir_residual), None, om.casimir_error,
                                      abs(om.casimir_residual) <= 2 * om.casimir_error))
    verdicts.extend(winding_verdicts(poly))
    verdicts.extend(tail_property_verdicts(poly))
    diag = CollisionDiagnostics(i_diagnostics(poly), L, om)
    extra = dict(info)
    extra["omega_limit"] = {"value": list(om.value), "error": list(om.error)}
    extra["xi_end"] = end
    return CollisionReport(name, tuple(verdicts), float(poly.terminal_event.t_star), diag, extra)


# --- Seed tuning ---

def collision_side(y0, cfg: IntegratorConfig = COLLISION_CONFIG, t_max: float = 100.0) -> int:
    """Which side of the collision manifold the seed ``y0`` lies on.

    The observable is cos(q1) = m3 / rho in the weighted blow-up of the
    collision set.  A near-collision pass leaves the divisor region through
    |cos q1| = 1/2 on the side given by the sign of m3; the return value is
    that sign.  Runs reaching the threshold are continued in chart 1 with
    the divided field until they leave, and 0 means the run stayed on the
    manifold to the resolution of the chart integration (r < 1e-150).
    """
    def leaving(y):
        m1, m2, m3, xi, p = y
        if xi <= 1e3:
            return 1.0
        return 0.5 - abs(m3 / float(weighted_radius(m3, 1 / xi, p / xi)))

    tr = integrate("poly", np.asarray(y0, float), (0.0, t_max), cfg, events=(("leave", leaving),))
    y = tr.states[-1]
    if tr.status == "leave":
        return int(np.sign(y[2]))
    if tr.status != "collision":
        raise InsufficientTailError(f"seed neither collided nor passed close (status {tr.status})")
    m1, m2, m3, xi, p = y
    s = chart_pullback(Chart.CHART1, (m3, 1 / xi, p / xi), m1, m2)
    ct = integrate("chart1", s.as_array(), (0.0, 1e3), IntegratorConfig(rel_tol=1e-12, abs_tol=1e-300),
                   events=(("leave", lambda v: 0.5 - abs(math.cos(v[3]))),
                           ("deep", lambda v: v[2] - 1e-150)))
    z = ct.states[-1]
    return int(np.sign(math.cos(z[3]))) if ct.status == "leave" else 0


def tune_collision_seed(base, lo: float, hi: float, index: int = 2,
                        cfg: IntegratorConfig = COLLISION_CONFIG) -> tuple[tuple[float, ...], int]:
    """Bisect component ``index`` of ``base`` in [lo, hi] onto the collision manifold.

    Returns the tuned seed (the bracket end whose run collides, or the
    midpoint that stays on the manifold) and the number of bisection steps.
    """
    b = [float(v) for v in base]

    def side(v):
        b[index] = v
        return collision_side(b, cfg)

    s_lo, s_hi = side(lo), side(hi)
    if s_lo * s_hi >= 0:
        raise DomainError(f"bracket does not straddle the manifold (sides {s_lo}, {s_hi})")
    n = 0
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        s = side(mid)
        n += 1
        if s == 0:
            lo = hi = mid
            break
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    for v in (lo, hi):
        b[index] = v
        tr = integrate("poly", np.asarray(b), (0.0, 100.0), cfg)
        if tr.status == "collision":
            return tuple(b), n
    b[index] = lo
    return tuple(b), n


# --- Antipodal scan ---

@dataclass(frozen=True)
class AntipodalScan:
    n: int
    seed: int
    statuses: dict[str, int]
    min_xi: float
    antipodal: tuple[tuple[float, ...], ...]

    @property
    def passed(self) -> bool:
        return not self.antipodal


def random_poly_states(n: int, seed: int = 0, radius: float = 5.0) -> np.ndarray:
    """``n`` poly states drawn uniformly from the ball of ``radius`` (fixed RNG seed)."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 5))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(size=(n, 1)) ** (1 / 5)


ANTIPODAL_CONFIG = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10)


def antipodal_scan(n: int = 200, seed: int = 0, t_max: float = 10.0, radius: float = 5.0,
                   cfg: IntegratorConfig = ANTIPODAL_CONFIG) -> AntipodalScan:
    """Integrate random poly states and record any run with xi reaching -threshold.

    The question is qualitative (does xi run off to minus infinity?), so the
    default tolerance is looser than for the quantitative checks.
    """
    statuses: dict[str, int] = {}
    bad = []
    min_xi = math.inf
    for y0 in random_poly_states(n, seed, radius):
        traj = integrate("poly", y0, (0.0, t_max), cfg)
        statuses[traj.status] = statuses.get(traj.status, 0) + 1
        low = float(traj.component("xi").min())
        min_xi = min(min_xi, low)
        if traj.status == "antipodal" or low <= -cfg.xi_collision_threshold:
            bad.append(tuple(float(v) for v in y0))
    return AntipodalScan(n, seed, dict(sorted(statuses.items())), min_xi, tuple(bad))
