"""Adaptive integration with invariant monitoring and collision detection.

The stepper is the Dormand-Prince 5(4) embedded pair with a
proportional-integral step-size controller and the pair's fourth-order
continuous extension for dense output.

References
----------
Hairer, Nørsett, Wanner, *Solving Ordinary Differential Equations I*,
2nd ed., Springer 1993 (DOPRI5, PI control, dense output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize

from . import vectorfields as vf
from .core import EQUAL_MASSES, DomainError, Masses, PolyState, to_regularised


class IntegrationError(RuntimeError):
    """Integration could not be completed; ``partial`` holds the steps taken."""

    def __init__(self, message: str, partial: Trajectory | None = None):
        super().__init__(message)
        self.partial = partial


class StepSizeUnderflow(IntegrationError):
    pass


class BudgetExhausted(IntegrationError):
    pass


class AmbiguousTailError(ValueError):
    """The pole model does not describe the tail of xi(t)."""


class HandoffError(ValueError):
    """The state handed to the regularised system is unusable."""


# --- Configuration and records ---

@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    xi_collision_threshold: float = 1e6
    q_floor: float = 1e-6
    max_steps: int = 10_000_000
    first_step: float | None = None
    pole_fit_max_rms: float = 2e-2

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not self.xi_collision_threshold > 1:
            raise DomainError("collision threshold must exceed 1")
        if not self.max_steps > 0:
            raise DomainError("step budget must be positive")


@dataclass(frozen=True)
class CollisionEvent:
    """Terminal collision record; ``t_star`` extrapolates past the last sample."""
    t_star: float
    terminal_state: tuple[float, ...]
    extrapolation_order: int
    kind: str = "collision"
    beta: float = math.nan
    t_star_stderr: float = math.nan
    fit_rms: float = math.nan


@dataclass(frozen=True)
class System:
    """An autonomous vector field plus the metadata the integrator needs."""
    name: str
    components: tuple[str, ...]
    rhs: Callable[[np.ndarray], np.ndarray]
    invariants: Callable[[np.ndarray], tuple[float, float]] | None = None
    validate: Callable[[np.ndarray], None] | None = None
    xi_index: int | None = None
    q_index: int | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps, their dense-output coefficients and the drift record."""
    system: str
    components: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    drift: np.ndarray
    dense: np.ndarray
    status: str
    terminal_event: CollisionEvent | None = None
    invariants0: tuple[float, float] = (math.nan, math.nan)
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for a in (self.times, self.states, self.drift, self.dense):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    def component(self, name: str) -> np.ndarray:
        return self.states[:, self.components.index(name)]

    def state_at(self, t) -> np.ndarray:
        """Dense-output state at time(s) ``t`` within the integrated span."""
        t = np.asarray(t, float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise DomainError("requested time lies outside the trajectory")
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        h = self.times[idx + 1] - self.times[idx]
        theta = ((t - self.times[idx]) / h)[:, None]
        out = _dense_eval(self.dense[idx], theta)
        return out[0] if scalar else out


# --- Dormand-Prince 5(4) tableau ---

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A_ROWS = [np.array(row) for row in _A]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_D = np.array([-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
               -10690763975 / 1880347072, 701980252875 / 199316789632,
               -1453857185 / 822651844, 69997945 / 29380423])

# PI controller constants (DOPRI5 defaults).
_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


def _dense_eval(coef: np.ndarray, theta: np.ndarray) -> np.ndarray:
    r1, r2, r3, r4, r5 = (coef[:, i] for i in range(5))
    th1 = 1.0 - theta
    return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))


def _initial_step(f, y0, f0, direction, order, rtol, atol) -> float:
    sc = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(y0 + h0 * direction * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def _invariants_of(system: System, y: np.ndarray) -> tuple[float, float]:
    if system.invariants is None:
        return math.nan, math.nan
    return system.invariants(y)


# --- Systems ---

def _poly_invariants(y):
    m1, m2, m3, xi, p = y.tolist()
    H = 0.5 * (m1 * m1 + m2 * m2 - 2 * m1 * p + 2 * p * p
               + xi * (-2 - 2 * m2 * m3 + m3 * m3 * xi) + m3 * m3 * (1 + xi * xi))
    return H, m1 * m1 + m2 * m2 + m3 * m3


def _reg_invariants(y):
    m1, m2, m3, eta, zeta = y[:5]
    c = float(vf.casimir(m1, m2, m3))
    if eta == 0:
        return math.nan, c
    return float(vf.hamiltonian_poly(np.array([m1, m2, m3, 1 / eta, zeta / eta]))), c


def _check_finite(y):
    if not np.all(np.isfinite(y)):
        raise DomainError("state components must be finite")


def make_system(name: str, masses: Masses = EQUAL_MASSES, C: float | None = None,
                sign: int = 1) -> System:
    """Build the named system.

    Names: ``poly``, ``reduced``, ``regularised``, ``full``, ``invariant-plane``
    (xi, p), ``invariant-plane-q`` (q, p), ``invariant-plane-reg`` (eta, zeta),
    ``chart1``, ``chart2``, ``invariant-plane-blowup`` (r, phi).
    """
    m5 = ("m1", "m2", "m3")
    if name == "poly":
        def rhs(y):
            return np.array(vf.poly_field(*y.tolist()))
        return System(name, m5 + ("xi", "p"), rhs, _poly_invariants, _check_finite, xi_index=3)
    if name == "reduced":
        mu1, mu2 = masses.mu1, masses.mu2

        def rhs(y):
            return np.array(vf.reduced_field(y[0], y[1], y[2], y[3], y[4], mu1, mu2))

        def inv(y):
            return float(vf.hamiltonian_reduced(y, masses)), float(vf.casimir(y[0], y[1], y[2]))

        def validate(y):
            _check_finite(y)
            if not 0.0 < y[3] < math.pi:
                raise DomainError(f"reduced state needs q in (0, pi), got q = {y[3]}")
        return System(name, m5 + ("q", "p"), rhs, inv, validate, q_index=3,
                      params={"mu1": mu1, "mu2": mu2})
    if name == "regularised":
        def rhs(y):
            return np.array(vf.regularised_field(y[0], y[1], y[2], y[3], y[4]))
        return System(name, m5 + ("eta", "zeta"), rhs, _reg_invariants, _check_finite)
    if name == "regularised-clock":
        def rhs(y):
            return np.array(vf.regularised_field(y[0], y[1], y[2], y[3], y[4]) + (y[3] * y[3],))
        return System(name, m5 + ("eta", "zeta", "t"), rhs, _reg_invariants, _check_finite)
    if name == "full":
        def inv(y):
            L = vf.angular_momentum_full(y)
            return vf.hamiltonian_full(y, masses), float(L @ L)

        def validate(y):
            from .core import FullState
            FullState.from_array(y)
        return System(name, ("q1x", "q1y", "q1z", "q2x", "q2y", "q2z",
                             "p1x", "p1y", "p1z", "p2x", "p2y", "p2z"),
                      lambda y: vf.full_rhs(y, masses), inv, validate,
                      params={"mu1": masses.mu1, "mu2": masses.mu2})
    needs_c = name.startswith("invariant-plane")
    if needs_c:
        if C is None or C < 0:
            raise DomainError(f"system {name} needs a Casimir value C >= 0")
        params = {"C": C, "sign": sign}
        m1 = -vf._sign(sign) * math.sqrt(C)
    if name == "invariant-plane":
        def inv(y):
            return 0.5 * (C - 2 * m1 * y[1] + 2 * y[1] ** 2 - 2 * y[0]), C
        return System(name, ("xi", "p"), lambda y: vf.invariant_plane_rhs(y, sign, C), inv,
                      _check_finite, xi_index=0, params=params)
    if name == "invariant-plane-q":
        def inv(y):
            return 0.5 * (C - 2 * m1 * y[1] + 2 * y[1] ** 2) - 1 / math.tan(y[0]), C

        def validate(y):
            _check_finite(y)
            if not 0.0 < y[0] < math.pi:
                raise DomainError(f"planar state needs q in (0, pi), got q = {y[0]}")
        return System(name, ("q", "p"), lambda y: vf.invariant_plane_rhs(y, sign, C, form="q"),
                      inv, validate, q_index=0, params=params)
    if name == "invariant-plane-reg":
        return System(name, ("eta", "zeta"), lambda y: vf.invariant_plane_reg_rhs(y, sign, C),
                      None, _check_finite, params=params)
    if name == "invariant-plane-blowup":
        return System(name, ("r", "phi"), lambda y: vf.invariant_plane_blowup_rhs(y, sign, C),
                      None, _check_finite, params=params)
    if name in ("chart1", "chart2"):
        from .core import Chart
        chart = Chart(name)

        def rhs(y):
            return vf.chart_rhs(chart, y, divided=True)

        def inv(y):
            return math.nan, float(y[0] ** 2 + y[1] ** 2)
        return System(name, ("m1", "m2", "radial", "angle1", "angle2"), rhs, inv, _check_finite)
    raise DomainError(f"unknown system {name!r}")


# --- Integration ---

def integrate(system: System | str, y0, t_span: tuple[float, float],
              cfg: IntegratorConfig = IntegratorConfig(),
              events: tuple[tuple[str, Callable[[np.ndarray], float]], ...] = ()) -> Trajectory:
    """Integrate ``system`` from ``y0`` over ``t_span``.

    Terminates at the end of the span, when xi crosses
    ±``cfg.xi_collision_threshold`` (systems with a xi component), when q
    leaves [q_floor, pi - q_floor] (systems with a q component), or when a
    user event function g(y) changes sign from positive to non-positive.
    Crossing times are located by bisection on the dense output.
    """
    if isinstance(system, str):
        system = make_system(system)
    y = np.array(y0.as_array() if hasattr(y0, "as_array") else y0, float)
    if y.shape != (len(system.components),):
        raise DomainError(f"{system.name} expects {len(system.components)} components")
    if system.validate is not None:
        system.validate(y)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise DomainError("t_span must be increasing")

    stops = list(events)
    thr = cfg.xi_collision_threshold
    if system.xi_index is not None:
        k = system.xi_index
        stops.append(("collision", lambda v, k=k: thr - v[k]))
        stops.append(("antipodal", lambda v, k=k: v[k] + thr))
    if system.q_index is not None:
        k = system.q_index
        stops.append(("q_floor", lambda v, k=k: v[k] - cfg.q_floor))
        stops.append(("antipodal", lambda v, k=k: (math.pi - cfg.q_floor) - v[k]))

    f = system.rhs
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    H0, C0 = _invariants_of(system, y)
    times, states, drift, dense = [t0], [y.copy()], [(0.0, 0.0)], []
    g_prev = [g(y) for _, g in stops]

    t = t0
    k1 = f(y)
    h = cfg.first_step or _initial_step(f, y, k1, 1.0, 4, rtol, atol)
    # A component starting at exactly zero with a tiny abs_tol can drive the
    # heuristic below the underflow guard; the controller grows h from here.
    h = max(h, 1e3 * np.spacing(max(abs(t0), 1.0)))
    h = min(h, cfg.max_step, t1 - t0)
    err_old = 1e-4
    status = "completed"
    n_acc = 0
    K = np.empty((7, y.size))
    n_dim = y.size

    def partial(st: str) -> Trajectory:
        return _build(system, times, states, drift, dense, st, None, (H0, C0))

    while t < t1:
        if n_acc >= cfg.max_steps:
            raise BudgetExhausted(f"step budget {cfg.max_steps} exhausted at t = {t}", partial("budget"))
        if h < 16 * np.spacing(max(abs(t), 1.0)):
            raise StepSizeUnderflow(f"step size underflow at t = {t}, state = {y.tolist()}",
                                    partial("underflow"))
        last = t + h >= t1
        if last:
            h = t1 - t
        K[0] = k1
        for i in range(1, 7):
            yi = y + (h * _A_ROWS[i]) @ K[:i]
            K[i] = f(yi)
        y_new = yi
        err_vec = h * (_E @ K)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        e = err_vec / sc
        err = math.sqrt(float(e @ e) / n_dim)
        if not math.isfinite(err):
            h *= 0.25
            continue
        fac11 = err ** _EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / err_old ** _BETA
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac / _SAFETY))
            err_old = max(err, 1e-4)
            t_new = t1 if last else t + h
            coef = np.empty((5, y.size))
            coef[0] = y
            coef[1] = y_new - y
            coef[2] = h * K[0] - coef[1]
            coef[3] = coef[1] - h * K[6] - coef[2]
            coef[4] = h * (_D @ K)
            fired = _check_stops(stops, g_prev, y_new)
            if fired is not None:
                name, idx = fired
                tc, yc = _locate(stops[idx][1], coef, t, h)
                times.append(tc)
                states.append(yc)
                dense.append(coef_rescaled(coef, (tc - t) / h))
                drift.append(_drift(system, yc, H0, C0))
                status = name
                break
            times.append(t_new)
            states.append(y_new)
            dense.append(coef)
            drift.append(_drift(system, y_new, H0, C0))
            n_acc += 1
            t, y, k1 = t_new, y_new, K[6].copy()
            g_prev = [g(y) for _, g in stops]
            h = min(h / fac, cfg.max_step)
        else:
            h /= min(1 / _FAC_MIN, fac11 / _SAFETY)

    traj = _build(system, times, states, drift, dense, status, None, (H0, C0))
    if status == "collision":
        traj = replace(traj, terminal_event=detect_collision(traj, cfg, raise_on_ambiguous=False))
    elif status == "antipodal":
        traj = replace(traj, terminal_event=CollisionEvent(
            times[-1], tuple(states[-1].tolist()), 0, kind="antipodal"))
    return traj


def coef_rescaled(coef: np.ndarray, frac: float) -> np.ndarray:
    """Dense coefficients of the sub-step [0, frac] of a step, as a fresh polynomial.

    The interpolant of a truncated step is re-expressed by sampling the
    original polynomial and refitting the same quartic form exactly.
    """
    th = np.array([0.0, 0.25, 0.5, 0.75, 1.0]) * frac
    vals = _dense_eval(coef[None].repeat(5, 0), th[:, None])
    s = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    # Basis of the dense form: 1, s, s(1-s), s²(1-s), s²(1-s)².
    B = np.stack([np.ones_like(s), s, s * (1 - s), s**2 * (1 - s), s**2 * (1 - s) ** 2], axis=1)
    return np.linalg.solve(B, vals)


def _check_stops(stops, g_prev, y_new):
    for i, (name, g) in enumerate(stops):
        if g_prev[i] > 0 and g(y_new) <= 0:
            return name, i
    return None


def _locate(g, coef, t, h, tol: float = 1e-12):
    lo, hi = 0.0, 1.0
    while (hi - lo) * h > tol * max(1.0, abs(t)) and hi - lo > 1e-16:
        mid = 0.5 * (lo + hi)
        if g(_dense_eval(coef[None], np.array([[mid]]))[0]) > 0:
            lo = mid
        else:
            hi = mid
    yc = _dense_eval(coef[None], np.array([[hi]]))[0]
    return t + hi * h, yc


def _drift(system, y, H0, C0):
    H, C = _invariants_of(system, y)
    return abs(H - H0), abs(C - C0)


def _build(system, times, states, drift, dense, status, event, inv0) -> Trajectory:
    d = len(system.components)
    return Trajectory(
        system=system.name,
        components=system.components,
        times=np.array(times, float),
        states=np.array(states, float).reshape(-1, d),
        drift=np.array(drift, float).reshape(-1, 2),
        dense=np.array(dense, float).reshape(-1, 5, d),
        status=status,
        terminal_event=event,
        invariants0=inv0,
        params=dict(system.params),
    )


def relative_drift(traj: Trajectory) -> tuple[float, float]:
    """Max relative drift of (H, C) along a poly-coordinate trajectory.

    Energy drift is measured against max(|H0|, term scale), where the term
    scale is the sum of magnitudes of the energy's terms at each sample.
    Casimir drift is measured against C0 (or 1 when C0 = 0).
    """
    if traj.system != "poly":
        raise DomainError("relative_drift is defined for poly trajectories")
    H0, C0 = traj.invariants0
    scale = np.maximum(vf.hamiltonian_poly_scale(traj.states), abs(H0))
    dH = float(np.max(traj.drift[:, 0] / scale))
    dC = float(np.max(traj.drift[:, 1] / (C0 if C0 > 0 else 1.0)))
    return dH, dC


# --- Collision handling ---

def pole_fit(traj: Trajectory, xi_max: float | None = None, decades: float = 1.0):
    """Fit xi = A (t* - t)^(-beta) over the final ``decades`` of xi up to ``xi_max``.

    Times are handled as offsets from the last fitted sample, which keeps the
    fit well conditioned when t* - t is many orders below t.  Returns
    (t_star, beta, t_star_stderr, rms) where rms is the root-mean-square
    residual of log(xi) and the standard error comes from the linear
    xi/xi_dot model.
    """
    if traj.system not in ("poly", "invariant-plane"):
        raise DomainError("pole fit needs a trajectory with a xi component")
    xi = traj.component("xi")
    top = float(np.max(xi)) if xi_max is None else float(xi_max)
    if top <= 1.0 or np.max(xi) < top * (1 - 1e-12):
        raise AmbiguousTailError(f"trajectory does not reach xi = {top}")
    i_end = int(np.argmax(xi >= top * (1 - 1e-12)))
    i_start = i_end
    while i_start > 0 and xi[i_start - 1] < xi[i_start] and xi[i_start - 1] >= top / 10**decades:
        i_start -= 1
    if i_end - i_start < 2:
        raise AmbiguousTailError("too few samples in the tail")
    t_last = float(traj.times[i_end])
    fracs = np.array([0.0, 0.25, 0.5, 0.75])
    idx = np.arange(i_start, i_end)
    h = traj.times[idx + 1] - traj.times[idx]
    u = ((traj.times[idx] - t_last)[:, None] + h[:, None] * fracs).ravel()
    ys = _dense_eval(np.repeat(traj.dense[idx], len(fracs), axis=0), np.tile(fracs, len(idx))[:, None])
    u = np.append(u, 0.0)
    ys = np.vstack([ys, traj.states[i_end]])
    k = traj.components.index("xi")
    x = ys[:, k]
    system = make_system(traj.system, C=traj.params.get("C"), sign=traj.params.get("sign", 1))
    xdot = np.array([system.rhs(v)[k] for v in ys])
    # Linear model xi/xi_dot = (s - u)/beta with s = t* - t_last.
    coef, cov = np.polyfit(u, x / xdot, 1, cov=True)
    b, a = coef
    if not b < 0:
        raise AmbiguousTailError("tail of xi is not accelerating towards a pole")
    s_lin = -a / b
    g = np.array([1 / b, a / b**2])
    se_lin = float(np.sqrt(max(g @ cov[::-1, ::-1] @ g, 0.0)))
    span = max(s_lin, 1e-300)
    lx = np.log(x)

    def ssr(s):
        c, res, *_ = np.polyfit(np.log(s - u), lx, 1, full=True)
        return float(res[0]) if len(res) else 0.0

    opt = optimize.minimize_scalar(ssr, bounds=(1e-3 * span, 10 * span),
                                   method="bounded", options={"xatol": 1e-8 * span})
    s_star = float(opt.x)
    slope = np.polyfit(np.log(s_star - u), lx, 1)[0]
    rms = math.sqrt(opt.fun / len(u))
    return t_last + s_star, float(-slope), se_lin, rms


def detect_collision(traj: Trajectory, cfg: IntegratorConfig = IntegratorConfig(),
                     raise_on_ambiguous: bool = True) -> CollisionEvent | None:
    """Return the collision event of ``traj`` or None if xi never reaches the threshold."""
    if "xi" in traj.components:
        xi = traj.component("xi")
        if np.max(xi) < cfg.xi_collision_threshold * (1 - 1e-12):
            return None
        i = int(np.argmax(xi >= cfg.xi_collision_threshold * (1 - 1e-12)))
    elif "q" in traj.components:
        q = traj.component("q")
        if np.min(q) > cfg.q_floor * (1 + 1e-12):
            return None
        i = int(np.argmax(q <= cfg.q_floor * (1 + 1e-12)))
        return CollisionEvent(float(traj.times[i]), tuple(traj.states[i].tolist()), 0)
    else:
        raise DomainError("collision detection needs a xi or q component")
    try:
        t_star, beta, se, rms = pole_fit(traj, xi_max=float(xi[i]))
        if rms > cfg.pole_fit_max_rms:
            raise AmbiguousTailError(f"pole fit residual {rms:.3g} exceeds {cfg.pole_fit_max_rms}")
    except AmbiguousTailError:
        if raise_on_ambiguous:
            raise
        return CollisionEvent(float(traj.times[i]), tuple(traj.states[i].tolist()), 0)
    return CollisionEvent(max(t_star, float(traj.times[i])), tuple(traj.states[i].tolist()), 1,
                          beta=beta, t_star_stderr=se, fit_rms=rms)


@dataclass(frozen=True)
class RegularisedContinuation:
    """Regularised continuation of a collision run in fictitious time tau."""
    trajectory: Trajectory
    handoff: tuple[float, ...]
    t_handoff: float
    t_star: float
    handoff_residual: float


def continue_regularised(traj: Trajectory, cfg: IntegratorConfig = IntegratorConfig(),
                         eta_drop: float = 1e-2, tau_max: float = 1e12) -> RegularisedContinuation:
    """Continue a poly collision run in regularised coordinates.

    The terminal state is converted to (m, eta, zeta) and integrated with
    the physical clock dt/dtau = eta² appended, until eta has fallen by the
    factor ``eta_drop``.  Near the collision set eta decays only
    algebraically in tau, but the clock integrand eta² decays fast enough
    that the clock converges; its final value estimates t*.
    """
    if traj.system != "poly" or traj.status != "collision":
        raise HandoffError("continue_regularised needs a poly trajectory that reached collision")
    s = PolyState(*traj.states[-1])
    if s.xi <= 0:
        raise HandoffError("handoff state has xi <= 0")
    r = to_regularised(s)
    residual = abs(r.eta * s.xi - 1.0)
    if residual > 1e-9:
        raise HandoffError(f"handoff residual |eta xi - 1| = {residual}")
    t0 = float(traj.times[-1])
    # The clock component holds the elapsed physical time t - t0.
    y0 = np.array([r.m1, r.m2, r.m3, r.eta, r.zeta, 0.0])
    eta_stop = r.eta * eta_drop
    sub = replace(cfg, abs_tol=min(cfg.abs_tol, 1e-3 * eta_stop**2))
    clock = make_system("regularised-clock")
    reg = integrate(clock, y0, (0.0, tau_max), sub, events=(("eta_floor", lambda v: v[3] - eta_stop),))
    return RegularisedContinuation(reg, tuple(y0[:5].tolist()), t0, t0 + float(reg.states[-1, 5]),
                                   residual)
