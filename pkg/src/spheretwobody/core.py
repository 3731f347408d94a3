"""Domain types and coordinate transforms for the two-body problem on S².

The dynamics is expressed in several coordinate systems:

* ``ReducedState``  (m1, m2, m3, q, p) with q the inter-body angle,
* ``PolyState``     (m1, m2, m3, xi, p) with xi = cot(q),
* ``RegState``      (m1, m2, m3, eta, zeta) with eta = 1/xi, zeta = p/xi,
* ``BlowupChartState`` for the weighted blow-up charts of (m3, eta, zeta),
* ``FullState``     the unreduced positions and momenta in R³.

All records are immutable and all transforms are pure functions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Tolerance for unit-norm and tangency checks on full states.
CONSTRAINT_TOL = 1e-9
# Below this value of sin(theta) the Euler angle phi is set to 0.
POLE_TOL = 1e-12


class DomainError(ValueError):
    """Input lies outside the domain of a transform or vector field."""


class SingularInputError(ValueError):
    """Input sits on a coordinate singularity of the requested transform."""


class DegenerateConfigurationError(ValueError):
    """Bodies are coincident or antipodal, so the body frame is undefined."""


class InconsistencyError(ValueError):
    """Inputs violate a stated consistency relation."""


# --- Types ---

@dataclass(frozen=True)
class Masses:
    """Body masses."""
    mu1: float = 1.0
    mu2: float = 1.0

    def __post_init__(self) -> None:
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise DomainError(f"masses must be positive, got {self.mu1}, {self.mu2}")


EQUAL_MASSES = Masses(1.0, 1.0)


@dataclass(frozen=True)
class ReducedState:
    """Body-frame angular momentum, inter-body angle q and its momentum p."""
    m1: float
    m2: float
    m3: float
    q: float
    p: float

    def __post_init__(self) -> None:
        if not (0.0 < self.q < math.pi):
            raise DomainError(f"q must lie in (0, pi), got {self.q}")
        if not all(math.isfinite(v) for v in (self.m1, self.m2, self.m3, self.p)):
            raise DomainError("reduced state components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3, self.q, self.p])


@dataclass(frozen=True)
class PolyState:
    """Reduced state with q replaced by xi = cot(q)."""
    m1: float
    m2: float
    m3: float
    xi: float
    p: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.m1, self.m2, self.m3, self.xi, self.p)):
            raise DomainError("poly state components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3, self.xi, self.p])


@dataclass(frozen=True)
class RegState:
    """Regularised coordinates eta = 1/xi, zeta = p/xi."""
    m1: float
    m2: float
    m3: float
    eta: float
    zeta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3, self.eta, self.zeta])


class Chart(str, enum.Enum):
    """Blow-up charts of the collision set."""
    CHART1 = "chart1"
    CHART2 = "chart2"
    INVARIANT_PLANE = "invariant-plane"


@dataclass(frozen=True)
class BlowupChartState:
    """A point in one of the blow-up charts.

    Chart1 and Chart2 carry (m1, m2, radial, angle1, angle2); the
    invariant-plane chart carries only (radial, angle1) with angle1 = phi.
    """
    chart: Chart
    radial: float
    angle1: float
    angle2: float | None = None
    m1: float | None = None
    m2: float | None = None

    def __post_init__(self) -> None:
        if self.radial < 0:
            raise DomainError(f"radial coordinate must be >= 0, got {self.radial}")
        if self.chart is Chart.INVARIANT_PLANE:
            if not (0.0 <= self.angle1 < TWO_PI):
                raise DomainError(f"phi must lie in [0, 2pi), got {self.angle1}")
            return
        if self.angle2 is None or self.m1 is None or self.m2 is None:
            raise DomainError(f"{self.chart.value} states need m1, m2 and two angles")
        if not (0.0 <= self.angle1 <= math.pi):
            raise DomainError(f"first angle must lie in [0, pi], got {self.angle1}")
        if not (0.0 <= self.angle2 < TWO_PI):
            raise DomainError(f"second angle must lie in [0, 2pi), got {self.angle2}")

    def as_array(self) -> np.ndarray:
        if self.chart is Chart.INVARIANT_PLANE:
            return np.array([self.radial, self.angle1])
        return np.array([self.m1, self.m2, self.radial, self.angle1, self.angle2])


@dataclass(frozen=True)
class FullState:
    """Unit position vectors and tangent momenta of both bodies."""
    q1vec: tuple[float, float, float]
    q2vec: tuple[float, float, float]
    p1vec: tuple[float, float, float]
    p2vec: tuple[float, float, float]

    def __post_init__(self) -> None:
        q1, q2 = np.asarray(self.q1vec, float), np.asarray(self.q2vec, float)
        p1, p2 = np.asarray(self.p1vec, float), np.asarray(self.p2vec, float)
        for name, q in (("q1vec", q1), ("q2vec", q2)):
            if abs(np.linalg.norm(q) - 1.0) > CONSTRAINT_TOL:
                raise DomainError(f"{name} must be a unit vector")
        if abs(q1 @ p1) > CONSTRAINT_TOL or abs(q2 @ p2) > CONSTRAINT_TOL:
            raise DomainError("momenta must be tangent to the sphere")
        if abs(q1 @ q2) >= 1.0 - CONSTRAINT_TOL:
            raise DegenerateConfigurationError("bodies are coincident or antipodal")

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q1vec, self.q2vec, self.p1vec, self.p2vec]).astype(float)

    @classmethod
    def from_array(cls, y: np.ndarray) -> FullState:
        y = np.asarray(y, float)
        return cls(tuple(y[0:3]), tuple(y[3:6]), tuple(y[6:9]), tuple(y[9:12]))

    @property
    def angular_momentum(self) -> np.ndarray:
        return (np.cross(self.q1vec, self.p1vec) + np.cross(self.q2vec, self.p2vec))


@dataclass(frozen=True)
class LevelSet:
    """Energy h and Casimir C of a common level set."""
    h: float
    C: float

    def __post_init__(self) -> None:
        if self.C < 0:
            raise DomainError(f"Casimir value must be >= 0, got {self.C}")


@dataclass(frozen=True)
class FrameAngles:
    """Euler angles locating m on the Casimir sphere."""
    theta: float
    phi: float


# --- Scalar transforms ---

def xi_from_q(q: float) -> float:
    """Return xi = cot(q) for q in (0, pi)."""
    if not (0.0 < q < math.pi):
        raise DomainError(f"q must lie in (0, pi), got {q}")
    return math.cos(q) / math.sin(q)


def q_from_xi(xi: float) -> float:
    """Inverse of ``xi_from_q``: the angle in (0, pi) with cot(q) = xi."""
    return math.atan2(1.0, xi)


def to_poly(s: ReducedState | RegState) -> PolyState:
    """Convert a reduced or regularised state to polynomial coordinates."""
    if isinstance(s, ReducedState):
        return PolyState(s.m1, s.m2, s.m3, xi_from_q(s.q), s.p)
    if s.eta == 0:
        raise SingularInputError("eta = 0 is the collision set and has no poly image")
    xi = 1.0 / s.eta
    return PolyState(s.m1, s.m2, s.m3, xi, s.zeta * xi)


def to_reduced(s: PolyState) -> ReducedState:
    """Convert polynomial coordinates back to (m, q, p)."""
    return ReducedState(s.m1, s.m2, s.m3, q_from_xi(s.xi), s.p)


def to_regularised(s: PolyState) -> RegState:
    """Return (m, eta, zeta) = (m, 1/xi, p/xi)."""
    if s.xi == 0:
        raise SingularInputError("xi = 0 has no regularised image")
    return RegState(s.m1, s.m2, s.m3, 1.0 / s.xi, s.p / s.xi)


def wrap_angle(a: float) -> float:
    """Map an angle into [0, 2pi)."""
    w = math.fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return 0.0 if w >= TWO_PI else w


# --- Blow-up charts ---

def chart_map(chart: Chart, radial, angle1, angle2=None):
    """Vectorised chart map to (m3, eta, zeta), or (eta, zeta) for the plane."""
    if chart is Chart.CHART1:
        s1, c1 = np.sin(angle1), np.cos(angle1)
        return radial * c1, radial**2 * s1 * np.cos(angle2), radial * s1 * np.sin(angle2)
    if chart is Chart.CHART2:
        s1, c1 = np.sin(angle1), np.cos(angle1)
        return radial * s1 * np.sin(angle2), radial**2 * s1 * np.cos(angle2), radial * c1
    return radial**2 * np.sin(angle1), radial * np.cos(angle1)


def chart_map_jacobian(chart: Chart, radial, angle1, angle2=None) -> np.ndarray:
    """Jacobian of ``chart_map`` with respect to (radial, angle1[, angle2]).

    Inputs may be arrays; the result has the matrix axes last.
    """
    r = np.asarray(radial, float)
    if chart is Chart.INVARIANT_PLANE:
        s, c = np.sin(angle1), np.cos(angle1)
        return np.stack([
            np.stack([2 * r * s, r**2 * c], axis=-1),
            np.stack([c, -r * s], axis=-1),
        ], axis=-2)
    s1, c1 = np.sin(angle1), np.cos(angle1)
    s2, c2 = np.sin(angle2), np.cos(angle2)
    if chart is Chart.CHART1:
        rows = [
            [c1, -r * s1, 0.0 * r],
            [2 * r * s1 * c2, r**2 * c1 * c2, -r**2 * s1 * s2],
            [s1 * s2, r * c1 * s2, r * s1 * c2],
        ]
    else:
        rows = [
            [s1 * s2, r * c1 * s2, r * s1 * c2],
            [2 * r * s1 * c2, r**2 * c1 * c2, -r**2 * s1 * s2],
            [c1, -r * s1, 0.0 * r],
        ]
    return np.stack([np.stack(np.broadcast_arrays(*row), axis=-1) for row in rows], axis=-2)


def weighted_radius(m3, eta, zeta):
    """Radius rho with m3²/rho² + eta²/rho⁴ + zeta²/rho² = 1 (shared by both charts)."""
    a = np.asarray(m3, float) ** 2 + np.asarray(zeta, float) ** 2
    return np.sqrt(0.5 * (a + np.sqrt(a * a + 4.0 * np.asarray(eta, float) ** 2)))


def divisor_point(chart: Chart, angle1, angle2=None):
    """Unit vector (m3-, eta-, zeta-direction) on the divisor sphere for chart angles."""
    if chart is Chart.INVARIANT_PLANE:
        return np.sin(angle1), np.cos(angle1)
    s1, c1 = np.sin(angle1), np.cos(angle1)
    s2, c2 = np.sin(angle2), np.cos(angle2)
    if chart is Chart.CHART1:
        return c1, s1 * c2, s1 * s2
    return s1 * s2, s1 * c2, c1


def chart_pushforward(s: BlowupChartState) -> tuple[float, ...]:
    """Cartesian image (m3, eta, zeta) of a chart state, or (eta, zeta) for the plane."""
    return tuple(float(v) for v in chart_map(s.chart, s.radial, s.angle1, s.angle2))


def chart_pullback(chart: Chart, point: tuple[float, ...], m1: float | None = None,
                   m2: float | None = None) -> BlowupChartState:
    """Inverse of ``chart_pushforward`` away from the chart's singular set."""
    if chart is Chart.INVARIANT_PLANE:
        eta, zeta = point
        rho = float(weighted_radius(0.0, eta, zeta))
        if rho == 0.0:
            return BlowupChartState(chart, 0.0, 0.0)
        phi = wrap_angle(math.atan2(eta / rho**2, zeta / rho))
        return BlowupChartState(chart, rho, phi)
    m3, eta, zeta = point
    rho = float(weighted_radius(m3, eta, zeta))
    if rho == 0.0:
        return BlowupChartState(chart, 0.0, 0.0, 0.0, m1, m2)
    x, y, z = m3 / rho, eta / rho**2, zeta / rho
    if chart is Chart.CHART1:
        a1 = math.atan2(math.hypot(y, z), x)
        a2 = wrap_angle(math.atan2(z, y))
    else:
        a1 = math.atan2(math.hypot(x, y), z)
        a2 = wrap_angle(math.atan2(x, y))
    return BlowupChartState(chart, rho, a1, a2, m1, m2)


# --- Full system and frame reconstruction ---

def body_frame(q1vec, q2vec) -> np.ndarray:
    """Rotation g with g(0,0,-1) = q1vec and g(0, sin q, -cos q) = q2vec.

    Columns are the body axes; the first completes a right-handed frame.
    """
    q1 = np.asarray(q1vec, float)
    q2 = np.asarray(q2vec, float)
    c = float(q1 @ q2)
    if abs(c) >= 1.0 - CONSTRAINT_TOL:
        raise DegenerateConfigurationError("bodies are coincident or antipodal")
    s = math.sqrt(1.0 - c * c)
    e3 = -q1
    e2 = (q2 - c * q1) / s
    e1 = np.cross(e2, e3)
    return np.column_stack([e1, e2, e3])


def reduce_full_state(f: FullState, masses: Masses = EQUAL_MASSES) -> ReducedState:
    """Map an unreduced state to (m1, m2, m3, q, p)."""
    q1 = np.asarray(f.q1vec, float)
    q2 = np.asarray(f.q2vec, float)
    p1 = np.asarray(f.p1vec, float)
    p2 = np.asarray(f.p2vec, float)
    c = float(q1 @ q2)
    if abs(c) >= 1.0 - CONSTRAINT_TOL:
        raise DegenerateConfigurationError("bodies are coincident or antipodal")
    q = math.acos(c)
    g = body_frame(q1, q2)
    m = g.T @ f.angular_momentum
    qdot = -(p1 @ q2 / masses.mu1 + q1 @ p2 / masses.mu2) / math.sin(q)
    mu1, mu2 = masses.mu1, masses.mu2
    p = (mu1 * mu2 * qdot + mu2 * m[0]) / (mu1 + mu2)
    return ReducedState(float(m[0]), float(m[1]), float(m[2]), q, float(p))


def frame_angles_from_m(m: tuple[float, float, float], L: float,
                        tol: float = 1e-9) -> FrameAngles:
    """Euler angles with m = (L sin(theta) sin(phi), L sin(theta) cos(phi), L cos(theta))."""
    m1, m2, m3 = m
    if not L > 0:
        raise InconsistencyError("L must be positive")
    norm = math.sqrt(m1 * m1 + m2 * m2 + m3 * m3)
    if abs(norm - L) > tol * max(1.0, L):
        raise InconsistencyError(f"|m| = {norm} differs from L = {L}")
    theta = math.acos(max(-1.0, min(1.0, m3 / L)))
    if math.sin(theta) < POLE_TOL:
        return FrameAngles(theta, 0.0)
    return FrameAngles(theta, wrap_angle(math.atan2(m1, m2)))
