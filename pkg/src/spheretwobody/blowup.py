"""Equilibria of the blown-up fields on the exceptional divisor.

At radial coordinate 0 the divided chart fields reduce to a flow on the
divisor sphere (two angles) plus a rotation of (m1, m2) whose rate vanishes
only on part of the sphere.  Points where the angular components vanish are
found by a dense scan followed by damped Newton; those where the (m1, m2)
rate also vanishes are equilibria of the full field, the others are
critical points of the sphere flow only (the centres).

The divided fields of both charts are taken with respect to the same
weighted radius, so on the overlap they are the same vector field and can
be compared as tangent vectors of the unit divisor sphere in
(m3, eta, zeta) directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import vectorfields as vf
from .core import Chart, DomainError, chart_map_jacobian, divisor_point, wrap_angle
from .integrate import IntegratorConfig, integrate, make_system

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SADDLE_ANGLE = math.acos(GOLDEN)
PLANE_NODE_ANGLE = math.atan(math.sqrt(GOLDEN))
CENTRE_ANGLE = math.asin((math.sqrt(17.0) - 1.0) / 4.0)
CENTRE_FREQUENCY = math.sqrt((math.sqrt(17.0) - 1.0) / 2.0)

SCAN_RESOLUTION = 2000
NEWTON_DAMPING = 0.5
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-12
EQUILIBRIUM_TOL = 1e-10
ZERO_EIGENVALUE_TOL = 1e-8
FD_STEP = 1e-3
FD_LEVELS = 3
DEFAULT_M = (1.0, 1.0)


class NewtonError(RuntimeError):
    """Damped Newton failed to converge from a scan cell."""

    def __init__(self, message: str, cell: tuple[float, ...]):
        super().__init__(f"{message} (scan cell {cell})")
        self.cell = cell


class ClassificationAmbiguousError(ValueError):
    """A nominally hyperbolic eigenvalue has |Re| below the zero tolerance."""


class EquilibriumClass(str, enum.Enum):
    SADDLE = "saddle"
    ATTRACTING_NODE = "attracting_node"
    REPELLING_NODE = "repelling_node"
    CENTRE_ON_SPHERE = "centre_on_sphere"


@dataclass(frozen=True)
class DivisorPoint:
    """A zero of the angular divisor field.

    ``full_equilibrium`` is False where the (m1, m2) rotation rate is
    nonzero, so the point is critical for the sphere flow only.
    ``at_pole`` marks a chart pole, where the chart angles are degenerate
    and the zero is detected through the sphere tangent vector.
    """
    chart: Chart
    location: tuple[float, ...]
    residual: float
    full_equilibrium: bool
    at_pole: bool = False
    cell: tuple[float, ...] = ()


@dataclass(frozen=True)
class EquilibriumReport:
    chart: Chart
    location: tuple[float, ...]
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cls: EquilibriumClass
    zero_multiplicity: int
    full_equilibrium: bool
    residual: float
    backward_error: float

    def to_record(self) -> dict:
        return {
            "chart": self.chart.value,
            "location": list(self.location),
            "class": self.cls.value,
            "spectrum": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "zero_multiplicity": self.zero_multiplicity,
            "full_equilibrium": self.full_equilibrium,
            "residual": self.residual,
            "backward_error": self.backward_error,
        }


@dataclass(frozen=True)
class PhasePortrait:
    """Angular divisor field sampled on a cell-centred grid; ``d1[i, j]`` at (a1[i], a2[j])."""
    chart: Chart
    a1: np.ndarray
    a2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def rows(self):
        A1, A2 = np.meshgrid(self.a1, self.a2, indexing="ij")
        return np.column_stack([A1.ravel(), A2.ravel(), self.d1.ravel(), self.d2.ravel()])

    def index_sum(self) -> int:
        """Sum of the Poincaré indices of the zeros inside the sampled band.

        Each grid cell contributes the winding number of the field along its
        boundary; the second angle is periodic.  The band excludes the chart
        poles, so their indices are not included.
        """
        ang = np.arctan2(self.d2, self.d1)
        ang = np.concatenate([ang, ang[:, :1]], axis=1)

        def step(a, b):
            return np.angle(np.exp(1j * (b - a)))

        w = (step(ang[:-1, :-1], ang[1:, :-1]) + step(ang[1:, :-1], ang[1:, 1:])
             + step(ang[1:, 1:], ang[:-1, 1:]) + step(ang[:-1, 1:], ang[:-1, :-1]))
        return int(round(float(np.sum(w)) / (2 * math.pi)))


@dataclass(frozen=True)
class NearDivisorReport:
    chart: Chart
    tau: float
    r_max: float
    casimir_drift: float
    law_residual: float
    final_location: tuple[float, float]
    passed: bool


# --- Divisor fields ---

def _general(chart: Chart) -> None:
    if chart not in (Chart.CHART1, Chart.CHART2):
        raise DomainError(f"{chart.value} is not a general blow-up chart")


def _field(chart: Chart, m1, m2, radial, a1, a2):
    from . import appendix
    f = appendix.chart1_field if chart is Chart.CHART1 else appendix.chart2_field
    return f(m1, m2, radial, a1, a2, True)


def divisor_field(chart: Chart, a1, a2):
    """Angular components of the divided field at radial 0 (independent of m1, m2)."""
    _general(chart)
    a1, a2 = np.asarray(a1, float), np.asarray(a2, float)
    z = np.zeros(np.broadcast(a1, a2).shape)
    out = _field(chart, 0.0, 0.0, 0.0, a1, a2)
    return out[3] + z, out[4] + z


def rotation_rate(chart: Chart, a1, a2) -> np.ndarray:
    """Coefficient k with (m1', m2') = k (m2, -m1) on the divisor."""
    _general(chart)
    a1, a2 = np.asarray(a1, float), np.asarray(a2, float)
    z = np.zeros(np.broadcast(a1, a2).shape)
    return _field(chart, 0.0, 1.0, 0.0, a1, a2)[0] + z


def plane_divisor_field(phi):
    """Angular component of the invariant-plane blow-up at r = 0 (no C dependence)."""
    phi = np.asarray(phi, float)
    s = np.stack([np.zeros_like(phi), phi], axis=-1)
    return vf.invariant_plane_blowup_rhs(s, 1, 0.0)[..., 1]


def sphere_tangent(chart: Chart, a1, a2, d1, d2) -> np.ndarray:
    """Push angular velocities to the tangent space of the unit divisor sphere."""
    jac = chart_map_jacobian(chart, np.ones(np.shape(a1)), a1, a2)
    return jac[..., :, 1] * np.asarray(d1)[..., None] + jac[..., :, 2] * np.asarray(d2)[..., None]


# --- Equilibrium search ---

def _newton(F, x0: np.ndarray, cell: tuple[float, ...]) -> tuple[np.ndarray, float]:
    """Damped Newton with a central-difference Jacobian; damping halves the step."""
    x = np.array(x0, float)
    fx = F(x)
    res = float(np.max(np.abs(fx)))
    n = x.size
    polish = 2
    for _ in range(NEWTON_MAX_ITER):
        if res <= NEWTON_TOL:
            polish -= 1
            if polish < 0 or res == 0.0:
                return x, res
        jac = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1e-7
            jac[:, k] = (F(x + e) - F(x - e)) / 2e-7
        try:
            dx = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError as exc:
            raise NewtonError("singular Newton Jacobian", cell) from exc
        lam = 1.0
        while True:
            xn = x + lam * dx
            fn = F(xn)
            rn = float(np.max(np.abs(fn)))
            if rn < res or lam < 1e-6:
                break
            lam *= NEWTON_DAMPING
        if res <= NEWTON_TOL and rn >= res:
            return x, res
        x, fx, res = xn, fn, rn
    if res <= NEWTON_TOL:
        return x, res
    raise NewtonError(f"no convergence in {NEWTON_MAX_ITER} iterations, residual {res:.3g}", cell)


def _straddles(v: np.ndarray) -> np.ndarray:
    """Cells (between neighbouring samples on the last two axes) whose corner values bracket 0."""
    corners = np.stack([v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]])
    return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)


def _pole_points(chart: Chart) -> list[DivisorPoint]:
    """Chart poles at which the sphere field vanishes."""
    out = []
    a2 = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
    for pole in (0.0, math.pi):
        eps = 1e-7
        a1 = np.full_like(a2, abs(pole - eps))
        tangent = sphere_tangent(chart, a1, a2, *divisor_field(chart, a1, a2))
        size = float(np.max(np.linalg.norm(tangent, axis=-1)))
        if size <= 1e-5:
            # The limit test passed; report the residual at the pole itself.
            at = np.full_like(a2, pole)
            with np.errstate(divide="ignore", invalid="ignore"):
                exact = np.linalg.norm(sphere_tangent(chart, at, a2, *divisor_field(chart, at, a2)), axis=-1)
            res = float(np.max(exact)) if np.all(np.isfinite(exact)) else size
            rate = float(np.max(np.abs(rotation_rate(chart, at, a2))))
            out.append(DivisorPoint(chart, (pole, 0.0), res, rate <= EQUILIBRIUM_TOL, True))
    return out


def _dedupe(points: list[DivisorPoint], periodic: list[bool]) -> list[DivisorPoint]:
    out: list[DivisorPoint] = []
    for p in points:
        for q in out:
            d = [abs(a - b) for a, b in zip(p.location, q.location)]
            d = [min(x, 2 * math.pi - x) if per else x for x, per in zip(d, periodic)]
            if max(d) < 1e-8:
                break
        else:
            out.append(p)
    return out


def find_divisor_equilibria(chart: Chart | str, resolution: int = SCAN_RESOLUTION) -> list[DivisorPoint]:
    """All zeros of the angular divisor field of ``chart``.

    General charts are scanned on a cell-centred grid in the first angle
    (which keeps the scan off the chart poles) and a periodic grid in the
    second; cells whose corners bracket zero in both components seed a damped
    Newton polish.  Poles where the sphere field vanishes are appended.
    The invariant-plane chart is scanned on the circle.
    """
    chart = Chart(chart)
    if resolution < 32:
        raise DomainError("scan resolution must be at least 32")
    if chart is Chart.INVARIANT_PLANE:
        phi = np.linspace(0.0, 2 * math.pi, resolution + 1)
        v = plane_divisor_field(phi)
        cells = np.nonzero((np.minimum(v[:-1], v[1:]) <= 0) & (np.maximum(v[:-1], v[1:]) >= 0))[0]
        pts = []
        for i in cells:
            cell = (float(phi[i]), float(phi[i + 1]))
            x, res = _newton(lambda x: np.atleast_1d(plane_divisor_field(x[0])),
                             np.array([0.5 * (phi[i] + phi[i + 1])]), cell)
            pts.append(DivisorPoint(chart, (wrap_angle(float(x[0])),), res, True, cell=cell))
        return sorted(_dedupe(pts, [True]), key=lambda p: p.location)

    a1 = (np.arange(resolution) + 0.5) * math.pi / resolution
    a2 = np.arange(resolution + 1) * 2 * math.pi / resolution
    d1, d2 = divisor_field(chart, a1[:, None], a2[None, :])
    cand = np.argwhere(_straddles(d1) & _straddles(d2))

    def F(x):
        return np.array(divisor_field(chart, x[0], x[1]), float)

    pts = []
    for i, j in cand:
        cell = (float(a1[i]), float(a1[i + 1]), float(a2[j]), float(a2[j + 1]))
        x, res = _newton(F, np.array([0.5 * (a1[i] + a1[i + 1]), 0.5 * (a2[j] + a2[j + 1])]), cell)
        if not 0.0 < x[0] < math.pi:
            continue
        loc = (float(x[0]), wrap_angle(float(x[1])))
        rate = abs(float(rotation_rate(chart, *loc)))
        pts.append(DivisorPoint(chart, loc, res, rate <= EQUILIBRIUM_TOL, cell=cell))
    pts = _dedupe(pts, [False, True]) + _pole_points(chart)
    return sorted(pts, key=lambda p: (not p.full_equilibrium, p.location))


# --- Classification ---

def _richardson_jacobian(f, x: np.ndarray, h: float = FD_STEP, levels: int = FD_LEVELS) -> np.ndarray:
    """Central differences refined by Richardson extrapolation over halved steps."""
    x = np.asarray(x, float)
    n = x.size
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        table = []
        for lev in range(levels):
            hk = h / 2**lev
            row = [(f(x + hk * e) - f(x - hk * e)) / (2 * hk)]
            for j, prev in enumerate(table[-1] if table else []):
                row.append(row[j] + (row[j] - prev) / (4 ** (j + 1) - 1))
            table.append(row)
        cols.append(table[-1][-1])
    return np.column_stack(cols)


def _hyperbolic_class(pair: np.ndarray) -> EquilibriumClass:
    pair = np.asarray(pair)
    if np.all(np.abs(pair.imag) > ZERO_EIGENVALUE_TOL):
        if np.all(np.abs(pair.real) < ZERO_EIGENVALUE_TOL):
            return EquilibriumClass.CENTRE_ON_SPHERE
        return (EquilibriumClass.ATTRACTING_NODE if pair[0].real < 0
                else EquilibriumClass.REPELLING_NODE)
    re = pair.real
    if np.any(np.abs(re) < ZERO_EIGENVALUE_TOL):
        raise ClassificationAmbiguousError(f"eigenvalues {pair} have a near-zero real part")
    if re[0] * re[1] < 0:
        return EquilibriumClass.SADDLE
    return EquilibriumClass.ATTRACTING_NODE if re[0] < 0 else EquilibriumClass.REPELLING_NODE


def classify_equilibrium(chart: Chart | str, location, m: tuple[float, float] = DEFAULT_M,
                         sign: int = 1, C: float = 1.0) -> EquilibriumReport:
    """Linearisation, spectrum and class of a divisor equilibrium.

    General charts: the 5x5 Jacobian of the divided field in
    (m1, m2, radial, a1, a2) at full equilibria; at critical points of the
    sphere flow only, the 3x3 block in (radial, a1, a2).  The class is read
    from the 2x2 angular block, which carries the spectrum on the sphere
    because the radial and (m1, m2) rows decouple at radial 0.  The
    invariant-plane chart uses its 2x2 Jacobian in (r, phi) with the given
    ``sign`` and ``C``.
    """
    chart = Chart(chart)
    loc = tuple(float(v) for v in location)
    if chart is Chart.INVARIANT_PLANE:
        res = abs(float(plane_divisor_field(loc[0])))
        full = True

        def f(x):
            return vf.invariant_plane_blowup_rhs(x, sign, C)
        x0 = np.array([0.0, loc[0]])
        idx = slice(None)
    else:
        if len(loc) != 2:
            raise DomainError("general charts need two angles")
        if not 0.0 < loc[0] < math.pi:
            raise DomainError("chart pole: classify this point in the other chart")
        res = float(np.max(np.abs(divisor_field(chart, *loc))))
        full = abs(float(rotation_rate(chart, *loc))) <= EQUILIBRIUM_TOL
        x0 = np.array([m[0], m[1], 0.0, loc[0], loc[1]])

        def f(x):
            return np.array(_field(chart, *x), float)
        idx = slice(None) if full else slice(2, 5)
    if res > EQUILIBRIUM_TOL:
        raise DomainError(f"not a divisor equilibrium: residual {res:.3g}")
    if idx == slice(None):
        jac = _richardson_jacobian(f, x0)
    else:
        def g(y):
            z = x0.copy()
            z[idx] = y
            return f(z)[idx]
        jac = _richardson_jacobian(g, x0[idx])
    lam, vec = np.linalg.eig(jac)
    order = np.lexsort((lam.imag, lam.real))
    lam, vec = lam[order], vec[:, order]
    backward = float(np.linalg.norm(jac @ vec - vec * lam) / max(np.linalg.norm(jac), 1e-300))
    zero_mult = int(np.sum(np.abs(lam) <= ZERO_EIGENVALUE_TOL))
    sphere = np.linalg.eigvals(jac[-2:, -2:] if chart is not Chart.INVARIANT_PLANE else jac)
    cls = _hyperbolic_class(sphere)
    return EquilibriumReport(chart, loc, jac, lam, vec, cls, zero_mult, full, res, backward)


# --- Portraits and cross-chart checks ---

def divisor_phase_portrait(chart: Chart | str, resolution: int = 200) -> PhasePortrait:
    """Angular divisor field on a cell-centred grid (first angle) by periodic grid (second)."""
    chart = Chart(chart)
    _general(chart)
    if resolution < 32:
        raise DomainError("portrait resolution must be at least 32")
    a1 = (np.arange(resolution) + 0.5) * math.pi / resolution
    a2 = np.arange(resolution) * 2 * math.pi / resolution
    d1, d2 = divisor_field(chart, a1[:, None], a2[None, :])
    return PhasePortrait(chart, a1, a2, d1, d2)


def to_other_chart(chart: Chart, a1, a2) -> tuple[np.ndarray, np.ndarray]:
    """Angles of the same divisor point in the other general chart."""
    _general(chart)
    s1, c1, s2, c2 = np.sin(a1), np.cos(a1), np.sin(a2), np.cos(a2)
    if chart is Chart.CHART1:
        x, y, z = c1, s1 * c2, s1 * s2
        return np.arctan2(np.hypot(x, y), z), np.mod(np.arctan2(x, y), 2 * math.pi)
    x, y, z = s1 * s2, s1 * c2, c1
    return np.arctan2(np.hypot(y, z), x), np.mod(np.arctan2(z, y), 2 * math.pi)


def overlap_discrepancy(resolution: int = 200, margin: float = 0.05) -> float:
    """Largest relative gap between the two charts' sphere fields on their overlap.

    Points within ``margin`` (in either chart's first angle) of a chart pole
    are skipped.  The comparison covers the angular flow and the (m1, m2)
    rotation rate.
    """
    p = divisor_phase_portrait(Chart.CHART1, resolution)
    A1, A2 = np.meshgrid(p.a1, p.a2, indexing="ij")
    B1, B2 = to_other_chart(Chart.CHART1, A1, A2)
    keep = (np.minimum(A1, math.pi - A1) > margin) & (np.minimum(B1, math.pi - B1) > margin)
    A1, A2, B1, B2 = A1[keep], A2[keep], B1[keep], B2[keep]
    t1 = sphere_tangent(Chart.CHART1, A1, A2, p.d1[keep], p.d2[keep])
    t2 = sphere_tangent(Chart.CHART2, B1, B2, *divisor_field(Chart.CHART2, B1, B2))
    k1, k2 = rotation_rate(Chart.CHART1, A1, A2), rotation_rate(Chart.CHART2, B1, B2)
    scale = 1.0 + np.linalg.norm(t1, axis=-1)
    gap = np.maximum(np.linalg.norm(t1 - t2, axis=-1), np.abs(k1 - k2)) / scale
    return float(gap.max())


def divisor_direction(point: DivisorPoint) -> np.ndarray:
    """Unit (m3, eta, zeta) direction of a divisor point."""
    return np.array(divisor_point(point.chart, *point.location), float)


def match_across_charts(points1: list[DivisorPoint], points2: list[DivisorPoint],
                        tol: float = 1e-9) -> list[tuple[DivisorPoint, DivisorPoint | None]]:
    """Pair each chart-1 point with the chart-2 point at the same divisor direction."""
    out = []
    for p in points1:
        u = divisor_direction(p)
        best = min(points2, key=lambda q: float(np.linalg.norm(divisor_direction(q) - u)), default=None)
        if best is not None and float(np.linalg.norm(divisor_direction(best) - u)) > tol:
            best = None
        out.append((p, best))
    return out


# --- Flow near the divisor ---

def near_divisor_flow_check(state, chart: Chart | str = Chart.CHART1, tau: float = 10.0,
                            cfg: IntegratorConfig = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-14),
                            rate_bound: float = 10.0) -> NearDivisorReport:
    """Integrate a chart field from a point near the divisor and test the rotation law.

    ``state`` is (m1, m2, radial, a1, a2) with 0 < radial <= 1e-3.  Passes
    when the run stays in the near-divisor regime (r <= 1e-3), the drift
    of m1² + m2² stays within ``rate_bound`` * C0 * r_max * tau
    and the (m1, m2) velocity differs from k (m2, -m1), k the divisor
    rotation rate, by at most ``rate_bound`` * (1 + C0) * r along the run.
    """
    chart = Chart(chart)
    _general(chart)
    y0 = np.asarray(state, float)
    if not 0.0 < y0[2] <= 1e-3:
        raise DomainError("radial coordinate must lie in (0, 1e-3]")
    traj = integrate(make_system(chart.value), y0, (0.0, tau), cfg)
    m1, m2, r, a1, a2 = traj.states.T
    c0 = float(y0[0] ** 2 + y0[1] ** 2)
    drift = float(np.max(np.abs(m1 * m1 + m2 * m2 - c0)))
    r_max = float(np.max(np.abs(r)))
    f = np.array(_field(chart, m1, m2, r, a1, a2))
    k = rotation_rate(chart, a1, a2)
    law = np.hypot(f[0] - k * m2, f[1] + k * m1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r > 0, law / np.abs(r), 0.0)
    law_residual = float(np.max(ratio))
    ok = (r_max <= 1e-3 and drift <= rate_bound * max(c0, 1.0) * r_max * tau
          and law_residual <= rate_bound * (1 + c0))
    return NearDivisorReport(chart, tau, r_max, drift, law_residual,
                             (float(a1[-1]), wrap_angle(float(a2[-1]))), bool(ok))
