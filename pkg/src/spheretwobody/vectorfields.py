"""Right-hand sides, Hamiltonians and the Casimir of every system in scope.

Component functions accept scalars or numpy arrays and broadcast.  Public
operations accept either a state record from ``core`` or a plain sequence
of components and return a numpy array of derivatives.
"""

from __future__ import annotations

import math

import numpy as np

from . import appendix
from .core import (
    EQUAL_MASSES,
    BlowupChartState,
    Chart,
    DegenerateConfigurationError,
    DomainError,
    FullState,
    Masses,
    PolyState,
    ReducedState,
    RegState,
    chart_map,
    chart_map_jacobian,
)


def _components(s, n: int):
    if hasattr(s, "as_array"):
        return s.as_array()
    a = np.asarray(s, float)
    if a.shape[-1] != n:
        raise DomainError(f"expected {n} components, got shape {a.shape}")
    return a


def _check_q(q) -> None:
    q = np.asarray(q)
    if np.any(q <= 0.0) or np.any(q >= math.pi):
        raise DomainError("q must lie in (0, pi)")


def casimir(m1, m2, m3):
    """C = m1² + m2² + m3²."""
    return m1 * m1 + m2 * m2 + m3 * m3


# --- Full 12-dimensional system ---

def full_rhs(s: FullState | np.ndarray, masses: Masses = EQUAL_MASSES) -> np.ndarray:
    """Time derivative of (q1, q2, p1, p2) with V(q) = -mu1 mu2 cot(q).

    The potential force is minus the gradient tangent to the sphere, and the
    term -(|p_i|²/mu_i) q_i keeps the momenta tangent.
    """
    y = _components(s, 12)
    q1, q2, p1, p2 = y[0:3], y[3:6], y[6:9], y[9:12]
    mu1, mu2 = masses.mu1, masses.mu2
    c = float(q1 @ q2)
    if abs(c) >= 1.0:
        raise DegenerateConfigurationError("bodies are coincident or antipodal")
    k = mu1 * mu2 / (1.0 - c * c) ** 1.5
    return np.concatenate([
        p1 / mu1,
        p2 / mu2,
        k * (q2 - c * q1) - (p1 @ p1) / mu1 * q1,
        k * (q1 - c * q2) - (p2 @ p2) / mu2 * q2,
    ])


def hamiltonian_full(s: FullState | np.ndarray, masses: Masses = EQUAL_MASSES) -> float:
    """|p1|²/(2 mu1) + |p2|²/(2 mu2) - mu1 mu2 cot(q)."""
    y = _components(s, 12)
    q1, q2, p1, p2 = y[0:3], y[3:6], y[6:9], y[9:12]
    c = float(q1 @ q2)
    cot = c / math.sqrt(1.0 - c * c)
    return float(p1 @ p1 / (2 * masses.mu1) + p2 @ p2 / (2 * masses.mu2) - masses.mu1 * masses.mu2 * cot)


def angular_momentum_full(s: FullState | np.ndarray) -> np.ndarray:
    """Total angular momentum q1 x p1 + q2 x p2."""
    y = _components(s, 12)
    return np.cross(y[0:3], y[6:9]) + np.cross(y[3:6], y[9:12])


# --- Reduced system ---

def reduced_field(m1, m2, m3, q, p, mu1: float = 1.0, mu2: float = 1.0):
    """General-mass reduced field as a tuple of components."""
    cot = np.cos(q) / np.sin(q)
    csc2 = 1.0 / np.sin(q) ** 2
    k = 1.0 / (mu1 * mu2)
    dm1 = k * (-m2 * m3 * mu2 + mu2 * cot * (-m2**2 + m3**2 + m2 * m3 * cot) + m2 * m3 * mu1 * csc2)
    dm2 = k * (m3 * (2 * m1 - p) * mu2 + m1 * m2 * mu2 * cot - m1 * m3 * (mu1 + mu2) * csc2)
    dm3 = (m2 * p - m1 * m3 * cot) / mu1
    dq = k * (-m1 * mu2 + p * (mu1 + mu2))
    dp = k * ((-mu2 * (m2 * m3 + mu1**2 * mu2) + m3**2 * (mu1 + mu2) * cot) * csc2)
    return dm1, dm2, dm3, dq, dp


def reduced_rhs(s: ReducedState | np.ndarray, masses: Masses = EQUAL_MASSES) -> np.ndarray:
    """Five-dimensional reduced equations for general masses."""
    y = _components(s, 5)
    _check_q(y[..., 3])
    return np.stack(reduced_field(*np.moveaxis(y, -1, 0), masses.mu1, masses.mu2), axis=-1)


def equal_mass_field(m1, m2, m3, q, p):
    """Equal-mass reduced field in its own published form."""
    cot = np.cos(q) / np.sin(q)
    csc2 = 1.0 / np.sin(q) ** 2
    return (
        cot * (-m2**2 + m3**2 + 2 * m2 * m3 * cot),
        m1 * m2 * cot - m3 * (-2 * m1 + p + 2 * m1 * csc2),
        m2 * p - m1 * m3 * cot,
        2 * p - m1,
        -csc2 * (1 + m2 * m3 - 2 * m3**2 * cot),
    )


def reduced_rhs_equal(s: ReducedState | np.ndarray) -> np.ndarray:
    """Equal-mass reduced equations (mu1 = mu2 = 1)."""
    y = _components(s, 5)
    _check_q(y[..., 3])
    return np.stack(equal_mass_field(*np.moveaxis(y, -1, 0)), axis=-1)


def hamiltonian_reduced(s: ReducedState | np.ndarray, masses: Masses = EQUAL_MASSES):
    """Reduced energy for general masses."""
    m1, m2, m3, q, p = np.moveaxis(_components(s, 5), -1, 0)
    mu1, mu2 = masses.mu1, masses.mu2
    cot = np.cos(q) / np.sin(q)
    csc2 = 1.0 / np.sin(q) ** 2
    return ((mu2 * ((m1 - p) ** 2 + m2**2) + m3 * (-2 * mu2 * m2 * cot + mu1 * m3 * csc2 + mu2 * m3 * cot**2))
            / (2 * mu1 * mu2) + p**2 / (2 * mu2) - mu1 * mu2 * cot)


# --- Polynomial system ---

def poly_field(m1, m2, m3, xi, p):
    """Polynomial equal-mass field in (m, xi, p)."""
    w = xi * xi + 1
    return (
        xi * (-m2 * m2 + m3 * m3 + 2 * m2 * m3 * xi),
        m1 * m2 * xi - m3 * p - 2 * m1 * m3 * xi * xi,
        m2 * p - m1 * m3 * xi,
        -w * (2 * p - m1),
        -w * (1 + m2 * m3 - 2 * m3 * m3 * xi),
    )


def poly_rhs(s: PolyState | np.ndarray) -> np.ndarray:
    """Polynomial system with xi = cot(q)."""
    y = _components(s, 5)
    return np.stack(poly_field(*np.moveaxis(y, -1, 0)), axis=-1)


def hamiltonian_poly(s: PolyState | np.ndarray):
    """Energy of the polynomial system."""
    m1, m2, m3, xi, p = np.moveaxis(_components(s, 5), -1, 0)
    return 0.5 * (m1 * m1 + m2 * m2 - 2 * m1 * p + 2 * p * p
                  + xi * (-2 - 2 * m2 * m3 + m3 * m3 * xi) + m3 * m3 * (1 + xi * xi))


def hamiltonian_poly_scale(s: PolyState | np.ndarray):
    """Sum of the magnitudes of the terms of ``hamiltonian_poly``.

    This is the natural floating-point scale of the energy; relative drifts
    are measured against max(|H|, this scale).
    """
    m1, m2, m3, xi, p = np.moveaxis(_components(s, 5), -1, 0)
    return 0.5 * (m1 * m1 + m2 * m2 + 2 * abs(m1 * p) + 2 * p * p + 2 * abs(xi)
                  + 2 * abs(xi * m2 * m3) + 2 * m3 * m3 * xi * xi + m3 * m3)


def level_set_residual(s: PolyState | np.ndarray, h: float, C: float):
    """2p² - 2 m1 p + 2 m3² xi² - 2 xi (1 + m2 m3) - (2h - C), zero on the level set."""
    m1, m2, m3, xi, p = np.moveaxis(_components(s, 5), -1, 0)
    return 2 * p * p - 2 * m1 * p + 2 * m3 * m3 * xi * xi - 2 * xi * (1 + m2 * m3) - (2 * h - C)


# --- Invariant plane ---

def invariant_plane_rhs(s, sign: int, C: float, form: str = "xi") -> np.ndarray:
    """Planar dynamics on {m2 = m3 = 0, m1 = -sign sqrt(C)}.

    ``form="xi"`` uses (xi, p); ``form="q"`` uses (q, p).  ``sign`` is the
    sign in front of sqrt(C) in 2p ± sqrt(C).
    """
    a, p = np.moveaxis(np.asarray(s, float), -1, 0)
    k = 2 * p + _sign(sign) * math.sqrt(C)
    if form == "q":
        _check_q(a)
        return np.stack([k, -1.0 / np.sin(a) ** 2], axis=-1)
    if form != "xi":
        raise DomainError(f"unknown invariant-plane form {form!r}")
    w = a * a + 1
    return np.stack([-k * w, -w], axis=-1)


def invariant_plane_reg_rhs(s, sign: int, C: float) -> np.ndarray:
    """Regularised planar dynamics in (eta, zeta) and fictitious time."""
    eta, zeta = np.moveaxis(np.asarray(s, float), -1, 0)
    sc = _sign(sign) * math.sqrt(C)
    w = eta * eta + 1
    return np.stack([eta * (2 * zeta + sc * eta) * w, w * (2 * zeta * zeta + sc * eta * zeta - eta)], axis=-1)


def invariant_plane_blowup_rhs(s, sign: int, C: float) -> np.ndarray:
    """Blown-up planar field in (r, phi), divided once by r.

    With eta = r² sin(phi), zeta = r cos(phi).  ``sign`` follows the same
    convention as ``invariant_plane_reg_rhs``, so this field is the exact
    transport of that one.  Relative to the published formula this means
    the ± in front of sqrt(C) appears as ∓.
    """
    r, phi = np.moveaxis(np.asarray(s, float), -1, 0)
    sc = -_sign(sign) * math.sqrt(C)
    sn, cs = np.sin(phi), np.cos(phi)
    den = cs * cs - 2
    w = 1 + r**4 * sn * sn
    dr = r * ((sn - 2) * cs + sc * r * sn) * w / den
    dphi = -sn * w * (sc * sn * cs * r - 2 * cs * cs + 2 * sn) / den
    return np.stack([dr, dphi], axis=-1)


def _sign(sign) -> float:
    if sign in (1, "+", "+1"):
        return 1.0
    if sign in (-1, "-", "-1"):
        return -1.0
    raise DomainError(f"sign must be +1 or -1, got {sign!r}")


# --- Regularised system ---

def regularised_field(m1, m2, m3, eta, zeta):
    """Regularised field in (m, eta, zeta) with respect to fictitious time."""
    w = eta * eta + 1
    return (
        (m3 * m3 - m2 * m2) * eta + 2 * m2 * m3,
        m1 * m2 * eta - m3 * zeta * eta - 2 * m1 * m3,
        eta * (m2 * zeta - m1 * m3),
        w * eta * (2 * zeta - m1 * eta),
        w * (2 * m3 * m3 - (1 + m2 * m3) * eta + 2 * zeta * zeta - m1 * eta * zeta),
    )


def regularised_rhs(s: RegState | np.ndarray) -> np.ndarray:
    """Regularised system; physical time follows dt = eta² dtau."""
    y = _components(s, 5)
    return np.stack(regularised_field(*np.moveaxis(y, -1, 0)), axis=-1)


# --- Blow-up charts ---

def _chart_components(s, chart: Chart):
    if isinstance(s, BlowupChartState):
        if s.chart is not chart:
            raise DomainError(f"expected a {chart.value} state, got {s.chart.value}")
        return s.as_array()
    return _components(s, 5)


def blowup_chart1_rhs(s: BlowupChartState | np.ndarray, divided: bool = True) -> np.ndarray:
    """Chart-1 blow-up field in (m1, m2, r, q1, q2).

    ``divided=False`` returns the raw lifted field; ``divided=True`` returns
    it divided once by r, which is smooth up to r = 0.
    """
    y = _chart_components(s, Chart.CHART1)
    m1, m2, r, q1, q2 = np.moveaxis(y, -1, 0)
    if divided and np.any(np.sin(q1) == 0.0):
        raise DomainError("divided chart-1 field is singular at sin(q1) = 0")
    return np.stack(appendix.chart1_field(m1, m2, r, q1, q2, divided), axis=-1)


def blowup_chart2_rhs(s: BlowupChartState | np.ndarray, divided: bool = True) -> np.ndarray:
    """Chart-2 blow-up field in (m1, m2, R, Q1, Q2)."""
    y = _chart_components(s, Chart.CHART2)
    return np.stack(appendix.chart2_field(*np.moveaxis(y, -1, 0), divided), axis=-1)


def chart_rhs(chart: Chart, s, divided: bool = True) -> np.ndarray:
    """Dispatch to the blow-up field of ``chart`` (general charts only)."""
    if chart is Chart.CHART1:
        return blowup_chart1_rhs(s, divided)
    if chart is Chart.CHART2:
        return blowup_chart2_rhs(s, divided)
    raise DomainError("use invariant_plane_blowup_rhs for the invariant-plane chart")


def transported_chart_rhs(chart: Chart, s, divided: bool = False, sign: int = 1,
                          C: float = 0.0) -> np.ndarray:
    """Chart field obtained by pulling the regularised field back through the chart map.

    This is the independent oracle for the closed forms: the regularised
    field at the image point is mapped through the inverse of the chart
    Jacobian.  Singular where the chart Jacobian degenerates (radial = 0).
    """
    y = np.asarray(s.as_array() if hasattr(s, "as_array") else s, float)
    if chart is Chart.INVARIANT_PLANE:
        r, phi = np.moveaxis(y, -1, 0)
        eta, zeta = chart_map(chart, r, phi)
        rhs = invariant_plane_reg_rhs(np.stack([eta, zeta], axis=-1), sign, C)
        jac = chart_map_jacobian(chart, r, phi)
        out = np.linalg.solve(jac, rhs[..., None])[..., 0]
        return out / r[..., None] if divided else out
    m1, m2, rad, a1, a2 = np.moveaxis(y, -1, 0)
    m3, eta, zeta = chart_map(chart, rad, a1, a2)
    f = regularised_field(m1, m2, m3, eta, zeta)
    jac = chart_map_jacobian(chart, rad, a1, a2)
    ang = np.linalg.solve(jac, np.stack(f[2:], axis=-1)[..., None])[..., 0]
    out = np.concatenate([np.stack(f[:2], axis=-1), ang], axis=-1)
    return out / rad[..., None] if divided else out
