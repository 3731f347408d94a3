"""Topology of the compactified isoenergy surfaces.

The projection of a common level set of energy and Casimir onto the
Casimir sphere, followed by the projection onto the (m2, m3) plane, is the
part of the disk m2² + m3² <= C where

    g(m2, m3) = 2 m3² (2h - C/2) - m3⁴ + 1 + 2 m2 m3 >= 0.

This is the level-set inequality multiplied by 2 m3², which keeps it finite
at m3 = 0 (where it always holds).  Holes of the image are the components
of the excluded set; each one meets the boundary circle in a symmetric
pair of points, so the hole count is the number of positive roots u = m3²
of the quartic obtained by eliminating m2, each validated against the
unsquared equation.

Two quartics are exposed.  ``hole_polynomial`` is the elimination result
for the energy of the polynomial system.  ``printed_hole_polynomial`` keeps
the published coefficients, which agree with it after replacing h by 2h.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, LevelSet

ROOT_TOL = 1e-9
NEAR_DEGENERATE_MARGIN = 1e-7


class DegenerateLevelSetError(ValueError):
    """Hole counting needs C > 0."""


class Topology(str, enum.Enum):
    S1xS2 = "S1xS2"
    CONNSUM3_S1xS2 = "ConnSum3_S1xS2"
    CIRCLE = "Circle"


class FiberType(str, enum.Enum):
    EMPTY = "empty"
    POINT = "point"
    PARABOLA = "parabola"
    CIRCLE = "circle"


@dataclass(frozen=True)
class HolePolynomial:
    """Quartic in u = m3², coefficients from u⁴ down to the constant term."""
    u_coefficients: tuple[float, float, float, float, float]

    @property
    def coefficients(self) -> tuple[float, ...]:
        """The degree-8 polynomial in m3, highest power first (odd powers zero)."""
        out = []
        for c in self.u_coefficients:
            out.extend([c, 0.0])
        return tuple(out[:-1])

    def __call__(self, u):
        return np.polyval(self.u_coefficients, u)

    def in_m3(self, m3):
        return np.polyval(self.u_coefficients, np.asarray(m3, float) ** 2)


@dataclass(frozen=True)
class TopologyResult:
    boundary_components: int
    label: Topology
    roots: tuple[tuple[float, float], ...]
    u_roots: tuple[float, ...] = ()
    margin: float = math.inf
    near_degenerate: bool = False


@dataclass(frozen=True)
class RegionMask:
    """Admissibility over a (m2, m3) grid; ``mask[i, j]`` is at (m2[j], m3[i])."""
    m2: np.ndarray
    m3: np.ndarray
    mask: np.ndarray
    in_disk: np.ndarray


def _quartic(a: float, C: float) -> tuple[float, ...]:
    # (u² - 2au - 1)² - 4u(C - u), expanded.
    return (1.0, -4 * a, 4 * a * a + 2, 4 * (a - C), 1.0)


def hole_polynomial(level: LevelSet) -> HolePolynomial:
    """Elimination quartic for the system energy: the published form with h replaced by 2h."""
    return HolePolynomial(_quartic(2 * level.h - level.C / 2, level.C))


def printed_hole_polynomial(level: LevelSet) -> HolePolynomial:
    """The published coefficients u⁴ - 4(h-C/2)u³ + 2(2(h-C/2)²+1)u² + 4(h-3C/2)u + 1."""
    h, C = level.h, level.C
    return HolePolynomial((1.0, -4 * (h - C / 2), 2 * (2 * (h - C / 2) ** 2 + 1), 4 * (h - 3 * C / 2), 1.0))


def boundary_residual(m2, m3, level: LevelSet):
    """Unsquared boundary equation 2h - C/2 - m3²/2 + 1/(2 m3²) + m2/m3."""
    m3 = np.asarray(m3, float)
    return 2 * level.h - level.C / 2 - m3**2 / 2 + 1 / (2 * m3**2) + m2 / m3


def region_function(m2, m3, level: LevelSet):
    """g = 2 m3² times the boundary expression; admissible where g >= 0."""
    m2, m3 = np.asarray(m2, float), np.asarray(m3, float)
    return 2 * m3**2 * (2 * level.h - level.C / 2) - m3**4 + 1 + 2 * m2 * m3


def _polish(poly: HolePolynomial, u: float, width: float) -> tuple[float, bool]:
    """Bisection polish to 1e-12 relative; False when no sign change brackets ``u``."""
    lo, hi = max(u - width, 0.0), u + width
    flo, fhi = poly(lo), poly(hi)
    if flo == 0:
        return lo, True
    if fhi == 0:
        return hi, True
    if np.sign(flo) == np.sign(fhi):
        return u, False
    while hi - lo > 1e-12 * max(1.0, abs(u)):
        mid = 0.5 * (lo + hi)
        fm = poly(mid)
        if fm == 0:
            return mid, True
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), True


def count_boundary_components(level: LevelSet, tol: float = ROOT_TOL) -> TopologyResult:
    """Hole count from the validated positive roots of the elimination quartic."""
    C = level.C
    if not C > 0:
        raise DegenerateLevelSetError("hole counting needs C > 0")
    poly = hole_polynomial(level)
    z = np.roots(poly.u_coefficients)
    near = sorted(float(r.real) for r in z if r.real > 0 and abs(r.imag) <= 1e-6 * (1 + abs(r.real)))
    right = [r for r in z if r.real > 0]
    margin = min((abs(p - q) / (1 + abs(p)) for i, p in enumerate(right) for q in right[i + 1:]),
                 default=math.inf)
    near_degenerate = margin < NEAR_DEGENERATE_MARGIN
    a = 2 * level.h - C / 2
    points, us = [], []
    for u0 in near:
        width = max(1e-6 * (1 + u0), 10 * min((abs(r.imag) for r in z if abs(r.real - u0) < 1e-6 * (1 + u0)),
                                              default=0.0))
        u, bracketed = _polish(poly, u0, width)
        near_degenerate |= not bracketed
        if u > C:
            continue
        m3a, m2a = math.sqrt(u), math.sqrt(max(C - u, 0.0))
        found = []
        for s3 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                m2, m3 = s2 * m2a, s3 * m3a
                scale = 1 + abs(a) + u / 2 + 1 / (2 * u) + abs(m2 / m3)
                if abs(float(boundary_residual(m2, m3, level))) <= tol * scale:
                    found.append((m2, m3))
        if found:
            us.append(u)
            points.extend(found)
    holes = len(us)
    label = Topology.CONNSUM3_S1xS2 if holes == 4 else Topology.S1xS2
    return TopologyResult(holes, label, tuple(points), tuple(us), float(margin), bool(near_degenerate))


def classify_isoenergy(level: LevelSet) -> TopologyResult:
    """Homeomorphism class of the compactified surface at ``level``."""
    if level.C == 0:
        return TopologyResult(0, Topology.CIRCLE, ())
    return count_boundary_components(level)


def sample_projection_region(level: LevelSet, resolution: int = 201) -> RegionMask:
    """Admissibility mask of the (m2, m3) projection on a square grid over the disk."""
    if not level.C > 0:
        raise DegenerateLevelSetError("the projection region needs C > 0")
    if resolution < 16:
        raise DomainError("resolution must be at least 16")
    R = math.sqrt(level.C)
    ax = np.linspace(-R, R, resolution)
    M2, M3 = np.meshgrid(ax, ax)
    in_disk = M2**2 + M3**2 <= level.C * (1 + 1e-12)
    mask = in_disk & (region_function(M2, M3, level) >= 0)
    return RegionMask(ax, ax.copy(), mask, in_disk)


def region_boundary_count(level: LevelSet, resolution: int = 801) -> int:
    """Number of boundary curves of the projection region inside the disk.

    Marching squares traces g = 0 on a square grid slightly larger than the
    disk; each traced polyline is then split into its maximal runs strictly
    inside the disk, and every run is one boundary curve.  Clipping the
    polylines, rather than masking the grid, avoids spurious fragments
    where a curve passes close to the circle.
    """
    from skimage import measure

    if not level.C > 0:
        raise DegenerateLevelSetError("the projection region needs C > 0")
    R = 1.02 * math.sqrt(level.C)
    ax = np.linspace(-R, R, resolution)
    M2, M3 = np.meshgrid(ax, ax)
    g = region_function(M2, M3, level)
    idx = np.arange(resolution)
    count = 0
    for c in measure.find_contours(g, 0.0):
        m3 = np.interp(c[:, 0], idx, ax)
        m2 = np.interp(c[:, 1], idx, ax)
        inside = (m2**2 + m3**2 < level.C).astype(int)
        runs = int(np.sum(np.diff(inside) == 1)) + int(inside[0])
        closed = np.allclose(c[0], c[-1])
        if closed and inside[0] and inside[-1] and runs > 1:
            runs -= 1  # a run through the closing point was counted twice
        count += runs
    return count


def fiber_type(P, level: LevelSet, tol: float = ROOT_TOL) -> FiberType:
    """Shape of the (xi, p) fibre over a point P of the Casimir sphere."""
    m1, m2, m3 = (float(v) for v in P)
    C = level.C
    if abs(m1 * m1 + m2 * m2 + m3 * m3 - C) > 1e-9 * max(1.0, C):
        raise DomainError("P is not on the Casimir sphere")
    if abs(m3) <= 1e-12 * max(1.0, math.sqrt(C)):
        return FiberType.PARABOLA
    k = (m2 * m3 + 1) / (2 * m3 * m3)
    rhs = 2 * level.h - C + m1 * m1 / 2 + 2 * m3 * m3 * k * k
    scale = abs(2 * level.h) + C + m1 * m1 / 2 + 2 * m3 * m3 * k * k
    if abs(rhs) <= tol * scale:
        return FiberType.POINT
    return FiberType.CIRCLE if rhs > 0 else FiberType.EMPTY


def compact_surface_residual(point6, level: LevelSet) -> tuple[float, float, float]:
    """The three defining polynomials of the compactified surface at (m1, m2, m3, x, y, z)."""
    m1, m2, m3, x, y, z = (float(v) for v in point6)
    cm = m1 * m1 + m2 * m2 + m3 * m3
    w = 1 - z
    r3 = (cm - 2 * level.h) * w * w + 2 * y * y - 2 * m1 * y * w + 2 * m3 * m3 * x * x \
        - 2 * x * w * (1 + m2 * m3)
    return cm - level.C, x * x + y * y + z * z - 1, r3


def to_sphere(xi: float, p: float) -> tuple[float, float, float]:
    """Inverse stereographic projection of (xi, p) onto the unit sphere (north pole excluded)."""
    d = 1 + xi * xi + p * p
    return 2 * xi / d, 2 * p / d, (xi * xi + p * p - 1) / d
