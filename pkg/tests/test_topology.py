import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from golden import REFERENCE_LEVELS
from spheretwobody import vectorfields as vf
from spheretwobody.core import DomainError, LevelSet
from spheretwobody.integrate import IntegratorConfig, integrate
from spheretwobody.topology import (
    DegenerateLevelSetError,
    FiberType,
    Topology,
    classify_isoenergy,
    compact_surface_residual,
    count_boundary_components,
    fiber_type,
    hole_polynomial,
    printed_hole_polynomial,
    region_boundary_count,
    region_function,
    sample_projection_region,
    to_sphere,
)

levels = st.builds(LevelSet, st.floats(-10, 10), st.floats(0.1, 10))


class TestPolynomial:
    def test_printed_examples(self):
        # u⁴ - 4(h - C/2)u³ + 2(2(h - C/2)² + 1)u² + 4(h - 3C/2)u + 1 at (h, C) = (3, 2).
        assert printed_hole_polynomial(LevelSet(3.0, 2.0)).u_coefficients == (1.0, -8.0, 18.0, 0.0, 1.0)
        assert printed_hole_polynomial(LevelSet(0.0, 0.0)).u_coefficients == (1.0, 0.0, 2.0, 0.0, 1.0)

    @given(levels)
    def test_printed_is_derived_with_doubled_energy(self, level):
        ours = hole_polynomial(LevelSet(level.h / 2, level.C)).u_coefficients
        printed = printed_hole_polynomial(level).u_coefficients
        assert np.allclose(ours, printed, rtol=1e-12, atol=1e-12)

    def test_elimination_oracle(self):
        h, C, m2, m3, u = sp.symbols("h C m2 m3 u")
        g = 2 * m3**2 * (2 * h - C / 2) - m3**4 + 1 + 2 * m2 * m3
        res = sp.resultant(g, m2**2 + m3**2 - C, m2)
        quartic = sp.Poly(sp.expand(res).subs(m3, sp.sqrt(u)), u)
        lead = quartic.LC()
        for hv, Cv in ((1.3, 2.0), (-0.4, 6.0), (5.0, 0.5)):
            ref = [float(c.subs({h: hv, C: Cv}) / lead) for c in quartic.all_coeffs()]
            assert np.allclose(hole_polynomial(LevelSet(hv, Cv)).u_coefficients, ref, atol=1e-12)

    def test_degree_eight_form(self):
        p = hole_polynomial(LevelSet(1.0, 2.0))
        assert len(p.coefficients) == 9 and p.coefficients[1::2] == (0.0,) * 4
        assert p.in_m3(0.7) == pytest.approx(p(0.49))


class TestCounting:
    @pytest.mark.parametrize("key", sorted(REFERENCE_LEVELS))
    def test_reference_level_counts(self, key):
        C, h = key
        res = classify_isoenergy(LevelSet(h, C))
        assert res.boundary_components == REFERENCE_LEVELS[key]
        assert res.label == (Topology.CONNSUM3_S1xS2 if REFERENCE_LEVELS[key] == 4 else Topology.S1xS2)
        assert region_boundary_count(LevelSet(h, C)) == REFERENCE_LEVELS[key]

    def test_even_counts_on_grid(self):
        counts = {count_boundary_components(LevelSet(h, C)).boundary_components
                  for h in np.linspace(-10, 10, 41) for C in np.linspace(0.1, 10, 41)}
        assert counts <= {0, 2, 4} and counts == {0, 2, 4}

    def test_boundary_points_symmetric(self):
        res = count_boundary_components(LevelSet(2.7, 6.02))
        pts = set(res.roots)
        for m2, m3 in res.roots:
            assert (-m2, -m3) in pts
            assert m2 * m2 + m3 * m3 == pytest.approx(6.02)

    @settings(max_examples=25, deadline=None)
    @given(levels)
    def test_sampler_agrees(self, level):
        res = count_boundary_components(level)
        if not res.near_degenerate:
            assert region_boundary_count(level, resolution=601) == res.boundary_components

    def test_zero_casimir(self):
        assert classify_isoenergy(LevelSet(1.0, 0.0)).label == Topology.CIRCLE
        with pytest.raises(DegenerateLevelSetError):
            count_boundary_components(LevelSet(1.0, 0.0))
        with pytest.raises(DegenerateLevelSetError):
            sample_projection_region(LevelSet(1.0, 0.0))


class TestMask:
    def test_equator_row_admissible(self):
        mask = sample_projection_region(LevelSet(-5.0, 4.0), resolution=101)
        row = np.argmin(np.abs(mask.m3))
        assert mask.m3[row] == 0.0
        assert np.all(mask.mask[row][mask.in_disk[row]])

    def test_large_energy_admits_disk(self):
        mask = sample_projection_region(LevelSet(50.0, 1.0), resolution=101)
        assert np.array_equal(mask.mask, mask.in_disk)

    def test_resolution_checked(self):
        with pytest.raises(DomainError):
            sample_projection_region(LevelSet(1.0, 1.0), resolution=4)


class TestFibres:
    def test_examples(self):
        level = LevelSet(1.0, 2.0)
        assert fiber_type((1.0, 1.0, 0.0), level) == FiberType.PARABOLA
        assert fiber_type((0.0, 0.0, math.sqrt(2.0)), level) == FiberType.CIRCLE
        assert fiber_type((0.0, 0.0, math.sqrt(2.0)), LevelSet(-5.0, 2.0)) == FiberType.EMPTY
        with pytest.raises(DomainError):
            fiber_type((1.0, 0.0, 0.0), level)

    def test_point_fibre(self):
        # Choose h so that the fibre over (0, 0, 1) collapses: 2h - 1 + 2 k² = 0 with k = 1/2.
        assert fiber_type((0.0, 0.0, 1.0), LevelSet(0.25, 1.0)) == FiberType.POINT

    def test_trajectory_inside_region(self):
        y0 = np.array([0.5, -1.0, 0.2, 0.3, 0.4])
        tr = integrate("poly", y0, (0.0, 3.0), IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
        level = LevelSet(float(vf.hamiltonian_poly(y0)), float(np.sum(y0[:3] ** 2)))
        m1, m2, m3, xi, p = tr.states.T
        assert np.all(region_function(m2, m3, level) >= -1e-8)
        for y in tr.states[::7]:
            if abs(y[2]) > 1e-3:
                assert fiber_type(y[:3] * math.sqrt(level.C / np.sum(y[:3] ** 2)), level) != FiberType.EMPTY

    def test_compact_surface(self):
        y0 = np.array([0.5, -1.0, 0.2, 0.3, 0.4])
        tr = integrate("poly", y0, (0.0, 2.0), IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
        level = LevelSet(float(vf.hamiltonian_poly(y0)), float(np.sum(y0[:3] ** 2)))
        for y in tr.states[::5]:
            r = compact_surface_residual((*y[:3], *to_sphere(y[3], y[4])), level)
            assert max(abs(v) for v in r) <= 1e-8

    def test_sphere_projection(self):
        x, y, z = to_sphere(0.3, -2.0)
        assert x * x + y * y + z * z == pytest.approx(1.0)
        assert to_sphere(0.0, 0.0) == (0.0, 0.0, -1.0)
