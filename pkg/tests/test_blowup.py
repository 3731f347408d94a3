import math

import numpy as np
import pytest

from golden import (
    CENTRE_FREQ,
    M1,
    M2,
    PLANE_NODE_PHI,
    PRINTED_ATTRACTING,
    PRINTED_CENTRE,
    PRINTED_REPELLING,
    PRINTED_SADDLE,
    PRINTED_SADDLE2,
    PUBLISHED_CENTRE_Q2,
    SADDLE_DECIMALS,
    SADDLE_EIGS,
    SADDLE_Q2,
)
from spheretwobody import blowup as bu
from spheretwobody.blowup import EquilibriumClass as EC
from spheretwobody.core import Chart, DomainError

HALF = math.pi / 2


@pytest.fixture(scope="module")
def census():
    return {ch: bu.find_divisor_equilibria(ch) for ch in (Chart.CHART1, Chart.CHART2)}


def _locs(points):
    return [tuple(round(v, 6) + 0.0 for v in p.location) for p in points]


class TestCensus:
    def test_chart1(self, census):
        pts = census[Chart.CHART1]
        expected = [(HALF, SADDLE_Q2), (HALF, HALF), (HALF, 3 * HALF), (HALF, 2 * math.pi - SADDLE_Q2),
                    (PUBLISHED_CENTRE_Q2, 0.0), (math.pi - PUBLISHED_CENTRE_Q2, 0.0)]
        assert len(pts) == 6
        for p, e in zip(pts, expected):
            assert np.allclose(p.location, e, atol=1e-10)
            assert p.residual <= 1e-12
        assert [p.full_equilibrium for p in pts] == [True] * 4 + [False] * 2

    def test_chart2(self, census):
        pts = census[Chart.CHART2]
        assert len(pts) == 6
        assert sum(p.at_pole for p in pts) == 2
        inner = [p.location for p in pts if not p.at_pole]
        assert np.allclose(inner[0], (0.666239432, 0.0), atol=1e-8)
        assert np.allclose(inner[1], (2.475353221, 0.0), atol=1e-8)
        assert np.allclose(inner[2], (HALF, 0.674888846), atol=1e-8)
        assert np.allclose(inner[3], (HALF, 5.608296462), atol=1e-8)

    def test_cross_chart_matching(self, census):
        pairs = bu.match_across_charts(census[Chart.CHART1], census[Chart.CHART2])
        assert all(q is not None for _, q in pairs)
        # The chart-1 nodes at a2 = pi/2 and 3 pi/2 are the chart-2 poles.
        assert sum(q.at_pole for _, q in pairs) == 2

    def test_saddle_ray_matches_closed_form(self):
        assert math.cos(SADDLE_Q2) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)
        d = bu.divisor_field(Chart.CHART1, HALF, SADDLE_Q2)
        assert max(abs(v) for v in d) <= 1e-14


class TestClassification:
    @pytest.mark.parametrize("loc,cls,golden", [
        ((HALF, SADDLE_Q2), EC.SADDLE, PRINTED_SADDLE),
        ((HALF, 2 * math.pi - SADDLE_Q2), EC.SADDLE, PRINTED_SADDLE2),
        ((HALF, HALF), EC.ATTRACTING_NODE, PRINTED_ATTRACTING),
        ((HALF, 3 * HALF), EC.REPELLING_NODE, PRINTED_REPELLING),
    ])
    def test_against_printed_matrices(self, loc, cls, golden):
        r = bu.classify_equilibrium(Chart.CHART1, loc, m=(M1, M2))
        assert r.cls == cls
        assert np.max(np.abs(r.jacobian - golden)) <= 1e-9
        assert r.zero_multiplicity == 2
        assert r.full_equilibrium and r.backward_error <= 1e-12

    def test_saddle_spectrum(self):
        r = bu.classify_equilibrium(Chart.CHART1, (HALF, SADDLE_Q2))
        nonzero = sorted(v.real for v in r.eigenvalues if abs(v) > 1e-8)
        assert np.allclose(nonzero, SADDLE_EIGS, atol=1e-9)
        assert np.allclose(nonzero, SADDLE_DECIMALS, atol=1e-6)

    def test_attracting_node_spectrum(self):
        r = bu.classify_equilibrium(Chart.CHART1, (HALF, HALF))
        assert np.allclose(sorted(r.eigenvalues.real), [-2, -2, 0, 0, 2], atol=1e-9)

    def test_centre(self):
        r = bu.classify_equilibrium(Chart.CHART1, (PUBLISHED_CENTRE_Q2, 0.0), m=(M1, M2))
        assert r.cls == EC.CENTRE_ON_SPHERE and not r.full_equilibrium
        freq = max(abs(v.imag) for v in r.eigenvalues)
        assert freq == pytest.approx(CENTRE_FREQ, abs=1e-9)
        assert abs(CENTRE_FREQ - 1.249505) > 1e-4

    def test_printed_centre_matrix_is_inconsistent(self):
        # The published 3x3 block shares one entry with ours and has the wrong frequency.
        r = bu.classify_equilibrium(Chart.CHART1, (PUBLISHED_CENTRE_Q2, 0.0), m=(M1, M2))
        assert r.jacobian[2, 0] == pytest.approx(PRINTED_CENTRE[2, 0], abs=1e-9)
        printed = max(abs(np.linalg.eigvals(PRINTED_CENTRE).imag))
        assert abs(printed - CENTRE_FREQ) > 0.1

    def test_published_centre_location_is_not_a_zero(self):
        assert max(abs(v) for v in bu.divisor_field(Chart.CHART1, 0.0 + 1e-300, PUBLISHED_CENTRE_Q2)) > 0.1

    def test_chart2(self):
        assert bu.classify_equilibrium(Chart.CHART2, (0.6662394324925153, 0.0)).cls == EC.SADDLE
        assert bu.classify_equilibrium(Chart.CHART2, (HALF, 0.6748888455860063)).cls == EC.CENTRE_ON_SPHERE

    def test_invariant_plane(self):
        cls = {phi: bu.classify_equilibrium(Chart.INVARIANT_PLANE, (phi,), sign=1, C=9.0)
               for phi in (0.0, PLANE_NODE_PHI, math.pi - PLANE_NODE_PHI, math.pi)}
        assert cls[0.0].cls == cls[math.pi].cls == EC.SADDLE
        assert np.allclose(sorted(cls[0.0].eigenvalues.real), [-2, 2], atol=1e-9)
        assert cls[PLANE_NODE_PHI].cls == EC.REPELLING_NODE
        assert np.allclose(sorted(cls[PLANE_NODE_PHI].eigenvalues.real), [0.786151, 1.572303], atol=1e-6)
        assert cls[math.pi - PLANE_NODE_PHI].cls == EC.ATTRACTING_NODE

    def test_errors(self):
        with pytest.raises(DomainError):
            bu.classify_equilibrium(Chart.CHART1, (0.0, 1.0))
        with pytest.raises(DomainError):
            bu.classify_equilibrium(Chart.CHART1, (1.0, 1.0))
        with pytest.raises(DomainError):
            bu.classify_equilibrium(Chart.CHART1, (1.0,))
        with pytest.raises(DomainError):
            bu.divisor_phase_portrait(Chart.CHART1, resolution=8)


class TestPortrait:
    def test_index_sums(self):
        assert bu.divisor_phase_portrait(Chart.CHART1, 200).index_sum() == 2
        assert bu.divisor_phase_portrait(Chart.CHART2, 200).index_sum() == 0

    def test_rows(self):
        p = bu.divisor_phase_portrait(Chart.CHART1, 40)
        rows = p.rows()
        assert rows.shape == (1600, 4)
        d = bu.divisor_field(Chart.CHART1, rows[7, 0], rows[7, 1])
        assert np.allclose(rows[7, 2:], d)

    def test_overlap(self):
        assert bu.overlap_discrepancy() <= 1e-9

    def test_round_trip_between_charts(self, rng):
        a1 = rng.uniform(0.2, math.pi - 0.2, 50)
        a2 = rng.uniform(0.1, 2 * math.pi - 0.1, 50)
        b1, b2 = bu.to_other_chart(Chart.CHART1, a1, a2)
        c1, c2 = bu.to_other_chart(Chart.CHART2, b1, b2)
        assert np.allclose(c1, a1, atol=1e-12) and np.allclose(c2, a2, atol=1e-12)


class TestNearDivisor:
    def test_near_node(self):
        rep = bu.near_divisor_flow_check((1.0, 0.5, 1e-8, HALF + 0.01, HALF + 0.01), tau=5.0)
        assert rep.passed
        assert np.allclose(rep.final_location, (HALF, HALF), atol=1e-3)

    def test_near_centre(self):
        rep = bu.near_divisor_flow_check((1.0, 0.5, 1e-4, PUBLISHED_CENTRE_Q2 + 0.05, 0.0), tau=10.0)
        assert rep.passed

    def test_exact_rotation_on_divisor(self):
        m1, m2 = 1.0, 0.5
        a1, a2 = 1.0, 2.0
        f = bu._field(Chart.CHART1, m1, m2, 0.0, a1, a2)
        k = float(bu.rotation_rate(Chart.CHART1, a1, a2))
        assert f[0] == pytest.approx(k * m2, abs=1e-15)
        assert f[1] == pytest.approx(-k * m1, abs=1e-15)

    def test_radial_range_checked(self):
        with pytest.raises(DomainError):
            bu.near_divisor_flow_check((1.0, 0.5, 0.1, 1.0, 1.0))
