import math

import numpy as np
import pytest

from spheretwobody.collision import (
    COLLISION_CONFIG,
    COLLISION_SEEDS,
    GENERIC_SEED,
    NEGATIVE_CONTROL,
    InsufficientTailError,
    WindowTooShortError,
    antipodal_scan,
    as_poly_trajectory,
    casimir_sphere_arclength,
    collision_battery,
    estimate_omega_limit,
    final_approach_start,
    fit_power_law,
    i_diagnostics,
    random_poly_states,
    run_collision,
    sample_by_xi,
    verify_bounds,
    winding_count,
)
from spheretwobody.core import DomainError
from spheretwobody.integrate import integrate, make_system


def _plane(C, sign):
    return integrate(make_system("invariant-plane", C=C, sign=sign), [0.0, 0.0], (0.0, 20.0),
                     COLLISION_CONFIG)


@pytest.fixture(scope="module")
def plane_run():
    return _plane(9.0, 1)


@pytest.fixture(scope="module")
def seed_a():
    return run_collision(COLLISION_SEEDS["seed-a"])


class TestFitting:
    def test_exact_power_law(self):
        x = np.geomspace(1, 1e3, 50)
        fit = fit_power_law(x, 3 * x**0.5)
        assert fit.exponent == pytest.approx(0.5, abs=1e-12)
        assert math.exp(fit.intercept) == pytest.approx(3.0, rel=1e-12)
        assert fit.n_points == 50

    def test_window_selection(self):
        x = np.geomspace(1, 1e4, 81)
        y = np.where(x < 1e2, x**2, x**-1.0)
        assert fit_power_law(x, y, (1e2, 1e4)).exponent == pytest.approx(-1.0, abs=1e-12)

    def test_window_too_short(self):
        x = np.geomspace(1, 5, 20)
        with pytest.raises(WindowTooShortError):
            fit_power_law(x, x)
        with pytest.raises(WindowTooShortError):
            fit_power_law([1.0, 10.0], [1.0, 2.0])

    def test_needs_positive_data(self):
        with pytest.raises(DomainError):
            fit_power_law(np.geomspace(1, 100, 5), -np.ones(5))


class TestIDiagnostics:
    def test_quarter_chord(self):
        tr = integrate("poly", [0.0, 0.0, 1.0, 0.0, 0.0], (0.0, 1e-3))
        d = i_diagnostics(tr)
        # xi = 0 means q = pi/2, so I = 4 sin²(pi/4) = 2.
        assert d.I[0] == pytest.approx(2.0, abs=1e-15)

    def test_matches_finite_difference(self):
        tr = integrate("poly", [0.5, -1.0, 0.2, 0.3, 0.4], (0.0, 1.0),
                       COLLISION_CONFIG)
        d = i_diagnostics(tr)
        ts = np.linspace(0.2, 0.8, 7)
        h = 1e-4
        ys = [i_diagnostics_at(tr, ts + k * h) for k in (-1, 0, 1)]
        fd1 = (ys[2].I - ys[0].I) / (2 * h)
        fd2 = (ys[2].I - 2 * ys[1].I + ys[0].I) / h**2
        assert np.max(np.abs(fd1 - ys[1].I_dot)) <= 1e-6
        assert np.max(np.abs(fd2 - ys[1].I_ddot)) <= 1e-4
        assert d.ratio.shape == d.xi.shape

    def test_reduced_input(self):
        tr = integrate("reduced", [0.0, 0.0, 1.0, math.pi / 2, 0.0], (0.0, 1e-3))
        assert i_diagnostics(tr).I[0] == pytest.approx(2.0, abs=1e-12)


def i_diagnostics_at(traj, ts):
    from spheretwobody.collision import _i_series
    y = traj.state_at(ts)
    return _i_series(ts, *y.T)


class TestPlanar:
    def test_plane_trivial_verdicts(self, plane_run):
        rep = collision_battery(plane_run, "plane")
        names = {v.name: v for v in rep.verdicts}
        assert names["m3*xi"].max_ratio == 0.0 and names["m3*xi"].passed
        om = rep.diagnostics.omega_limit
        assert om.value == (-3.0, 0.0, 0.0) and om.error == (0.0, 0.0, 0.0)
        assert rep.passed

    def test_sign_convention(self):
        tr = _plane(9.0, -1)
        om = estimate_omega_limit(as_poly_trajectory(tr))
        assert om.value == (3.0, 0.0, 0.0)

    def test_arclength_and_winding_vanish(self, plane_run):
        poly = as_poly_trajectory(plane_run)
        assert casimir_sphere_arclength(poly, 1e4) == 0.0
        assert winding_count(poly) == 0.0

    def test_negative_control_fails(self, plane_run):
        # The plane has m3 = 0, so the control m3 xi² is trivially bounded there.
        assert all(v.passed for v in verify_bounds(plane_run, extra=NEGATIVE_CONTROL))

    def test_zero_casimir_has_no_phase(self):
        tr = integrate("poly", [0.0, 0.0, 0.0, 0.0, 0.0], (0.0, 20.0), COLLISION_CONFIG)
        assert tr.status == "collision"
        with pytest.raises(DomainError):
            winding_count(tr)


class TestBattery:
    def test_seed_a_passes(self, seed_a):
        rep = collision_battery(seed_a, "seed-a")
        failed = [v.name for v in rep.verdicts if not v.passed]
        assert rep.passed, failed
        assert rep.extra["xi_end"] >= 1e7
        m1, m2, m3 = rep.diagnostics.omega_limit.value
        assert abs(m1 * m1 + m2 * m2 - rep.diagnostics.omega_limit.casimir) <= 1e-6

    def test_negative_control_rejected(self, seed_a):
        verdicts = verify_bounds(seed_a, extra=NEGATIVE_CONTROL)
        control = [v for v in verdicts if v.name == "m3*xi^2"]
        assert control and not control[0].passed

    def test_arclength_converges(self, seed_a):
        L = [casimir_sphere_arclength(seed_a, x) for x in (1e3, 1e4, 1e5, 1e6)]
        assert all(b >= a for a, b in zip(L, L[1:]))
        assert L[-1] - L[-2] <= L[-2] - L[-3] + 1e-15

    def test_sampling_on_final_approach(self, seed_a):
        xs = np.array([1e2, 1e3, 1e4])
        _, ys = sample_by_xi(seed_a, xs)
        assert np.max(np.abs(ys[:, 3] / xs - 1)) <= 1e-12
        i0 = final_approach_start(seed_a)
        assert np.all(np.diff(seed_a.component("xi")[i0:]) > 0)
        with pytest.raises(InsufficientTailError):
            sample_by_xi(seed_a, [1e12])

    def test_generic_seed_bounces(self):
        with pytest.raises(InsufficientTailError):
            run_collision(GENERIC_SEED)

    def test_short_tail_rejected(self):
        tr = integrate("poly", COLLISION_SEEDS["seed-a"], (0.0, 100.0),
                       COLLISION_CONFIG.__class__(rel_tol=1e-12, abs_tol=1e-16,
                                                  xi_collision_threshold=1e3))
        with pytest.raises(InsufficientTailError):
            collision_battery(tr)


class TestAntipodal:
    def test_states_in_ball_and_deterministic(self):
        a = random_poly_states(50, seed=3)
        assert np.all(np.linalg.norm(a, axis=1) <= 5.0)
        assert np.array_equal(a, random_poly_states(50, seed=3))
        assert not np.array_equal(a, random_poly_states(50, seed=4))

    def test_small_scan(self):
        scan = antipodal_scan(n=10, seed=1, t_max=2.0)
        assert scan.passed and sum(scan.statuses.values()) == 10
        assert math.isfinite(scan.min_xi)
