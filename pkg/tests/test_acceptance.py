"""Acceptance criteria 1 to 8, each at its stated tolerance and time budget.

Every test prints one line "ACCEPTANCE n: PASS|FAIL | detail"; the lines
are repeated in the terminal summary.
"""

import math
import time

import numpy as np

from conftest import random_chart, random_full_state, random_poly, report_criterion
from golden import CENTRE_FREQ, PLANE_NODE_PHI, REFERENCE_LEVELS, SADDLE_EIGS, SADDLE_Q2
from spheretwobody import appendix
from spheretwobody import blowup as bu
from spheretwobody import vectorfields as vf
from spheretwobody.collision import COLLISION_SEEDS, antipodal_scan, collision_battery, run_collision
from spheretwobody.core import Chart, FullState, LevelSet, reduce_full_state
from spheretwobody.integrate import IntegratorConfig, integrate, relative_drift
from spheretwobody.topology import Topology, classify_isoenergy, region_boundary_count

HALF = math.pi / 2


def _finish(number, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    passed = bool(ok and in_time)
    report_criterion(number, passed, f"{detail}; {elapsed:.2f} s of {budget:g} s")
    assert passed, detail


def test_criterion_1_closed_form_spectra():
    t0 = time.perf_counter()
    errors = {}
    saddle_ref = sorted(SADDLE_EIGS)
    for name, q2 in (("saddle", SADDLE_Q2), ("saddle'", 2 * math.pi - SADDLE_Q2)):
        r = bu.classify_equilibrium(Chart.CHART1, (HALF, q2))
        got = sorted(v.real for v in r.eigenvalues if abs(v) > 1e-6)
        ref = saddle_ref if name == "saddle" else sorted([-SADDLE_EIGS[2], SADDLE_EIGS[0], SADDLE_EIGS[1]])
        errors[name] = max(abs(a - b) for a, b in zip(got, ref)) if len(got) == 3 else math.inf
    for name, q2, ref in (("attracting node", HALF, [-2.0, -2.0]), ("repelling node", 3 * HALF, [2.0, 2.0])):
        r = bu.classify_equilibrium(Chart.CHART1, (HALF, q2))
        ang = sorted(np.linalg.eigvals(r.jacobian[-2:, -2:]).real)
        errors[name] = max(abs(a - b) for a, b in zip(ang, ref))
    for q1 in (math.asin((math.sqrt(17) - 1) / 4), math.pi - math.asin((math.sqrt(17) - 1) / 4)):
        r = bu.classify_equilibrium(Chart.CHART1, (q1, 0.0))
        lam = sorted(r.eigenvalues, key=lambda v: v.imag)
        errors[f"centre q1={q1:.4f}"] = max(abs(lam[0] - (-1j * CENTRE_FREQ)), abs(lam[-1] - 1j * CENTRE_FREQ))
    for phi in (0.0, math.pi):
        r = bu.classify_equilibrium(Chart.INVARIANT_PLANE, (phi,), sign=1, C=9.0)
        errors[f"plane saddle phi={phi:.3f}"] = max(abs(a - b) for a, b in zip(sorted(r.eigenvalues.real),
                                                                             [-2.0, 2.0]))
    elapsed = time.perf_counter() - t0
    worst = max(errors.values())
    _finish(1, worst <= 1e-8, f"max spectrum error {worst:.2e} over {len(errors)} equilibria (tol 1e-8)",
            elapsed, 1.0)


def test_criterion_2_equilibrium_census():
    t0 = time.perf_counter()
    c1 = [p for p in bu.find_divisor_equilibria(Chart.CHART1) if p.full_equilibrium]
    c2 = [p for p in bu.find_divisor_equilibria(Chart.CHART2) if p.full_equilibrium]
    pairs = bu.match_across_charts(c1, c2, tol=1e-9)
    matched = sum(q is not None for _, q in pairs)
    plane = bu.find_divisor_equilibria(Chart.INVARIANT_PLANE)
    want = sorted([0.0, PLANE_NODE_PHI, math.pi - PLANE_NODE_PHI, math.pi])
    got = sorted(p.location[0] for p in plane)
    angle_err = max(abs(a - b) for a, b in zip(got, want)) if len(got) == 4 else math.inf
    residual = max(p.residual for p in c1 + c2 + plane)
    elapsed = time.perf_counter() - t0
    ok = (len(c1) == 4 and len(c2) == 4 and matched == 4 and len(plane) == 4
          and angle_err <= 1e-12 and residual <= 1e-12)
    _finish(2, ok, f"chart1 {len(c1)}, chart2 {len(c2)} ({matched} matched at 1e-9), plane {len(plane)} "
                   f"(angle error {angle_err:.1e}), max residual {residual:.1e}", elapsed, 5.0)


def test_criterion_3_conservation():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    worst = 0.0
    for y0 in random_poly(rng, 20, 5.0):
        tr = integrate("poly", y0, (0.0, 1.0), cfg)
        worst = max(worst, *relative_drift(tr))
    elapsed = time.perf_counter() - t0
    _finish(3, worst <= 1e-8, f"max relative drift of H and C {worst:.2e} on 20 states (tol 1e-8)",
            elapsed, 10.0)


def test_criterion_4_reduction_consistency():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    worst = 0.0
    for _ in range(20):
        f = random_full_state(rng)
        full = integrate("full", f.as_array(), (0.0, 0.1), cfg)
        via_full = reduce_full_state(FullState.from_array(full.states[-1]))
        red = integrate("reduced", reduce_full_state(f).as_array(), (0.0, 0.1), cfg)
        direct = red.states[-1]
        a = np.array([via_full.q, vf.hamiltonian_reduced(via_full), vf.casimir(*via_full.as_array()[:3])])
        b = np.array([direct[3], vf.hamiltonian_reduced(direct), vf.casimir(*direct[:3])])
        worst = max(worst, float(np.max(np.abs(a - b))))
    elapsed = time.perf_counter() - t0
    _finish(4, worst <= 1e-6, f"max (q, H, C) gap {worst:.2e} on 20 full states (tol 1e-6)", elapsed, 30.0)


CRITERION_5_CHECKS = {
    "a": "t* stable across thresholds (relative spread)",
    "b": "|p| ~ xi^0.5 exponent",
    "c1": "m3*xi",
    "c2": "(2*m3*xi-m2)*sqrt(xi)",
    "d": "I_ddot/(4 xi) in [0.95, 1.05]",
    "e": "arclength tail decrement / (c/xi)",
    "f1": "|m3*| <= error bar",
    "f2": "m1*^2 + m2*^2 = C within 2 error bars",
}


def test_criterion_5_collision_asymptotics():
    t0 = time.perf_counter()
    failures = []
    others = 0
    for name, seed in COLLISION_SEEDS.items():
        traj = run_collision(seed)
        rep = collision_battery(traj, name)
        if rep.extra["xi_end"] < 1e6 or not math.isfinite(rep.t_star):
            failures.append(f"{name}: tail or t*")
        by_name = {v.name: v for v in rep.verdicts}
        for key, check in CRITERION_5_CHECKS.items():
            v = by_name.get(check)
            if v is None or not v.passed:
                failures.append(f"{name}:{key}")
        others += sum(not v.passed for v in rep.verdicts if v.name not in CRITERION_5_CHECKS.values())
    elapsed = time.perf_counter() - t0
    detail = (f"{len(COLLISION_SEEDS)} seeds, checks a-f "
              + ("all pass" if not failures else "failed: " + ", ".join(failures))
              + f"; {others} supplementary verdicts failed")
    _finish(5, not failures, detail, elapsed, 120.0)


def test_criterion_6_no_antipodal():
    t0 = time.perf_counter()
    scan = antipodal_scan(n=200)
    elapsed = time.perf_counter() - t0
    _finish(6, scan.passed, f"200 seeds, statuses {scan.statuses}, min xi {scan.min_xi:.3g}, "
                            f"{len(scan.antipodal)} antipodal events", elapsed, 120.0)


def test_criterion_7_topology():
    t0 = time.perf_counter()
    counts = {}
    odd = 0
    for h in np.linspace(-10, 10, 100):
        for C in np.linspace(0.1, 10, 100):
            n = classify_isoenergy(LevelSet(float(h), float(C))).boundary_components
            counts[n] = counts.get(n, 0) + 1
            odd += n % 2
    fig = {}
    for (C, h), expected in REFERENCE_LEVELS.items():
        res = classify_isoenergy(LevelSet(h, C))
        fig[(C, h)] = (res.boundary_components, region_boundary_count(LevelSet(h, C)), expected)
    circle = classify_isoenergy(LevelSet(1.0, 0.0)).label == Topology.CIRCLE
    elapsed = time.perf_counter() - t0
    fig_ok = (all(a == b == e for a, b, e in fig.values())
              and {a for a, _, _ in fig.values()} == {0, 2, 4})
    ok = odd == 0 and fig_ok and circle
    detail = (f"grid counts {dict(sorted(counts.items()))}, odd {odd}; reference pairs (count, sampled) "
              + ", ".join(f"(C={C:g}, h={h:g}) -> {a}/{b}" for (C, h), (a, b, _) in fig.items())
              + f"; C=0 Circle {circle}")
    _finish(7, ok, detail, elapsed, 30.0)


def _scaled_gap(P, T):
    return float(np.max(np.abs(P - T) / (1 + np.abs(T))))


def test_criterion_8_formula_cross_checks():
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    Y = random_chart(rng, 1000)
    gaps = {}
    corrected = {}
    for chart, printed, fixed, names in (
            (Chart.CHART1, appendix.chart1_printed, appendix.chart1_field, ("f3", "f4", "f5")),
            (Chart.CHART2, appendix.chart2_printed, appendix.chart2_field, ("g3", "g4", "g5"))):
        T = vf.transported_chart_rhs(chart, Y)
        P = np.stack(printed(*Y.T), axis=-1)
        Fx = np.stack(fixed(*Y.T, divided=False), axis=-1)
        for k, name in enumerate(names, start=2):
            gaps[name] = _scaled_gap(P[:, k], T[:, k])
            corrected[name] = _scaled_gap(Fx[:, k], T[:, k])
    q1, q2 = np.meshgrid((np.arange(100) + 0.5) * math.pi / 100, np.arange(100) * 2 * math.pi / 100)
    m1, m2 = 1.3, 0.7
    D = np.stack(appendix.chart1_divisor_printed(m1, m2, q1, q2), axis=-1)
    F = vf.blowup_chart1_rhs(np.stack(np.broadcast_arrays(m1, m2, 0.0, q1, q2), axis=-1))
    divisor_gap = float(np.max(np.abs(D - F)))
    elapsed = time.perf_counter() - t0
    bad = [k for k, v in gaps.items() if not v <= 1e-9]
    ok = not bad and divisor_gap <= 1e-12
    detail = ("verbatim " + ", ".join(f"{k} {v:.1e}" for k, v in gaps.items())
              + f" (tol 1e-9; failing {', '.join(bad) or 'none'}); corrected forms max "
              f"{max(corrected.values()):.1e}; r=0 formula gap {divisor_gap:.1e} (tol 1e-12)")
    _finish(8, ok, detail, elapsed, 10.0)
