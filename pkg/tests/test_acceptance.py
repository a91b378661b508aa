"""Acceptance criteria, each checked at its stated tolerance.

Every test prints a single ``[PASS]``/``[FAIL] criterion N: ...`` line; the
lines are repeated in the terminal summary. Criterion 7 is split so that
each of its conditions is reported separately.
"""
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_plant, report
from quadcable.analysis import attitude_transient, c3_bound, lyapunov_matrices, lyapunov_value, zeta
from quadcable.controller import GeometricController
from quadcable.dynamics import build_inertia_table
from quadcable.experiments import run_scenario, singular_perturbation_gaps
from quadcable.integrators import simulate
from quadcable.io import write_csv
from quadcable.linear import build_linear_model, controllability_rank
from quadcable.manifold import exp_so3
from quadcable.scenario import default_scenario
from quadcable.verify import (cross_form_error, free_run, linearization_slopes,
                              nonsingular_single_link_states, oracle_error, random_input,
                              random_state)

SEED = 20240607


def warm_up(sc):
    # first call compiles (or loads) the numerical kernels; keep it out of
    # the timed region
    run_scenario(replace(sc, duration=0.002))


@pytest.fixture(scope="module")
def free_fall():
    sc = default_scenario()
    s0 = sc.initial  # horizontal-arc(pi/2) cable, at rest
    warm_up(replace(sc, controller_enabled=False))
    t0 = time.perf_counter()
    drift, ph, pv, log = free_run(sc.plant, s0, dt=1e-3, duration=5.0)
    return drift, ph, pv, time.perf_counter() - t0


def test_criterion_1_energy_conservation(free_fall):
    drift, _, _, _ = free_fall
    report(1, drift <= 1e-6, f"relative energy drift {drift:.3e} (limit 1e-6)")


def test_criterion_1_runtime(free_fall):
    elapsed = free_fall[3]
    report("1 (runtime)", elapsed <= 5.0, f"5 s free run took {elapsed:.2f} s (limit 5 s)")


@pytest.fixture(scope="module")
def tumbling():
    # the cable and body spin, so the links move relative to the vehicle
    sc = default_scenario()
    rng = np.random.default_rng(SEED)
    s0 = replace(sc.initial, Omega=rng.normal(size=3), omega=rng.normal(size=(5, 3)) * 2.0).projected()
    return free_run(sc.plant, s0, dt=1e-3, duration=5.0)


def test_criterion_1_energy_conservation_tumbling(tumbling):
    drift = tumbling[0]
    report("1 (tumbling cable)", drift <= 1e-6, f"relative energy drift {drift:.3e} (limit 1e-6)")


def test_criterion_2_momentum(free_fall):
    _, ph, pv, _ = free_fall
    report(2, ph <= 1e-8 and pv <= 1e-6,
           f"horizontal momentum drift {ph:.3e} (limit 1e-8), vertical deviation {pv:.3e} (limit 1e-6)")


def test_criterion_2_momentum_tumbling(tumbling):
    _, ph, pv, _ = tumbling
    report("2 (tumbling cable)", ph <= 1e-8 and pv <= 1e-6,
           f"horizontal momentum drift {ph:.3e} (limit 1e-8), vertical deviation {pv:.3e} (limit 1e-6)")


def test_criterion_3_cross_form():
    rng = np.random.default_rng(SEED)
    plant = make_plant()
    states = [random_state(rng, 5) for _ in range(100)]
    inputs = [random_input(rng) for _ in range(100)]
    ex, eq = cross_form_error(plant, states, inputs)
    report(3, ex <= 1e-10 and eq <= 1e-10,
           f"xddot mismatch {ex:.3e}, qddot mismatch {eq:.3e} over 100 states (limit 1e-10)")


def test_criterion_4_single_link_oracle():
    rng = np.random.default_rng(SEED)
    states = nonsingular_single_link_states(rng, 50)
    inputs = [random_input(rng) for _ in range(50)]
    err = oracle_error(make_plant(1), states, inputs)
    report(4, err <= 1e-8, f"max deviation from minimal-coordinate solution {err:.3e} over 50 states (limit 1e-8)")


def test_criterion_5_linearization_fidelity():
    slope, res = linearization_slopes(make_plant(), np.random.default_rng(SEED))
    report(5, slope >= 1.9, f"log-log residual slope {slope:.3f} (minimum 1.9), residuals "
                            + ", ".join(f"{r:.2e}" for r in res))


def test_criterion_6_controllability():
    r5 = controllability_rank(build_linear_model(make_plant(5)))
    r1 = controllability_rank(build_linear_model(make_plant(1)))
    report(6, r5 == 26 and r1 == 10, f"rank {r5} for n=5 (need 26), {r1} for n=1 (need 10)")


@pytest.fixture(scope="module")
def closed_loop():
    sc = default_scenario()
    warm_up(sc)
    t0 = time.perf_counter()
    log = run_scenario(sc, decimation=1)
    elapsed = time.perf_counter() - t0
    return sc, log, elapsed


def test_criterion_7_position(closed_loop):
    sc, log, _ = closed_loop
    err = np.linalg.norm(log.vector("x")[-1] - sc.controller.x_d)
    report("7 (position)", err <= 0.01, f"|x(10) - x_d| = {err:.4f} m (limit 0.01)")


def test_criterion_7_link_direction_error(closed_loop):
    e_q = closed_loop[1]["e_q"][-1]
    report("7 (e_q)", e_q <= 0.01, f"e_q(10) = {e_q:.4f} (limit 0.01)")


def test_criterion_7_link_rate_error(closed_loop):
    e_w = closed_loop[1]["e_omega"][-1]
    report("7 (e_omega)", e_w <= 0.01, f"e_omega(10) = {e_w:.4f} (limit 0.01)")


def test_criterion_7_positive_thrust(closed_loop):
    f = closed_loop[1]["f"]
    report("7 (thrust)", bool(np.all(f > 0)), f"min f = {f.min():.3f} N over {len(f)} steps (must stay > 0)")


def test_criterion_7_runtime(closed_loop):
    elapsed = closed_loop[2]
    report("7 (runtime)", elapsed <= 10.0, f"10 s closed loop took {elapsed:.2f} s (limit 10 s)")


def test_criterion_8_lyapunov():
    sc = default_scenario()
    J, kR, kW = sc.plant.J, sc.controller.kR_eff, sc.controller.kOmega_eff
    bound = c3_bound(kR, kW, J)
    c3 = 0.5 * bound
    rep = lyapunov_matrices(kR, kW, J, c3, psi_R=1.0)
    tr = attitude_transient(J, kR, kW, c3, exp_so3(np.array([0.5, -0.4, 0.3])),
                            np.array([0.5, -1.0, 0.3]), psi_R=1.0, duration=3.0)
    inside = bool(np.all(tr.Psi_R < 1.0))
    slack = 1e-12 * max(1.0, tr.W.max())
    sandwich = bool(np.all(tr.lower <= tr.W + slack) and np.all(tr.W <= tr.upper + slack))
    ok = bound > 0 and rep.positive_definite and inside and sandwich
    report(8, ok, f"c3 bound {bound:.4g}; min eig L1 {rep.min_eig_L1:.3e}, L2 {rep.min_eig_L2:.3e}, "
                  f"U {rep.min_eig_U:.3e}; sandwich holds at all {len(tr.t)} samples: {sandwich} "
                  f"(Psi_R < psi_R throughout: {inside})")


def test_criterion_8_sandwich_along_closed_loop():
    # the same bounds evaluated on the attitude errors of the full run
    sc = replace(default_scenario(), duration=3.0)
    table = build_inertia_table(sc.plant)
    ctrl = GeometricController(sc.plant, sc.controller, sc.integrator.dt, table)
    J, kR, kW = sc.plant.J, sc.controller.kR_eff, sc.controller.kOmega_eff
    c3 = 0.5 * c3_bound(kR, kW, J)
    rep = lyapunov_matrices(kR, kW, J, c3, psi_R=1.0)
    worst = []

    def check(k, time_, s, u):
        e = ctrl.last_errors
        z = zeta(e)
        W = lyapunov_value(e, J, kR, c3)
        assert e.Psi_R < 1.0
        worst.append(min(W - z @ rep.L1 @ z, z @ rep.L2 @ z - W))

    simulate(sc.plant, table, sc.initial, ctrl, sc.integrator, sc.duration, 100, on_step=check)
    margin = min(worst)
    report("8 (closed-loop samples)", margin >= -1e-12,
           f"smallest sandwich margin {margin:.3e} over {len(worst)} steps")


def test_criterion_9_singular_perturbation_trend():
    gaps, _, _ = singular_perturbation_gaps(default_scenario(), (1.0, 0.5, 0.25), decimation=1)
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    report(9, mono, "sup-norm position gaps for eps = 1, 0.5, 0.25: "
                    + ", ".join(f"{g:.4f} m" for g in gaps) + " (must decrease)")


def test_criterion_10_determinism(tmp_path):
    sc = default_scenario()
    paths = []
    for name in ("first.csv", "second.csv"):
        write_csv(run_scenario(sc), tmp_path / name)
        paths.append(tmp_path / name)
    a, b = (p.read_bytes() for p in paths)
    header = a.split(b"\n", 1)[0].decode()
    ok = a == b and b"\r" not in a and header.startswith("t,")
    report(10, ok, f"two runs produced {'identical' if a == b else 'different'} CSV files ({len(a)} bytes)")
