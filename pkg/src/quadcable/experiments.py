"""Scenario-level runs shared by the CLI and the test-suite."""
from dataclasses import replace

import numpy as np

from .controller import GeometricController, ReducedController
from .dynamics import build_inertia_table
from .integrators import simulate


def build_controller(sc, table=None):
    """Controller callable for a scenario, or None for free flight."""
    if not sc.controller_enabled:
        return None
    table = table if table is not None else build_inertia_table(sc.plant)
    if sc.controller_mode == "reduced":
        return ReducedController(sc.plant, sc.controller, table)
    return GeometricController(sc.plant, sc.controller, sc.integrator.dt, table)


def run_scenario(sc, decimation=None, controller=None):
    table = build_inertia_table(sc.plant)
    if controller is None:
        controller = build_controller(sc, table)
    dec = sc.outputs.decimation if decimation is None else decimation
    return simulate(sc.plant, table, sc.initial, controller, sc.integrator, sc.duration, dec)


def scaled_attitude_gains(cfg, eps):
    """Attitude gains for time-scale parameter ``eps`` relative to ``cfg``
    (taken as eps = 1): kR/eps^2 and kOmega/eps."""
    return replace(cfg, kR_eff=cfg.kR_eff / eps ** 2, kOmega_eff=cfg.kOmega_eff / eps)


def singular_perturbation_gaps(sc, eps_values=(1.0, 0.5, 0.25), decimation=1):
    """Sup-norm gap between full-model and reduced-model quadrotor
    positions for each eps. Returns ``(gaps, reduced_log, full_logs)``."""
    table = build_inertia_table(sc.plant)
    reduced = simulate(sc.plant, table, sc.initial, ReducedController(sc.plant, sc.controller, table),
                       sc.integrator, sc.duration, decimation)
    xr = reduced.vector("x")
    gaps = []
    fulls = []
    for eps in eps_values:
        cfg = scaled_attitude_gains(sc.controller, eps)
        ctrl = GeometricController(sc.plant, cfg, sc.integrator.dt, table)
        log = simulate(sc.plant, table, sc.initial, ctrl, sc.integrator, sc.duration, decimation)
        gaps.append(float(np.max(np.linalg.norm(log.vector("x") - xr, axis=1))))
        fulls.append(log)
    return gaps, reduced, fulls
