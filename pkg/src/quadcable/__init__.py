"""Quadrotor carrying an n-link cable: dynamics on (S^2)^n, a geometric
hover controller, linearization and numerical certificates."""
from .controller import ControllerConfig, GeometricController, ReducedController
from .dynamics import (ControlInput, PlantParams, SystemState, accelerations,
                       build_inertia_table, total_energy)
from .errors import (C3TooLarge, DegenerateThrust, HeadingParallel, NonFinite, NotSkew,
                     ParseError, QuadCableError, SingularMassMatrix, ValidationError)
from .integrators import IntegratorConfig, Scheme, TrajectoryLog, simulate, step
from .linear import build_linear_model, controllability_rank
from .scenario import ScenarioConfig, default_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "C3TooLarge", "ControlInput", "ControllerConfig", "DegenerateThrust", "GeometricController",
    "HeadingParallel", "IntegratorConfig", "NonFinite", "NotSkew", "ParseError", "PlantParams",
    "QuadCableError", "ReducedController", "ScenarioConfig", "Scheme", "SingularMassMatrix",
    "SystemState", "TrajectoryLog", "ValidationError", "accelerations", "build_inertia_table",
    "build_linear_model", "controllability_rank", "default_scenario", "parse_scenario",
    "simulate", "step", "total_energy",
]
