"""Scenario files: YAML with sections plant, controller, integrator,
initial, analysis, outputs, plus top-level duration and seed.

Every field is optional; omitted fields take the numerical-example values
(five 0.1 kg / 0.1 m links under a 0.5 kg quadrotor, hovering target at
the origin, start at [0.6, -0.7, 0.2] with a horizontally curved cable).
"""
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .controller import DEFAULT_KQ, ControllerConfig
from .dynamics import PlantParams, SystemState
from .errors import ParseError, ValidationError
from .integrators import IntegratorConfig
from .manifold import E2, E3, exp_so3, is_rotation

DEFAULT_X0 = (0.6, -0.7, 0.2)
DEFAULT_THETA_MAX = np.pi / 2

SCHEMA = {
    "plant": {"m", "J", "n", "link_masses", "link_lengths", "g"},
    "controller": {"enabled", "mode", "x_d", "b1_d", "k_x", "k_xdot", "k_q", "k_omega",
                   "kR_eff", "kOmega_eff", "omega_c_dt", "max_Omega_c", "max_Omegadot_c"},
    "integrator": {"dt", "scheme", "renormalize_every"},
    "initial": {"x", "v", "R", "Omega", "links", "link_rates"},
    "analysis": {"c3", "c3_fraction", "psi_R", "eps"},
    "outputs": {"decimation", "trajectory", "summary", "plots"},
}
TOP_LEVEL = set(SCHEMA) | {"duration", "seed"}


@dataclass
class AnalysisConfig:
    c3: float = None
    c3_fraction: float = 0.5
    psi_R: float = 1.0
    eps: float = 1.0


@dataclass
class OutputConfig:
    decimation: int = 10
    trajectory: str = "trajectory.csv"
    summary: str = "summary.json"
    plots: bool = True


@dataclass
class ScenarioConfig:
    plant: PlantParams
    controller: ControllerConfig
    integrator: IntegratorConfig
    initial: SystemState
    duration: float = 10.0
    controller_enabled: bool = True
    controller_mode: str = "full"
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    source: str = None


def horizontal_arc(n, theta_max=DEFAULT_THETA_MAX):
    """Link directions tilted about e2 by angles spaced linearly from
    ``theta_max`` (first link) down to ``theta_max / n`` (last link)."""
    angles = theta_max * np.arange(n, 0, -1) / n
    return np.array([exp_so3(a * E2) @ E3 for a in angles])


def _line_index(node, path=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = path + (k.value,)
            out[".".join(key)] = k.start_mark.line + 1
            _line_index(v, key, out)
    return out


class _Reader:
    def __init__(self, data, lines):
        self.data = data
        self.lines = lines

    def fail(self, field, msg):
        raise ParseError(msg, line=self.lines.get(field), field=field)

    def section(self, name):
        sec = self.data.get(name)
        if sec is None:
            return {}
        if not isinstance(sec, dict):
            self.fail(name, "expected a mapping")
        unknown = set(sec) - SCHEMA[name]
        if unknown:
            key = sorted(map(str, unknown))[0]
            self.fail(f"{name}.{key}", "unknown field")
        return sec

    def number(self, sec, name, key, default):
        if key not in sec or sec[key] is None:
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{name}.{key}", f"expected a number, got {v!r}")
        return float(v)

    def array(self, sec, name, key, default, shape=None):
        if key not in sec or sec[key] is None:
            return default
        try:
            arr = np.asarray(sec[key], dtype=float)
        except (TypeError, ValueError):
            self.fail(f"{name}.{key}", f"expected numbers, got {sec[key]!r}")
        if shape is not None and arr.shape not in shape:
            self.fail(f"{name}.{key}", f"expected shape {' or '.join(map(str, shape))}, got {arr.shape}")
        return arr


def _rotation(reader, value):
    if value is None or (isinstance(value, str) and value.lower() in ("identity", "i")):
        return np.eye(3)
    if isinstance(value, dict):
        if set(value) != {"axis_angle"}:
            reader.fail("initial.R", "expected 'identity', a 3x3 matrix or {axis_angle: [..]}")
        v = reader.array(value, "initial.R", "axis_angle", None, shape=[(3,)])
        return exp_so3(v)
    try:
        R = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        reader.fail("initial.R", f"cannot read rotation {value!r}")
    if R.shape == (3,):
        return exp_so3(R)
    if R.shape != (3, 3):
        reader.fail("initial.R", f"expected a 3x3 matrix, got shape {R.shape}")
    if not is_rotation(R):
        raise ValidationError("not a rotation matrix (R^T R = I, det R = 1)", "initial.R")
    return R


_PI_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def _angle(text):
    """Float, or a multiple/fraction of pi such as ``pi/2`` or ``0.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text)
    if not m:
        return None
    try:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
    except ValueError:
        return None
    return num * np.pi / den


_ARC = re.compile(r"^\s*horizontal-arc\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def _links(reader, value, n):
    if value is None:
        return horizontal_arc(n)
    if isinstance(value, str):
        if value.strip() == "hanging":
            return np.tile(E3, (n, 1))
        m = _ARC.match(value)
        if not m:
            reader.fail("initial.links", f"unknown generator {value!r}")
        theta = DEFAULT_THETA_MAX
        if m.group(1):
            theta = _angle(m.group(1))
            if theta is None:
                reader.fail("initial.links", f"cannot read angle {m.group(1)!r}")
        return horizontal_arc(n, theta)
    if isinstance(value, dict):
        gen = value.get("generator")
        if gen == "hanging":
            return np.tile(E3, (n, 1))
        if gen != "horizontal-arc":
            reader.fail("initial.links", f"unknown generator {gen!r}")
        theta = value.get("theta_max", DEFAULT_THETA_MAX)
        if isinstance(theta, str):
            theta = _angle(theta)
        if isinstance(theta, bool) or not isinstance(theta, (int, float)):
            reader.fail("initial.links.theta_max", "expected an angle in radians or a multiple of pi")
        return horizontal_arc(n, theta)
    try:
        q = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        reader.fail("initial.links", "expected a generator or a list of 3-vectors")
    if q.ndim != 2 or q.shape[1] != 3:
        reader.fail("initial.links", f"expected a list of 3-vectors, got shape {q.shape}")
    if len(q) != n:
        raise ValidationError(f"{len(q)} link directions given for {n} links", "initial.links")
    norms = np.linalg.norm(q, axis=1)
    if np.any(norms == 0):
        raise ValidationError("link directions must be nonzero", "initial.links")
    return q / norms[:, None]


def _per_link(reader, sec, key, n, default):
    v = sec.get(key)
    if v is None:
        return np.full(n, default)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return np.full(n, float(v))
    arr = reader.array(sec, "plant", key, None)
    if arr.ndim != 1 or len(arr) != n:
        raise ValidationError(f"expected {n} values, got {arr.size}", f"plant.{key}")
    return arr


def scenario_from_dict(data, lines=None, source=None):
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", line=1)
    reader = _Reader(data, lines or {})
    unknown = set(data) - TOP_LEVEL
    if unknown:
        reader.fail(sorted(map(str, unknown))[0], "unknown field")

    ps = reader.section("plant")
    n = ps.get("n")
    for key in ("link_masses", "link_lengths"):
        if n is None and isinstance(ps.get(key), list):
            n = len(ps[key])
    if n is None:
        n = 5
    if isinstance(n, bool) or not isinstance(n, int):
        reader.fail("plant.n", f"expected an integer, got {n!r}")
    if n < 1:
        raise ValidationError("at least one link is required", "plant.n")
    J = reader.array(ps, "plant", "J", None, shape=[(3,), (3, 3)])
    plant = PlantParams(
        m=reader.number(ps, "plant", "m", 0.5),
        J=np.diag([0.557, 0.557, 1.05]) * 1e-2 if J is None else J,
        link_masses=_per_link(reader, ps, "link_masses", n, 0.1),
        link_lengths=_per_link(reader, ps, "link_lengths", n, 0.1),
        g=reader.number(ps, "plant", "g", 9.81),
    )

    cs = reader.section("controller")
    enabled = cs.get("enabled", True)
    if not isinstance(enabled, bool):
        reader.fail("controller.enabled", "expected true or false")
    mode = cs.get("mode", "full")
    if mode not in ("full", "reduced"):
        reader.fail("controller.mode", f"expected 'full' or 'reduced', got {mode!r}")
    kw = {}
    for key in ("k_x", "k_xdot", "kR_eff", "kOmega_eff", "omega_c_dt", "max_Omega_c", "max_Omegadot_c"):
        if key in cs and cs[key] is not None:
            kw[key] = reader.number(cs, "controller", key, None)
    for key in ("x_d", "b1_d"):
        if key in cs:
            kw[key] = reader.array(cs, "controller", key, None, shape=[(3,)])
    for key in ("k_q", "k_omega"):
        if key in cs:
            arr = np.atleast_1d(reader.array(cs, "controller", key, None))
            if len(arr) != n:
                raise ValidationError(f"{len(arr)} link gains given for {n} links", f"controller.{key}")
            kw[key] = arr
    controller = None
    if n == len(DEFAULT_KQ) or ("k_q" in kw and "k_omega" in kw):
        controller = ControllerConfig(**kw)
    elif enabled:
        # published link gains exist only for five links
        raise ValidationError(f"k_q and k_omega must be given for n = {n}", "controller.k_q")

    its = reader.section("integrator")
    scheme = its.get("scheme", "rk4")
    if scheme not in ("rk4", "euler"):
        reader.fail("integrator.scheme", f"expected 'rk4' or 'euler', got {scheme!r}")
    integrator = IntegratorConfig(
        dt=reader.number(its, "integrator", "dt", 1e-3),
        scheme=scheme,
        renormalize_every=its.get("renormalize_every", 1),
    )

    ins = reader.section("initial")
    q0 = _links(reader, ins.get("links"), n)
    rates = reader.array(ins, "initial", "link_rates", np.zeros((n, 3)))
    if rates.shape != (n, 3):
        raise ValidationError(f"expected {n} rate vectors", "initial.link_rates")
    initial = SystemState(
        x=reader.array(ins, "initial", "x", np.array(DEFAULT_X0), shape=[(3,)]),
        v=reader.array(ins, "initial", "v", np.zeros(3), shape=[(3,)]),
        R=_rotation(reader, ins.get("R")),
        Omega=reader.array(ins, "initial", "Omega", np.zeros(3), shape=[(3,)]),
        q=q0,
        omega=rates,
    ).projected()

    an = reader.section("analysis")
    analysis = AnalysisConfig(
        c3=reader.number(an, "analysis", "c3", None),
        c3_fraction=reader.number(an, "analysis", "c3_fraction", 0.5),
        psi_R=reader.number(an, "analysis", "psi_R", 1.0),
        eps=reader.number(an, "analysis", "eps", 1.0),
    )
    if not 0 < analysis.psi_R < 2:
        raise ValidationError("must lie in (0, 2)", "analysis.psi_R")
    if not analysis.eps > 0:
        raise ValidationError("must be positive", "analysis.eps")

    out = reader.section("outputs")
    dec = out.get("decimation", 10)
    if isinstance(dec, bool) or not isinstance(dec, int) or dec < 1:
        reader.fail("outputs.decimation", "expected an integer >= 1")
    outputs = OutputConfig(
        decimation=dec,
        trajectory=str(out.get("trajectory", "trajectory.csv")),
        summary=str(out.get("summary", "summary.json")),
        plots=bool(out.get("plots", True)),
    )

    duration = data.get("duration", 10.0)
    if isinstance(duration, bool) or not isinstance(duration, (int, float)):
        reader.fail("duration", f"expected a number, got {duration!r}")
    duration = float(duration)
    if duration < 0:
        raise ValidationError("must be non-negative", "duration")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        reader.fail("seed", "expected an integer")

    return ScenarioConfig(
        plant=plant, controller=controller, integrator=integrator, initial=initial,
        duration=duration, controller_enabled=enabled, controller_mode=mode,
        analysis=analysis, outputs=outputs, seed=seed, source=source,
    )


def parse_scenario(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(getattr(exc, "problem", exc)),
                         line=mark.line + 1 if mark is not None else None) from exc
    lines = _line_index(node) if node is not None else {}
    return scenario_from_dict(data, lines, source=str(path))


def default_scenario():
    return scenario_from_dict({})
