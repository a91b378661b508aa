"""Command-line entry point: ``quadcable {simulate,linearize,verify}``."""
import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ParseError, QuadCableError, ValidationError
from .experiments import run_scenario
from .io import matrix_csv, summarize, write_csv, write_plot_data, write_summary
from .linear import build_linear_model, controllability_rank
from .scenario import default_scenario, parse_scenario
from .verify import run_checks

EXIT_FAILED = 1
EXIT_CONFIG = 2


def load(path, duration=None, dt=None, seed=None):
    sc = parse_scenario(path) if path else default_scenario()
    if duration is not None:
        if duration < 0:
            raise ValidationError("must be non-negative", "--duration")
        sc = replace(sc, duration=duration)
    if dt is not None:
        sc = replace(sc, integrator=replace(sc.integrator, dt=dt))
    if seed is not None:
        sc = replace(sc, seed=seed)
    return sc


def simulate_to(sc, out):
    """Run a scenario and write its CSV, summary and plot data to ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    log = run_scenario(sc)
    x_d = sc.controller.x_d if sc.controller is not None else (0.0, 0.0, 0.0)
    write_csv(log, out / sc.outputs.trajectory)
    summary = summarize(log, x_d)
    write_summary(summary, out / sc.outputs.summary)
    if sc.outputs.plots:
        write_plot_data(log, out, x_d)
    return summary


def _sweep_job(args):
    path, out, duration, dt, seed = args
    try:
        sc = load(path, duration, dt, seed)
        return path, simulate_to(sc, out), None
    except QuadCableError as exc:
        return path, None, f"{type(exc).__name__}: {exc}"


def sweep_dirs(paths, out):
    """One output directory per config, named after the file stem and
    disambiguated by position when stems repeat."""
    stems = [Path(p).stem for p in paths]
    return [Path(out) / (s if stems.count(s) == 1 else f"{s}-{i}") for i, s in enumerate(stems)]


def cmd_simulate(args):
    if args.sweep:
        jobs = [(p, d, args.duration, args.dt, args.seed)
                for p, d in zip(args.sweep, sweep_dirs(args.sweep, args.out))]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_job, jobs))
        status = 0
        for path, summary, err in results:
            if err:
                print(f"{path}: {err}", file=sys.stderr)
                status = EXIT_FAILED
            else:
                print(f"{path}: {json.dumps(summary, sort_keys=True)}")
        return status
    sc = load(args.config, args.duration, args.dt, args.seed)
    summary = simulate_to(sc, args.out)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_linearize(args):
    sc = load(args.config, seed=args.seed)
    lm = build_linear_model(sc.plant)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix_csv(lm.M, out / "M.csv")
    matrix_csv(lm.G, out / "G.csv")
    matrix_csv(lm.B, out / "B.csv")
    rank = controllability_rank(lm)
    full = 2 * lm.dim
    (out / "rank.txt").write_text(f"{rank}\n", encoding="utf-8")
    print(f"state dimension {lm.dim}, controllability rank {rank} of {full}"
          f" ({'full' if rank == full else 'deficient'})")
    return 0


def cmd_verify(args):
    sc = load(args.config, args.duration, args.dt, args.seed)
    results = run_checks(sc, seed=sc.seed)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="quadcable",
                                     description="Quadrotor with a multi-link cable: simulation and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, timing=True):
        p.add_argument("--config", type=Path, help="scenario YAML (defaults to the built-in scenario)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, help="seed for randomized checks")
        if timing:
            p.add_argument("--duration", type=float, help="override the scenario duration (s)")
            p.add_argument("--dt", type=float, help="override the integrator step (s)")

    sim = sub.add_parser("simulate", help="run a scenario and write trajectory, summary and plot data")
    common(sim)
    sim.add_argument("--sweep", nargs="+", metavar="CONFIG",
                     help="run several scenarios concurrently, each into its own subdirectory of --out")
    sim.add_argument("--jobs", type=int, help="worker processes for --sweep")
    sim.set_defaults(func=cmd_simulate)

    lin = sub.add_parser("linearize", help="write the linearized M, G, B matrices and the controllability rank")
    common(lin, timing=False)
    lin.set_defaults(func=cmd_linearize)

    ver = sub.add_parser("verify", help="run the property checks; exit 0 only if all pass")
    common(ver)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadCableError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
