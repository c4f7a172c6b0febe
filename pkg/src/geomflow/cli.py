"""Command-line scenario runner and artifact emitter.

Scenarios are JSON configs (or inline flags) naming a conformal family,
a grid, a time window, and a task list. Each task writes fixed-format
CSV/JSON files into the output directory; identical configs produce
byte-identical files. Exit status: 0 success, 1 threshold failure,
2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import acceptance, exact, rescaling, serialize, solver
from .errors import DomainError, GeomflowError
from .geometry import invariant_report
from .grids import CYLINDER, RADIAL, ConformalGrid

TASKS = ("verify", "simulate", "invariants", "rescale", "classify", "embed")
SCHEMES = (solver.EXPLICIT_RK2, solver.SEMI_IMPLICIT)
DEFAULT_TOLERANCES = {"max_ratio": 5.0, "min_ratio": 3.0, "sup_rel_err": 1e-3}
DEFAULT_OUTPUT_COUNT = 17
RESCALE_DEPTHS = (1, 2, 3, 4, 5, 6)
RESCALE_SPAN = 1.5
CLASSIFY_SNAPSHOTS = 253
# families whose backward tip width stays above a fixed uniform grid step;
# the soliton families collapse like exp(beta*t) and alias into garbage
BACKWARD_RESOLVABLE = ("Rosenau", "Sphere", "Flat")

COLUMN_NOTES = """\
artifact files and their columns:
  convergence.csv   resolution, residual, ratio (empty on the coarsest row)
  checkpoint_NNNN.json  chart, t, nodes, u, family/params when known
  rmax.csv          t, r_max
  diagnostics.json  f_defect, m_of_t, harnack_defect, harnack_shift,
                    length_evolution_defect, circle_indices
  invariants.csv    t, tau, aperture, circumference, avr, r_max,
                    hartman_defect_length, hartman_defect_area
                    (cylinder charts leave the radial-only cells empty)
  rescale_jN.json   j, T_j, gamma_j, t_j, x_j, M_j, alpha_j, omega_j,
                    profile_distance (sup gap to the model profile on the
                    rescaled arc window [0, 1.5])
  classify.csv      T, S
  classify.json     verdict, t0, basis
  surface.csv       s, r, z
  embed.json        circumference, width
  verify_report.csv criterion, name, check, measured, requirement, status
rescale and classify accept the Rosenau, Sphere, and Flat families; the
steady-soliton tip width collapses exponentially going backward, below
any fixed uniform grid step, so those families are rejected up front.
floats are serialized with 17 significant digits; files are written
atomically (temp file then rename). GEOMFLOW_OUT overrides --out and the
config's output directory."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated description of one scenario: source, grid, window, tasks."""

    name: str
    family: str | None
    params: tuple[tuple[str, float], ...]
    checkpoint: str | None
    extent: float
    resolution: int
    t0: float
    t1: float
    output_times: tuple[float, ...] | None
    cfl: float
    scheme: str
    tasks: tuple[str, ...]
    tolerances: tuple[tuple[str, float], ...]
    out: str

    def __post_init__(self):
        if not self.name:
            raise DomainError("config needs a nonempty name")
        if (self.family is None) == (self.checkpoint is None):
            raise DomainError("config needs exactly one of family or checkpoint")
        if self.resolution < 16:
            raise DomainError(f"resolution must be >= 16, got {self.resolution}")
        if not self.extent > 0.0:
            raise DomainError(f"extent must be > 0, got {self.extent}")
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.tasks:
            raise DomainError("tasks must be nonempty")
        unknown = [t for t in self.tasks if t not in TASKS]
        if unknown:
            raise DomainError(f"unknown tasks {unknown}; expected subset of {list(TASKS)}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}; expected one of {list(SCHEMES)}")
        bad_tol = [k for k, _ in self.tolerances if k not in DEFAULT_TOLERANCES]
        if bad_tol:
            raise DomainError(
                f"unknown tolerance keys {bad_tol}; expected subset of {sorted(DEFAULT_TOLERANCES)}"
            )

    def spec(self) -> exact.ExactSolutionSpec | None:
        if self.family is None:
            return None
        return exact.spec_from_name(self.family, **dict(self.params))

    def effective_tolerances(self) -> dict:
        return {**DEFAULT_TOLERANCES, **dict(self.tolerances)}


_CONFIG_KEYS = (
    "name",
    "family",
    "params",
    "checkpoint",
    "extent",
    "resolution",
    "t0",
    "t1",
    "output_times",
    "cfl",
    "scheme",
    "tasks",
    "tolerances",
    "out",
)


def config_from_payload(payload: dict) -> ScenarioConfig:
    """Build a config from a parsed JSON document, rejecting unknown keys."""
    if not isinstance(payload, dict):
        raise DomainError("config document must be a JSON object")
    unknown = sorted(set(payload) - set(_CONFIG_KEYS))
    if unknown:
        raise DomainError(f"unknown config keys {unknown}")
    params = payload.get("params") or {}
    tolerances = payload.get("tolerances") or {}
    if not isinstance(params, dict) or not isinstance(tolerances, dict):
        raise DomainError("params and tolerances must be JSON objects")
    times = payload.get("output_times")
    try:
        return ScenarioConfig(
            name=str(payload.get("name", "")),
            family=payload.get("family"),
            params=tuple(sorted((k, float(v)) for k, v in params.items())),
            checkpoint=payload.get("checkpoint"),
            extent=float(payload.get("extent", 20.0)),
            resolution=int(payload.get("resolution", 2000)),
            t0=float(payload.get("t0", -2.0)),
            t1=float(payload.get("t1", -1.0)),
            output_times=None if times is None else tuple(float(t) for t in times),
            cfl=float(payload.get("cfl", 0.4)),
            scheme=str(payload.get("scheme", solver.SEMI_IMPLICIT)),
            tasks=tuple(payload.get("tasks", ())),
            tolerances=tuple(sorted((k, float(v)) for k, v in tolerances.items())),
            out=str(payload.get("out", "out")),
        )
    except (TypeError, ValueError) as err:
        raise DomainError(f"malformed config value: {err}") from err


def config_to_payload(config: ScenarioConfig) -> dict:
    return {
        "name": config.name,
        "family": config.family,
        "params": dict(config.params),
        "checkpoint": config.checkpoint,
        "extent": config.extent,
        "resolution": config.resolution,
        "t0": config.t0,
        "t1": config.t1,
        "output_times": None if config.output_times is None else list(config.output_times),
        "cfl": config.cfl,
        "scheme": config.scheme,
        "tasks": list(config.tasks),
        "tolerances": dict(config.tolerances),
        "out": config.out,
    }


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as err:
        raise DomainError(f"config {path} is not valid JSON: {err}") from err
    return config_from_payload(payload)


def _sample(spec: exact.ExactSolutionSpec, t: float, n: int, extent: float) -> ConformalGrid:
    if spec.chart == RADIAL:
        return exact.sample_grid(spec, t, n=n, extent=extent)
    return exact.sample_grid(spec, t, n=n, x_lo=-extent, x_hi=extent)


def _exact_trajectory(spec, times, n: int, extent: float):
    if spec.chart == RADIAL:
        return solver.exact_trajectory(spec, times, n=n, extent=extent)
    return solver.exact_trajectory(spec, times, n=n, x_lo=-extent, x_hi=extent)


def _initial_grid(config: ScenarioConfig):
    """Starting grid plus the family spec when one is known."""
    spec = config.spec()
    if spec is not None:
        return _sample(spec, config.t0, config.resolution, config.extent), spec
    grid = serialize.load_checkpoint(config.checkpoint)
    provenance = grid.provenance
    return grid, provenance


def _output_times(config: ScenarioConfig, t_start: float) -> np.ndarray:
    if config.output_times is not None:
        return np.asarray(config.output_times, dtype=float)
    return np.linspace(t_start, config.t1, DEFAULT_OUTPUT_COUNT)


def _convergence_ladder(resolution: int) -> tuple[int, ...]:
    ladder = sorted({max(16, resolution // (2**k)) for k in range(3, -1, -1)})
    return tuple(ladder)


def _task_verify(config: ScenarioConfig, out_dir: str) -> int:
    spec = config.spec()
    if spec is None:
        raise DomainError("the verify task needs a family, not a checkpoint")
    tol = config.effective_tolerances()
    from .geometry import laplacian_field

    errors = []
    rows = []
    failures = 0
    for n in _convergence_ladder(config.resolution):
        grid = _sample(spec, config.t0, n, config.extent)
        lap = laplacian_field(np.log(grid.u), grid.nodes, grid.h, grid.chart)
        residual = exact.dudt_profile(spec, grid.nodes, config.t0) - lap
        err = float(np.abs(residual[grid.reliable_slice()]).max())
        ratio = None if not errors else errors[-1] / err
        if ratio is not None and not tol["min_ratio"] <= ratio <= tol["max_ratio"]:
            failures += 1
        errors.append(err)
        rows.append([n, err, ratio])
    serialize.write_csv(os.path.join(out_dir, "convergence.csv"), ("resolution", "residual", "ratio"), rows)
    return failures


def _task_simulate(config: ScenarioConfig, out_dir: str) -> int:
    grid0, spec = _initial_grid(config)
    times = _output_times(config, float(grid0.t))
    traj = solver.evolve(
        grid0, config.t1, cfl=config.cfl, scheme=config.scheme, output_times=times
    )
    for i, snap in enumerate(traj.snapshots):
        serialize.save_checkpoint(os.path.join(out_dir, f"checkpoint_{i:04d}.json"), snap)
    series = solver.rmax_series(traj)
    serialize.write_csv(
        os.path.join(out_dir, "rmax.csv"), ("t", "r_max"), [[t, v] for t, v in series.values]
    )
    serialize.write_json(
        os.path.join(out_dir, "diagnostics.json"),
        serialize.diagnostics_payload(solver.diagnostics(traj)),
    )
    if spec is None:
        return 0
    sup_rel = 0.0
    for snap in traj.snapshots:
        u_ref = exact.u_profile(spec, snap.nodes, float(snap.t))
        rel = snap.reliable_slice()
        sup_rel = max(sup_rel, float(np.abs((snap.u - u_ref) / u_ref)[rel].max()))
    return int(sup_rel > config.effective_tolerances()["sup_rel_err"])


def _task_invariants(config: ScenarioConfig, out_dir: str) -> int:
    spec = config.spec()
    if spec is None:
        grids = [serialize.load_checkpoint(config.checkpoint)]
    else:
        grids = [
            _sample(spec, float(t), config.resolution, config.extent)
            for t in _output_times(config, config.t0)
        ]
    header, rows = serialize.invariant_table(invariant_report(g) for g in grids)
    serialize.write_csv(os.path.join(out_dir, "invariants.csv"), header, rows)
    return 0


def _require_backward_resolvable(spec, task: str) -> None:
    if spec is None:
        raise DomainError(f"the {task} task needs a family, not a checkpoint")
    if spec.family not in BACKWARD_RESOLVABLE:
        raise DomainError(
            f"the {task} task needs backward data a fixed grid can resolve; "
            f"the {spec.family} tip width collapses exponentially going backward, "
            f"so use one of {list(BACKWARD_RESOLVABLE)}"
        )


def _task_rescale(config: ScenarioConfig, out_dir: str) -> int:
    spec = config.spec()
    _require_backward_resolvable(spec, "rescale")
    for j in RESCALE_DEPTHS:
        if spec.family == "Rosenau":
            traj = rescaling.backward_rosenau_trajectory(j)
        else:
            times = np.linspace(rescaling.default_window(j), -1e-3, 257)
            traj = _exact_trajectory(spec, times, config.resolution, config.extent)
        pick = rescaling.pick_point(
            traj, rescaling.default_window(j), rescaling.default_gamma(j), j=j
        )
        distance = rescaling.profile_distance(rescaling.dilate(traj, pick), RESCALE_SPAN)
        serialize.write_json(
            os.path.join(out_dir, f"rescale_j{j}.json"),
            serialize.rescaling_record(pick, distance),
        )
    return 0


def _task_classify(config: ScenarioConfig, out_dir: str) -> int:
    spec = config.spec()
    _require_backward_resolvable(spec, "classify")
    times = np.linspace(config.t0, config.t1, CLASSIFY_SNAPSHOTS)
    traj = _exact_trajectory(spec, times, config.resolution, config.extent)
    report = rescaling.classify_type(traj, t0=config.t1)
    serialize.write_csv(
        os.path.join(out_dir, "classify.csv"), ("T", "S"), [[t, s] for t, s in report.samples]
    )
    serialize.write_json(
        os.path.join(out_dir, "classify.json"),
        {"verdict": report.verdict, "t0": report.t0, "basis": report.basis},
    )
    return 0


def _task_embed(config: ScenarioConfig, out_dir: str) -> int:
    from . import embedding

    spec = config.spec()
    if spec is None:
        grid = serialize.load_checkpoint(config.checkpoint)
    else:
        grid = _sample(spec, config.t0, config.resolution, config.extent)
    profile = embedding.profile_from_metric(grid)
    surface = embedding.embed(profile)
    serialize.write_csv(
        os.path.join(out_dir, "surface.csv"),
        ("s", "r", "z"),
        [[s, r, z] for s, r, z in zip(surface.s, surface.r, surface.z)],
    )
    circ, width = embedding.circumference_and_width(surface)
    serialize.write_json(
        os.path.join(out_dir, "embed.json"), {"circumference": circ, "width": width}
    )
    return 0


_TASK_RUNNERS = {
    "verify": _task_verify,
    "simulate": _task_simulate,
    "invariants": _task_invariants,
    "rescale": _task_rescale,
    "classify": _task_classify,
    "embed": _task_embed,
}


def resolve_out_dir(configured: str) -> str:
    return os.environ.get("GEOMFLOW_OUT") or configured


def run(config: ScenarioConfig) -> int:
    """Execute the config's tasks in canonical order; 0/1 exit semantics."""
    out_dir = resolve_out_dir(config.out)
    os.makedirs(out_dir, exist_ok=True)
    failures = 0
    for task in TASKS:
        if task in config.tasks:
            failures += _TASK_RUNNERS[task](config, out_dir)
    return 1 if failures else 0


def render_verify_table(results) -> str:
    lines = []
    for res in results:
        verdict = "PASS" if res.passed else "FAIL"
        lines.append(f"[{verdict}] criterion {res.index:>2}  {res.name}")
        for check in res.checks:
            mark = "ok  " if check.ok else "FAIL"
            lines.append(f"    {mark} {check.label}: {check.measured}  required {check.requirement}")
    passed = sum(1 for res in results if res.passed)
    lines.append(f"passed {passed} of {len(results)} criteria")
    return "\n".join(lines) + "\n"


def verify_all(out_dir: str | None = None) -> int:
    """Run the built-in acceptance suite; print the table, optionally save it."""
    results = acceptance.run_all()
    sys.stdout.write(render_verify_table(results))
    if out_dir is not None:
        rows = [
            [res.index, res.name, c.label, c.measured, c.requirement, "pass" if c.ok else "fail"]
            for res in results
            for c in res.checks
        ]
        serialize.write_csv(
            os.path.join(out_dir, "verify_report.csv"),
            ("criterion", "name", "check", "measured", "requirement", "status"),
            rows,
        )
    return 0 if all(res.passed for res in results) else 1


def _inline_config(task: str, args: argparse.Namespace) -> ScenarioConfig:
    return ScenarioConfig(
        name=f"{args.family}-{task}",
        family=args.family,
        params=(),
        checkpoint=None,
        extent=args.extent,
        resolution=args.n,
        t0=args.t0,
        t1=args.t1,
        output_times=None,
        cfl=args.cfl,
        scheme=solver.SEMI_IMPLICIT,
        tasks=(task,),
        tolerances=(),
        out=args.out,
    )


def _add_inline_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--family", required=True, help="one of " + ", ".join(exact.FAMILIES))
    sub.add_argument("--t0", type=float, default=-2.0, help="window start (default -2)")
    sub.add_argument("--t1", type=float, default=-1.0, help="window end (default -1)")
    sub.add_argument("--n", type=int, default=2000, help="grid resolution (default 2000)")
    sub.add_argument("--extent", type=float, default=20.0, help="chart extent (default 20)")
    sub.add_argument("--cfl", type=float, default=0.4, help="time-step fraction (default 0.4)")
    sub.add_argument("--out", default="out", help="output directory (default ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomflow",
        description="Conformal-factor flow scenarios: simulate, measure, classify, embed.",
        epilog=COLUMN_NOTES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)
    run_p = subs.add_parser(
        "run",
        help="execute a JSON scenario config",
        epilog=COLUMN_NOTES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run_p.add_argument("config", help="path to a scenario JSON document")
    verify_p = subs.add_parser("verify", help="run the built-in acceptance suite")
    verify_p.add_argument("--out", default=None, help="also write verify_report.csv here")
    for task in ("simulate", "invariants", "rescale", "classify", "embed"):
        sub = subs.add_parser(
            task,
            help=f"run the {task} task from inline flags",
            epilog=COLUMN_NOTES,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        _add_inline_flags(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            out_dir = os.environ.get("GEOMFLOW_OUT") or args.out
            if out_dir is not None:
                os.makedirs(out_dir, exist_ok=True)
            return verify_all(out_dir)
        if args.command == "run":
            return run(load_config(args.config))
        return run(_inline_config(args.command, args))
    except GeomflowError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
