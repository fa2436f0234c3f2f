"""Command-line entry point.

Subcommands:

* ``reproduce`` -- run the three benchmark experiments (2-D quadratic,
  high-dimensional quadratic, high-dimensional tanh) with gradient
  descent on the ambient objective, gradient descent on the reduced
  objective, and the preconditioned method, writing one trace CSV per
  method plus a spectral report and a Hessian eigenspectrum CSV.
* ``analyze``   -- compute a spectral report for a problem/mapping/region
  described by flags or a TOML/JSON config file.
* ``propcheck`` -- run the randomized theorem-inequality suites.
* ``sweep``     -- run a batch of solver configurations concurrently.

Artifacts are byte-reproducible for a fixed seed: wall times in trace
CSVs are zeroed unless ``--timing`` is passed (measured nanoseconds are
inherently unstable across runs).

Exit codes: 0 success, 1 failed property check, 2 configuration error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import RedmapError
from .linops import gen_eig, spd_solve, sym_eig
from .optim import (
    GD_FULL,
    GD_REDUCED,
    GEOPREC,
    ArmijoStep,
    FixedStep,
    SolverConfig,
    gauss_newton_direction,
    run,
    step_geoprec,
)
from .problems import ProblemSpec, build_problem
from .propsuite import run_suite
from .reduced import ReducedProblem
from .spectral import Region, condition_report

EXIT_OK = 0
EXIT_PROPFAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

REPRODUCE_MAPPING = {"quad2d": "linear", "quad-hd": "linear", "tanh-hd": "nonlinear"}


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"config file {path!r} does not exist")
    if p.suffix == ".json":
        return json.loads(p.read_text())
    if p.suffix == ".toml":
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:  # pragma: no cover - py310 fallback
            import tomli as tomllib
        return tomllib.loads(p.read_text())
    raise ValueError(f"config file must be .toml or .json, got {p.suffix!r}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _eigs_csv(problem: ReducedProblem, x1: np.ndarray) -> str:
    """Sorted spectra: ambient Hessian, reduced Hessian, and the
    (hess F, R) pencil, in the eigs.csv schema."""
    rows = ["kind,index,value"]
    full = sym_eig(problem.objective.hessian_matrix(problem.embed(x1))).values
    reduced = sym_eig(problem.hessian(x1)).values
    pencil = gen_eig(problem.hessian(x1), problem.pullback_metric(x1))
    for kind, values in [
        ("full", full),
        ("reduced_eucl", reduced),
        ("reduced_pencil", pencil),
    ]:
        for i, v in enumerate(values):
            rows.append(f"{kind},{i},{float(v)!r}")
    return "\n".join(rows) + "\n"


def _build_example(example: str, args) -> tuple[ProblemSpec, str]:
    params: dict = {}
    if example == "quad2d":
        params["M"] = args.M
    else:
        params["n"] = args.n
        params["lambda"] = getattr(args, "lambda_")
        params["seed"] = args.seed
        if example == "tanh-hd":
            params["alpha"] = args.alpha
    spec = build_problem(example, params)
    return spec, REPRODUCE_MAPPING[example]


def cmd_reproduce(args) -> int:
    try:
        spec, mapping_name = _build_example(args.example, args)
    except (RedmapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    reduced = spec.reduced(mapping_name)
    n1 = reduced.n1

    # generic full-space start (a point on the mapping's graph would make
    # plain gradient descent degenerate on these benchmarks); the reduced
    # methods share its x1 block
    start_rng = np.random.default_rng([args.seed, 1])
    full_start = start_rng.standard_normal(spec.objective.dim)
    x1_start = full_start[:n1]

    out = Path(args.out) / args.example
    grad_tol = args.grad_tol
    runs = [
        ("gd_full", spec.objective, full_start, GD_FULL),
        ("gd_reduced", reduced, x1_start, GD_REDUCED),
        ("geoprec", reduced, x1_start, GEOPREC),
    ]
    for name, problem, start, method in runs:
        cfg = SolverConfig(
            method=method,
            step_rule=ArmijoStep(),
            grad_tol=grad_tol,
            max_iter=args.max_iter,
        )
        trace = run(problem, start, cfg)
        if trace.error is not None:
            print(f"error: {name} failed: {trace.error}", file=sys.stderr)
            return EXIT_SOLVER
        _write(out / f"{name}.csv", trace.to_csv(zero_times=not args.timing))
        status = "converged" if trace.converged else "budget exhausted"
        print(f"{name}: {len(trace.records) - 1} iterations, {status}")

    if args.example == "tanh-hd":
        # per-step consistency of the preconditioned direction with an
        # independently assembled Gauss-Newton direction
        cfg = SolverConfig(method=GEOPREC, step_rule=ArmijoStep(), grad_tol=grad_tol)
        x = x1_start.copy()
        deviation = 0.0
        for _ in range(20):
            g = reduced.gradient(x)
            if np.linalg.norm(g) <= grad_tol:
                break
            z = spd_solve(reduced.pullback_metric(x), g)
            gn = gauss_newton_direction(reduced, x)
            deviation = max(
                deviation, float(np.linalg.norm(z - gn) / max(np.linalg.norm(gn), 1e-300))
            )
            x, _, _ = step_geoprec(reduced, x, cfg)
        print(f"gauss-newton max relative deviation: {deviation:.3e}")

    region = Region(center=np.zeros(n1), radius=args.region_radius, samples=args.region_samples, seed=args.seed)
    report = condition_report(reduced, region, minimiser=np.zeros(n1))
    _write(out / "spectral.json", report.to_json())
    _write(out / "eigs.csv", _eigs_csv(reduced, x1_start))
    print(f"artifacts written to {out}")
    return EXIT_OK


def _analyze_minimiser(spec: ProblemSpec, reduced: ReducedProblem, config: dict):
    from .problems import PointSet

    if "minimiser" in config:
        return np.asarray(config["minimiser"], dtype=float)
    if isinstance(spec.solution_set, PointSet):
        candidate = spec.solution_set.point[: reduced.n1]
        if np.allclose(reduced.embed(candidate), spec.solution_set.point, atol=1e-12):
            return candidate
    return None


def cmd_analyze(args) -> int:
    config: dict = {}
    if args.config:
        try:
            config = _load_config(args.config)
        except (ValueError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    problem_cfg = dict(config.get("problem", {}))
    mapping_name = config.get("mapping", {}).get("name") if "mapping" in config else None
    region_cfg = dict(config.get("region", {}))

    if args.problem:
        problem_cfg["name"] = args.problem
    if args.M is not None:
        problem_cfg["M"] = args.M
    if args.mapping:
        mapping_name = args.mapping
    if args.region_radius is not None:
        region_cfg["radius"] = args.region_radius
    if args.region_samples is not None:
        region_cfg["samples"] = args.region_samples

    try:
        name = problem_cfg.pop("name")
        minimiser_cfg = problem_cfg.pop("minimiser", None)
        spec = build_problem(name, problem_cfg)
        if mapping_name is None:
            raise ValueError("no mapping selected (pass --mapping or [mapping] name)")
        reduced = spec.reduced(mapping_name)
        center = np.asarray(
            region_cfg.get("center", np.zeros(reduced.n1)), dtype=float
        )
        region = Region(
            center=center,
            radius=float(region_cfg.get("radius", 0.5)),
            samples=int(region_cfg.get("samples", 32)),
            seed=int(region_cfg.get("seed", args.seed)),
        )
    except (RedmapError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    extra = {"minimiser": minimiser_cfg} if minimiser_cfg is not None else {}
    minimiser = _analyze_minimiser(spec, reduced, extra)
    try:
        report = condition_report(reduced, region, minimiser=minimiser)
    except RedmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = Path(args.out)
    _write(out / "spectral.json", report.to_json())
    print(f"spectral report written to {out / 'spectral.json'}")
    return EXIT_OK


def cmd_propcheck(args) -> int:
    summaries = run_suite(seed=args.seed, count=args.count, corrupt=args.corrupt_hessian)
    width = max(len(s.family) for s in summaries)
    print(f"{'family':<{width}}  total  passed  skipped  failed")
    for s in summaries:
        print(
            f"{s.family:<{width}}  {s.total:5d}  {s.passed:6d}  {s.skipped:7d}  {s.failed:6d}"
        )
    failing = [s for s in summaries if not s.ok]
    if failing:
        first = failing[0].first_failure
        print(
            f"FAIL {first.family} instance {first.index} (seed {args.seed}): {first.detail}",
            file=sys.stderr,
        )
        return EXIT_PROPFAIL
    print("all property families passed")
    return EXIT_OK


def _sweep_start(entry: dict, n1: int, default_seed: int) -> np.ndarray:
    start = entry.get("start", "unit")
    if isinstance(start, (list, tuple)):
        return np.asarray(start, dtype=float)
    if start == "unit":
        return np.ones(n1)
    if isinstance(start, str) and start.startswith("random"):
        seed = default_seed
        if "(" in start:
            seed = int(start[start.index("(") + 1 : start.rindex(")")])
        return np.random.default_rng([seed, 2]).standard_normal(n1)
    raise ValueError(f"unknown start preset {start!r}")


def _run_sweep_entry(entry: dict, out_root: Path, seed: int, timing: bool) -> str:
    name = entry["name"]
    spec = build_problem(entry["problem"]["name"], entry["problem"].get("params", {}))
    method = entry.get("method", GEOPREC)
    step_cfg = entry.get("step", {"kind": "armijo"})
    if step_cfg.get("kind") == "fixed":
        rule = FixedStep(float(step_cfg["eta"]))
    else:
        rule = ArmijoStep()
    cfg = SolverConfig(
        method=method,
        step_rule=rule,
        grad_tol=float(entry.get("grad_tol", 1e-8)),
        max_iter=int(entry.get("max_iter", 1000)),
    )
    if method == GD_FULL:
        problem = spec.objective
        n = spec.objective.dim
    else:
        problem = spec.reduced(entry["mapping"])
        n = problem.n1
    start = _sweep_start(entry, n, seed)
    trace = run(problem, start, cfg)
    if trace.error is not None:
        raise RedmapError(f"run {name!r} failed: {trace.error}")
    _write(out_root / name / f"{method}.csv", trace.to_csv(zero_times=not timing))
    return name


def cmd_sweep(args) -> int:
    if not args.config:
        print("error: sweep requires --config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = _load_config(args.config)
        entries = config["run"]
        if not isinstance(entries, list) or not entries:
            raise ValueError("config must contain at least one [[run]] entry")
        names = [e["name"] for e in entries]
        if len(set(names)) != len(names):
            raise ValueError("run names must be unique (each writes its own directory)")
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_root = Path(args.out)
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        futures = {
            pool.submit(_run_sweep_entry, e, out_root, args.seed, args.timing): e["name"]
            for e in entries
        }
        for fut, name in futures.items():
            try:
                fut.result()
                print(f"sweep entry {name}: done")
            except (RedmapError, ValueError, KeyError) as exc:
                failures.append(name)
                print(f"error: sweep entry {name}: {exc}", file=sys.stderr)
    return EXIT_SOLVER if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default="out", help="output directory root")
    common.add_argument("--jobs", type=int, default=1, help="concurrent sweep workers")
    common.add_argument("--config", default=None, help="TOML or JSON config file")
    common.add_argument(
        "--timing",
        action="store_true",
        help="write measured wall times instead of zeros (breaks byte reproducibility)",
    )

    parser = argparse.ArgumentParser(
        prog="redmap",
        description="reduction mappings, pullback metrics, and preconditioned descent",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser(
        "reproduce", parents=[common], help="run a benchmark experiment end to end"
    )
    rep.add_argument("example", choices=sorted(REPRODUCE_MAPPING))
    rep.add_argument("--M", type=float, default=10.0, help="quad2d anisotropy")
    rep.add_argument("--n", type=int, default=40, help="problem dimension")
    rep.add_argument("--lambda", dest="lambda_", type=float, default=10.0)
    rep.add_argument("--alpha", type=float, default=1.0, help="tanh mapping scale")
    rep.add_argument("--grad-tol", type=float, default=1e-8)
    rep.add_argument("--max-iter", type=int, default=20000)
    rep.add_argument("--region-radius", type=float, default=0.5)
    rep.add_argument("--region-samples", type=int, default=32)
    rep.set_defaults(func=cmd_reproduce)

    ana = sub.add_parser("analyze", parents=[common], help="write a spectral report")
    ana.add_argument("--problem", default=None, help="problem name")
    ana.add_argument("--mapping", default=None, help="mapping name")
    ana.add_argument("--M", type=float, default=None, help="quad2d anisotropy")
    ana.add_argument("--region-radius", type=float, default=None)
    ana.add_argument("--region-samples", type=int, default=None)
    ana.set_defaults(func=cmd_analyze)

    pro = sub.add_parser(
        "propcheck", parents=[common], help="randomized theorem-inequality suites"
    )
    pro.add_argument("--count", type=int, default=100, help="instances per family")
    pro.add_argument(
        "--corrupt-hessian", action="store_true", help=argparse.SUPPRESS
    )  # negative-path test hook
    pro.set_defaults(func=cmd_propcheck)

    swp = sub.add_parser("sweep", parents=[common], help="run configured solver batches")
    swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
