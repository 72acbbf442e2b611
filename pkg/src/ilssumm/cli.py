"""Command-line interface: ``ilssumm {solve,exact,evaluate,bench,features}``.

Exit codes: 0 success, 2 usage, 3 input/parse error, 4 infeasible instance,
5 refusal because the instance exceeds the exact-solver size cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .features import HistogramConfig, build_instance, read_manifest
from .instance import (
    InfeasibleInstanceError,
    Instance,
    InstanceError,
    MetricKind,
    derive_budget,
    instance_to_dict,
    load_instance,
    save_instance,
    subset_duration,
)
from .objective import distance_matrix, total_distance
from .oracle import exact_solve, mean_optimality, optimality_percentage
from .report import DEFAULT_EXACT_MAX_N, METHODS, BenchRow, SolverConfig, solve

log = logging.getLogger("ilssumm")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CAP = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _add_budget_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("budget (overrides the instance file)")
    x = g.add_mutually_exclusive_group()
    x.add_argument("--budget-seconds", type=_positive_float, help="absolute budget T in seconds")
    x.add_argument("--budget-ratio", type=float, help="budget as a fraction of the video length")
    g.add_argument("--budget-cap-seconds", type=_positive_float, help="cap for --budget-ratio")


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance file (.json, or .csv with a budget flag)")
    p.add_argument("--metric", choices=[m.value for m in MetricKind], help="override the distance metric")
    p.add_argument("--video-duration-seconds", type=_positive_float, help="video length for runtime %%")
    _add_budget_args(p)


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m-max", type=_positive_int, default=5, help="maximum perturbation strength")
    p.add_argument("--max-trials", type=_positive_int, default=10_000, help="local-search step cap")
    p.add_argument("--time-budget-seconds", type=_positive_float, help="restart wall-clock budget")
    p.add_argument("--exact-max-n", type=_positive_int, default=DEFAULT_EXACT_MAX_N)
    p.add_argument("--max-nodes", type=_positive_int, help="branch-and-bound node cap")
    p.add_argument("--max-seconds", type=_positive_float, help="branch-and-bound time cap")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        m_max=args.m_max,
        max_trials=args.max_trials,
        time_budget_s=args.time_budget_seconds,
        max_nodes=args.max_nodes,
        max_seconds=args.max_seconds,
    )


def _resolve_budget(args, total_s: float) -> float | None:
    if args.budget_cap_seconds is not None and args.budget_ratio is None:
        raise CliError("--budget-cap-seconds requires --budget-ratio", EXIT_USAGE)
    if args.budget_seconds is not None:
        return args.budget_seconds
    if args.budget_ratio is not None:
        try:
            return derive_budget(total_s, args.budget_ratio, args.budget_cap_seconds)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE) from None
    return None


def _load(args) -> Instance:
    path = Path(args.instance)
    budget = args.budget_seconds
    if budget is None and args.budget_ratio is not None and path.suffix.lower() == ".csv":
        # provisional budget; replaced below once the total duration is known
        budget = sys.float_info.max
    instance = load_instance(path, budget_s=budget, metric=args.metric)
    derived = _resolve_budget(args, args.video_duration_seconds or instance.total_duration_s)
    if derived is not None and derived != instance.budget_s:
        instance = instance.with_budget(derived)
    return instance


def _write_json(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _exact_td(instance: Instance, args) -> float | None:
    if instance.n > args.exact_max_n:
        return None
    result = exact_solve(distance_matrix(instance), instance, args.max_nodes, args.max_seconds)
    return result.td_optimal if result.proved_optimal else None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    instance = _load(args)
    if args.method == "exact":
        _check_cap(instance, args)
    td_opt = _exact_td(instance, args) if args.optimality and args.method != "exact" else None
    report = solve(instance, args.method, _solver_config(args), args.video_duration_seconds, td_opt)
    _write_json(report.to_dict(), args.out)
    return EXIT_OK


def _check_cap(instance: Instance, args) -> None:
    if instance.n > args.exact_max_n and not args.force:
        raise CliError(
            f"instance has N={instance.n} shots, above the exact-solver cap of {args.exact_max_n}; "
            "pass --force (or raise --exact-max-n) to run anyway",
            EXIT_CAP,
        )


def cmd_exact(args) -> int:
    instance = _load(args)
    _check_cap(instance, args)
    report = solve(instance, "exact", _solver_config(args), args.video_duration_seconds)
    _write_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    instance = _load(args)
    if args.report:
        try:
            doc = json.loads(Path(args.report).read_text())
            ids = doc["selected"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError(f"cannot read report {args.report}: {exc}", EXIT_INPUT) from None
    else:
        ids = [s for s in args.selected.split(",") if s]
    lookup = {s.id: k for k, s in enumerate(instance.shots)}
    unknown = [i for i in ids if i not in lookup]
    if unknown or not ids:
        raise CliError(f"unknown or missing shot ids: {unknown[:5]}", EXIT_INPUT)
    indices = sorted({lookup[i] for i in ids})
    used = subset_duration(instance.durations, indices)
    feasible = used <= instance.budget_s
    td = total_distance(distance_matrix(instance), indices)
    td_opt = _exact_td(instance, args)
    doc = {
        "instance": instance.name,
        "selected": [instance.shots[i].id for i in indices],
        "total_distance": td,
        "duration_used_s": used,
        "budget_s": instance.budget_s,
        "feasible": feasible,
        "metric": instance.metric.value,
        "td_optimal": td_opt,
        "optimality_percent": optimality_percentage(td, td_opt) if td_opt is not None and feasible else None,
    }
    _write_json(doc, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise CliError(f"--methods must be a subset of {','.join(METHODS)}", EXIT_USAGE)
    root = Path(args.instances)
    if not root.is_dir():
        raise CliError(f"not a directory: {root}", EXIT_INPUT)
    files = sorted(p for p in root.iterdir() if p.suffix.lower() == ".json")
    if not files:
        log.warning("no instance files in %s", root)

    loaded: list[tuple[str, Instance | None, str | None]] = []
    for path in files:
        try:
            inst = load_instance(path, budget_s=args.budget_seconds, metric=args.metric)
            if args.budget_ratio is not None:
                inst = inst.with_budget(_resolve_budget(args, inst.total_duration_s))
            loaded.append((inst.name, inst, None))
        except InstanceError as exc:
            loaded.append((path.stem, None, str(exc)))
    loaded.sort(key=lambda t: t[0])

    config = _solver_config(args)
    rows: list[BenchRow] = []
    per_method: dict[str, list[BenchRow]] = {m: [] for m in methods}
    for name, inst, error in loaded:
        if inst is None:
            log.warning("%s: %s", name, error)
            rows.append(BenchRow(name, "error"))
            continue
        video_s = inst.total_duration_s if args.runtime_vs_shot_total else args.video_duration_seconds
        reports = {}
        try:
            if "exact" in methods and inst.n <= args.exact_max_n:
                reports["exact"] = solve(inst, "exact", config, video_s)
            exact = reports.get("exact")
            td_opt = exact.td_optimal if exact is not None else _exact_td(inst, args)
            for m in methods:
                if m == "exact":
                    continue
                reports[m] = solve(inst, m, config, video_s, td_opt)
        except Exception as exc:  # keep going: one bad instance must not sink the table
            log.warning("%s: %s", name, exc)
            rows.append(BenchRow(name, "error"))
            continue
        for m in methods:
            rep = reports.get(m)
            if rep is None:
                row = BenchRow(name, m)
            else:
                row = BenchRow(name, m, rep.total_distance, rep.optimality_percent, rep.wall_time_ms,
                               rep.runtime_pct_of_video)
            rows.append(row)
            per_method[m].append(row)

    for m in methods:
        done = per_method[m]
        if not done:
            continue

        def avg(attr):
            vals = [getattr(r, attr) for r in done if getattr(r, attr) is not None]
            return mean_optimality(vals) if vals else None

        rows.append(BenchRow("mean", m, avg("td"), avg("optimality_percent"), avg("wall_time_ms"),
                             avg("runtime_pct_of_video")))

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(BenchRow.COLUMNS)
        for row in rows:
            writer.writerow(row.as_row())
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_features(args) -> int:
    manifest = Path(args.manifest)
    if not manifest.is_file():
        raise CliError(f"missing manifest: {manifest}", EXIT_INPUT)
    if args.budget_seconds is None and args.budget_ratio is None:
        raise CliError("features needs --budget-seconds or --budget-ratio", EXIT_USAGE)
    total = sum(d for _, d in read_manifest(manifest))
    budget = _resolve_budget(args, args.video_duration_seconds or total)
    cfg = HistogramConfig(args.bins, not args.raw_counts)
    instance = build_instance(args.frames, manifest, budget, cfg, args.name, MetricKind.parse(args.metric))
    if args.out:
        save_instance(instance, args.out)
    else:
        _write_json(instance_to_dict(instance), None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ilssumm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance with one method")
    _add_instance_args(p)
    _add_solver_args(p)
    p.add_argument("--method", choices=METHODS, default="ils")
    p.add_argument("--force", action="store_true", help="run exact above the size cap")
    p.add_argument("--optimality", action="store_true",
                   help="also run the exact oracle (N <= --exact-max-n) and report optimality %%")
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="optimal total distance by branch-and-bound")
    _add_instance_args(p)
    _add_solver_args(p)
    p.add_argument("--force", action="store_true", help="run above the size cap")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("evaluate", help="total distance / optimality of a given selection")
    _add_instance_args(p)
    _add_solver_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--selected", help="comma-separated shot ids")
    src.add_argument("--report", help="a solve report whose selection is evaluated")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="run several methods over a directory of instances")
    p.add_argument("--instances", required=True, help="directory of .json instance files")
    p.add_argument("--methods", default="ils,local,restart,exact")
    p.add_argument("--metric", choices=[m.value for m in MetricKind])
    p.add_argument("--video-duration-seconds", type=_positive_float)
    p.add_argument("--runtime-vs-shot-total", action="store_true",
                   help="runtime %% relative to each instance's total shot duration")
    _add_budget_args(p)
    _add_solver_args(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("features", help="build an instance from frames and a duration manifest")
    p.add_argument("--frames", required=True, help="directory holding the frame images")
    p.add_argument("--manifest", required=True, help="CSV of frame_filename,duration_seconds")
    p.add_argument("--bins", type=_positive_int, default=32, help="histogram bins per channel")
    p.add_argument("--raw-counts", action="store_true", help="do not normalize histograms")
    p.add_argument("--name")
    p.add_argument("--metric", choices=[m.value for m in MetricKind], default="euclidean")
    p.add_argument("--video-duration-seconds", type=_positive_float)
    _add_budget_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ilssumm: error: {exc}", file=sys.stderr)
        return exc.code
    except InfeasibleInstanceError as exc:
        print(f"ilssumm: error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InstanceError, ValueError) as exc:
        print(f"ilssumm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
