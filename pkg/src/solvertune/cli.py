"""Command-line utility: start, monitor, stop, bench, export, serve."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import benchfn
from .errors import (
    BindFailureError,
    NotRunningError,
    TuningError,
    UnknownExperimentError,
    ValidationError,
)
from .orchestrator import (
    create_experiment,
    resume_experiment,
    snapshot_from_state,
    start_experiment,
    stop_experiment,
)
from .persistence import CorruptRecordError, list_journals, load
from .tuners import TUNER_KINDS, TunerConfig, minimize

DEFAULT_JOURNAL = "./runs"


def _journal_dir(args) -> Path:
    if args.journal:
        return Path(args.journal)
    return Path(os.environ.get("SOLVERTUNE_JOURNAL", DEFAULT_JOURNAL))


def _parse_target(spec: str) -> dict:
    if spec.startswith("fn:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError("target", "function targets look like fn:NAME:DIM")
        return {"kind": "function", "fn": parts[1], "dim": int(parts[2])}
    if spec.startswith("synthetic:"):
        seed = spec.split(":", 1)[1]
        return {"kind": "synthetic_solver", "seed": int(seed), "noise_sd": 0.0}
    path = Path(spec)
    if not path.exists():
        raise ValidationError("target", f"target file {spec!r} does not exist")
    return json.loads(path.read_text())


def _build_config(args) -> dict:
    target_doc = _parse_target(args.target)
    doc: dict = {
        "target": target_doc,
        "max_trials": args.max_trials,
        "concurrency": args.concurrency,
    }
    if args.space:
        doc["space"] = json.loads(Path(args.space).read_text())
    elif target_doc.get("kind") != "function":
        raise ValidationError("space", "--space is required unless the target is fn:NAME:DIM")
    tuner_doc: dict = {"kind": args.tuner}
    if args.pop_size is not None:
        tuner_doc["pop_size"] = args.pop_size
    doc["tuner"] = tuner_doc
    if args.seed is not None:
        doc["seed"] = args.seed
    stop: dict = {}
    if args.target_objective is not None:
        stop["target_objective"] = args.target_objective
    if args.stagnation_generations is not None:
        stop["stagnation_generations"] = args.stagnation_generations
    if stop:
        doc["stop"] = stop
    return doc


def cmd_start(args) -> int:
    journal_dir = _journal_dir(args)
    journal_dir.mkdir(parents=True, exist_ok=True)
    config = _build_config(args)
    exp = create_experiment(config, journal_dir, experiment_id=args.id)
    print(exp.id)
    if args.detach:
        argv = [sys.executable, "-m", "solvertune", "start",
                "--target", args.target,
                "--tuner", args.tuner,
                "--max-trials", str(args.max_trials),
                "--concurrency", str(args.concurrency),
                "--journal", str(journal_dir),
                "--id", exp.id, "--attach-existing"]
        if args.space:
            argv += ["--space", args.space]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        if args.pop_size is not None:
            argv += ["--pop-size", str(args.pop_size)]
        if args.target_objective is not None:
            argv += ["--target-objective", str(args.target_objective)]
        if args.stagnation_generations is not None:
            argv += ["--stagnation-generations", str(args.stagnation_generations)]
        log_path = journal_dir / f"{exp.id}.log"
        with open(log_path, "ab") as log:
            proc = subprocess.Popen(argv, stdout=log, stderr=log,
                                    start_new_session=True)
        (journal_dir / f"{exp.id}.pid").write_text(str(proc.pid))
        return 0
    return _run_foreground(exp)


def _run_foreground(exp) -> int:
    coordinator = start_experiment(exp)
    interactive = sys.stderr.isatty()
    try:
        while coordinator.thread.is_alive():
            coordinator.thread.join(timeout=0.5)
            if interactive:
                snap = coordinator.snapshot()
                best = snap["best"]["objective"] if snap["best"] else float("nan")
                print(f"\rgen {snap['generation']} "
                      f"trials {snap['trials']['done']}/{snap['trials']['total']} "
                      f"best {best:.6g}   ", end="", file=sys.stderr)
    except KeyboardInterrupt:
        print("\nstopping gracefully...", file=sys.stderr)
        coordinator.request_stop()
        coordinator.thread.join()
    if interactive:
        print(file=sys.stderr)
    snap = coordinator.snapshot()
    if snap["best"] is not None:
        print(f"best objective: {snap['best']['objective']}")
        print(f"best configuration: {json.dumps(snap['best']['values'])}")
    print(f"status: {snap['status']} ({snap['reason']})")
    return 0 if snap["status"] == "finished" else 1


def _attach_existing(args) -> int:
    """Run an already-created experiment (detached child re-entry)."""
    journal_dir = _journal_dir(args)
    path = journal_dir / f"{args.id}.jsonl"
    state = load(path)
    from .orchestrator import experiment_from_state
    from .persistence import Journal
    from .tuners import create_tuner
    from .orchestrator import Coordinator

    exp = experiment_from_state(state)
    journal = Journal.open_existing(path)
    tuner = create_tuner(exp.tuner, exp.space, exp.max_trials)
    Coordinator(exp, journal, tuner).run()
    return 0


def _snapshot_rows(journal_dir: Path, only_id=None):
    rows = []
    for path in list_journals(journal_dir):
        if only_id is not None and path.stem != only_id:
            continue
        try:
            rows.append(snapshot_from_state(load(path)))
        except CorruptRecordError as exc:
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
    return rows


def cmd_status(args) -> int:
    journal_dir = _journal_dir(args)
    rows = _snapshot_rows(journal_dir, args.id)
    if args.id is not None and not rows:
        print(f"error: no experiment {args.id!r} in {journal_dir}", file=sys.stderr)
        return 1
    if args.format == "json":
        print(json.dumps(rows[0] if args.id else rows, indent=2))
        return 0
    header = f"{'id':24} {'status':9} {'tuner':10} {'trials':>13} {'best':>14}"
    print(header)
    for snap in rows:
        done = f"{snap['trials']['done']}/{snap['trials']['total']}"
        best = f"{snap['best']['objective']:.6g}" if snap["best"] else "-"
        print(f"{snap['id']:24} {snap['status']:9} {snap['tuner']:10} {done:>13} {best:>14}")
    return 0


def cmd_stop(args) -> int:
    journal_dir = _journal_dir(args)
    try:
        stop_experiment(journal_dir, args.id)
    except UnknownExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotRunningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    deadline = time.time() + args.wait
    path = journal_dir / f"{args.id}.jsonl"
    while time.time() < deadline:
        if load(path).status != "running":
            print(f"{args.id} stopped")
            return 0
        time.sleep(0.2)
    print(f"stop requested; {args.id} is still draining", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    tuners = args.tuner.split(",")
    for name in tuners:
        if name not in TUNER_KINDS:
            print(f"error: unknown tuner {name!r}; valid: {', '.join(TUNER_KINDS)}",
                  file=sys.stderr)
            return 2
    try:
        if args.fn == "polyfit":
            spec, _ = benchfn.make_polyfit(degree=args.dim - 1, seed=0)
        else:
            spec = benchfn.BenchSpec(name=args.fn, dim=args.dim)
    except TuningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    space = benchfn.bench_space(spec)
    evaluate = benchfn.genome_evaluator(spec)
    results = []  # (tuner, seed, best, nfe)
    for name in tuners:
        for seed in range(args.seeds):
            config = TunerConfig(kind=name, seed=seed,
                                 **({"pop_size": args.pop_size} if args.pop_size else {}))
            _, best, nfe = minimize(evaluate, space, config, args.budget)
            results.append((name, seed, best, nfe))
    if args.format == "csv":
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["tuner", "seed", "best", "nfe"])
        for row in results:
            writer.writerow(row)
        print(out.getvalue(), end="")
        return 0
    print(f"{'tuner':12} {'median':>14} {'iqr':>14} {'seeds':>6}")
    for name in tuners:
        bests = np.array([r[2] for r in results if r[0] == name])
        q25, q50, q75 = np.percentile(bests, [25, 50, 75])
        print(f"{name:12} {q50:14.6g} {q75 - q25:14.6g} {len(bests):6d}")
    return 0


def cmd_export(args) -> int:
    journal_dir = _journal_dir(args)
    path = journal_dir / f"{args.id}.jsonl"
    if not path.exists():
        print(f"error: no experiment {args.id!r} in {journal_dir}", file=sys.stderr)
        return 1
    state = load(path)
    from .searchspace import space_from_dict
    space = space_from_dict(state.config["space"])
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["id", "generation", *space.names, "objective", "status", "elapsed"])
    for trial in state.trials_in_order():
        if trial.status == "running":
            continue  # only terminal trials are exported
        writer.writerow([
            trial.trial_id, trial.generation,
            *[trial.values.get(n) for n in space.names],
            trial.objective, trial.status, trial.elapsed,
        ])
    if args.out:
        out.close()
        print(args.out)
    return 0


def cmd_serve(args) -> int:
    from .api import serve

    static_dir = args.static
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if bundled.is_dir():
            static_dir = bundled
    try:
        serve(_journal_dir(args), port=args.port, host=args.host, static_dir=static_dir)
    except BindFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_resume(args) -> int:
    journal_dir = _journal_dir(args)
    path = Path(args.id)
    if not path.exists():
        path = journal_dir / f"{args.id}.jsonl"
    if not path.exists():
        print(f"error: no journal for {args.id!r} in {journal_dir}", file=sys.stderr)
        return 1
    coordinator = resume_experiment(path)
    exp = coordinator.run()
    snap = coordinator.snapshot()
    if snap["best"] is not None:
        print(f"best objective: {snap['best']['objective']}")
    print(f"status: {snap['status']} ({snap['reason']})")
    return 0 if exp.status == "finished" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solvertune",
        description="Black-box hyper-parameter tuning for optimization solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("start", help="create and run a new experiment")
    p.add_argument("--space", help="search-space JSON file")
    p.add_argument("--target", required=True,
                   help="target file, fn:NAME:DIM, or synthetic:SEED")
    p.add_argument("--tuner", default="ljade", choices=TUNER_KINDS)
    p.add_argument("--max-trials", type=int, required=True)
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--pop-size", type=int)
    p.add_argument("--target-objective", type=float)
    p.add_argument("--stagnation-generations", type=int)
    p.add_argument("--journal", help=f"journal directory (default {DEFAULT_JOURNAL}, "
                                     "or $SOLVERTUNE_JOURNAL)")
    p.add_argument("--detach", action="store_true", help="run in the background")
    p.add_argument("--id", help=argparse.SUPPRESS)
    p.add_argument("--attach-existing", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_start)

    p = sub.add_parser("status", help="show experiment status")
    p.add_argument("id", nargs="?")
    p.add_argument("--journal")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("stop", help="gracefully stop a running experiment")
    p.add_argument("id")
    p.add_argument("--journal")
    p.add_argument("--wait", type=float, default=30.0)
    p.set_defaults(func=cmd_stop)

    p = sub.add_parser("bench", help="compare tuners on a benchmark function")
    p.add_argument("--fn", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tuner", default="ljade", help="comma-separated tuner names")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--pop-size", type=int)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="export trials as CSV")
    p.add_argument("id")
    p.add_argument("--journal")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="serve the status API and dashboard")
    p.add_argument("--journal")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="dashboard assets directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("resume", help="resume an interrupted experiment")
    p.add_argument("id", help="experiment id or journal path")
    p.add_argument("--journal")
    p.set_defaults(func=cmd_resume)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "attach_existing", False):
        return _attach_existing(args)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TuningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
