"""Trial execution adapters.

A target evaluates one Configuration and reports a real objective to
minimize. Three kinds exist: in-process benchmark functions, the synthetic
solver (a planted-optimum stand-in for real solver runs), and external
commands with placeholder substitution and objective extraction. Failures
surface as structured exceptions; the orchestrator maps them to +inf
fitness, never to fabricated objectives.
"""

from __future__ import annotations

import json
import math
import os
import re
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .benchfn import BenchSpec, bench_space, genome_evaluator, make_polyfit
from .errors import (
    NonFiniteObjectiveError,
    ParseFailureError,
    SpawnFailureError,
    TrialTimeoutError,
    UnknownPlaceholderError,
    ValidationError,
)
from .searchspace import (
    Categorical,
    Configuration,
    SearchSpace,
    decode,
    encode,
    space_from_dict,
)

DEFAULT_TIMEOUT_SEC = 600.0
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class StdoutPattern:
    pattern: str  # one numeric capture group; the last match wins


@dataclass(frozen=True)
class ResultFile:
    path: str
    field: str


@dataclass(frozen=True)
class CommandTemplate:
    argv: tuple[str, ...]
    objective_source: Union[StdoutPattern, ResultFile]
    workdir: str = "."
    env: tuple[tuple[str, str], ...] = ()


@dataclass
class SyntheticSolver:
    """Quadratic bowl around a planted optimum, scaled like a solving time.

    objective(config) = base_time * (1 + sum_j w_j * d_j^2) + noise, where
    d_j is the per-parameter unit-cube distance to the optimum (0/1 mismatch
    for categoricals). With noise_sd = 0 the minimum is exactly base_time at
    the planted configuration.
    """

    planted_optimum: Configuration
    weights: np.ndarray
    noise_sd: float = 0.0
    base_time: float = 1.0


@dataclass
class TargetSpec:
    kind: str  # "function" | "synthetic_solver" | "command"
    space: SearchSpace
    timeout_sec: float = DEFAULT_TIMEOUT_SEC
    fn: Optional[Callable[[Configuration], float]] = None
    command: Optional[CommandTemplate] = None
    synthetic: Optional[SyntheticSolver] = None
    doc: dict = field(default_factory=dict)  # JSON form, journaled verbatim

    failure_policy = "worst"  # fixed: failures count as +inf fitness


@dataclass(frozen=True)
class EvalOutcome:
    objective: float
    elapsed: float
    stdout: Optional[str] = None
    stderr: Optional[str] = None
    returncode: Optional[int] = None


def render_argv(template: CommandTemplate, config: Configuration) -> list[str]:
    """Substitute {param} placeholders; pure text, no shell interpretation.

    Floats render as their shortest round-trip decimal (repr).
    """
    rendered = []
    for token in template.argv:
        def sub(match):
            name = match.group(1)
            if name not in config:
                raise UnknownPlaceholderError(f"no parameter named {name!r} for placeholder")
            value = config[name]
            if isinstance(value, float):
                return repr(value)
            return str(value)

        rendered.append(_PLACEHOLDER.sub(sub, token))
    return rendered


def _extract_objective(source: Union[StdoutPattern, ResultFile], stdout: str,
                       workdir: str) -> float:
    if isinstance(source, StdoutPattern):
        matches = re.findall(source.pattern, stdout)
        if not matches:
            raise ParseFailureError(f"pattern {source.pattern!r} matched nothing in stdout")
        last = matches[-1]
        if isinstance(last, tuple):  # multiple groups: take the first
            last = last[0]
        try:
            return float(last)
        except ValueError:
            raise ParseFailureError(f"captured text {last!r} is not a number") from None
    path = os.path.join(workdir, source.path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseFailureError(f"cannot read result file {path}: {exc}") from None
    if source.field not in doc:
        raise ParseFailureError(f"result file {path} has no field {source.field!r}")
    try:
        return float(doc[source.field])
    except (TypeError, ValueError):
        raise ParseFailureError(f"result field {source.field!r} is not numeric") from None


def _run_command(target: TargetSpec, config: Configuration) -> EvalOutcome:
    template = target.command
    argv = render_argv(template, config)
    env = dict(os.environ)
    env.update(dict(template.env))
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            argv, cwd=template.workdir, env=env, capture_output=True, text=True,
            timeout=target.timeout_sec,
        )
    except subprocess.TimeoutExpired as exc:
        elapsed = time.perf_counter() - start
        err = TrialTimeoutError(f"command exceeded {target.timeout_sec}s")
        err.elapsed = elapsed
        err.stdout = (exc.stdout or b"").decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        err.stderr = (exc.stderr or b"").decode() if isinstance(exc.stderr, bytes) else (exc.stderr or "")
        raise err from None
    except (FileNotFoundError, PermissionError, NotADirectoryError, OSError) as exc:
        raise SpawnFailureError(f"cannot start {argv[0]!r}: {exc}") from None
    elapsed = time.perf_counter() - start
    try:
        objective = _extract_objective(template.objective_source, proc.stdout, template.workdir)
    except ParseFailureError as err:
        err.elapsed = elapsed
        err.stdout = proc.stdout
        err.stderr = proc.stderr
        raise
    if not math.isfinite(objective):
        raise NonFiniteObjectiveError(f"command reported non-finite objective {objective}")
    return EvalOutcome(objective=objective, elapsed=elapsed,
                       stdout=proc.stdout, stderr=proc.stderr, returncode=proc.returncode)


def evaluate(target: TargetSpec, config: Configuration) -> EvalOutcome:
    """Evaluate one configuration; raises structured errors on failure."""
    if target.kind == "command":
        return _run_command(target, config)
    start = time.perf_counter()
    objective = target.fn(config)
    elapsed = time.perf_counter() - start
    if elapsed >= target.timeout_sec:
        err = TrialTimeoutError(f"evaluation took {elapsed:.1f}s >= {target.timeout_sec}s")
        err.elapsed = elapsed
        raise err
    if not math.isfinite(objective):
        raise NonFiniteObjectiveError(f"target reported non-finite objective {objective}")
    return EvalOutcome(objective=float(objective), elapsed=elapsed)


def _synthetic_objective(space: SearchSpace, solver: SyntheticSolver,
                         noise_rng: Optional[np.random.Generator],
                         noise_lock: threading.Lock,
                         config: Configuration) -> float:
    opt = solver.planted_optimum
    total = 0.0
    enc_cfg = encode(space, config)
    enc_opt = encode(space, opt)
    for j, p in enumerate(space.params):
        if isinstance(p.kind, Categorical):
            d = 0.0 if config[p.name] == opt[p.name] else 1.0
        else:
            d = abs(float(enc_cfg[j]) - float(enc_opt[j]))
        total += float(solver.weights[j]) * d * d
    value = solver.base_time * (1.0 + total)
    if solver.noise_sd > 0.0 and noise_rng is not None:
        with noise_lock:
            value += solver.noise_sd * float(noise_rng.normal())
    return value


def make_synthetic_solver(space: SearchSpace, seed=None, noise_sd: float = 0.0,
                          base_time: float = 1.0) -> TargetSpec:
    """Plant a seeded random optimum and per-parameter weights in [0.5, 2]."""
    plant_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(plant_ss)
    planted = decode(space, rng.uniform(size=space.dim))
    weights = rng.uniform(0.5, 2.0, size=space.dim)
    solver = SyntheticSolver(planted_optimum=planted, weights=weights,
                             noise_sd=noise_sd, base_time=base_time)
    noise_rng = np.random.default_rng(noise_ss) if noise_sd > 0.0 else None
    lock = threading.Lock()
    target = TargetSpec(
        kind="synthetic_solver",
        space=space,
        fn=lambda cfg: _synthetic_objective(space, solver, noise_rng, lock, cfg),
        synthetic=solver,
        doc={"kind": "synthetic_solver", "seed": seed, "noise_sd": noise_sd,
             "base_time": base_time},
    )
    return target


def bench_target(spec: BenchSpec) -> TargetSpec:
    """In-process target over the function's domain box."""
    space = bench_space(spec)
    raw = genome_evaluator(spec)
    names = space.names
    lo, hi = spec.box
    span = hi - lo

    def fn(config: Configuration) -> float:
        genome = np.array([(float(config[n]) - lo) / span for n in names])
        return raw(genome)

    doc = {"kind": "function", "fn": spec.name, "dim": spec.dim}
    if spec.name == "polyfit":
        doc["seed"] = spec.polyfit.seed
    return TargetSpec(kind="function", space=space, fn=fn, doc=doc)


def _bench_target(fn_name: str, dim: int, seed=None) -> TargetSpec:
    if fn_name == "polyfit":
        spec, _ = make_polyfit(degree=dim - 1, seed=seed)
    else:
        spec = BenchSpec(name=fn_name, dim=dim)
    return bench_target(spec)


def _command_from_dict(doc: dict, space: SearchSpace) -> TargetSpec:
    argv = doc.get("argv")
    if not isinstance(argv, list) or not argv:
        raise ValidationError("target.argv", "command target needs a non-empty argv list")
    obj = doc.get("objective")
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("target.objective", "command target needs an objective source")
    if obj["type"] == "stdout_pattern":
        try:
            compiled = re.compile(obj["pattern"])
        except (KeyError, re.error) as exc:
            raise ValidationError("target.objective.pattern", f"bad pattern: {exc}") from None
        if compiled.groups != 1:
            raise ValidationError("target.objective.pattern",
                                  "pattern must have exactly one capture group")
        source: Union[StdoutPattern, ResultFile] = StdoutPattern(obj["pattern"])
    elif obj["type"] == "result_file":
        if "path" not in obj or "field" not in obj:
            raise ValidationError("target.objective", "result_file needs 'path' and 'field'")
        source = ResultFile(path=obj["path"], field=obj["field"])
    else:
        raise ValidationError("target.objective.type", f"unknown source {obj['type']!r}")
    template = CommandTemplate(
        argv=tuple(str(a) for a in argv),
        objective_source=source,
        workdir=doc.get("workdir", "."),
        env=tuple((str(k), str(v)) for k, v in doc.get("env", {}).items()),
    )
    known = set(space.names)
    for token in template.argv:
        for name in _PLACEHOLDER.findall(token):
            if name not in known:
                raise UnknownPlaceholderError(
                    f"argv references {{{name}}} but the space has no such parameter")
    return TargetSpec(kind="command", space=space, command=template,
                      timeout_sec=float(doc.get("timeout_sec", DEFAULT_TIMEOUT_SEC)),
                      doc=doc)


def target_from_dict(doc: dict, space: Optional[SearchSpace] = None) -> TargetSpec:
    """Build a target from its JSON form.

    Function targets define their own space; synthetic and command targets
    require the experiment's search space.
    """
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError("target", "target document needs a 'kind'")
    kind = doc["kind"]
    if kind == "function":
        if "fn" not in doc or "dim" not in doc:
            raise ValidationError("target", "function target needs 'fn' and 'dim'")
        target = _bench_target(str(doc["fn"]), int(doc["dim"]), doc.get("seed"))
        if "timeout_sec" in doc:
            target.timeout_sec = float(doc["timeout_sec"])
        return target
    if "space" in doc and space is None:
        space = space_from_dict(doc["space"])
    if space is None:
        raise ValidationError("target.space", f"{kind} target requires a search space")
    if kind == "synthetic_solver":
        target = make_synthetic_solver(space, seed=doc.get("seed"),
                                       noise_sd=float(doc.get("noise_sd", 0.0)),
                                       base_time=float(doc.get("base_time", 1.0)))
        if "timeout_sec" in doc:
            target.timeout_sec = float(doc["timeout_sec"])
        return target
    if kind == "command":
        return _command_from_dict(doc, space)
    raise ValidationError("target.kind", f"unknown target kind {kind!r}")
