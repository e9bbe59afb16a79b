"""Experiment lifecycle: trial dispatch, stopping criteria, and journaling.

One coordinator owns each experiment. It drives the tuner through ask/tell,
dispatches proposals onto a bounded pool of worker slots, journals every
trial, and enforces the stopping rules. Worker threads only evaluate; all
experiment state is mutated by the coordinator thread.

Journal records are written in a canonical order that depends only on the
generation size and the concurrency limit, never on which trial happens to
finish first, so seeded function-target runs produce identical journals
(wall-clock fields aside).
"""

from __future__ import annotations

import os
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (
    NotResumableError,
    NotRunningError,
    SeedMissingError,
    SpawnFailureError,
    TrialTimeoutError,
    TuningError,
    UnknownExperimentError,
    ValidationError,
)
from .persistence import Journal, JournalState, load
from .searchspace import Configuration, SearchSpace, decode, space_from_dict, space_to_dict
from .targets import TargetSpec, evaluate, target_from_dict
from .tuners import Proposal, TellResult, Tuner, TunerConfig, create_tuner

STDOUT_CAPTURE_LIMIT = 8192
_STOP_POLL_SEC = 0.2


@dataclass(frozen=True)
class StopCriteria:
    max_trials: int
    target_objective: Optional[float] = None
    stagnation_generations: Optional[int] = None

    def to_dict(self) -> dict:
        return {"max_trials": self.max_trials,
                "target_objective": self.target_objective,
                "stagnation_generations": self.stagnation_generations}


@dataclass
class Trial:
    id: int
    proposal_id: int
    generation: int
    values: Configuration
    genome: np.ndarray
    status: str = "pending"
    objective: Optional[float] = None
    elapsed: Optional[float] = None
    worker_slot: Optional[int] = None
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    failure: Optional[str] = None
    stdout: Optional[str] = None
    stderr: Optional[str] = None
    spawn_failure: bool = False


@dataclass
class Experiment:
    id: str
    space: SearchSpace
    tuner: TunerConfig
    target: TargetSpec
    max_trials: int
    concurrency: int
    stop: StopCriteria
    seed: Optional[int]
    journal_path: Path
    status: str = "created"
    created_at: Optional[float] = None
    finished_at: Optional[float] = None
    reason: Optional[str] = None

    def config_payload(self) -> dict:
        return {
            "id": self.id,
            "space": space_to_dict(self.space),
            "tuner": self.tuner.to_dict(),
            "target": self.target.doc,
            "max_trials": self.max_trials,
            "concurrency": self.concurrency,
            "stop": self.stop.to_dict(),
            "seed": self.seed,
        }


class WorkerPool:
    """Bounded slot pool with concurrency instrumentation.

    Slot ids are handed out by the coordinator; enter/exit bracket the
    actual evaluation inside worker threads, so max_concurrent measures
    true simultaneous executions.
    """

    def __init__(self, slots: int):
        if slots < 1:
            raise ValidationError("concurrency", "must be >= 1")
        self.slots = slots
        self._free = list(range(slots - 1, -1, -1))
        self._lock = threading.Lock()
        self._running = 0
        self.max_concurrent = 0

    @property
    def free_slots(self) -> int:
        return len(self._free)

    def acquire_slot(self) -> int:
        return self._free.pop()

    def release_slot(self, slot: int) -> None:
        self._free.append(slot)

    def enter(self) -> None:
        with self._lock:
            self._running += 1
            if self._running > self.max_concurrent:
                self.max_concurrent = self._running

    def exit(self) -> None:
        with self._lock:
            self._running -= 1


class _GenerationWriter:
    """Writes trial records in canonical order regardless of completion order.

    With n trials and c = min(slots, n) the canonical sequence is
    started(0..c-1), then alternately finished(j), started(c+j). Records are
    released as soon as their data exists and every canonical predecessor is
    written. A graceful stop truncates the sequence to the dispatched prefix.
    """

    def __init__(self, journal: Journal, trials: list[Trial], slots: int):
        self.journal = journal
        self.trials = trials
        self.n = len(trials)
        self.c = min(slots, self.n)
        self.dispatched = 0
        self.started_written = 0
        self.finished_written = 0
        self._index = {t.id: i for i, t in enumerate(trials)}
        self._ready: set[int] = set()

    def note_dispatched(self, trial: Trial) -> None:
        assert self.trials[self.dispatched] is trial
        self.dispatched += 1
        self._flush()

    def note_finished(self, trial: Trial) -> None:
        self._ready.add(self._index[trial.id])
        self._flush()

    def truncate_to_dispatched(self) -> None:
        self.n = self.dispatched
        self.trials = self.trials[:self.n]
        self._flush()

    def drained(self) -> bool:
        return self.finished_written == self.n

    def _flush(self) -> None:
        while True:
            i = self.started_written
            if i < self.n and i < self.dispatched and i < self.finished_written + self.c:
                t = self.trials[i]
                self.journal.write("trial_started", {
                    "trial_id": t.id, "proposal_id": t.proposal_id,
                    "generation": t.generation, "worker_slot": t.worker_slot,
                    "values": t.values,
                    "genome": [float(x) for x in t.genome],
                })
                self.started_written += 1
                continue
            j = self.finished_written
            if (j < self.n and j in self._ready
                    and self.started_written >= min(self.c + j, self.n)):
                t = self.trials[j]
                payload = {
                    "trial_id": t.id, "proposal_id": t.proposal_id,
                    "generation": t.generation, "status": t.status,
                    "objective": t.objective, "elapsed": t.elapsed,
                    "failure": t.failure,
                }
                if t.stdout is not None:
                    payload["stdout"] = t.stdout[:STDOUT_CAPTURE_LIMIT]
                if t.stderr is not None:
                    payload["stderr"] = t.stderr[:STDOUT_CAPTURE_LIMIT]
                self.journal.write("trial_finished", payload)
                self.finished_written += 1
                continue
            break


class Coordinator:
    """Single owner of a running experiment."""

    def __init__(self, experiment: Experiment, journal: Journal, tuner: Tuner, *,
                 next_trial_id: int = 0, generations_done: int = 0,
                 incumbent: Optional[tuple[float, int, dict]] = None,
                 stagnation_count: int = 0, resumed: bool = False):
        self.experiment = experiment
        self.journal = journal
        self.tuner = tuner
        self.pool = WorkerPool(experiment.concurrency)
        self.metrics: dict = {"ask_waves": [], "generations": generations_done}
        self._events: "queue.Queue[tuple[Trial, dict]]" = queue.Queue()
        self._next_trial_id = next_trial_id
        self._generations_done = generations_done
        self._incumbent = incumbent  # (objective, trial_id, values)
        self._stagnation = stagnation_count
        self._target_met = False
        self._stop_event = threading.Event()
        self._resumed = resumed
        self._trial_counts = {"running": 0, "succeeded": 0, "failed": 0, "timeout": 0}
        self._lock = threading.Lock()  # guards snapshot reads of mutable counters
        self._executor = None
        if incumbent is not None and experiment.stop.target_objective is not None:
            self._target_met = incumbent[0] <= experiment.stop.target_objective

    # -- control ---------------------------------------------------------------

    def request_stop(self) -> None:
        self._stop_event.set()

    @property
    def stop_sentinel(self) -> Path:
        return self.experiment.journal_path.with_suffix(".stop")

    def _stop_requested(self) -> bool:
        return self._stop_event.is_set() or self.stop_sentinel.exists()

    # -- status ------------------------------------------------------------------

    def snapshot(self) -> dict:
        exp = self.experiment
        with self._lock:
            counts = dict(self._trial_counts)
            incumbent = self._incumbent
            status = exp.status
        best = None
        if incumbent is not None:
            best = {"objective": incumbent[0], "trial_id": incumbent[1],
                    "values": incumbent[2]}
        finished = exp.finished_at
        elapsed = (finished or time.time()) - (exp.created_at or time.time())
        done = counts["succeeded"] + counts["failed"] + counts["timeout"]
        return {
            "id": exp.id,
            "status": status,
            "reason": exp.reason,
            "generation": self._generations_done,
            "trials": {**counts, "done": done, "total": exp.max_trials},
            "concurrency": exp.concurrency,
            "tuner": exp.tuner.kind,
            "best": best,
            "created_at": exp.created_at,
            "finished_at": finished,
            "elapsed": elapsed,
        }

    # -- run loop -----------------------------------------------------------------

    def run(self) -> Experiment:
        from concurrent.futures import ThreadPoolExecutor

        exp = self.experiment
        if exp.status not in ("created",) and not self._resumed:
            raise TuningError(f"experiment {exp.id} is {exp.status}, not runnable")
        with self._lock:
            exp.status = "running"
        final_status, reason = "finished", "max_trials"
        try:
            with ThreadPoolExecutor(max_workers=exp.concurrency,
                                    thread_name_prefix="trial") as executor:
                self._executor = executor
                while True:
                    if self._stop_requested():
                        reason = "stopped"
                        break
                    if self.tuner.is_exhausted:
                        reason = "max_trials"
                        break
                    if self._target_met:
                        reason = "target_objective"
                        break
                    stagnation_limit = exp.stop.stagnation_generations
                    if stagnation_limit is not None and self._stagnation >= stagnation_limit:
                        reason = "stagnation"
                        break
                    proposals = self._ask_generation()
                    if not proposals:
                        reason = "max_trials"
                        break
                    outcome = self._run_generation(proposals)
                    if outcome == "stopped":
                        reason = "stopped"
                        break
                    if outcome == "target_fatal":
                        final_status, reason = "failed", "target_fatal"
                        break
        except Exception:
            self._finalize("failed", "internal_error")
            raise
        self._finalize(final_status, reason)
        return exp

    def _ask_generation(self) -> list[Proposal]:
        exp = self.experiment
        proposals: list[Proposal] = []
        waves = 0
        while True:
            batch = self.tuner.ask(exp.concurrency)
            if not batch.proposals:
                break
            waves += 1
            proposals.extend(batch.proposals)
            if len(batch.proposals) < exp.concurrency:
                break
        if proposals:
            self.metrics["ask_waves"].append(waves)
        return proposals

    def _take_trial_id(self) -> int:
        tid = self._next_trial_id
        self._next_trial_id += 1
        return tid

    def _run_generation(self, proposals: list[Proposal]) -> str:
        exp = self.experiment
        trials = [
            Trial(id=self._take_trial_id(), proposal_id=p.id, generation=p.generation,
                  values=decode(exp.space, p.genome), genome=p.genome)
            for p in proposals
        ]
        writer = _GenerationWriter(self.journal, trials, exp.concurrency)
        pending = deque(trials)
        inflight: dict[int, Trial] = {}
        results: dict[int, TellResult] = {}
        spawn_failures = 0
        stopping = False
        best_before = self._incumbent[0] if self._incumbent else None
        last_stop_check = 0.0

        while pending or inflight:
            now = time.monotonic()
            if not stopping and now - last_stop_check >= _STOP_POLL_SEC:
                last_stop_check = now
                if self._stop_requested():
                    stopping = True
                    with self._lock:
                        exp.status = "stopping"
                    for t in pending:
                        results[t.proposal_id] = TellResult(t.proposal_id, None,
                                                            failure="cancelled")
                    pending.clear()
                    writer.truncate_to_dispatched()
            while pending and len(inflight) < exp.concurrency:
                trial = pending.popleft()
                trial.worker_slot = self.pool.acquire_slot()
                trial.status = "running"
                trial.started_at = time.time()
                with self._lock:
                    self._trial_counts["running"] += 1
                writer.note_dispatched(trial)
                inflight[trial.id] = trial
                self._executor.submit(self._execute_trial, trial)
            try:
                trial, outcome = self._events.get(timeout=_STOP_POLL_SEC)
            except queue.Empty:
                last_stop_check = 0.0  # force a stop check on idle loops
                continue
            inflight.pop(trial.id)
            self.pool.release_slot(trial.worker_slot)
            self._apply_outcome(trial, outcome)
            writer.note_finished(trial)
            if trial.spawn_failure:
                spawn_failures += 1
            results[trial.proposal_id] = TellResult(
                trial.proposal_id,
                trial.objective if trial.status == "succeeded" else None,
                elapsed=trial.elapsed or 0.0,
                failure=trial.failure,
            )

        self.tuner.tell(list(results.values()))
        if stopping:
            return "stopped"
        if trials and spawn_failures == len(trials):
            return "target_fatal"

        self._generations_done += 1
        self.metrics["generations"] = self._generations_done
        improved = (self._incumbent is not None
                    and (best_before is None or self._incumbent[0] < best_before))
        self._stagnation = 0 if improved else self._stagnation + 1
        self.journal.write("generation_completed", {
            "generation": trials[0].generation,
            "trials": len(trials),
            "nfe": self._next_trial_id,
            "population_size": self.tuner.population_size,
            "best_objective": self._incumbent[0] if self._incumbent else None,
        })
        self.journal.sync()
        return "completed"

    def _execute_trial(self, trial: Trial) -> None:
        self.pool.enter()
        outcome: dict
        try:
            result = evaluate(self.experiment.target, trial.values)
            outcome = {"status": "succeeded", "objective": result.objective,
                       "elapsed": result.elapsed, "stdout": result.stdout,
                       "stderr": result.stderr}
        except TrialTimeoutError as exc:
            outcome = {"status": "timeout", "failure": str(exc),
                       "elapsed": getattr(exc, "elapsed", None),
                       "stdout": getattr(exc, "stdout", None),
                       "stderr": getattr(exc, "stderr", None)}
        except SpawnFailureError as exc:
            outcome = {"status": "failed", "failure": str(exc), "spawn_failure": True}
        except TuningError as exc:
            outcome = {"status": "failed", "failure": str(exc),
                       "stdout": getattr(exc, "stdout", None),
                       "stderr": getattr(exc, "stderr", None)}
        except Exception as exc:  # target bugs must not kill the experiment
            outcome = {"status": "failed", "failure": f"unexpected: {exc!r}"}
        finally:
            self.pool.exit()
        self._events.put((trial, outcome))

    def _apply_outcome(self, trial: Trial, outcome: dict) -> None:
        trial.status = outcome["status"]
        trial.objective = outcome.get("objective")
        trial.elapsed = outcome.get("elapsed")
        trial.failure = outcome.get("failure")
        trial.stdout = outcome.get("stdout")
        trial.stderr = outcome.get("stderr")
        trial.spawn_failure = outcome.get("spawn_failure", False)
        trial.finished_at = time.time()
        with self._lock:
            self._trial_counts["running"] -= 1
            self._trial_counts[trial.status] += 1
            if trial.status == "succeeded":
                key = (trial.objective, trial.id)
                if self._incumbent is None or key < (self._incumbent[0], self._incumbent[1]):
                    self._incumbent = (trial.objective, trial.id, dict(trial.values))
        target_objective = self.experiment.stop.target_objective
        if (target_objective is not None and self._incumbent is not None
                and self._incumbent[0] <= target_objective):
            self._target_met = True

    def _finalize(self, status: str, reason: Optional[str]) -> None:
        exp = self.experiment
        payload = {
            "status": status,
            "reason": reason,
            "total_trials": self._next_trial_id,
            "best_objective": self._incumbent[0] if self._incumbent else None,
            "best_values": self._incumbent[2] if self._incumbent else None,
            "best_trial_id": self._incumbent[1] if self._incumbent else None,
        }
        record = self.journal.write("experiment_finished", payload)
        self.journal.sync()
        self.journal.close()
        with self._lock:
            exp.status = status
            exp.reason = reason
            exp.finished_at = record.ts
        if self.stop_sentinel.exists():
            try:
                self.stop_sentinel.unlink()
            except OSError:
                pass


# -- experiment construction ----------------------------------------------------------


def _generated_id() -> str:
    return time.strftime("%Y%m%d-%H%M%S") + "-" + os.urandom(3).hex()


def _build_stop(doc: dict, max_trials: int) -> StopCriteria:
    known = {"max_trials", "target_objective", "stagnation_generations"}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError("stop", f"unknown stop options: {sorted(unknown)}")
    target = doc.get("target_objective")
    stagnation = doc.get("stagnation_generations")
    if stagnation is not None and int(stagnation) < 1:
        raise ValidationError("stop.stagnation_generations", "must be >= 1")
    return StopCriteria(max_trials=max_trials,
                        target_objective=None if target is None else float(target),
                        stagnation_generations=None if stagnation is None else int(stagnation))


def build_experiment(doc: dict, journal_dir: Union[str, Path],
                     experiment_id: Optional[str] = None) -> Experiment:
    """Validate an experiment config document; no journal is touched."""
    if "target" not in doc:
        raise ValidationError("target", "experiment config needs a target")
    if "max_trials" not in doc:
        raise ValidationError("max_trials", "experiment config needs max_trials")
    space = space_from_dict(doc["space"]) if "space" in doc else None
    target = target_from_dict(doc["target"], space)
    space = target.space

    tuner_doc = dict(doc.get("tuner", {}))
    seed = doc.get("seed")
    if tuner_doc.get("seed") is None and seed is not None:
        tuner_doc["seed"] = int(seed)
    tuner = TunerConfig.from_dict(tuner_doc)

    max_trials = int(doc["max_trials"])
    if max_trials < tuner.pop_size:
        raise ValidationError(
            "max_trials",
            f"must cover at least one population ({tuner.pop_size}), got {max_trials}")
    concurrency = int(doc.get("concurrency", 1))
    if concurrency < 1:
        raise ValidationError("concurrency", "must be >= 1")
    stop = _build_stop(dict(doc.get("stop", {})), max_trials)

    exp_id = experiment_id or doc.get("id") or _generated_id()
    journal_path = Path(journal_dir) / f"{exp_id}.jsonl"
    return Experiment(id=exp_id, space=space, tuner=tuner, target=target,
                      max_trials=max_trials, concurrency=concurrency, stop=stop,
                      seed=tuner.seed, journal_path=journal_path)


def create_experiment(doc: dict, journal_dir: Union[str, Path],
                      experiment_id: Optional[str] = None) -> Experiment:
    """Validate config, persist the experiment_created record, return the handle."""
    exp = build_experiment(doc, journal_dir, experiment_id)
    journal = Journal.create(exp.journal_path)
    record = journal.write("experiment_created", exp.config_payload())
    journal.close()
    exp.created_at = record.ts
    return exp


def run_experiment(exp: Experiment) -> tuple[Experiment, Coordinator]:
    """Run a freshly created experiment to completion in this thread."""
    journal = Journal.open_existing(exp.journal_path)
    tuner = create_tuner(exp.tuner, exp.space, exp.max_trials)
    coordinator = Coordinator(exp, journal, tuner)
    coordinator.run()
    return exp, coordinator


def start_experiment(exp: Experiment) -> Coordinator:
    """Run an experiment on a background thread; returns its live coordinator."""
    journal = Journal.open_existing(exp.journal_path)
    tuner = create_tuner(exp.tuner, exp.space, exp.max_trials)
    coordinator = Coordinator(exp, journal, tuner)
    thread = threading.Thread(target=coordinator.run, name=f"coord-{exp.id}", daemon=True)
    coordinator.thread = thread
    thread.start()
    return coordinator


def stop_experiment(journal_dir: Union[str, Path], experiment_id: str) -> None:
    """Request a graceful stop via the journal-side sentinel file."""
    journal_path = Path(journal_dir) / f"{experiment_id}.jsonl"
    if not journal_path.exists():
        raise UnknownExperimentError(f"no experiment {experiment_id!r} in {journal_dir}")
    state = load(journal_path)
    if state.status != "running":
        raise NotRunningError(f"experiment {experiment_id} is {state.status}")
    journal_path.with_suffix(".stop").touch()


def experiment_from_state(state: JournalState) -> Experiment:
    config = state.config
    space = space_from_dict(config["space"])
    target = target_from_dict(config["target"], space)
    tuner = TunerConfig.from_dict(config["tuner"])
    stop_doc = dict(config.get("stop", {}))
    stop_doc.pop("max_trials", None)
    stop = _build_stop(stop_doc, config["max_trials"])
    exp = Experiment(id=config["id"], space=space, tuner=tuner, target=target,
                     max_trials=config["max_trials"], concurrency=config["concurrency"],
                     stop=stop, seed=config.get("seed"), journal_path=state.path,
                     created_at=state.created_at)
    exp.status = state.status
    if state.finished:
        exp.reason = state.finished.get("reason")
        exp.finished_at = state.finished_at
    return exp


def snapshot_from_state(state: JournalState) -> dict:
    """Same shape as Coordinator.snapshot(), built from a journal alone."""
    counts = state.counts()
    best_trial = state.best()
    best = None
    if best_trial is not None:
        best = {"objective": best_trial.objective, "trial_id": best_trial.trial_id,
                "values": best_trial.values}
    finished_at = state.finished_at
    done = counts["succeeded"] + counts["failed"] + counts["timeout"]
    return {
        "id": state.experiment_id,
        "status": state.status,
        "reason": state.finished.get("reason") if state.finished else None,
        "generation": state.generation_count(),
        "trials": {**counts, "done": done, "total": state.config["max_trials"]},
        "concurrency": state.config["concurrency"],
        "tuner": state.config["tuner"]["kind"],
        "best": best,
        "created_at": state.created_at,
        "finished_at": finished_at,
        "elapsed": (finished_at or time.time()) - state.created_at,
    }


# -- resume -------------------------------------------------------------------------


def _replay_tuner(state: JournalState, tuner: Tuner) -> None:
    """Re-derive tuner state by re-asking and telling journaled generations."""
    for g in range(state.generation_count()):
        journaled = state.results_for_generation(g)
        asked: list[Proposal] = []
        while len(asked) < len(journaled):
            batch = tuner.ask(len(journaled) - len(asked))
            if not batch.proposals:
                raise NotResumableError(
                    f"replay stalled in generation {g}: tuner produced no proposals")
            asked.extend(batch.proposals)
        by_pid = {t.proposal_id: t for t in journaled}
        for prop in asked:
            trial = by_pid.get(prop.id)
            if trial is None:
                raise NotResumableError(
                    f"replay mismatch: proposal {prop.id} absent from journal")
            if [float(x) for x in prop.genome] != list(trial.genome):
                raise NotResumableError(
                    f"replay mismatch: genome of proposal {prop.id} differs from journal")
        tuner.tell([
            TellResult(t.proposal_id,
                       t.objective if t.status == "succeeded" else None,
                       elapsed=t.elapsed or 0.0,
                       failure=t.failure if t.status != "succeeded" else None)
            for t in journaled
        ])


def _tail_stagnation(state: JournalState) -> int:
    """Consecutive non-improving generations at the journal tail."""
    streak = 0
    previous_best = None
    for gen in state.completed_generations:
        best = gen.get("best_objective")
        improved = best is not None and (previous_best is None or best < previous_best)
        streak = 0 if improved else streak + 1
        if improved:
            previous_best = best
    return streak


def resume_experiment(journal_path: Union[str, Path],
                      journal_dir: Optional[Union[str, Path]] = None) -> Coordinator:
    """Rebuild an interrupted experiment at its last generation barrier.

    Completed generations are replayed through ask/tell (bit-identical by
    tuner determinism); trials of an incomplete generation are closed out as
    discarded and their generation is re-asked. Returns a coordinator ready
    to run().
    """
    journal_path = Path(journal_path)
    if journal_dir is not None and not journal_path.exists():
        journal_path = Path(journal_dir) / f"{journal_path}.jsonl"
    state = load(journal_path)
    if state.status != "running":
        raise NotResumableError(f"experiment {state.experiment_id} is {state.status}")
    stale_sentinel = journal_path.with_suffix(".stop")
    if stale_sentinel.exists():  # left by a stop that raced the crash
        stale_sentinel.unlink()
    if state.config.get("tuner", {}).get("seed") is None:
        raise SeedMissingError("resume needs a seeded experiment")
    exp = experiment_from_state(state)
    tuner = create_tuner(exp.tuner, exp.space, exp.max_trials)
    generations_done = state.generation_count()
    _replay_tuner(state, tuner)

    journal = Journal.open_existing(journal_path)
    for trial in state.trials_in_order():
        if trial.generation >= generations_done and trial.status == "running":
            journal.write("trial_finished", {
                "trial_id": trial.trial_id, "proposal_id": trial.proposal_id,
                "generation": trial.generation, "status": "failed",
                "objective": None, "elapsed": None,
                "failure": "discarded_on_resume",
            })
            trial.status = "failed"
            trial.failure = "discarded_on_resume"

    best = state.best()
    incumbent = None
    if best is not None:
        incumbent = (best.objective, best.trial_id, best.values)
    next_trial_id = (max(state.trials) + 1) if state.trials else 0
    counts = state.counts()
    coordinator = Coordinator(
        exp, journal, tuner,
        next_trial_id=next_trial_id,
        generations_done=generations_done,
        incumbent=incumbent,
        stagnation_count=_tail_stagnation(state),
        resumed=True,
    )
    coordinator._trial_counts.update(
        {k: counts.get(k, 0) for k in ("succeeded", "failed", "timeout")})
    coordinator._trial_counts["running"] = 0
    return coordinator
