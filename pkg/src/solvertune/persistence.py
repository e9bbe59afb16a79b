"""Append-only JSONL experiment journal.

One file per experiment, one record per line. The coordinator is the only
writer; readers (HTTP server, CLI) load snapshots and tolerate a growing
file. A truncated final line is dropped on load; corruption anywhere else
is fatal. Field names are documented in docs/journal.md.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import (
    CorruptRecordError,
    IdCollisionError,
    SequenceGapError,
)

log = logging.getLogger(__name__)

RECORD_TYPES = (
    "experiment_created",
    "trial_started",
    "trial_finished",
    "generation_completed",
    "experiment_finished",
)

# Wall-clock and hardware-mapping fields; excluded when comparing journals
# of seeded runs for determinism.
VOLATILE_FIELDS = ("ts", "elapsed", "worker_slot", "started_at", "finished_at")

TERMINAL_TRIAL_STATUSES = ("succeeded", "failed", "timeout")


@dataclass(frozen=True)
class JournalRecord:
    type: str
    seq: int
    ts: float
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"type": self.type, "seq": self.seq, "ts": self.ts,
                           "payload": self.payload}, separators=(",", ":"))


class Journal:
    """Single-writer append handle for one experiment's journal file."""

    def __init__(self, path: Union[str, Path], last_seq: int = 0):
        self.path = Path(path)
        self._last_seq = last_seq
        self._fh = open(self.path, "a", encoding="utf-8")

    @classmethod
    def create(cls, path: Union[str, Path]) -> "Journal":
        path = Path(path)
        if path.exists():
            raise IdCollisionError(f"journal {path} already exists")
        path.parent.mkdir(parents=True, exist_ok=True)
        return cls(path)

    @classmethod
    def open_existing(cls, path: Union[str, Path]) -> "Journal":
        state = load(path)
        return cls(path, last_seq=state.last_seq)

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def next_seq(self) -> int:
        return self._last_seq + 1

    def append(self, record: JournalRecord) -> None:
        if record.seq != self._last_seq + 1:
            raise SequenceGapError(
                f"expected seq {self._last_seq + 1}, got {record.seq}")
        self._fh.write(record.to_json() + "\n")
        self._fh.flush()
        self._last_seq = record.seq

    def write(self, record_type: str, payload: dict) -> JournalRecord:
        record = JournalRecord(type=record_type, seq=self.next_seq(),
                               ts=time.time(), payload=payload)
        self.append(record)
        return record

    def sync(self) -> None:
        """Durability point: generation barriers fsync to disk."""
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class TrialView:
    """One trial's state as reconstructed from the journal."""

    trial_id: int
    proposal_id: int
    generation: int
    values: dict
    genome: list
    status: str = "running"
    objective: Optional[float] = None
    elapsed: Optional[float] = None
    worker_slot: Optional[int] = None
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    failure: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "trial_id": self.trial_id, "proposal_id": self.proposal_id,
            "generation": self.generation, "values": self.values,
            "status": self.status, "objective": self.objective,
            "elapsed": self.elapsed, "worker_slot": self.worker_slot,
            "started_at": self.started_at, "finished_at": self.finished_at,
            "failure": self.failure,
        }


@dataclass
class JournalState:
    """Replay state: experiment config, trials, and generation history."""

    path: Path
    records: list[JournalRecord]
    config: dict
    trials: dict[int, TrialView] = field(default_factory=dict)
    completed_generations: list[dict] = field(default_factory=list)
    finished: Optional[dict] = None

    @property
    def last_seq(self) -> int:
        return self.records[-1].seq if self.records else 0

    @property
    def experiment_id(self) -> str:
        return self.config["id"]

    @property
    def status(self) -> str:
        if self.finished is not None:
            return self.finished["status"]
        if len(self.records) == 1:
            return "created"
        return "running"

    @property
    def created_at(self) -> float:
        return self.records[0].ts

    @property
    def finished_at(self) -> Optional[float]:
        if self.finished is None:
            return None
        return self.records[-1].ts

    def trials_in_order(self) -> list[TrialView]:
        return [self.trials[k] for k in sorted(self.trials)]

    def counts(self) -> dict[str, int]:
        counts = {"running": 0, "succeeded": 0, "failed": 0, "timeout": 0}
        for t in self.trials.values():
            counts[t.status] = counts.get(t.status, 0) + 1
        return counts

    def best(self) -> Optional[TrialView]:
        """Minimum-objective succeeded trial; ties go to the earlier trial."""
        candidates = [t for t in self.trials.values() if t.status == "succeeded"]
        if not candidates:
            return None
        return min(candidates, key=lambda t: (t.objective, t.trial_id))

    def series(self) -> list[tuple[int, float]]:
        """Incumbent objective after each terminal trial, by trial id."""
        points = []
        incumbent = None
        for t in self.trials_in_order():
            if t.status == "running":
                continue
            if t.status == "succeeded" and (incumbent is None or t.objective < incumbent):
                incumbent = t.objective
            if incumbent is not None:
                points.append((t.trial_id, incumbent))
        return points

    def generation_count(self) -> int:
        return len(self.completed_generations)

    def results_for_generation(self, generation: int) -> list[TrialView]:
        trials = [t for t in self.trials_in_order() if t.generation == generation]
        return trials


def _parse_line(line: str, lineno: int) -> JournalRecord:
    doc = json.loads(line)
    for key in ("type", "seq", "ts", "payload"):
        if key not in doc:
            raise CorruptRecordError(f"line {lineno}: record missing {key!r}")
    if doc["type"] not in RECORD_TYPES:
        raise CorruptRecordError(f"line {lineno}: unknown record type {doc['type']!r}")
    return JournalRecord(type=doc["type"], seq=int(doc["seq"]), ts=float(doc["ts"]),
                         payload=doc["payload"])


def load(path: Union[str, Path]) -> JournalState:
    """Read a journal into replay state.

    A truncated final line is tolerated and dropped with a warning; any
    earlier problem, an empty file, or a file not starting with
    experiment_created raises CorruptRecordError.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    records: list[JournalRecord] = []
    for i, line in enumerate(lines):
        try:
            records.append(_parse_line(line, i + 1))
        except (json.JSONDecodeError, CorruptRecordError, ValueError) as exc:
            if i == len(lines) - 1:
                log.warning("journal %s: dropping truncated final line: %s", path, exc)
                break
            raise CorruptRecordError(f"{path}: unreadable record at line {i + 1}: {exc}") from None
    if not records:
        raise CorruptRecordError(f"{path}: journal is empty")
    if records[0].type != "experiment_created":
        raise CorruptRecordError(f"{path}: first record must be experiment_created")
    state = JournalState(path=path, records=records, config=records[0].payload)
    prev_seq = records[0].seq
    for record in records[1:]:
        if record.seq != prev_seq + 1:
            raise CorruptRecordError(
                f"{path}: sequence break at seq {record.seq} (previous {prev_seq})")
        prev_seq = record.seq
        if record.type == "experiment_created":
            raise CorruptRecordError(f"{path}: duplicate experiment_created record")
        if record.type == "trial_started":
            p = record.payload
            state.trials[p["trial_id"]] = TrialView(
                trial_id=p["trial_id"], proposal_id=p["proposal_id"],
                generation=p["generation"], values=p["values"], genome=p["genome"],
                worker_slot=p.get("worker_slot"), started_at=record.ts,
            )
        elif record.type == "trial_finished":
            p = record.payload
            trial = state.trials.get(p["trial_id"])
            if trial is None:
                raise CorruptRecordError(
                    f"{path}: trial_finished for unknown trial {p['trial_id']}")
            trial.status = p["status"]
            trial.objective = p.get("objective")
            trial.elapsed = p.get("elapsed")
            trial.failure = p.get("failure")
            trial.finished_at = record.ts
        elif record.type == "generation_completed":
            state.completed_generations.append(record.payload)
        elif record.type == "experiment_finished":
            state.finished = record.payload
    return state


def list_journals(journal_dir: Union[str, Path]) -> list[Path]:
    journal_dir = Path(journal_dir)
    if not journal_dir.is_dir():
        return []
    return sorted(journal_dir.glob("*.jsonl"))


def canonical_lines(path: Union[str, Path], strip_volatile: bool = True) -> list[str]:
    """Normalized record lines for journal comparisons in tests.

    Volatile fields (wall-clock, worker slots) are removed so two seeded
    runs of the same experiment compare byte-for-byte equal.
    """
    out = []
    for record in load(path).records:
        doc = {"type": record.type, "seq": record.seq, "ts": record.ts,
               "payload": dict(record.payload)}
        if strip_volatile:
            doc.pop("ts")
            for key in VOLATILE_FIELDS:
                doc["payload"].pop(key, None)
        out.append(json.dumps(doc, sort_keys=True, separators=(",", ":")))
    return out


def resume(journal_path: Union[str, Path], journal_dir: Optional[Union[str, Path]] = None):
    """Re-open an interrupted experiment and continue running it.

    Thin wrapper over the coordinator's resume logic so callers can reach it
    from the persistence surface; see orchestrator.resume_experiment.
    """
    from .orchestrator import resume_experiment

    return resume_experiment(journal_path, journal_dir=journal_dir)
