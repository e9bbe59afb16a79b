"""Ask/tell tuners: random search, classic DE, and the adaptive DE family.

A tuner prepares one generation of proposals at a time. ask() hands them out
in chunks (at most max_n per call, remembering the remainder), tell() banks
results, and once every proposal of the generation is accounted for the tuner
runs selection, folds successful control parameters into its adaptation
state, applies population-size reduction where the variant calls for it, and
prepares the next generation. Given a fixed seed and the same tell sequence,
the ask sequence is bit-identical, which is what journal replay relies on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import de
from .de import AdaptState, ControlParams, Individual, ShadeMemory, SizeSchedule
from .errors import (
    BudgetExhaustedError,
    DuplicateTellError,
    NoEvaluationsError,
    UnknownProposalError,
    ValidationError,
)
from .searchspace import Genome, SearchSpace, init_population

TUNER_KINDS = ("random", "classic_de", "jade", "shade", "lshade", "ljade")


@dataclass(frozen=True)
class TunerConfig:
    kind: str = "ljade"
    pop_size: int = 75
    F: float = 0.5          # classic_de only
    CR: float = 0.9         # classic_de only
    p: float = de.PBEST_FRACTION
    n_min: int = 4
    seed: Optional[int] = None
    init_scheme: Optional[str] = None  # defaults per kind

    def __post_init__(self):
        if self.kind not in TUNER_KINDS:
            raise ValidationError("tuner.kind", f"unknown tuner {self.kind!r}; choose from {TUNER_KINDS}")
        if self.pop_size < de.MIN_POPULATION:
            raise ValidationError("tuner.pop_size", f"population size must be >= {de.MIN_POPULATION}")
        if not de.MIN_POPULATION <= self.n_min <= self.pop_size:
            raise ValidationError("tuner.n_min",
                                  f"must be in [{de.MIN_POPULATION}, pop_size]")
        if not 0.0 < self.p <= 1.0:
            raise ValidationError("tuner.p", "top fraction must be in (0, 1]")
        if self.init_scheme not in (None, "halton", "uniform"):
            raise ValidationError("tuner.init_scheme", "must be 'halton' or 'uniform'")

    @property
    def resolved_init_scheme(self) -> str:
        if self.init_scheme is not None:
            return self.init_scheme
        return "halton" if self.kind == "ljade" else "uniform"

    @classmethod
    def from_dict(cls, doc: dict) -> "TunerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError("tuner", f"unknown tuner options: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "pop_size": self.pop_size, "F": self.F, "CR": self.CR,
            "p": self.p, "n_min": self.n_min, "seed": self.seed,
            "init_scheme": self.init_scheme,
        }


@dataclass(frozen=True)
class Proposal:
    id: int
    genome: Genome
    generation: int
    parent_idx: Optional[int] = None
    control: Optional[ControlParams] = None


@dataclass(frozen=True)
class AskBatch:
    proposals: list[Proposal]
    generation: int

    def __len__(self) -> int:
        return len(self.proposals)


@dataclass(frozen=True)
class TellResult:
    proposal_id: int
    objective: Optional[float]  # None marks a failed evaluation
    elapsed: float = 0.0
    failure: Optional[str] = None

    @property
    def fitness(self) -> float:
        if self.objective is None or not np.isfinite(self.objective):
            return de.FAILED_FITNESS
        return float(self.objective)


class Tuner:
    """Shared ask/tell machinery; variants plug in mutation and adaptation."""

    kind = "base"
    uses_lpsr = False

    def __init__(self, config: TunerConfig, space: SearchSpace, budget: int):
        if budget < 1:
            raise ValidationError("budget", "evaluation budget must be >= 1")
        self.config = config
        self.space = space
        self.budget = budget
        init_ss, evolve_ss = np.random.SeedSequence(config.seed).spawn(2)
        self._rng = np.random.default_rng(evolve_ss)
        self._init_ss = init_ss if config.seed is not None else None
        self._adapt = self._initial_adapt_state()
        self._schedule = SizeSchedule(config.pop_size, config.n_min, budget) if self.uses_lpsr else None
        self._generation = 0
        self._next_pid = 0
        self._queue: deque[Proposal] = deque()
        self._outstanding: dict[int, Proposal] = {}
        self._told: set[int] = set()
        self._gen_proposals: list[Proposal] = []
        self._gen_fitness: dict[int, float] = {}
        self._population: list[Individual] = []
        self._incumbent: Optional[tuple[float, int, Genome]] = None  # (objective, pid, genome)
        self._told_total = 0
        self._prepare_generation()

    # -- variant hooks -------------------------------------------------------

    def _initial_adapt_state(self) -> Optional[AdaptState]:
        return None

    def _make_children(self, count: int) -> tuple[np.ndarray, Optional[list[ControlParams]]]:
        """Trial vectors (count, dim) for parents 0..count-1, plus controls used."""
        raise NotImplementedError

    # -- protocol -------------------------------------------------------------

    @property
    def generation(self) -> int:
        return self._generation

    @property
    def population_size(self) -> int:
        return len(self._population) or min(self.config.pop_size, self.budget)

    @property
    def outstanding(self) -> int:
        return len(self._outstanding)

    @property
    def is_exhausted(self) -> bool:
        return not self._queue and not self._outstanding and self._next_pid >= self.budget

    def ask(self, max_n: int) -> AskBatch:
        """Hand out up to max_n proposals of the current generation.

        Returns an empty batch while the generation is fully asked but still
        awaiting results; raises BudgetExhaustedError once the budget is spent
        and nothing is outstanding.
        """
        if max_n < 1:
            raise ValueError("max_n must be >= 1")
        if self.is_exhausted:
            raise BudgetExhaustedError(f"budget of {self.budget} evaluations consumed")
        out: list[Proposal] = []
        while self._queue and len(out) < max_n:
            prop = self._queue.popleft()
            self._outstanding[prop.id] = prop
            out.append(prop)
        generation = out[0].generation if out else self._generation
        return AskBatch(proposals=out, generation=generation)

    def tell(self, results: list[TellResult]) -> None:
        """Bank results; completes the generation when the last one arrives."""
        for res in results:
            if res.proposal_id in self._told:
                raise DuplicateTellError(f"proposal {res.proposal_id} already told")
            prop = self._outstanding.pop(res.proposal_id, None)
            if prop is None:
                raise UnknownProposalError(f"proposal {res.proposal_id} was never asked")
            self._told.add(prop.id)
            self._gen_fitness[prop.id] = res.fitness
            self._told_total += 1
            if res.objective is not None and np.isfinite(res.objective):
                key = (float(res.objective), prop.id)
                if self._incumbent is None or key < (self._incumbent[0], self._incumbent[1]):
                    self._incumbent = (key[0], key[1], prop.genome.copy())
        if not self._queue and not self._outstanding and self._gen_proposals:
            self._complete_generation()

    def best(self) -> tuple[Genome, float]:
        """Best evaluated point ever told, independent of population survival."""
        if self._incumbent is None:
            raise NoEvaluationsError("no successful evaluation reported yet")
        objective, _, genome = self._incumbent
        return genome.copy(), objective

    # -- generation machinery --------------------------------------------------

    def _remaining_budget(self) -> int:
        return self.budget - self._next_pid

    def _take_pid(self) -> int:
        pid = self._next_pid
        self._next_pid += 1
        return pid

    def _prepare_generation(self) -> None:
        remaining = self._remaining_budget()
        if remaining <= 0:
            self._gen_proposals = []
            return
        if self._generation == 0:
            genomes = init_population(self.space, self.config.pop_size,
                                      self.config.resolved_init_scheme, self._init_ss)
            proposals = [
                Proposal(id=self._take_pid(), genome=g, generation=0)
                for g in genomes[:remaining]
            ]
        else:
            count = min(len(self._population), remaining)
            children, controls = self._make_children(count)
            proposals = [
                Proposal(id=self._take_pid(), genome=children[i],
                         generation=self._generation, parent_idx=i,
                         control=controls[i] if controls else None)
                for i in range(count)
            ]
        self._gen_proposals = proposals
        self._gen_fitness = {}
        self._queue = deque(proposals)

    def _complete_generation(self) -> None:
        if self._generation == 0:
            self._population = [
                Individual(genome=p.genome, fitness=self._gen_fitness[p.id], trial_id=p.id)
                for p in self._gen_proposals
            ]
        else:
            self._apply_selection()
        if self._schedule is not None and self._population:
            target = de.lpsr_size(self._schedule, self._told_total)
            if target < len(self._population):
                self._population = de.shrink_population(self._population, target)
        self._generation += 1
        self._prepare_generation()

    def _apply_selection(self) -> None:
        s_F: list[float] = []
        s_CR: list[float] = []
        deltas: list[float] = []
        for prop in self._gen_proposals:
            child = Individual(genome=prop.genome, fitness=self._gen_fitness[prop.id],
                               trial_id=prop.id)
            parent = self._population[prop.parent_idx]
            winner, improved, delta = de.select(parent, child)
            self._population[prop.parent_idx] = winner
            if improved and prop.control is not None and np.isfinite(child.fitness):
                s_F.append(prop.control.F)
                s_CR.append(prop.control.CR)
                deltas.append(delta)
        if self._adapt is not None:
            self._adapt = de.update_adaptation(self._adapt, s_F, s_CR, deltas)


class RandomSearchTuner(Tuner):
    """Uniform-sampling control arm; not part of the DE family."""

    kind = "random"

    def _prepare_generation(self) -> None:
        remaining = self._remaining_budget()
        count = min(self.config.pop_size, remaining)
        points = self._rng.uniform(size=(count, self.space.dim))
        self._gen_proposals = [
            Proposal(id=self._take_pid(), genome=points[i], generation=self._generation)
            for i in range(count)
        ]
        self._gen_fitness = {}
        self._queue = deque(self._gen_proposals)

    def _complete_generation(self) -> None:
        self._generation += 1
        self._prepare_generation()


class ClassicDETuner(Tuner):
    kind = "classic_de"

    def _make_children(self, count: int) -> tuple[np.ndarray, list[ControlParams]]:
        genomes = np.stack([ind.genome for ind in self._population])
        F = np.full(count, self.config.F)
        CR = np.full(count, self.config.CR)
        children = de.make_children_rand1(genomes, count, F, CR, self._rng)
        control = ControlParams(F=self.config.F, CR=self.config.CR)
        return children, [control] * count


class _AdaptiveDETuner(Tuner):
    """rand-to-p-best/1 with sampled control parameters."""

    def _make_children(self, count: int) -> tuple[np.ndarray, list[ControlParams]]:
        genomes = np.stack([ind.genome for ind in self._population])
        fitness = np.array([ind.fitness for ind in self._population])
        F, CR = de.sample_control_batch(self._adapt, count, self._rng)
        children = de.make_children_rand_to_pbest1(genomes, fitness, count,
                                                   self.config.p, F, CR, self._rng)
        controls = [ControlParams(F=float(f), CR=float(cr)) for f, cr in zip(F, CR)]
        return children, controls


class JadeTuner(_AdaptiveDETuner):
    kind = "jade"

    def _initial_adapt_state(self) -> AdaptState:
        return AdaptState(cr_mean="arithmetic")


class ShadeTuner(_AdaptiveDETuner):
    kind = "shade"

    def _initial_adapt_state(self) -> AdaptState:
        return AdaptState(shade_memory=ShadeMemory.fresh())


class LShadeTuner(ShadeTuner):
    kind = "lshade"
    uses_lpsr = True


class LJadeTuner(_AdaptiveDETuner):
    """Adaptive DE with bias-corrected CR updates, LPSR, and Halton init."""

    kind = "ljade"
    uses_lpsr = True

    def _initial_adapt_state(self) -> AdaptState:
        return AdaptState(cr_mean="power")


_TUNERS = {cls.kind: cls for cls in
           (RandomSearchTuner, ClassicDETuner, JadeTuner, ShadeTuner, LShadeTuner, LJadeTuner)}


def create_tuner(config: TunerConfig, space: SearchSpace, budget: int) -> Tuner:
    return _TUNERS[config.kind](config, space, budget)


def minimize(evaluate, space: SearchSpace, config: TunerConfig, budget: int) -> tuple[Genome, float, int]:
    """Serial ask/tell driver: run a tuner against a genome-level objective.

    Returns (best genome, best objective, evaluations used). Used by the
    bench command and comparison tests; orchestrated experiments go through
    the coordinator instead.
    """
    tuner = create_tuner(config, space, budget)
    nfe = 0
    while True:
        try:
            batch = tuner.ask(budget)
        except BudgetExhaustedError:
            break
        results = [TellResult(p.id, float(evaluate(p.genome))) for p in batch.proposals]
        nfe += len(results)
        tuner.tell(results)
    genome, objective = tuner.best()
    return genome, objective, nfe
