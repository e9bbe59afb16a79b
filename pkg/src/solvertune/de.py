"""Differential-evolution primitives shared by all tuner variants.

Everything here is deterministic given the explicit rng handle; no function
keeps hidden state. Genomes live in [0, 1]^dim (see searchspace) and fitness
is always minimized, with +inf as the failed-trial sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    LengthMismatchError,
    PopulationTooSmallError,
    UnevaluatedError,
)
from .searchspace import MIN_POPULATION, Genome, _round_half_away

FAILED_FITNESS = float("inf")

# Standard constants for the JADE/SHADE family; the source material fixes
# only the population size, so these stay at their literature defaults.
CAUCHY_SCALE = 0.1
NORMAL_SD = 0.1
LEARNING_RATE = 0.1
SHADE_MEMORY_SIZE = 10
PBEST_FRACTION = 0.1


@dataclass
class Individual:
    genome: Genome
    fitness: Optional[float] = None
    trial_id: Optional[int] = None


@dataclass(frozen=True)
class ControlParams:
    F: float
    CR: float


@dataclass(frozen=True)
class ShadeMemory:
    m_F: tuple[float, ...]
    m_CR: tuple[float, ...]
    k: int = 0

    @classmethod
    def fresh(cls, size: int = SHADE_MEMORY_SIZE) -> "ShadeMemory":
        return cls(m_F=(0.5,) * size, m_CR=(0.5,) * size)


@dataclass(frozen=True)
class AdaptState:
    """Self-adaptation state for the scale factor and crossover rate.

    cr_mean selects how successful CR values are aggregated: "arithmetic"
    is the classic mean-based update, "power" uses a power mean with
    exponent 1.5 to counteract the drift of the crossover rate toward
    small values under clipped-normal sampling.
    """

    mu_F: float = 0.5
    mu_CR: float = 0.5
    c: float = LEARNING_RATE
    cr_mean: str = "power"
    shade_memory: Optional[ShadeMemory] = None


@dataclass(frozen=True)
class SizeSchedule:
    n_init: int
    n_min: int
    max_nfe: int

    def __post_init__(self):
        if not (self.n_init >= self.n_min >= MIN_POPULATION):
            raise ValueError(f"need n_init >= n_min >= {MIN_POPULATION}")
        if self.max_nfe < self.n_init:
            raise ValueError("max_nfe must cover at least the initial population")


def _distinct_indices(n: int, exclude: int, count: int, rng: np.random.Generator) -> list[int]:
    picked: list[int] = []
    while len(picked) < count:
        r = int(rng.integers(n))
        if r != exclude and r not in picked:
            picked.append(r)
    return picked


def _require_evaluated(pop: list[Individual]) -> None:
    if any(ind.fitness is None for ind in pop):
        raise UnevaluatedError("population contains unevaluated individuals")


def mutate_rand1(pop: list[Individual], target_idx: int, F: float,
                 rng: np.random.Generator) -> np.ndarray:
    """rand/1 donor: a + F*(b - c), before bound repair."""
    if len(pop) < MIN_POPULATION:
        raise PopulationTooSmallError(f"rand/1 needs >= {MIN_POPULATION} individuals")
    a, b, c = _distinct_indices(len(pop), target_idx, 3, rng)
    return pop[a].genome + F * (pop[b].genome - pop[c].genome)


def pbest_pool(pop: list[Individual], p: float, exclude: Optional[int] = None) -> list[int]:
    """Indices of the top-p fraction by fitness (pool size >= 1)."""
    _require_evaluated(pop)
    fitness = np.array([ind.fitness for ind in pop])
    order = np.argsort(fitness, kind="stable")
    size = max(1, int(_round_half_away(p * len(pop))))
    pool = [int(i) for i in order[:size] if i != exclude]
    if not pool:
        pool = [int(order[size])]  # pool was exactly the excluded target
    return pool


def mutate_rand_to_pbest1(pop: list[Individual], target_idx: int, p: float, F: float,
                          rng: np.random.Generator) -> np.ndarray:
    """rand-to-p-best/1 donor: a + F*(g_p - a) + F*(b - c), before repair.

    g_p is drawn from the top-p pool (target excluded); a, b, c are distinct
    random individuals different from the target.
    """
    if len(pop) < MIN_POPULATION:
        raise PopulationTooSmallError(f"rand-to-p-best/1 needs >= {MIN_POPULATION} individuals")
    pool = pbest_pool(pop, p, exclude=target_idx)
    g_p = pop[pool[int(rng.integers(len(pool)))]].genome
    a, b, c = (pop[i].genome for i in _distinct_indices(len(pop), target_idx, 3, rng))
    return a + F * (g_p - a) + F * (b - c)


def repair_bounds(v: np.ndarray, target: Genome) -> Genome:
    """Halfway-to-violated-bound repair against the target genome."""
    if len(v) != len(target):
        raise LengthMismatchError("donor and target have different lengths")
    out = np.where(v < 0.0, target / 2.0, v)
    out = np.where(v > 1.0, (1.0 + target) / 2.0, out)
    return out


def crossover_binomial(target: Genome, donor: Genome, CR: float,
                       rng: np.random.Generator) -> Genome:
    """Binomial crossover with a forced donor coordinate at j_rand."""
    if len(target) != len(donor):
        raise LengthMismatchError("target and donor have different lengths")
    dim = len(target)
    draws = rng.uniform(size=dim)
    j_rand = int(rng.integers(dim))
    mask = draws < CR
    mask[j_rand] = True
    return np.where(mask, donor, target)


def select(parent: Individual, child: Individual) -> tuple[Individual, bool, float]:
    """Greedy selection; the child wins ties so the search can drift on plateaus."""
    if parent.fitness is None or child.fitness is None:
        raise UnevaluatedError("select requires evaluated parent and child")
    improved = child.fitness < parent.fitness
    winner = child if child.fitness <= parent.fitness else parent
    delta = parent.fitness - child.fitness if improved else 0.0
    return winner, improved, delta


def sample_F(state: AdaptState, rng: np.random.Generator, loc: Optional[float] = None) -> float:
    """Scale factor from Cauchy(loc, 0.1): redrawn while <= 0, truncated at 1."""
    loc = state.mu_F if loc is None else loc
    while True:
        f = loc + CAUCHY_SCALE * float(rng.standard_cauchy())
        if f > 0.0:
            return min(f, 1.0)


def sample_CR(state: AdaptState, rng: np.random.Generator, loc: Optional[float] = None) -> float:
    """Crossover rate from Normal(loc, 0.1), clipped to [0, 1]."""
    loc = state.mu_CR if loc is None else loc
    return float(min(max(rng.normal(loc, NORMAL_SD), 0.0), 1.0))


def sample_control(state: AdaptState, rng: np.random.Generator) -> ControlParams:
    """One (F, CR) pair; with SHADE memory both come from the same slot."""
    if state.shade_memory is None:
        return ControlParams(F=sample_F(state, rng), CR=sample_CR(state, rng))
    mem = state.shade_memory
    r = int(rng.integers(len(mem.m_F)))
    return ControlParams(F=sample_F(state, rng, loc=mem.m_F[r]),
                         CR=sample_CR(state, rng, loc=mem.m_CR[r]))


def _lehmer_mean(values: np.ndarray, weights: np.ndarray) -> float:
    denom = float(np.sum(weights * values))
    if denom == 0.0:
        return 0.0
    return float(np.sum(weights * values ** 2)) / denom


def _power_mean(values: np.ndarray, exponent: float = 1.5) -> float:
    return float(np.mean(values ** exponent) ** (1.0 / exponent))


def _success_weights(deltas: np.ndarray) -> np.ndarray:
    """Improvement-proportional weights; infinite deltas dominate outright."""
    infinite = np.isinf(deltas)
    if infinite.any():
        return infinite / infinite.sum()
    total = deltas.sum()
    if total <= 0.0:
        return np.full(len(deltas), 1.0 / len(deltas))
    return deltas / total


def update_adaptation(state: AdaptState, s_F: list[float], s_CR: list[float],
                      deltas: list[float]) -> AdaptState:
    """Fold one generation's successful control parameters into the state.

    Mean-based variants move mu_F toward the Lehmer mean of successful scale
    factors and mu_CR toward the arithmetic or power mean of successful
    crossover rates. The SHADE variant instead writes improvement-weighted
    means into the current memory slot and advances the slot cyclically.
    Empty success lists leave the state unchanged.
    """
    if not (len(s_F) == len(s_CR) == len(deltas)):
        raise LengthMismatchError("success lists must have equal lengths")
    if not s_F:
        return state
    f = np.asarray(s_F, dtype=float)
    cr = np.asarray(s_CR, dtype=float)
    w = _success_weights(np.asarray(deltas, dtype=float))

    if state.shade_memory is not None:
        mem = state.shade_memory
        m_F = list(mem.m_F)
        m_CR = list(mem.m_CR)
        m_F[mem.k] = _lehmer_mean(f, w)
        m_CR[mem.k] = float(np.sum(w * cr))
        new_mem = ShadeMemory(m_F=tuple(m_F), m_CR=tuple(m_CR), k=(mem.k + 1) % len(m_F))
        return replace(state, shade_memory=new_mem)

    lehmer = _lehmer_mean(f, np.ones(len(f)))
    if state.cr_mean == "power":
        cr_agg = _power_mean(cr)
    else:
        cr_agg = float(np.mean(cr))
    return replace(
        state,
        mu_F=(1.0 - state.c) * state.mu_F + state.c * lehmer,
        mu_CR=(1.0 - state.c) * state.mu_CR + state.c * cr_agg,
    )


# -- whole-generation (vectorized) forms ---------------------------------------
#
# Per-proposal ops above define the semantics; tuners build full generations
# through these matrix forms to keep large budgets cheap. They consume the
# rng differently, so outputs are not draw-for-draw identical to a scalar
# loop, but every rule (distinctness, repair, forced crossover index) is the
# same and is covered by the shared invariant tests.


def distinct_indices_batch(n: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows i of (a, b, c): indices distinct from each other and from i."""
    if n < MIN_POPULATION:
        raise PopulationTooSmallError(f"need >= {MIN_POPULATION} individuals")
    targets = np.arange(count)
    a = rng.integers(n, size=count)
    bad = a == targets
    while bad.any():
        a[bad] = rng.integers(n, size=int(bad.sum()))
        bad = a == targets
    b = rng.integers(n, size=count)
    bad = (b == targets) | (b == a)
    while bad.any():
        b[bad] = rng.integers(n, size=int(bad.sum()))
        bad = (b == targets) | (b == a)
    c = rng.integers(n, size=count)
    bad = (c == targets) | (c == a) | (c == b)
    while bad.any():
        c[bad] = rng.integers(n, size=int(bad.sum()))
        bad = (c == targets) | (c == a) | (c == b)
    return a, b, c


def pbest_indices_batch(fitness: np.ndarray, p: float, count: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Row i: an index from the top-p pool, never equal to i itself."""
    order = np.argsort(fitness, kind="stable")
    size = max(1, int(_round_half_away(p * len(fitness))))
    pool = order[:size]
    picks = pool[rng.integers(size, size=count)]
    clash = picks == np.arange(count)
    if clash.any():
        for i in np.flatnonzero(clash):
            reduced = [int(j) for j in pool if j != i] or [int(order[size])]
            picks[i] = reduced[int(rng.integers(len(reduced)))]
    return picks


def sample_F_batch(locs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    f = locs + CAUCHY_SCALE * rng.standard_cauchy(len(locs))
    bad = f <= 0.0
    while bad.any():
        f[bad] = locs[bad] + CAUCHY_SCALE * rng.standard_cauchy(int(bad.sum()))
        bad = f <= 0.0
    return np.minimum(f, 1.0)


def sample_control_batch(state: AdaptState, count: int,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(F, CR) vectors for one generation; SHADE pairs share a memory slot."""
    if state.shade_memory is None:
        loc_F = np.full(count, state.mu_F)
        loc_CR = np.full(count, state.mu_CR)
    else:
        mem = state.shade_memory
        slots = rng.integers(len(mem.m_F), size=count)
        loc_F = np.asarray(mem.m_F)[slots]
        loc_CR = np.asarray(mem.m_CR)[slots]
    F = sample_F_batch(loc_F, rng)
    CR = np.clip(rng.normal(loc_CR, NORMAL_SD), 0.0, 1.0)
    return F, CR


def repair_bounds_batch(V: np.ndarray, targets: np.ndarray) -> np.ndarray:
    out = np.where(V < 0.0, targets / 2.0, V)
    return np.where(V > 1.0, (1.0 + targets) / 2.0, out)


def crossover_binomial_batch(targets: np.ndarray, donors: np.ndarray, CR: np.ndarray,
                             rng: np.random.Generator) -> np.ndarray:
    count, dim = targets.shape
    mask = rng.uniform(size=(count, dim)) < CR[:, None]
    mask[np.arange(count), rng.integers(dim, size=count)] = True
    return np.where(mask, donors, targets)


def make_children_rand1(genomes: np.ndarray, count: int, F: np.ndarray, CR: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """One generation of rand/1 trial vectors for parents 0..count-1."""
    a, b, c = distinct_indices_batch(len(genomes), count, rng)
    donors = genomes[a] + F[:, None] * (genomes[b] - genomes[c])
    parents = genomes[:count]
    return crossover_binomial_batch(parents, repair_bounds_batch(donors, parents), CR, rng)


def make_children_rand_to_pbest1(genomes: np.ndarray, fitness: np.ndarray, count: int,
                                 p: float, F: np.ndarray, CR: np.ndarray,
                                 rng: np.random.Generator) -> np.ndarray:
    """One generation of rand-to-p-best/1 trial vectors for parents 0..count-1."""
    gp = pbest_indices_batch(fitness, p, count, rng)
    a, b, c = distinct_indices_batch(len(genomes), count, rng)
    A = genomes[a]
    donors = A + F[:, None] * (genomes[gp] - A) + F[:, None] * (genomes[b] - genomes[c])
    parents = genomes[:count]
    return crossover_binomial_batch(parents, repair_bounds_batch(donors, parents), CR, rng)


def lpsr_size(sched: SizeSchedule, nfe: int) -> int:
    """Linear population-size reduction: n_init at nfe=0 down to n_min at max_nfe."""
    frac = min(max(nfe, 0), sched.max_nfe) / sched.max_nfe
    raw = _round_half_away(sched.n_init + (sched.n_min - sched.n_init) * frac)
    return int(min(max(raw, sched.n_min), sched.n_init))


def shrink_population(pop: list[Individual], new_size: int) -> list[Individual]:
    """Drop the worst individuals, keeping survivor order stable."""
    if new_size > len(pop):
        raise ValueError("shrink cannot grow the population")
    if new_size == len(pop):
        return list(pop)
    _require_evaluated(pop)
    fitness = np.array([ind.fitness for ind in pop])
    order = np.argsort(fitness, kind="stable")  # ties: lower index survives
    keep = sorted(int(i) for i in order[:new_size])
    return [pop[i] for i in keep]
