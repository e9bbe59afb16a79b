import numpy as np
import pytest

from solvertune.benchfn import BenchSpec, bench_space, genome_evaluator
from solvertune.errors import (
    BudgetExhaustedError,
    DuplicateTellError,
    NoEvaluationsError,
    UnknownProposalError,
    ValidationError,
)
from solvertune.searchspace import Continuous, ParamSpec, SearchSpace
from solvertune.tuners import (
    TUNER_KINDS,
    TellResult,
    TunerConfig,
    create_tuner,
    minimize,
)

SPACE = SearchSpace(params=tuple(
    ParamSpec(name=f"x{i}", kind=Continuous(0.0, 1.0)) for i in range(3)
))


def sphere_genome(g):
    return float(np.sum((g - 0.5) ** 2))


def drive(tuner, evaluate, chunk=10):
    while not tuner.is_exhausted:
        batch = tuner.ask(chunk)
        if not batch.proposals:
            continue
        tuner.tell([TellResult(p.id, evaluate(p.genome)) for p in batch.proposals])


# -- config ------------------------------------------------------------------------

def test_config_defaults():
    cfg = TunerConfig()
    assert cfg.kind == "ljade" and cfg.pop_size == 75 and cfg.p == 0.1
    assert cfg.resolved_init_scheme == "halton"
    assert TunerConfig(kind="jade").resolved_init_scheme == "uniform"


def test_config_validation():
    with pytest.raises(ValidationError):
        TunerConfig(kind="annealing")
    with pytest.raises(ValidationError):
        TunerConfig(pop_size=3)
    with pytest.raises(ValidationError):
        TunerConfig.from_dict({"kind": "ljade", "mystery": 1})


# -- ask/tell protocol ----------------------------------------------------------------

def test_initial_generation_covers_population_in_three_asks():
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=75, seed=1), SPACE, 1000)
    seen = []
    for _ in range(3):
        batch = tuner.ask(25)
        assert len(batch) == 25 and batch.generation == 0
        seen.extend(p.id for p in batch.proposals)
    assert sorted(seen) == list(range(75))
    assert len(tuner.ask(25)) == 0  # generation fully asked, awaiting tells


def test_random_search_ask_returns_requested_count():
    tuner = create_tuner(TunerConfig(kind="random", pop_size=75, seed=2), SPACE, 1000)
    batch = tuner.ask(5)
    assert len(batch) == 5
    assert all(p.genome.shape == (3,) for p in batch.proposals)


def test_ask_after_budget_consumed_raises():
    tuner = create_tuner(TunerConfig(kind="random", pop_size=4, seed=3), SPACE, 8)
    for _ in range(2):
        batch = tuner.ask(8)
        tuner.tell([TellResult(p.id, 1.0) for p in batch.proposals])
    with pytest.raises(BudgetExhaustedError):
        tuner.ask(1)


def test_tell_unknown_and_duplicate():
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=4, seed=4), SPACE, 100)
    batch = tuner.ask(4)
    with pytest.raises(UnknownProposalError):
        tuner.tell([TellResult(999, 1.0)])
    tuner.tell([TellResult(batch.proposals[0].id, 1.0)])
    with pytest.raises(DuplicateTellError):
        tuner.tell([TellResult(batch.proposals[0].id, 2.0)])


def test_generation_transition_switches_to_trial_vectors():
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=6, seed=5), SPACE, 100)
    gen0 = tuner.ask(6)
    assert gen0.generation == 0
    tuner.tell([TellResult(p.id, sphere_genome(p.genome)) for p in gen0.proposals])
    gen1 = tuner.ask(6)
    assert gen1.generation == 1
    assert all(p.parent_idx is not None and p.control is not None for p in gen1.proposals)


def test_all_failed_generation_keeps_population_and_state():
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=5, seed=6), SPACE, 100)
    gen0 = tuner.ask(5)
    tuner.tell([TellResult(p.id, sphere_genome(p.genome)) for p in gen0.proposals])
    pop_before = [ind.genome.copy() for ind in tuner._population]
    adapt_before = tuner._adapt
    gen1 = tuner.ask(5)
    tuner.tell([TellResult(p.id, None, failure="error") for p in gen1.proposals])
    assert all(np.array_equal(a, b.genome) for a, b in zip(pop_before, tuner._population))
    assert tuner._adapt == adapt_before


def test_outstanding_conservation():
    tuner = create_tuner(TunerConfig(kind="shade", pop_size=8, seed=7), SPACE, 64)
    asked = told = 0
    while not tuner.is_exhausted:
        batch = tuner.ask(3)
        asked += len(batch)
        assert tuner.outstanding == asked - told
        results = [TellResult(p.id, sphere_genome(p.genome)) for p in batch.proposals]
        tuner.tell(results)
        told += len(results)
    assert tuner.outstanding == 0


def test_never_mixes_generations_in_flight():
    tuner = create_tuner(TunerConfig(kind="jade", pop_size=6, seed=8), SPACE, 60)
    batch = tuner.ask(4)
    held = batch.proposals
    rest = tuner.ask(4)
    assert len(rest) == 2  # remainder of generation 0, nothing from generation 1
    assert len(tuner.ask(4)) == 0  # blocks until the generation is told
    tuner.tell([TellResult(p.id, 1.0) for p in held + rest.proposals])
    assert tuner.ask(4).generation == 1


# -- best tracking ----------------------------------------------------------------------

def test_best_is_minimum_ever_told():
    tuner = create_tuner(TunerConfig(kind="random", pop_size=4, seed=9), SPACE, 100)
    batch = tuner.ask(3)
    tuner.tell([
        TellResult(batch.proposals[0].id, 5.0),
        TellResult(batch.proposals[1].id, 3.0),
        TellResult(batch.proposals[2].id, 9.0),
    ])
    _, objective = tuner.best()
    assert objective == 3.0


def test_best_without_success_raises():
    tuner = create_tuner(TunerConfig(kind="random", pop_size=4, seed=10), SPACE, 100)
    batch = tuner.ask(2)
    with pytest.raises(NoEvaluationsError):
        tuner.best()
    tuner.tell([TellResult(p.id, None, failure="timeout") for p in batch.proposals])
    with pytest.raises(NoEvaluationsError):
        tuner.best()


def test_best_monotone_and_survives_shrink():
    spec = BenchSpec("sphere", 3)
    ev = genome_evaluator(spec)
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=16, n_min=4, seed=11),
                         bench_space(spec), 400)
    bests = []
    while not tuner.is_exhausted:
        batch = tuner.ask(16)
        if not batch.proposals:
            continue
        tuner.tell([TellResult(p.id, ev(p.genome)) for p in batch.proposals])
        bests.append(tuner.best()[1])
    assert all(a >= b for a, b in zip(bests, bests[1:]))
    assert len(tuner._population) == 4  # LPSR reached its floor
    assert tuner.best()[1] == min(bests)


# -- determinism --------------------------------------------------------------------

@pytest.mark.parametrize("kind", TUNER_KINDS)
def test_seeded_runs_are_bit_identical(kind):
    def run():
        tuner = create_tuner(TunerConfig(kind=kind, pop_size=8, seed=42), SPACE, 80)
        stream = []
        while not tuner.is_exhausted:
            batch = tuner.ask(5)
            if not batch.proposals:
                continue
            stream.extend((p.id, p.genome.tobytes()) for p in batch.proposals)
            tuner.tell([TellResult(p.id, sphere_genome(p.genome)) for p in batch.proposals])
        return stream

    assert run() == run()


def test_lpsr_population_shrinks_for_ljade_only():
    ev = sphere_genome
    for kind, shrinks in [("jade", False), ("ljade", True), ("lshade", True), ("shade", False)]:
        tuner = create_tuner(TunerConfig(kind=kind, pop_size=10, n_min=4, seed=12), SPACE, 200)
        drive(tuner, ev, chunk=50)
        if shrinks:
            assert len(tuner._population) < 10
        else:
            assert len(tuner._population) == 10


def test_halton_init_used_by_ljade():
    tuner = create_tuner(TunerConfig(kind="ljade", pop_size=4, seed=None), SPACE, 10)
    batch = tuner.ask(4)
    first = [p.genome[0] for p in batch.proposals]
    assert first == pytest.approx([0.5, 0.25, 0.75, 0.125])


# -- comparative oracle -----------------------------------------------------------------

def test_ljade_beats_classic_de_on_sphere():
    spec = BenchSpec("sphere", 5)
    space = bench_space(spec)
    ev = genome_evaluator(spec)
    wins = 0
    for seed in range(20):
        _, best_lj, _ = minimize(ev, space, TunerConfig(kind="ljade", seed=seed), 5000)
        _, best_cl, _ = minimize(ev, space, TunerConfig(kind="classic_de", seed=seed), 5000)
        wins += best_lj < best_cl
    assert wins >= 15
