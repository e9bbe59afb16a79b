import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solvertune import de
from solvertune.de import (
    AdaptState,
    Individual,
    ShadeMemory,
    SizeSchedule,
    crossover_binomial,
    lpsr_size,
    mutate_rand1,
    mutate_rand_to_pbest1,
    repair_bounds,
    sample_CR,
    sample_F,
    select,
    shrink_population,
    update_adaptation,
)
from solvertune.errors import (
    LengthMismatchError,
    PopulationTooSmallError,
    UnevaluatedError,
)


def pop_of(*rows, fitness=None):
    genomes = [np.array(r, dtype=float) for r in rows]
    fits = fitness if fitness is not None else [0.0] * len(genomes)
    return [Individual(genome=g, fitness=f) for g, f in zip(genomes, fits)]


# -- mutation --------------------------------------------------------------------

def test_rand1_direct_substitution():
    pop = pop_of((0, 0), (1, 0), (0, 1), (0.5, 0.5))
    rng = np.random.default_rng(0)
    # force a=0, b=1, c=2 by searching a seed-free construction: evaluate formula directly
    v = pop[1].genome + 0.5 * (pop[2].genome - pop[3].genome)
    assert v == pytest.approx([0.75, 0.25])
    # the op draws indices itself; with F=0 the donor equals some population member
    donor = mutate_rand1(pop, 0, 0.0, rng)
    assert any(np.array_equal(donor, ind.genome) for ind in pop[1:] + pop[:1])


def test_rand1_formula_with_stub_rng():
    class StubRng:
        def __init__(self, seq):
            self.seq = list(seq)

        def integers(self, n, size=None):
            v = self.seq.pop(0)
            return np.array([v]) if size else v

    pop = pop_of((0, 0), (1, 0), (0, 1), (0.9, 0.9))
    v = mutate_rand1(pop, 3, 0.5, StubRng([0, 1, 2]))
    assert v == pytest.approx([0.5, -0.5])


def test_rand1_population_too_small():
    with pytest.raises(PopulationTooSmallError):
        mutate_rand1(pop_of((0,), (1,), (0.5,)), 0, 0.5, np.random.default_rng(0))


def test_rand_to_pbest1_formula_with_stub_rng():
    class StubRng:
        def __init__(self, seq):
            self.seq = list(seq)

        def integers(self, n, size=None):
            return self.seq.pop(0)

    # fitness makes index 1 the sole pool member (p small -> pool floor of 1)
    pop = pop_of((0, 0), (1, 1), (1, 0), (0, 1), (0.2, 0.2),
                 fitness=[5.0, 1.0, 2.0, 3.0, 4.0])
    # draws: g_p pool pick (only one entry), then a=0, b=2, c=3
    v = mutate_rand_to_pbest1(pop, 4, 0.01, 0.5, StubRng([0, 0, 2, 3]))
    # a=(0,0), g_p=(1,1), b=(1,0), c=(0,1): a + F(g_p - a) + F(b - c) = (1.0, 0.0)
    assert v == pytest.approx([1.0, 0.0])


def test_rand_to_pbest1_zero_F_returns_a():
    pop = pop_of((0.1, 0.1), (0.4, 0.4), (0.6, 0.6), (0.9, 0.9),
                 fitness=[1, 2, 3, 4])
    rng = np.random.default_rng(5)
    v = mutate_rand_to_pbest1(pop, 0, 0.5, 0.0, rng)
    assert any(np.array_equal(v, ind.genome) for ind in pop[1:])


def test_rand_to_pbest1_requires_fitness():
    pop = pop_of((0, 0), (1, 0), (0, 1), (1, 1))
    pop[2].fitness = None
    with pytest.raises(UnevaluatedError):
        mutate_rand_to_pbest1(pop, 0, 0.1, 0.5, np.random.default_rng(0))


def test_pbest_pool_floor_is_best_individual():
    pop = pop_of((0,), (1,), (0.5,), (0.2,), fitness=[3.0, 1.0, 2.0, 4.0])
    assert de.pbest_pool(pop, 0.01) == [1]
    # excluding the sole member falls back to the next-best index
    assert de.pbest_pool(pop, 0.01, exclude=1) == [2]


# -- repair / crossover ------------------------------------------------------------

def test_repair_halfway_rule():
    out = repair_bounds(np.array([0.5, -0.5]), np.array([0.9, 0.3]))
    assert out == pytest.approx([0.5, 0.15])
    out = repair_bounds(np.array([1.2]), np.array([0.8]))
    assert out == pytest.approx([0.9])


def test_repair_identity_inside_cube():
    v = np.array([0.2, 0.8, 1.0, 0.0])
    assert np.array_equal(repair_bounds(v, np.full(4, 0.5)), v)


def test_crossover_extremes():
    rng = np.random.default_rng(1)
    target, donor = np.array([0.0, 0.0, 0.0]), np.array([1.0, 1.0, 1.0])
    assert np.array_equal(crossover_binomial(target, donor, 1.0, rng), donor)
    for _ in range(20):
        trial = crossover_binomial(target, donor, 0.0, rng)
        assert int(np.sum(trial == 1.0)) == 1  # exactly the forced coordinate


def test_crossover_dim1_always_donor():
    rng = np.random.default_rng(2)
    for cr in (0.0, 0.3, 1.0):
        out = crossover_binomial(np.array([0.2]), np.array([0.7]), cr, rng)
        assert out[0] == 0.7


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_crossover_always_inherits_donor_coordinate(dim):
    target = np.zeros(dim)
    donor = np.ones(dim)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        for cr in (0.0, 0.25, 0.5, 0.75, 1.0):
            trial = crossover_binomial(target, donor, cr, rng)
            assert np.any(trial == 1.0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
@settings(max_examples=150)
def test_mutate_repair_crossover_stays_in_cube(seed, dim):
    rng = np.random.default_rng(seed)
    pop = [Individual(genome=rng.uniform(size=dim), fitness=float(i))
           for i in range(6)]
    F = float(rng.uniform(0.01, 1.0))
    CR = float(rng.uniform())
    donor = mutate_rand_to_pbest1(pop, 0, 0.3, F, rng)
    repaired = repair_bounds(donor, pop[0].genome)
    trial = crossover_binomial(pop[0].genome, repaired, CR, rng)
    assert np.all(trial >= 0.0) and np.all(trial <= 1.0)


def test_batch_children_stay_in_cube():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n, dim = 8, 5
        genomes = rng.uniform(-0.0, 1.0, size=(n, dim))
        fitness = rng.uniform(size=n)
        F = rng.uniform(0.01, 1.0, size=n)
        CR = rng.uniform(size=n)
        kids = de.make_children_rand_to_pbest1(genomes, fitness, n, 0.2, F, CR, rng)
        assert kids.shape == (n, dim)
        assert np.all(kids >= 0.0) and np.all(kids <= 1.0)
        kids = de.make_children_rand1(genomes, n, F, CR, rng)
        assert np.all(kids >= 0.0) and np.all(kids <= 1.0)


def test_batch_distinct_indices():
    rng = np.random.default_rng(3)
    a, b, c = de.distinct_indices_batch(6, 6, rng)
    rows = np.arange(6)
    assert np.all(a != rows) and np.all(b != rows) and np.all(c != rows)
    assert np.all(a != b) and np.all(b != c) and np.all(a != c)


def test_batch_pbest_never_self():
    rng = np.random.default_rng(4)
    fitness = np.arange(8.0)
    for _ in range(50):
        picks = de.pbest_indices_batch(fitness, 0.25, 8, rng)
        assert np.all(picks != np.arange(8))
        assert np.all(picks <= 2)  # pool is the top round(0.25*8)=2, plus exclusion overflow


# -- selection ---------------------------------------------------------------------

def test_select_cases():
    g = np.zeros(1)
    winner, improved, delta = select(Individual(g, 5.0), Individual(g, 3.0))
    assert winner.fitness == 3.0 and improved and delta == 2.0
    winner, improved, delta = select(Individual(g, 4.0), Individual(g, 4.0))
    assert winner.fitness == 4.0 and not improved and delta == 0.0
    winner, improved, delta = select(Individual(g, 4.0), Individual(g, math.inf))
    assert winner.fitness == 4.0 and not improved and delta == 0.0


def test_select_tie_prefers_child():
    parent = Individual(np.array([0.1]), 4.0)
    child = Individual(np.array([0.9]), 4.0)
    winner, improved, _ = select(parent, child)
    assert winner is child and not improved


def test_select_requires_evaluated():
    with pytest.raises(UnevaluatedError):
        select(Individual(np.zeros(1), None), Individual(np.zeros(1), 1.0))


def test_select_double_infinity_has_zero_delta():
    winner, improved, delta = select(Individual(np.zeros(1), math.inf),
                                     Individual(np.ones(1), math.inf))
    assert winner.fitness == math.inf and not improved and delta == 0.0


# -- control parameter sampling -------------------------------------------------------

def test_sample_F_range_and_median():
    rng = np.random.default_rng(100)
    state = AdaptState(mu_F=0.5)
    draws = np.array([sample_F(state, rng) for _ in range(100_000)])
    assert np.all(draws > 0.0) and np.all(draws <= 1.0)
    assert 0.47 <= np.median(draws) <= 0.53  # Cauchy median sits at the location


def test_sample_F_truncation_mass_at_one():
    rng = np.random.default_rng(101)
    state = AdaptState(mu_F=0.9)
    draws = np.array([sample_F(state, rng) for _ in range(20_000)])
    assert np.mean(draws == 1.0) > 0.0


def test_sample_CR_clipped_means():
    rng = np.random.default_rng(102)
    lo = np.array([sample_CR(AdaptState(mu_CR=0.0), rng) for _ in range(100_000)])
    assert np.all(lo >= 0.0) and np.all(lo <= 1.0)
    assert 0.02 <= lo.mean() <= 0.06  # clipped-normal oracle: sigma/sqrt(2*pi)
    mid = np.array([sample_CR(AdaptState(mu_CR=0.5), rng) for _ in range(100_000)])
    assert abs(mid.mean() - 0.5) <= 0.01


def test_batch_control_sampling_ranges():
    rng = np.random.default_rng(103)
    F, CR = de.sample_control_batch(AdaptState(), 10_000, rng)
    assert np.all(F > 0.0) and np.all(F <= 1.0)
    assert np.all(CR >= 0.0) and np.all(CR <= 1.0)
    F, CR = de.sample_control_batch(AdaptState(shade_memory=ShadeMemory.fresh()), 10_000, rng)
    assert np.all(F > 0.0) and np.all(F <= 1.0)
    assert np.all(CR >= 0.0) and np.all(CR <= 1.0)


# -- adaptation ---------------------------------------------------------------------

def test_update_adaptation_hand_arithmetic():
    state = AdaptState(mu_F=0.5, mu_CR=0.5, c=0.1)
    new = update_adaptation(state, [0.2, 0.8], [0.5, 0.5], [1.0, 1.0])
    # lehmer(0.2, 0.8) = (0.04 + 0.64) / 1.0 = 0.68 -> 0.9*0.5 + 0.1*0.68
    assert new.mu_F == pytest.approx(0.518)


def test_update_adaptation_empty_is_noop():
    state = AdaptState(mu_F=0.37, mu_CR=0.21)
    assert update_adaptation(state, [], [], []) == state


def test_update_adaptation_fixed_point():
    state = AdaptState(mu_F=0.5, mu_CR=0.5)
    new = update_adaptation(state, [0.5, 0.5], [0.5, 0.5], [1.0, 2.0])
    assert new.mu_F == pytest.approx(0.5)
    assert new.mu_CR == pytest.approx(0.5)


def test_update_adaptation_length_mismatch():
    with pytest.raises(LengthMismatchError):
        update_adaptation(AdaptState(), [0.5], [], [1.0])


def test_update_adaptation_power_mean_exceeds_arithmetic():
    s_cr = [0.1, 0.9]
    power = update_adaptation(AdaptState(cr_mean="power"), [0.5, 0.5], s_cr, [1, 1])
    arith = update_adaptation(AdaptState(cr_mean="arithmetic"), [0.5, 0.5], s_cr, [1, 1])
    assert power.mu_CR > arith.mu_CR  # the bias correction pushes CR upward


def test_shade_memory_write_and_cycle():
    state = AdaptState(shade_memory=ShadeMemory.fresh(size=3))
    new = update_adaptation(state, [0.4], [0.8], [2.0])
    assert new.shade_memory.m_F[0] == pytest.approx(0.4)
    assert new.shade_memory.m_CR[0] == pytest.approx(0.8)
    assert new.shade_memory.k == 1
    assert new.mu_F == state.mu_F  # memory variant leaves the means alone
    for _ in range(3):
        new = update_adaptation(new, [0.4], [0.8], [2.0])
    assert new.shade_memory.k == 1  # wrapped around


def test_shade_weighted_means_follow_deltas():
    state = AdaptState(shade_memory=ShadeMemory.fresh(size=2))
    # second success dominates the weight: delta 9 vs 1
    new = update_adaptation(state, [0.2, 0.8], [0.0, 1.0], [1.0, 9.0])
    w = np.array([0.1, 0.9])
    f = np.array([0.2, 0.8])
    expected_F = np.sum(w * f ** 2) / np.sum(w * f)
    assert new.shade_memory.m_F[0] == pytest.approx(expected_F)
    assert new.shade_memory.m_CR[0] == pytest.approx(0.9)


def test_infinite_delta_dominates_weights():
    w = de._success_weights(np.array([1.0, math.inf, 2.0]))
    assert w == pytest.approx([0.0, 1.0, 0.0])


@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1e6)),
                min_size=0, max_size=30))
@settings(max_examples=100)
def test_adaptation_stays_in_legal_ranges(successes):
    state = AdaptState()
    shade = AdaptState(shade_memory=ShadeMemory.fresh())
    s_f = [s[0] for s in successes]
    s_cr = [s[1] for s in successes]
    deltas = [s[2] for s in successes]
    for _ in range(5):
        state = update_adaptation(state, s_f, s_cr, deltas)
        shade = update_adaptation(shade, s_f, s_cr, deltas)
        assert 0.0 < state.mu_F <= 1.0
        assert 0.0 <= state.mu_CR <= 1.0
        assert all(0.0 <= m <= 1.0 for m in shade.shade_memory.m_F)
        assert all(0.0 <= m <= 1.0 for m in shade.shade_memory.m_CR)


# -- population size ------------------------------------------------------------------

def test_lpsr_endpoints_and_midpoint():
    sched = SizeSchedule(n_init=75, n_min=4, max_nfe=1000)
    assert lpsr_size(sched, 0) == 75
    assert lpsr_size(sched, 1000) == 4
    assert lpsr_size(sched, 500) == 40  # 39.5 rounds half away from zero


def test_lpsr_monotone_non_increasing():
    sched = SizeSchedule(n_init=75, n_min=4, max_nfe=5000)
    sizes = [lpsr_size(sched, nfe) for nfe in range(0, 5001, 37)]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    assert sizes[0] == 75 and sizes[-1] == 4


def test_size_schedule_validation():
    with pytest.raises(ValueError):
        SizeSchedule(n_init=4, n_min=8, max_nfe=100)
    with pytest.raises(ValueError):
        SizeSchedule(n_init=10, n_min=4, max_nfe=5)


def test_shrink_removes_worst_keeps_order():
    pop = pop_of((0.1,), (0.2,), (0.3,), (0.4,), fitness=[1.0, 9.0, 3.0, 7.0])
    kept = shrink_population(pop, 2)
    assert [ind.fitness for ind in kept] == [1.0, 3.0]
    assert shrink_population(pop, 4) == pop


def test_shrink_tie_at_cut_keeps_lower_index():
    pop = pop_of((0.1,), (0.2,), (0.3,), fitness=[2.0, 5.0, 5.0])
    kept = shrink_population(pop, 2)
    assert kept[1] is pop[1]


def test_shrink_requires_fitness():
    pop = pop_of((0.1,), (0.2,))
    pop[0].fitness = None
    with pytest.raises(UnevaluatedError):
        shrink_population(pop, 1)
