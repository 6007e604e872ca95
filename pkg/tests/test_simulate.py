import io
import math

import numpy as np
import pytest
from scipy import stats

from memory_consensus import (
    MemoryParams,
    NeighbourSampler,
    RngSpec,
    RunRecord,
    build_memory_graph,
    cycle,
    initial_state,
    is_stable_consensus,
    random_colours,
    records_from_csv,
    records_to_csv,
    run_batch,
    run_process,
    splitmix64,
    stack_history,
    stationary_distribution,
    step_memory,
    uniform_digraph,
    winprob_memory,
)
from conftest import random_strongly_connected

M0 = MemoryParams((1.0,))


def test_splitmix64_reference_vectors():
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(1) == 0x910A2DEC89025CC1


def test_rngspec_rejects_unknown_algorithm():
    with pytest.raises(ValueError, match="unsupported"):
        RngSpec(1, algorithm="mt19937")


def test_run_record_invariant():
    with pytest.raises(ValueError):
        RunRecord(winner=1, rounds=None, seed=0)
    with pytest.raises(ValueError):
        RunRecord(winner=None, rounds=10, seed=0)


# --- sampler -----------------------------------------------------------------


def test_alias_sampler_matches_weights(fig1):
    # tally node 1's neighbour choice: 1/4 node 0, 3/4 node 2
    sampler = NeighbourSampler(fig1)
    rng = np.random.default_rng(0)
    trials = 20_000
    picks = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        picks[i] = sampler.sample(rng)[1]
    freq = (picks == 0).mean()
    sigma = math.sqrt(0.25 * 0.75 / trials)
    assert abs(freq - 0.25) < 4 * sigma
    assert set(np.unique(picks)) == {0, 2}


# --- stepping ----------------------------------------------------------------


def test_two_cycle_step_is_deterministic():
    g = uniform_digraph(2, [[1], [0]])
    state = initial_state((1, 0), m=0, n=2)
    rng = np.random.default_rng(123)
    nxt = step_memory(g, M0, state, rng)
    assert nxt.current().tolist() == [0, 1]
    assert nxt.round == 1
    again = step_memory(g, M0, nxt, rng)
    assert again.current().tolist() == [1, 0]


def test_one_step_neighbour_frequencies(fig1):
    # node 1 copies node 0 w.p. 1/4 and node 2 w.p. 3/4; identity colours
    # reveal the choice
    state = initial_state((0, 1, 2), m=0, n=3)
    rng = np.random.default_rng(7)
    trials = 100_000
    copied_v0 = 0
    for _ in range(trials):
        nxt = step_memory(fig1, M0, state, rng)
        if nxt.current()[1] == 0:
            copied_v0 += 1
    freq = copied_v0 / trials
    sigma = math.sqrt(0.25 * 0.75 / trials)
    assert abs(freq - 0.25) < 3 * sigma


def test_memory_step_reads_past_layer():
    # two nodes copying each other, m=1 with p1 ~ 1: nodes mostly copy the
    # previous round, so from history (old=(0,1), new=(1,0)) colours often
    # come from the old layer
    g = uniform_digraph(2, [[1], [0]])
    p = MemoryParams((0.01, 0.99))
    state = initial_state([(0, 1), (1, 0)], m=1, n=2)
    rng = np.random.default_rng(5)
    from_past = 0
    trials = 2000
    for _ in range(trials):
        nxt = step_memory(g, p, state, rng)
        # copying the past layer gives node 0 colour 1 (other node, old row)
        if nxt.current()[0] == 1:
            from_past += 1
    assert from_past / trials > 0.95


def test_step_requires_matching_m(fig1):
    state = initial_state((0, 0, 1), m=0, n=3)
    with pytest.raises(ValueError, match="m = 1"):
        step_memory(fig1, MemoryParams((0.5, 0.5)), state, np.random.default_rng(0))


# --- stable consensus ---------------------------------------------------------


def test_stable_consensus_all_layers_red():
    state = initial_state([(1, 1, 1)] * 3, m=2, n=3)
    assert is_stable_consensus(state) == 1


def test_no_consensus_with_mixed_past():
    state = initial_state([(1, 0, 1), (1, 1, 1)], m=1, n=3)
    assert is_stable_consensus(state) is None


def test_consensus_m0_current_only():
    state = initial_state((0, 0, 0), m=0, n=3)
    assert is_stable_consensus(state) == 0


def test_consensus_is_absorbing(fig1):
    p = MemoryParams((0.6, 0.4))
    state = initial_state((1, 1, 1), m=1, n=3)
    rng = np.random.default_rng(11)
    for _ in range(50):
        state = step_memory(fig1, p, state, rng)
        assert is_stable_consensus(state) == 1


# --- run_process ----------------------------------------------------------------


def test_monochromatic_start_zero_rounds(fig1):
    rec = run_process(fig1, M0, (1, 1, 1), cap=10, rng=99)
    assert rec == RunRecord(winner=1, rounds=0, seed=99)


def test_cap_exceeded_is_value_not_error():
    g = cycle(4)
    rec = run_process(g, M0, (1, 0, 1, 0), cap=50, rng=1)
    assert rec.winner is None and rec.rounds is None


def test_rejects_nonpositive_cap(fig1):
    with pytest.raises(ValueError, match="cap"):
        run_process(fig1, M0, (0, 0, 1), cap=0, rng=1)


def test_memory_run_accepts_history_stack(fig1):
    p = MemoryParams((0.9, 0.1))
    rec = run_process(fig1, p, [(0, 0, 1), (1, 0, 0)], cap=10**6, rng=5)
    assert rec.winner in (0, 1)


# --- determinism and batches -----------------------------------------------------


def test_run_batch_deterministic(fig1):
    spec = RngSpec(2024)
    a = run_batch(fig1, M0, (0, 0, 1), 50, 10**6, spec)
    b = run_batch(fig1, M0, (0, 0, 1), 50, 10**6, spec)
    assert a == b


def test_run_batch_single_run_equals_run_process(fig1):
    spec = RngSpec(77)
    batch = run_batch(fig1, M0, (0, 0, 1), 1, 10**6, spec)
    solo = run_process(fig1, M0, (0, 0, 1), 10**6, rng=spec.run_seed(0))
    assert batch == [solo]


def test_run_batch_parallel_equals_sequential(fig1):
    spec = RngSpec(31337)
    sequential = run_batch(fig1, MemoryParams((0.8, 0.2)), random_colours(3), 40, 10**6, spec)
    parallel = run_batch(
        fig1, MemoryParams((0.8, 0.2)), random_colours(3), 40, 10**6, spec, workers=3
    )
    assert sequential == parallel


def test_batch_rejects_zero_runs(fig1):
    with pytest.raises(ValueError, match="runs"):
        run_batch(fig1, M0, (0, 0, 1), 0, 10, RngSpec(1))


# --- statistical agreement with the exact formulas --------------------------------


def test_fig1_win_frequency_matches_influences(fig1):
    runs = 20_000
    records = run_batch(fig1, M0, (0, 0, 1), runs, 10**6, RngSpec(4242))
    red = sum(1 for r in records if r.winner == 1) / runs
    expected = 9 / 14
    sigma = math.sqrt(expected * (1 - expected) / runs)
    assert abs(red - expected) < 3 * sigma


def test_memory_win_frequency_matches_formula():
    rng = np.random.default_rng(97)
    g = random_strongly_connected(rng, 4, loop_prob=0.5)
    p = MemoryParams((0.7, 0.3))
    history = [(0, 1, 1, 0), (1, 0, 1, 0)]
    expected = winprob_memory(g, stationary_distribution(g), p, history, colours=(0, 1))
    runs = 20_000
    records = run_batch(g, p, history, runs, 10**6, RngSpec(55))
    for c in (0, 1):
        freq = sum(1 for r in records if r.winner == c) / runs
        sigma = math.sqrt(float(expected[c]) * (1 - float(expected[c])) / runs)
        assert abs(freq - float(expected[c])) < 3 * sigma


def test_memory_process_equivalent_to_layered_memoryless(fig1):
    # chi-square two-sample test on winner distributions: 1-memory on G vs
    # memoryless on the layered graph from the stacked start
    p = MemoryParams((0.6, 0.4))
    history = [(0, 0, 1), (1, 0, 1)]
    runs = 5000
    mem = run_batch(fig1, p, history, runs, 10**6, RngSpec(11))
    layered = build_memory_graph(fig1, p).base
    stacked = stack_history(history, 3)
    less = run_batch(layered, M0, stacked, runs, 10**6, RngSpec(12))
    table = [
        [sum(1 for r in recs if r.winner == c) for c in (0, 1)]
        for recs in (mem, less)
    ]
    _, pvalue, _, _ = stats.chi2_contingency(table)
    assert pvalue > 0.01


def test_cap_exceeded_frequency_shrinks_with_cap():
    g = cycle(25)
    p = MemoryParams((0.5, 0.5))
    freqs = []
    for cap in (10**3, 10**4, 10**5):
        records = run_batch(g, p, random_colours(25), 150, cap, RngSpec(321))
        freqs.append(sum(1 for r in records if r.rounds is None) / len(records))
    assert freqs[0] >= freqs[1] >= freqs[2]
    assert freqs[2] == 0.0


# --- CSV -------------------------------------------------------------------------


def test_records_csv_roundtrip(fig1):
    records = run_batch(fig1, M0, (0, 0, 1), 10, 10**6, RngSpec(1))
    records.append(RunRecord(winner=None, rounds=None, seed=7))
    buf = io.StringIO()
    records_to_csv(records, buf)
    buf.seek(0)
    assert records_from_csv(buf) == records
