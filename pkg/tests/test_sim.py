from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from growthcodes.fountain import DecoderState, DegreeDistribution, GrowthSchedule, SourceBlock, encode, regenerate
from growthcodes.sim import (
    ChannelModel,
    erase,
    monte_carlo_curve,
    oracle_decode,
    run_trial,
    trial_stream_id,
)


def uniform_code(k):
    return DegreeDistribution(k, tuple([1.0 / k] * k))


def esi_table(code, k):
    """One ESI for every non-empty neighbor subset of ``range(k)``."""
    want = {frozenset(c) for d in range(1, k + 1) for c in combinations(range(k), d)}
    table = {}
    esi = 0
    while len(table) < len(want):
        s = frozenset(regenerate(esi, code, k)[1])
        table.setdefault(s, esi)
        esi += 1
    return table


def naive_peel(k, sets):
    """Literal full-rescan peeling over neighbor sets."""
    known = set()
    pending = [set(s) for s in sets]
    changed = True
    while changed:
        changed = False
        for s in pending:
            rest = s - known
            if len(rest) == 1:
                known |= rest
                changed = True
    return len(known)


def block_for(k):
    return SourceBlock(tuple(bytes([17 * i + 1, i]) for i in range(k)))


@pytest.mark.parametrize("k,length", [(1, 2), (2, 3), (3, 3), (4, 3)])
def test_exhaustive_small_instances(k, length):
    code = uniform_code(k)
    table = esi_table(code, k)
    block = block_for(k)
    subsets = sorted(table, key=lambda s: (len(s), sorted(s)))
    for n in range(1, length + 1):
        for seq in product(subsets, repeat=n):
            packets = [encode(block, code, table[s]) for s in seq]
            sd, ss = DecoderState(k, code, "D"), DecoderState(k, code, "S")
            for p in packets:
                sd.push(p)
                ss.push(p)
                assert ss.n_recovered >= sd.n_recovered
            assert ss.n_recovered == naive_peel(k, seq)
            rank_known = oracle_decode(k, packets, code)
            assert rank_known >= ss.n_recovered
            if ss.complete:
                assert rank_known == k
            for i, v in ss.recovered.items():
                assert v == block.symbols[i]


@given(st.integers(5, 8), st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=24))
def test_random_instances_up_to_k8(k, esis):
    code = uniform_code(k)
    block = block_for(k)
    packets = [encode(block, code, e) for e in esis]
    ss, sd = DecoderState(k, code, "S"), DecoderState(k, code, "D")
    for p in packets:
        ss.push(p)
        sd.push(p)
    sets = [regenerate(e, code, k)[1] for e in esis]
    assert ss.n_recovered == naive_peel(k, sets) >= sd.n_recovered
    assert oracle_decode(k, packets, code) >= ss.n_recovered
    if ss.complete:
        assert ss.symbols() == list(block.symbols)


def test_oracle_rank_example():
    # {0,1}, {1,2}, {0,1,2}: peeling stalls, elimination recovers all three
    k = 3
    code = uniform_code(k)
    table = esi_table(code, k)
    block = block_for(k)
    sets = [frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 1, 2})]
    packets = [encode(block, code, table[s]) for s in sets]
    ss = DecoderState(k, code, "S")
    for p in packets:
        ss.push(p)
    assert ss.n_recovered == 0
    assert oracle_decode(k, packets, code) == 3


def test_oracle_limited_to_small_k():
    with pytest.raises(ValueError):
        oracle_decode(65, [], uniform_code(65))


def test_monte_carlo_is_reproducible_and_worker_independent():
    code = GrowthSchedule(100)
    a, ra = monte_carlo_curve(100, code, [0.5, 1.0], trials=30, seed=4)
    b, _ = monte_carlo_curve(100, code, [0.5, 1.0], trials=30, seed=4, workers=2)
    c, _ = monte_carlo_curve(100, code, [0.5, 1.0], trials=30, seed=5)
    np.testing.assert_array_equal(a.p_d, b.p_d)
    assert not np.array_equal(a.p_d, c.p_d)
    assert ra[0].trials == 30 and ra[0].mode == "S"
    assert a.source == "monte-carlo"


def test_paired_trials_s_dominates_d():
    code = GrowthSchedule(200)
    for t in range(20):
        sid = trial_stream_id(1, t)
        assert run_trial(200, code, 220, sid, "S") >= run_trial(200, code, 220, sid, "D")


def test_monte_carlo_validates():
    with pytest.raises(ValueError):
        monte_carlo_curve(10, GrowthSchedule(10), [1.0], trials=0)
    with pytest.raises(ValueError):
        monte_carlo_curve(10, GrowthSchedule(10), [1.0, 0.5], trials=3)


def test_erasure_channel():
    packets = list(range(20000))
    kept = erase(ChannelModel(0.25, seed=3), packets)
    assert len(kept) / len(packets) == pytest.approx(0.75, abs=0.01)
    assert kept == erase(ChannelModel(0.25, seed=3), packets)
    assert erase(ChannelModel(0.0), packets) == packets
    with pytest.raises(ValueError):
        ChannelModel(1.0)


def test_report_row_matches_header():
    _, reps = monte_carlo_curve(20, GrowthSchedule(20), [1.0], trials=5, seed=0)
    assert len(reps[0].row()) == 8
    assert reps[0].stderr == pytest.approx(reps[0].std_pd / np.sqrt(5))
