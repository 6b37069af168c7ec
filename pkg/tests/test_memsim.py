import json
import math

import numpy as np
import pytest

from entassist.channels import constant_channel, make_depolarizing, standard_mub
from entassist.discrimination import (
    ChannelPair,
    antipodal_qc_pair,
    assisted_distance,
    lemma1_upper,
    lemma2_lower,
    min_d_for_gap,
    qc_pair_from_isometries,
    unassisted_distance,
)
from entassist.entropy import dary_symmetric_capacity
from entassist.memsim import (
    MemoryChannel,
    compare,
    lag1_autocorrelation,
    mutual_information_from_counts,
    simulate_assisted,
    simulate_unassisted,
    step,
)
from entassist.qcore import DimensionError, ket, max_entangled, projector, pure_state, werner_state

ZERO, ONE = projector(ket(0, 2)), projector(ket(1, 2))


def constant_pair(out1=ONE):
    return ChannelPair(constant_channel(2, ZERO), constant_channel(2, out1))


def sic_pair():
    return ChannelPair(*qc_pair_from_isometries(*antipodal_qc_pair()))


def test_step_branches_and_parity():
    rng = np.random.default_rng(0)
    spec = MemoryChannel(constant_pair(), 4)
    spec.i_bit, spec.k_bit = 0, 0
    out = step(spec, pure_state(ket(1, 2)), rng)
    assert np.allclose(out.matrix, ZERO) and spec.k_bit == 1
    mubs = standard_mub(4)
    latch = spec.i_bit
    for k in range(4):
        spec.i_bit, spec.k_bit = latch, 1
        out = step(spec, pure_state(mubs.basis(latch)[:, k]), rng)
        assert np.allclose(out.matrix, projector(ket(k, 4)))
        assert spec.k_bit == 0


def test_two_steps_restore_parity_and_latch_is_redrawn():
    rng = np.random.default_rng(1)
    spec = MemoryChannel(constant_pair(), 2)
    latches = []
    for _ in range(400):
        spec.step(pure_state(ket(0, 2)), rng)
        spec.step(pure_state(ket(0, 2)), rng)
        assert spec.k_bit == 0
        latches.append(spec.i_bit)
    assert 0.4 < np.mean(latches) < 0.6


def test_step_dim_mismatch():
    rng = np.random.default_rng(2)
    spec = MemoryChannel(constant_pair(), 4)
    with pytest.raises(DimensionError):
        spec.step(pure_state(ket(0, 4)), rng)
    spec.step(pure_state(ket(0, 2)), rng)
    with pytest.raises(DimensionError):
        spec.step(pure_state(ket(0, 2)), rng)


def test_mutual_information_from_counts():
    mi, se = mutual_information_from_counts(np.diag([250, 250, 250, 250]))
    assert np.isclose(mi, 2) and se == 0
    mi, _ = mutual_information_from_counts(np.full((4, 4), 10))
    assert np.isclose(mi, 0)


def test_perfect_feedback_reaches_log_d():
    _, est = simulate_assisted(MemoryChannel(constant_pair(), 8), max_entangled(2), 20_000, seed=1)
    assert est.delta_hat == 1
    assert abs(est.empirical_mutual_info - 3) <= 3 * est.mutual_info_stderr + 1e-3
    assert np.allclose(est.confusion, np.eye(8))


def test_indistinguishable_pair_gives_delta_zero_capacity():
    d, n = 8, 100_000
    ch = make_depolarizing(2, 0.3)
    _, est = simulate_assisted(MemoryChannel(ChannelPair(ch, ch), d), max_entangled(2), n, seed=2)
    assert abs(est.empirical_mutual_info - dary_symmetric_capacity(d, 0)) <= 3 * est.mutual_info_stderr
    assert abs(est.delta_hat) <= 3 * est.delta_stderr


def test_guess_rate_matches_assisted_distance():
    d, n = 16, 100_000
    pair = sic_pair()
    rho = werner_state(0.2)
    delta = assisted_distance(pair.m0, pair.m1, rho)
    _, est = simulate_assisted(MemoryChannel(pair, d), rho, n, seed=3)
    p = (1 + delta) / 2 + (1 - delta) / (2 * d)
    p_hat = np.trace(est.counts) / n
    assert abs(p_hat - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_unassisted_guess_rate_at_optimal_probe():
    n = 100_000
    pair = sic_pair()
    res = unassisted_distance(pair.m0, pair.m1, restarts=32)
    trace, est = simulate_unassisted(MemoryChannel(pair, 8), res.probe, n, seed=4)
    p = (1 + res.value) / 2
    assert abs(np.mean(trace.i_true == trace.j_guess) - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert abs(est.delta_hat - res.value) <= 3 * est.delta_stderr


def test_unassisted_identical_channels_guess_half():
    ch = make_depolarizing(2, 0.0)
    trace, _ = simulate_unassisted(MemoryChannel(ChannelPair(ch, ch), 4), ket(0, 2), 50_000, seed=5)
    assert abs(np.mean(trace.i_true == trace.j_guess) - 0.5) <= 3 * 0.5 / math.sqrt(50_000)


@pytest.mark.parametrize("d", [2, 4, 16, 64])
def test_unassisted_rate_below_lemma1(d):
    pair = sic_pair()
    res = unassisted_distance(pair.m0, pair.m1, restarts=32)
    _, est = simulate_unassisted(MemoryChannel(pair, d), res.probe, 20_000, seed=6)
    assert est.per_use <= lemma1_upper(res.value, d, pair.m0.dim_out, 2.0) + 3 * est.per_use_stderr


def test_probe_dim_mismatch():
    with pytest.raises(DimensionError):
        simulate_unassisted(MemoryChannel(sic_pair(), 4), ket(0, 3), 10, seed=0)


def test_trace_layout_and_latch_independence():
    n = 50_000
    trace, est = simulate_assisted(MemoryChannel(sic_pair(), 4), max_entangled(2), n, seed=7)
    rounds = trace.rounds
    assert rounds.shape == (n, 5)
    assert np.array_equal(rounds[:3, 0], [1, 3, 5])
    assert np.array_equal(trace.payload_rounds[:2], [2, 4])
    assert abs(lag1_autocorrelation(trace.i_true)) <= 3 / math.sqrt(n)
    assert np.allclose(est.confusion.sum(axis=1), 1)
    assert est.empirical_mutual_info <= math.log2(4) + 1e-9


def test_lemma2_bound_respected_by_simulation():
    rng_pairs = [(sic_pair(), werner_state(q)) for q in (0.0, 0.2, 0.4)]
    for pair, rho in rng_pairs:
        for d in (4, 16):
            _, est = simulate_assisted(MemoryChannel(pair, d), rho, 30_000, seed=8)
            bound = lemma2_lower(min(max(est.delta_hat, 0.0), 1.0), d).bound_per_symbol
            se = est.mutual_info_stderr + math.log2(d) * est.delta_stderr
            assert bound <= est.empirical_mutual_info + 3 * se


def test_worker_count_does_not_change_results():
    spec = MemoryChannel(sic_pair(), 16)
    t1, e1 = simulate_assisted(spec, werner_state(0.1), 40_000, seed=9, workers=1)
    t4, e4 = simulate_assisted(spec, werner_state(0.1), 40_000, seed=9, workers=4)
    assert np.array_equal(e1.counts, e4.counts)
    assert np.array_equal(t1.rounds, t4.rounds)


def test_compare_flags_advantage_at_min_d():
    pair = sic_pair()
    delta = assisted_distance(pair.m0, pair.m1, max_entangled(2))
    eps = unassisted_distance(pair.m0, pair.m1).value
    d = min_d_for_gap(delta, eps, pair.m0.dim_out, c=0.0)
    assert d == 32
    report = compare(MemoryChannel(pair, d), max_entangled(2), None, 50_000, seed=10, c=0.0, restarts=32)
    doc = report.to_dict()
    assert doc["gap_per_use"] > 0
    assert doc["assisted_advantage"] is True
    for key in ("d", "trials", "seed", "delta_hat", "stderr", "epsilon_hat", "empirical_rate_assisted_per_use",
                "empirical_rate_unassisted_per_use", "lemma1_upper", "lemma2_lower", "assisted_advantage"):
        assert key in doc


def test_compare_no_advantage_for_identical_channels():
    ch = make_depolarizing(2, 0.5)
    report = compare(MemoryChannel(ChannelPair(ch, ch), 8), max_entangled(2), None, 20_000, seed=11, restarts=8)
    assert report.assisted_advantage is False


def test_compare_report_is_reproducible():
    spec = MemoryChannel(sic_pair(), 8)
    a = compare(spec, werner_state(0.2), None, 20_000, seed=12, restarts=16).to_json()
    b = compare(spec, werner_state(0.2), None, 20_000, seed=12, restarts=16).to_json()
    assert a == b
    assert json.loads(a)["seed"] == 12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_payload_table_matches_channel_outputs(d):
    from entassist.channels import make_mub_qc
    from entassist.memsim import payload_table
    mubs = standard_mub(d)
    table = payload_table(mubs)
    for i in range(2):
        ch = make_mub_qc(mubs, i)
        for j in range(2):
            for x in range(d):
                out = ch.apply_matrix(projector(mubs.basis(j)[:, x]))
                assert np.allclose(table[i, j, x], np.diag(out).real)
