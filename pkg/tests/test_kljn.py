import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kljnlab.kljn import (
    BitState,
    Choice,
    DecodeError,
    ExchangeRecord,
    Level,
    ResistorPair,
    classify_loop_level,
    loop_signals,
    party_decode,
    run_bit_exchange,
    run_exchanges,
    theoretical_levels,
)
from kljnlab.noise import NoiseSpec, NoiseTrace, generate_trace, johnson_variance

STATES = [BitState.from_label(s) for s in ("00", "01", "10", "11")]


def trace(values):
    return NoiseTrace(np.asarray(values, dtype=float), 1.0)


def test_pair_invariants():
    assert ResistorPair(1e3, 1e4).alpha() == 10
    for lo, hi in [(1e3, 1e3), (1e4, 1e3), (0.0, 1.0)]:
        with pytest.raises(ValueError):
            ResistorPair(lo, hi)


def test_bit_labels_and_classes():
    assert [s.label for s in STATES] == ["00", "01", "10", "11"]
    assert [s.level for s in STATES] == [Level.LL, Level.MIXED, Level.MIXED, Level.HH]
    assert BitState(Choice.H, Choice.L).label == "10"


def test_zero_sources_give_zero_signals():
    u_w, i_w = loop_signals(trace([0, 0, 0]), trace([0, 0, 0]), 1.0, 2.0)
    assert not u_w.samples.any() and not i_w.samples.any()


def test_symmetric_loop_halves_voltage():
    a = trace([1.0, -2.0, 3.5])
    u_w, i_w = loop_signals(a, trace([0, 0, 0]), 5.0, 5.0)
    np.testing.assert_allclose(u_w.samples, a.samples / 2)
    np.testing.assert_allclose(i_w.samples, a.samples / 10)


def test_length_mismatch():
    with pytest.raises(ValueError):
        loop_signals(trace([1, 2]), trace([1]), 1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    r_a=st.floats(1.0, 1e6),
    r_b=st.floats(1.0, 1e6),
)
def test_swap_negates_current_and_keeps_voltage(seed, r_a, r_b):
    spec = NoiseSpec(normalized=True, samples_per_bit=64)
    u_a = generate_trace(r_a, spec, (seed, 0))
    u_b = generate_trace(r_b, spec, (seed, 1))
    u1, i1 = loop_signals(u_a, u_b, r_a, r_b)
    u2, i2 = loop_signals(u_b, u_a, r_b, r_a)
    np.testing.assert_allclose(u1.samples, u2.samples, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(i1.samples, -i2.samples)


@pytest.mark.parametrize("r_a,r_b", [(1e3, 1e3), (1e3, 1e4), (1e4, 1e4), (3e3, 7e2)])
def test_loop_variance_propagation(r_a, r_b):
    # oracle: propagate independent source variances 4kTB*r through the linear forms
    spec = NoiseSpec(normalized=True)
    n = 400_000
    va, vb = johnson_variance(r_a, spec), johnson_variance(r_b, spec)
    s = r_a + r_b
    var_u = (r_b / s) ** 2 * va + (r_a / s) ** 2 * vb
    var_i = (va + vb) / s**2
    assert var_u == pytest.approx(r_a * r_b / s)
    assert var_i == pytest.approx(1 / s)
    u_w, i_w = loop_signals(
        generate_trace(r_a, spec, 1, n_samples=n), generate_trace(r_b, spec, 2, n_samples=n), r_a, r_b
    )
    assert abs(u_w.mean_square() - var_u) < 5 * var_u * math.sqrt(2 / n)
    assert abs(i_w.mean_square() - var_i) < 5 * var_i * math.sqrt(2 / n)
    # the ratio of the two statistics estimates the resistance product
    assert u_w.mean_square() / i_w.mean_square() == pytest.approx(r_a * r_b, rel=0.03)


def test_ll_exchange_matches_parallel_resistance(pair):
    spec = NoiseSpec(samples_per_bit=100_000)
    rec = run_bit_exchange(pair, spec, BitState(Choice.L, Choice.L), 5)
    assert rec.samples_used == 100_000
    assert rec.u_w_mean_square == pytest.approx(spec.prefactor * 500.0, rel=0.05)


def test_mixed_states_share_theoretical_statistics(pair, spec):
    hl, lh = BitState(Choice.H, Choice.L), BitState(Choice.L, Choice.H)
    k = spec.prefactor

    def theory(state):
        r_a, r_b = pair.resistance(state.alice_choice), pair.resistance(state.bob_choice)
        return k * r_a * r_b / (r_a + r_b), k / (r_a + r_b)

    assert theory(hl) == pytest.approx(theory(lh), rel=1e-15)


def test_exchange_is_deterministic_and_non_negative(pair, spec):
    for state in STATES:
        a = run_bit_exchange(pair, spec, state, (9, 1))
        b = run_bit_exchange(pair, spec, state, (9, 1))
        assert a == b
        assert a.u_w_mean_square >= 0 and a.i_w_mean_square >= 0


def test_classify_exact_levels(pair, spec):
    levels = theoretical_levels(pair, spec)
    for level, v in levels.items():
        rec = ExchangeRecord(STATES[0], v, 0.0, 10)
        assert classify_loop_level(rec, pair, spec) is level
    cur = theoretical_levels(pair, spec, "current")
    for level, v in cur.items():
        rec = ExchangeRecord(STATES[0], 0.0, v, 10)
        assert classify_loop_level(rec, pair, spec, statistic="current") is level


def test_classify_tie_goes_to_mixed(pair, spec):
    lv = theoretical_levels(pair, spec)
    boundary = math.sqrt(lv[Level.LL] * lv[Level.MIXED])
    rec = ExchangeRecord(STATES[0], boundary, 0.0, 10)
    assert classify_loop_level(rec, pair, spec) is Level.MIXED


def test_classify_zero_is_lowest_level(pair, spec):
    assert classify_loop_level(ExchangeRecord(STATES[0], 0.0, 0.0, 10), pair, spec) is Level.LL


def test_party_decode_examples():
    assert party_decode(Choice.H, Level.MIXED) is Choice.L
    assert party_decode(Choice.L, Level.MIXED) is Choice.H
    assert party_decode(Choice.L, Level.LL) is Choice.L
    assert party_decode(Choice.H, Level.HH) is Choice.H
    with pytest.raises(DecodeError):
        party_decode(Choice.L, Level.HH)
    with pytest.raises(DecodeError):
        party_decode(Choice.H, Level.LL)


def test_misclassification_rate_and_loop_back(pair):
    spec = NoiseSpec(samples_per_bit=10_000)
    records = run_exchanges(10_000, pair, spec, 11)
    wrong = 0
    alice_view, bob_view = [], []
    for rec in records:
        level = classify_loop_level(rec, pair, spec)
        wrong += level is not rec.state.level
        alice_view.append(party_decode(rec.state.alice_choice, level))
        bob_view.append(party_decode(rec.state.bob_choice, level))
    assert wrong / len(records) < 1e-3
    assert alice_view == [r.state.bob_choice for r in records]
    assert bob_view == [r.state.alice_choice for r in records]


def test_current_statistic_classifies_like_voltage(pair):
    spec = NoiseSpec(samples_per_bit=10_000)
    for rec in run_exchanges(300, pair, spec, 12):
        assert classify_loop_level(rec, pair, spec, "current") is classify_loop_level(rec, pair, spec)


def test_run_exchanges_independent_of_workers(pair):
    spec = NoiseSpec(samples_per_bit=500)
    assert run_exchanges(50, pair, spec, 4, workers=1) == run_exchanges(50, pair, spec, 4, workers=3)
