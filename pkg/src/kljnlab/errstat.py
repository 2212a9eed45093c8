"""Bit-error statistics for variance-threshold decisions.

Under either hypothesis the mean square of ``N`` independent zero-mean
Gaussian samples is ``sigma^2 * chi2_N / N``.  With levels ``1`` and ``r``
and the threshold at ``sqrt(r)`` the error probability is

    0.5 * [P(chi2_N > N sqrt(r)) + P(chi2_N < N / sqrt(r))]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np
from scipy.stats import chi2

from kljnlab.kljn import (
    DecodeError,
    Level,
    ResistorPair,
    classify_loop_level,
    exchange_bit,
    party_decode,
    theoretical_levels,
)
from kljnlab.noise import NoiseSpec
from kljnlab.seeding import Seed, chunks, derive, parallel_map, rng
from kljnlab.thermod import AmplifierModel, ChannelModel, calibrate, decide_mean_squares, transmit_batch

SYSTEMS = ("kljn", "thermod")
MC_CHUNK = 8192


@dataclass(frozen=True)
class BerCurvePoint:
    samples_per_bit: int
    ber_analytic: float
    ber_monte_carlo: Optional[float]
    trials: int
    variance_ratio: float

    def __post_init__(self):
        if not 0 <= self.ber_analytic <= 1:
            raise ValueError("ber_analytic out of [0, 1]")
        if (self.ber_monte_carlo is None) != (self.trials == 0):
            raise ValueError("ber_monte_carlo must be present exactly when trials > 0")


def _log_chi2_tail(x: float, k: int, upper: bool) -> float:
    value = chi2.logsf(x, k) if upper else chi2.logcdf(x, k)
    if np.isfinite(value):
        return float(value)
    # scipy underflows for very large k; regularized incomplete gamma in mpmath does not
    with mpmath.workdps(30):
        a, z = mpmath.mpf(k) / 2, mpmath.mpf(x) / 2
        tail = mpmath.gammainc(a, z, mpmath.inf, regularized=True) if upper else mpmath.gammainc(a, 0, z, regularized=True)
        return float(mpmath.log(tail))


def log_analytic_ber(variance_ratio: float, samples: int) -> float:
    """Natural log of :func:`analytic_ber`; finite far below float underflow."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not variance_ratio > 1:
        return math.log(0.5)
    root = math.sqrt(variance_ratio)
    miss_low = _log_chi2_tail(samples * root, samples, upper=True)  # sent 0, decided 1
    miss_high = _log_chi2_tail(samples / root, samples, upper=False)  # sent 1, decided 0
    return float(np.logaddexp(miss_low, miss_high) + math.log(0.5))


def analytic_ber(variance_ratio: float, samples: int) -> float:
    return math.exp(log_analytic_ber(variance_ratio, samples))


def required_samples(variance_ratio: float, target_ber: float) -> int:
    """Smallest N with ``analytic_ber(variance_ratio, N) <= target_ber``."""
    if not variance_ratio > 1:
        raise ValueError("variance_ratio must be > 1")
    if not 0 < target_ber <= 0.5:
        raise ValueError("target_ber must be in (0, 0.5]")
    log_target = math.log(target_ber)

    def ok(n):
        return log_analytic_ber(variance_ratio, n) <= log_target

    hi = 1
    while not ok(hi):
        hi *= 2
    lo = hi // 2  # ok(lo) is False unless hi == 1
    if hi == 1:
        return 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def kljn_level_ratio(pair: ResistorPair) -> float:
    """Smallest ratio between adjacent KLJN wire-voltage levels."""
    a = pair.alpha()
    return min(2 * a / (1 + a), (1 + a) / 2)


def kljn_analytic_error(pair: ResistorPair, samples: int) -> float:
    """Probability that the nearest-level rule misclassifies a uniformly random KLJN bit."""
    spec = NoiseSpec(normalized=True)
    lv = theoretical_levels(pair, spec)
    b1 = math.sqrt(lv[Level.LL] * lv[Level.MIXED])
    b2 = math.sqrt(lv[Level.MIXED] * lv[Level.HH])
    n = samples
    p_ll = chi2.sf(n * b1 / lv[Level.LL], n)
    p_mixed = chi2.cdf(n * b1 / lv[Level.MIXED], n) + chi2.sf(n * b2 / lv[Level.MIXED], n)
    p_hh = chi2.cdf(n * b2 / lv[Level.HH], n)
    return float(0.25 * p_ll + 0.5 * p_mixed + 0.25 * p_hh)


def _kljn_bit_error(i, pair, spec, seed) -> bool:
    rec = exchange_bit(i, pair, spec, seed)
    level = classify_loop_level(rec, pair, spec)
    try:
        bob_seen_by_alice = party_decode(rec.state.alice_choice, level)
        alice_seen_by_bob = party_decode(rec.state.bob_choice, level)
    except DecodeError:
        return True
    return bob_seen_by_alice != rec.state.bob_choice or alice_seen_by_bob != rec.state.alice_choice


def monte_carlo_ber(
    system: str,
    samples: int,
    trials: int,
    seed: Seed,
    pair: ResistorPair = ResistorPair(),
    spec: NoiseSpec = NoiseSpec(),
    amp: AmplifierModel = AmplifierModel(),
    ch: ChannelModel = ChannelModel(),
    workers: int = 1,
) -> BerCurvePoint:
    """Empirical error rate of the legitimate decoder.

    ``kljn``: a trial is a full exchange with random choices; it counts as an
    error if either party fails to decode or decodes the wrong peer bit.
    ``thermod``: a trial is one bit to the intended receiver, run in fixed
    blocks of ``MC_CHUNK`` trials seeded ``seed + (block,)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if system == "kljn":
        spec = spec.with_samples(samples)
        errors = parallel_map(lambda i: _kljn_bit_error(i, pair, spec, seed), range(trials), workers)
        n_err = int(sum(errors))
        return BerCurvePoint(samples, kljn_analytic_error(pair, samples), n_err / trials, trials, kljn_level_ratio(pair))
    if system == "thermod":
        cal = calibrate(pair, spec, amp, ch, "receiver")
        no_eve = ChannelModel(
            ch.gain_to_receiver, 0.0, ch.environment_noise_variance, ch.delay_taps
        )

        def block(item):
            c, start, stop = item
            g = rng(derive(seed, c))
            bits = g.integers(0, 2, size=stop - start)
            rx, _ = transmit_batch(bits, pair, spec, amp, no_eve, g, n_samples=samples)
            ms = np.einsum("ij,ij->i", rx, rx) / samples
            decided, _ = decide_mean_squares(ms, cal)
            return int(np.sum(decided != bits))

        n_err = sum(parallel_map(block, chunks(trials, MC_CHUNK), workers))
        return BerCurvePoint(samples, analytic_ber(cal.ratio, samples), n_err / trials, trials, cal.ratio)
    raise ValueError(f"system must be one of {SYSTEMS}, got {system!r}")


def analytic_point(system: str, samples: int, pair: ResistorPair = ResistorPair(),
                   spec: NoiseSpec = NoiseSpec(), amp: AmplifierModel = AmplifierModel(),
                   ch: ChannelModel = ChannelModel()) -> BerCurvePoint:
    if system == "kljn":
        return BerCurvePoint(samples, kljn_analytic_error(pair, samples), None, 0, kljn_level_ratio(pair))
    if system == "thermod":
        ratio = calibrate(pair, spec, amp, ch, "receiver").ratio
        return BerCurvePoint(samples, analytic_ber(ratio, samples), None, 0, ratio)
    raise ValueError(f"system must be one of {SYSTEMS}, got {system!r}")


def fit_log_affine(samples, bers) -> tuple[float, float, float]:
    """Least-squares fit ``ln(ber) = slope * N + intercept``; returns ``(slope, intercept, r2)``."""
    x = np.asarray(samples, dtype=float)
    y = np.log(np.asarray(bers, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
