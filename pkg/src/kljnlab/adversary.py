"""Passive eavesdroppers on KLJN and TherMod."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kljnlab.kljn import ExchangeRecord, Level, ResistorPair, classify_loop_level, run_exchanges
from kljnlab.noise import NoiseSpec
from kljnlab.seeding import Seed, chunks, derive, parallel_map, rng
from kljnlab.thermod import (
    AmplifierModel,
    ChannelModel,
    calibrate,
    decide_mean_squares,
    expected_levels,
    transmit_batch,
)

EVE_STREAM = 2
THERMOD_CHUNK = 1024


@dataclass(frozen=True)
class EveKljnGuess:
    guessed_alice: int
    guessed_bob: int
    certain: bool


@dataclass(frozen=True)
class AttackSummary:
    bits_attacked: int
    bits_correct: int
    accuracy: float
    certain_fraction: float

    @classmethod
    def from_counts(cls, attacked: int, correct: int, certain: int) -> "AttackSummary":
        if not 0 <= correct <= attacked:
            raise ValueError("bits_correct out of range")
        return cls(attacked, correct, correct / attacked, certain / attacked)

    def std_error(self) -> float:
        p = self.accuracy
        return float(np.sqrt(p * (1 - p) / self.bits_attacked))


def kljn_eve_guess(level: Level, seed: Seed) -> EveKljnGuess:
    """LL and HH are revealed outright; on a mixed level Eve flips a fair coin."""
    if level is Level.LL:
        return EveKljnGuess(0, 0, True)
    if level is Level.HH:
        return EveKljnGuess(1, 1, True)
    if rng(seed).integers(0, 2):
        return EveKljnGuess(1, 0, False)
    return EveKljnGuess(0, 1, False)


def eve_guesses(records: list[ExchangeRecord], pair: ResistorPair, spec: NoiseSpec, seed: Seed) -> list[EveKljnGuess]:
    """Eve's guess for each record of a key run started from ``seed``."""
    return [
        kljn_eve_guess(classify_loop_level(rec, pair, spec), derive(seed, EVE_STREAM, i))
        for i, rec in enumerate(records)
    ]


def score_kljn(records: list[ExchangeRecord], guesses: list[EveKljnGuess]) -> AttackSummary:
    correct = sum(
        g.guessed_alice == int(r.state.alice_choice) and g.guessed_bob == int(r.state.bob_choice)
        for r, g in zip(records, guesses)
    )
    certain = sum(g.certain for g in guesses)
    return AttackSummary.from_counts(len(records), correct, certain)


def run_kljn_key_attack(
    n_bits: int, pair: ResistorPair, spec: NoiseSpec, seed: Seed, workers: int = 1
) -> AttackSummary:
    """Eve observes every exchange of an ``n_bits`` key run and guesses both parties' bits.

    A bit counts as correct only if both of Eve's guesses are right.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    records = run_exchanges(n_bits, pair, spec, seed, workers)
    return score_kljn(records, eve_guesses(records, pair, spec, seed))


@dataclass(frozen=True)
class ThermodLinkResult:
    bits: np.ndarray
    rx_mean_square: np.ndarray
    eve_mean_square: np.ndarray
    rx_decision: np.ndarray
    eve_decision: np.ndarray
    rx_margin: np.ndarray
    eve_margin: np.ndarray

    @property
    def receiver(self) -> AttackSummary:
        n = len(self.bits)
        return AttackSummary.from_counts(n, int(np.sum(self.rx_decision == self.bits)), n)

    @property
    def eavesdropper(self) -> AttackSummary:
        # every TherMod bit is exposed: there is no ambiguous class to hide in
        n = len(self.bits)
        return AttackSummary.from_counts(n, int(np.sum(self.eve_decision == self.bits)), n)


def _eve_decisions(eve_ms, pair, spec, amp, ch, generator):
    low, high = expected_levels(pair, spec, amp, ch, "eavesdropper")
    if not high > low:
        # nothing to calibrate against: Eve can only guess
        return generator.integers(0, 2, size=len(eve_ms)), np.zeros(len(eve_ms))
    return decide_mean_squares(eve_ms, calibrate(pair, spec, amp, ch, "eavesdropper"))


def run_thermod_link(
    n_bits: int,
    pair: ResistorPair,
    spec: NoiseSpec,
    amp: AmplifierModel,
    ch: ChannelModel,
    seed: Seed,
    workers: int = 1,
) -> ThermodLinkResult:
    """Send ``n_bits`` uniform random bits; the receiver and Eve both decide each one.

    Bits are processed in fixed blocks of ``THERMOD_CHUNK``; block ``c`` draws
    from seed path ``seed + (c,)``.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    rx_cal = calibrate(pair, spec, amp, ch, "receiver")

    def block(item):
        c, start, stop = item
        g = rng(derive(seed, c))
        bits = g.integers(0, 2, size=stop - start)
        rx, eve = transmit_batch(bits, pair, spec, amp, ch, g)
        rx_ms = np.einsum("ij,ij->i", rx, rx) / rx.shape[1]
        eve_ms = np.einsum("ij,ij->i", eve, eve) / eve.shape[1]
        rx_bits, rx_margin = decide_mean_squares(rx_ms, rx_cal)
        eve_bits, eve_margin = _eve_decisions(eve_ms, pair, spec, amp, ch, g)
        return bits, rx_ms, eve_ms, rx_bits, eve_bits, rx_margin, eve_margin

    parts = parallel_map(block, chunks(n_bits, THERMOD_CHUNK), workers)
    cols = [np.concatenate(col) for col in zip(*parts)]
    return ThermodLinkResult(*cols)


def run_thermod_intercept(
    n_bits: int,
    pair: ResistorPair,
    spec: NoiseSpec,
    amp: AmplifierModel,
    ch: ChannelModel,
    seed: Seed,
    workers: int = 1,
) -> AttackSummary:
    """Eve calibrates on her own path and thresholds the intercepted variance."""
    return run_thermod_link(n_bits, pair, spec, amp, ch, seed, workers).eavesdropper
