"""Wired KLJN loop: resistor choices, Kirchhoff loop signals and bit decoding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from kljnlab.noise import NoiseSpec, NoiseTrace, generate_trace
from kljnlab.seeding import Seed, derive, parallel_map
from kljnlab.seeding import rng as _rng

ALICE_SOURCE = 0
BOB_SOURCE = 1


class Choice(enum.IntEnum):
    """Resistor choice; the integer value is the key bit (L -> 0, H -> 1)."""

    L = 0
    H = 1

    @property
    def other(self) -> "Choice":
        return Choice(1 - self)


class Level(enum.Enum):
    LL = "LL"
    MIXED = "MIXED"
    HH = "HH"

    @property
    def secure(self) -> bool:
        return self is Level.MIXED


class DecodeError(ValueError):
    """Own choice is inconsistent with the observed loop level; the bit must be discarded."""


@dataclass(frozen=True)
class ResistorPair:
    r_low: float = 1e3
    r_high: float = 1e4

    def __post_init__(self):
        if not (self.r_high > self.r_low > 0):
            raise ValueError(f"need r_high > r_low > 0, got r_low={self.r_low}, r_high={self.r_high}")

    def alpha(self) -> float:
        return self.r_high / self.r_low

    def resistance(self, choice: Choice) -> float:
        return self.r_high if choice == Choice.H else self.r_low


@dataclass(frozen=True)
class BitState:
    alice_choice: Choice
    bob_choice: Choice

    def __post_init__(self):
        object.__setattr__(self, "alice_choice", Choice(self.alice_choice))
        object.__setattr__(self, "bob_choice", Choice(self.bob_choice))

    @property
    def level(self) -> Level:
        if self.alice_choice != self.bob_choice:
            return Level.MIXED
        return Level.HH if self.alice_choice == Choice.H else Level.LL

    @property
    def label(self) -> str:
        return f"{int(self.alice_choice)}{int(self.bob_choice)}"

    @classmethod
    def from_label(cls, label: str) -> "BitState":
        if len(label) != 2 or set(label) - {"0", "1"}:
            raise ValueError(f"bad bit-state label {label!r}")
        return cls(Choice(int(label[0])), Choice(int(label[1])))


@dataclass(frozen=True)
class ExchangeRecord:
    state: BitState
    u_w_mean_square: float
    i_w_mean_square: float
    samples_used: int


def loop_signals(u_a: NoiseTrace, u_b: NoiseTrace, r_a: float, r_b: float) -> tuple[NoiseTrace, NoiseTrace]:
    """Wire voltage and current of the two-resistor loop.

    Current flows from Alice to Bob.  Returns ``(u_w, i_w)``.
    """
    if len(u_a) != len(u_b):
        raise ValueError(f"trace length mismatch: {len(u_a)} vs {len(u_b)}")
    total = r_a + r_b
    if not total > 0:
        raise ValueError("r_a + r_b must be positive")
    a, b = u_a.samples, u_b.samples
    i_w = (a - b) / total
    u_w = (a * r_b + b * r_a) / total
    return NoiseTrace(u_w, u_a.dt), NoiseTrace(i_w, u_a.dt)


def run_bit_exchange(pair: ResistorPair, spec: NoiseSpec, state: BitState, seed: Seed) -> ExchangeRecord:
    """One bit period: both noise sources, the loop, and mean-square statistics.

    Alice's source is drawn from seed path ``seed + (0,)`` and Bob's from
    ``seed + (1,)``.
    """
    r_a = pair.resistance(state.alice_choice)
    r_b = pair.resistance(state.bob_choice)
    u_a = generate_trace(r_a, spec, derive(seed, ALICE_SOURCE))
    u_b = generate_trace(r_b, spec, derive(seed, BOB_SOURCE))
    u_w, i_w = loop_signals(u_a, u_b, r_a, r_b)
    return ExchangeRecord(state, u_w.mean_square(), i_w.mean_square(), len(u_w))


def theoretical_levels(pair: ResistorPair, spec: NoiseSpec, statistic: str = "voltage") -> dict[Level, float]:
    """Expected mean-square wire voltage (or current) for each level."""
    lo, hi = pair.r_low, pair.r_high
    k = spec.prefactor
    if statistic == "voltage":
        return {Level.LL: k * lo / 2, Level.MIXED: k * lo * hi / (lo + hi), Level.HH: k * hi / 2}
    if statistic == "current":
        return {Level.LL: k / (2 * lo), Level.MIXED: k / (lo + hi), Level.HH: k / (2 * hi)}
    raise ValueError(f"statistic must be 'voltage' or 'current', got {statistic!r}")


def classify_value(value: float, levels: dict[Level, float]) -> Level:
    # MIXED first so that exact ties resolve toward it
    order = (Level.MIXED, Level.LL, Level.HH)
    if value <= 0:
        return min(order, key=lambda lv: levels[lv])
    x = math.log(value)
    best, best_d = order[0], abs(x - math.log(levels[order[0]]))
    for lv in order[1:]:
        d = abs(x - math.log(levels[lv]))
        if d < best_d:
            best, best_d = lv, d
    return best


def classify_loop_level(
    record: ExchangeRecord, pair: ResistorPair, spec: NoiseSpec, statistic: str = "voltage"
) -> Level:
    """Nearest theoretical level in log-variance space.

    ``statistic`` selects the wire voltage (default) or the wire current.
    """
    levels = theoretical_levels(pair, spec, statistic)
    value = record.u_w_mean_square if statistic == "voltage" else record.i_w_mean_square
    return classify_value(value, levels)


def party_decode(own_choice: Choice, level: Level) -> Choice:
    own_choice = Choice(own_choice)
    if level is Level.MIXED:
        return own_choice.other
    peer = Choice.L if level is Level.LL else Choice.H
    if peer != own_choice:
        raise DecodeError(f"own choice {own_choice.name} cannot produce level {level.value}")
    return peer


def random_state(generator: np.random.Generator) -> BitState:
    a, b = generator.integers(0, 2, size=2)
    return BitState(Choice(int(a)), Choice(int(b)))


STATE_STREAM = 0
EXCHANGE_STREAM = 1


def exchange_bit(index: int, pair: ResistorPair, spec: NoiseSpec, seed: Seed) -> ExchangeRecord:
    """Bit ``index`` of a key run: independent uniform choices, then the exchange."""
    state = random_state(_rng(derive(seed, STATE_STREAM, index)))
    return run_bit_exchange(pair, spec, state, derive(seed, EXCHANGE_STREAM, index))


def run_exchanges(
    n_bits: int, pair: ResistorPair, spec: NoiseSpec, seed: Seed, workers: int = 1
) -> list[ExchangeRecord]:
    return parallel_map(lambda i: exchange_bit(i, pair, spec, seed), range(n_bits), workers)
