"""One-way TherMod link: variance-modulated noise, amplifier, channel, threshold receivers.

The transmitted chain is source -> amplifier -> delay taps -> path gain ->
additive environment noise.  The same amplified signal reaches the intended
receiver and the eavesdropper; only path gain and environment noise differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kljnlab.kljn import ResistorPair
from kljnlab.noise import NoiseSpec, NoiseTrace, johnson_variance
from kljnlab.seeding import Seed, rng

PATHS = ("receiver", "eavesdropper")


@dataclass(frozen=True)
class AmplifierModel:
    gain: float = 1.0
    added_noise_variance: float = 0.0
    artifact_gain_ripple: float = 0.0
    power_draw: float = 0.0

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError(f"amplifier gain must be > 0, got {self.gain}")
        if self.added_noise_variance < 0:
            raise ValueError("added_noise_variance must be >= 0")
        if not 0 <= self.artifact_gain_ripple < 1:
            raise ValueError("artifact_gain_ripple must be in [0, 1)")
        if self.power_draw < 0:
            raise ValueError("power_draw must be >= 0")

    def mean_power_gain(self) -> float:
        """E[g^2] with the effective gain ``gain * (1 +/- ripple)``, sign equiprobable."""
        return self.gain**2 * (1.0 + self.artifact_gain_ripple**2)


@dataclass(frozen=True)
class ChannelModel:
    gain_to_receiver: float = 1.0
    gain_to_eavesdropper: float = 1.0
    environment_noise_variance: float = 0.0
    delay_taps: tuple[tuple[int, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.gain_to_receiver < 0 or self.gain_to_eavesdropper < 0:
            raise ValueError("path gains must be >= 0")
        if self.environment_noise_variance < 0:
            raise ValueError("environment_noise_variance must be >= 0")
        taps = tuple((int(d), float(a)) for d, a in self.delay_taps)
        if any(d < 1 for d, _ in taps):
            raise ValueError("tap delays must be >= 1 sample")
        object.__setattr__(self, "delay_taps", taps)

    def path_gain(self, path: str) -> float:
        if path == "receiver":
            return self.gain_to_receiver
        if path == "eavesdropper":
            return self.gain_to_eavesdropper
        raise ValueError(f"path must be one of {PATHS}, got {path!r}")

    def tap_energy(self) -> float:
        """Direct path plus sum of squared tap amplitudes."""
        return 1.0 + sum(a * a for _, a in self.delay_taps)

    @property
    def max_delay(self) -> int:
        return max((d for d, _ in self.delay_taps), default=0)


@dataclass(frozen=True)
class CalibrationTable:
    expected_rx_variance_low: float
    expected_rx_variance_high: float

    def __post_init__(self):
        if not (self.expected_rx_variance_high > self.expected_rx_variance_low > 0):
            raise ValueError(
                "calibration needs high > low > 0, got "
                f"low={self.expected_rx_variance_low}, high={self.expected_rx_variance_high}"
            )

    @property
    def threshold(self) -> float:
        return math.sqrt(self.expected_rx_variance_low * self.expected_rx_variance_high)

    @property
    def ratio(self) -> float:
        return self.expected_rx_variance_high / self.expected_rx_variance_low


def expected_levels(
    pair: ResistorPair, spec: NoiseSpec, amp: AmplifierModel, ch: ChannelModel, path: str
) -> tuple[float, float]:
    """Analytic received variance for bit 0 and bit 1 on ``path``."""
    g2 = ch.path_gain(path) ** 2
    taps = ch.tap_energy()
    env = ch.environment_noise_variance

    def level(r):
        tx = amp.mean_power_gain() * johnson_variance(r, spec) + amp.added_noise_variance
        return g2 * taps * tx + env

    return level(pair.r_low), level(pair.r_high)


def calibrate(
    pair: ResistorPair, spec: NoiseSpec, amp: AmplifierModel, ch: ChannelModel, path: str = "receiver"
) -> CalibrationTable:
    low, high = expected_levels(pair, spec, amp, ch, path)
    return CalibrationTable(low, high)


def transmit_batch(
    bits,
    pair: ResistorPair,
    spec: NoiseSpec,
    amp: AmplifierModel,
    ch: ChannelModel,
    generator: np.random.Generator,
    n_samples: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized transmission of several bits.

    Returns ``(rx, eve)`` arrays of shape ``(len(bits), n_samples)``, where
    ``n_samples`` defaults to ``spec.samples_per_bit``.
    Draw order from ``generator``: source noise, ripple signs, amplifier
    noise (only if nonzero), receiver noise, eavesdropper noise (each only if
    the environment noise is nonzero).
    """
    bits = np.asarray(bits, dtype=np.int64)
    n, delay = len(bits), ch.max_delay
    length = spec.samples_per_bit if n_samples is None else int(n_samples)
    if length < 1:
        raise ValueError("need at least one sample per bit")
    sigma = np.sqrt(np.where(bits == 1, johnson_variance(pair.r_high, spec), johnson_variance(pair.r_low, spec)))

    src = generator.standard_normal((n, length + delay))
    src *= sigma[:, None]
    signs = generator.choice(np.array([-1.0, 1.0]), size=n)
    g_eff = amp.gain * (1.0 + signs * amp.artifact_gain_ripple)
    tx = src * g_eff[:, None]
    if amp.added_noise_variance > 0:
        tx += math.sqrt(amp.added_noise_variance) * generator.standard_normal(tx.shape)

    y = tx[:, delay:].copy()
    for d, a in ch.delay_taps:
        y += a * tx[:, delay - d : delay - d + length]

    env = ch.environment_noise_variance
    rx = ch.gain_to_receiver * y
    eve = ch.gain_to_eavesdropper * y
    if env > 0:
        rx += math.sqrt(env) * generator.standard_normal(y.shape)
        eve += math.sqrt(env) * generator.standard_normal(y.shape)
    return rx, eve


def transmit_bit(
    bit: int, pair: ResistorPair, spec: NoiseSpec, amp: AmplifierModel, ch: ChannelModel, seed: Seed
) -> tuple[NoiseTrace, NoiseTrace]:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    rx, eve = transmit_batch([bit], pair, spec, amp, ch, rng(seed))
    return NoiseTrace(rx[0], spec.dt), NoiseTrace(eve[0], spec.dt)


def decide_mean_squares(mean_squares, cal: CalibrationTable) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized threshold rule; returns ``(bits, log_margins)``."""
    ms = np.asarray(mean_squares, dtype=float)
    thr = cal.threshold
    bits = (ms >= thr).astype(np.int64)
    with np.errstate(divide="ignore"):
        margins = np.abs(np.log(ms) - math.log(thr))
    return bits, margins


def variance_threshold_decide(trace: NoiseTrace, cal: CalibrationTable) -> tuple[int, float]:
    """Decide 1 iff the trace's mean square is at or above the geometric-mean threshold.

    The statistic is the mean square about zero (the transmitted noise is
    zero-mean), so it carries ``len(trace)`` degrees of freedom.
    """
    if len(trace) == 0:
        raise ValueError("cannot decide on an empty trace")
    bits, margins = decide_mean_squares([trace.mean_square()], cal)
    return int(bits[0]), float(margins[0])
