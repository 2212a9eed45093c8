"""Johnson-Nyquist thermal noise sources."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kljnlab.seeding import Seed, rng

K_B = 1.380649e-23  # J/K, exact SI value


@dataclass(frozen=True)
class NoiseSpec:
    """Temperature, bandwidth and sampling for a noise source.

    With ``normalized=True`` the prefactor ``4 k_B T B`` is taken as 1, so
    variances come out numerically equal to the resistance in ohms.
    """

    effective_temperature: float = 300.0
    bandwidth: float = 1e3
    sampling_rate: float = 2e3
    samples_per_bit: int = 10_000
    normalized: bool = False

    def __post_init__(self):
        if not self.effective_temperature > 0:
            raise ValueError(f"effective_temperature must be > 0, got {self.effective_temperature}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.sampling_rate >= 2 * self.bandwidth:
            raise ValueError(
                f"sampling_rate {self.sampling_rate} violates Nyquist for bandwidth {self.bandwidth}"
            )
        if int(self.samples_per_bit) != self.samples_per_bit or self.samples_per_bit < 2:
            raise ValueError(f"samples_per_bit must be an integer >= 2, got {self.samples_per_bit}")

    @property
    def prefactor(self) -> float:
        """``4 k_B T B`` in V^2/ohm (1.0 in normalized mode)."""
        if self.normalized:
            return 1.0
        return 4.0 * K_B * self.effective_temperature * self.bandwidth

    @property
    def dt(self) -> float:
        return 1.0 / self.sampling_rate

    @property
    def bit_period(self) -> float:
        return self.samples_per_bit / self.sampling_rate

    def with_samples(self, samples_per_bit: int) -> "NoiseSpec":
        return NoiseSpec(
            self.effective_temperature,
            self.bandwidth,
            self.sampling_rate,
            samples_per_bit,
            self.normalized,
        )


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("trace samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("trace contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def mean_square(self) -> float:
        if len(self.samples) == 0:
            raise ValueError("empty trace")
        return float(np.dot(self.samples, self.samples) / len(self.samples))


def johnson_variance(resistance: float, spec: NoiseSpec) -> float:
    """One-sided thermal noise voltage variance ``4 k_B T R B``."""
    if resistance < 0:
        raise ValueError(f"resistance must be >= 0, got {resistance}")
    return spec.prefactor * resistance


def generate_trace(resistance: float, spec: NoiseSpec, seed: Seed, n_samples: int | None = None) -> NoiseTrace:
    """White Gaussian noise trace with the Johnson variance of ``resistance``.

    ``n_samples`` defaults to ``spec.samples_per_bit``.
    """
    n = spec.samples_per_bit if n_samples is None else int(n_samples)
    sigma = math.sqrt(johnson_variance(resistance, spec))
    samples = rng(seed).standard_normal(n)
    samples *= sigma
    return NoiseTrace(samples, spec.dt)
