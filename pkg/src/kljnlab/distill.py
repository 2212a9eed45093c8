"""Pairwise-XOR privacy amplification and eavesdropper-knowledge bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy.special import xlog1py

from kljnlab.kljn import Level
from kljnlab.seeding import Seed, rng

Probability = Union[float, Fraction]


class AmplificationError(ValueError):
    """Key too short for the requested number of halvings."""


def _check_prob(p: Probability) -> None:
    if not 0.5 <= p <= 1:
        raise ValueError(f"probability must lie in [0.5, 1], got {p}")


@dataclass(frozen=True, eq=False)
class KeyMaterial:
    bits: np.ndarray
    eve_correct_prob: Probability = 0.5
    pa_iterations_applied: int = 0

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or np.any(bits > 1):
            raise ValueError("bits must be a 1-D array of 0/1")
        _check_prob(self.eve_correct_prob)
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)


def eve_prob_after_iteration(p: Probability) -> Probability:
    """Probability that Eve's XOR of two independent guesses, each right with ``p``, is right.

    Works on floats and on :class:`fractions.Fraction` (exactly).
    """
    _check_prob(p)
    return p * p + (1 - p) * (1 - p)


def xor_halve_bits(bits: np.ndarray) -> np.ndarray:
    n = len(bits) // 2 * 2
    return bits[0:n:2] ^ bits[1:n:2]


def xor_halve(key: KeyMaterial) -> KeyMaterial:
    if len(key) < 2:
        raise AmplificationError(f"need at least 2 bits to amplify, got {len(key)}")
    return KeyMaterial(
        xor_halve_bits(key.bits),
        eve_prob_after_iteration(key.eve_correct_prob),
        key.pa_iterations_applied + 1,
    )


def amplify(key: KeyMaterial, k: int) -> KeyMaterial:
    if k < 0:
        raise ValueError("k must be >= 0")
    if len(key) < 2**k:
        raise AmplificationError(f"{k} iterations need at least {2**k} bits, got {len(key)}")
    for _ in range(k):
        key = xor_halve(key)
    return key


def leakage_bits(p: Probability) -> float:
    """``1 - H2(p)``: information Eve holds per key bit, in bits.

    Evaluated as ``(p ln 2p + q ln 2q) / ln 2`` through ``log1p`` so that it
    stays accurate when ``p`` is very close to 1/2.
    """
    _check_prob(p)
    p = float(p)
    eps = p - 0.5
    q = 0.5 - eps
    return float((xlog1py(p, 2 * eps) + xlog1py(q, -2 * eps)) / math.log(2))


def discard_non_secure(
    classes: Sequence[Level], bits, eve_correct_prob: Probability = 0.5
) -> tuple[KeyMaterial, float]:
    """Keep only bits from mixed-level exchanges.

    Returns the sifted key and the retained fraction.  Eve's per-bit
    probability on the retained bits defaults to 1/2.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if len(classes) != len(bits):
        raise ValueError(f"{len(classes)} classes but {len(bits)} bits")
    keep = np.array([c is Level.MIXED for c in classes], dtype=bool)
    fraction = float(keep.mean()) if len(keep) else 0.0
    return KeyMaterial(bits[keep], eve_correct_prob), fraction


def simulate_eve_pa(n: int, p: float, k: int, seed: Seed) -> float:
    """Monte Carlo check of the recursion.

    Eve holds each of ``n`` raw bits correctly with independent probability
    ``p``; her guesses are XOR-halved ``k`` times alongside the true key.
    Returns the fraction of final bits she has right.
    """
    g = rng(seed)
    key = g.integers(0, 2, size=n, dtype=np.uint8)
    wrong = (g.random(n) >= p).astype(np.uint8)
    guess = key ^ wrong
    for _ in range(k):
        key, guess = xor_halve_bits(key), xor_halve_bits(guess)
    return float(np.mean(key == guess))
