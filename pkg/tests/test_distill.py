import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from kljnlab.distill import (
    AmplificationError,
    KeyMaterial,
    amplify,
    discard_non_secure,
    eve_prob_after_iteration,
    leakage_bits,
    simulate_eve_pa,
    xor_halve,
)
from kljnlab.kljn import Level
from kljnlab.seeding import rng


def enumerate_xor_correct(p):
    """Oracle: sum over Eve's two guesses being right/wrong; XOR is right iff both or neither err."""
    total = 0
    for right1, right2 in itertools.product((True, False), repeat=2):
        prob = (p if right1 else 1 - p) * (p if right2 else 1 - p)
        if right1 == right2:
            total += prob
    return total


def test_recursion_matches_enumeration():
    for p in (Fraction(1, 2), Fraction(3, 5), Fraction(3, 4), Fraction(9, 10), Fraction(1)):
        assert eve_prob_after_iteration(p) == enumerate_xor_correct(p)


def test_fixed_points_and_domain():
    assert eve_prob_after_iteration(0.5) == 0.5
    assert eve_prob_after_iteration(1.0) == 1.0
    for bad in (0.49, 1.01):
        with pytest.raises(ValueError):
            eve_prob_after_iteration(bad)


def test_iterates_from_three_quarters():
    expected = [Fraction(3, 4), Fraction(5, 8), Fraction(17, 32), Fraction(257, 512), Fraction(65537, 131072)]
    p = Fraction(3, 4)
    seen = [p]
    for _ in range(4):
        p = enumerate_xor_correct(p)
        seen.append(p)
    assert seen == expected
    p = Fraction(3, 4)
    for e in expected[1:]:
        p = eve_prob_after_iteration(p)
        assert p == e
    assert abs(float(p) - 0.5000076294) < 1e-10


@given(st.floats(0.5, 1.0), st.floats(0.5, 1.0))
def test_recursion_monotone(a, b):
    lo, hi = sorted((a, b))
    assert eve_prob_after_iteration(lo) <= eve_prob_after_iteration(hi)


def test_only_two_fixed_points():
    grid = np.linspace(0.5, 1.0, 1001)[1:-1]
    assert all(eve_prob_after_iteration(p) < p for p in grid)


def test_xor_halve_examples():
    out = xor_halve(KeyMaterial(np.array([1, 0, 1, 0]), 0.75))
    assert out.bits.tolist() == [1, 1]
    assert out.eve_correct_prob == 0.625 and out.pa_iterations_applied == 1
    assert xor_halve(KeyMaterial(np.zeros(16))).bits.tolist() == [0] * 8
    assert len(xor_halve(KeyMaterial(np.array([1, 1, 0, 1, 1])))) == 2
    with pytest.raises(AmplificationError):
        xor_halve(KeyMaterial(np.array([1])))


def test_amplify():
    key = KeyMaterial(rng(1).integers(0, 2, 4096), Fraction(3, 4))
    out = amplify(key, 4)
    assert len(out) == 256 and len(key) / len(out) == 16
    assert out.eve_correct_prob == Fraction(65537, 131072)
    assert out.pa_iterations_applied == 4
    same = amplify(key, 0)
    assert same.bits.tolist() == key.bits.tolist() and same.eve_correct_prob == key.eve_correct_prob
    with pytest.raises(AmplificationError):
        amplify(KeyMaterial(np.zeros(15)), 4)


def test_amplify_matches_manual_parity():
    bits = rng(2).integers(0, 2, 64)
    out = amplify(KeyMaterial(bits), 3)
    manual = [int(np.bitwise_xor.reduce(bits[8 * i : 8 * i + 8])) for i in range(8)]
    assert out.bits.tolist() == manual


def test_leakage_values():
    assert leakage_bits(0.5) == 0.0
    assert leakage_bits(1.0) == 1.0
    assert leakage_bits(0.75) == pytest.approx(1 + 0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    p = 0.5 + 2.0**-17
    mpmath.mp.dps = 50
    mp_p = mpmath.mpf(1) / 2 + mpmath.mpf(2) ** -17
    oracle = 1 + (mp_p * mpmath.log(mp_p, 2) + (1 - mp_p) * mpmath.log(1 - mp_p, 2))
    assert leakage_bits(p) == pytest.approx(float(oracle), rel=1e-9)
    assert leakage_bits(p) == pytest.approx(2 / math.log(2) * (2.0**-17) ** 2, rel=1e-6)
    assert leakage_bits(p) <= 1e-8
    with pytest.raises(ValueError):
        leakage_bits(0.3)


def test_discard_non_secure():
    bits = np.array([1, 0, 1, 1])
    key, frac = discard_non_secure([Level.MIXED] * 4, bits)
    assert key.bits.tolist() == [1, 0, 1, 1] and frac == 1.0
    key, frac = discard_non_secure([Level.LL] * 4, bits)
    assert len(key) == 0 and frac == 0.0
    key, frac = discard_non_secure([Level.LL, Level.MIXED, Level.HH, Level.MIXED], bits)
    assert key.bits.tolist() == [0, 1] and frac == 0.5
    with pytest.raises(ValueError):
        discard_non_secure([Level.LL], bits)


def test_random_choices_retain_half():
    g = rng(3)
    a, b = g.integers(0, 2, 10_000), g.integers(0, 2, 10_000)
    classes = [Level.MIXED if x != y else Level.LL for x, y in zip(a, b)]
    _, frac = discard_non_secure(classes, a)
    assert abs(frac - 0.5) <= 0.025


@pytest.mark.parametrize("p", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_monte_carlo_matches_recursion(p, k):
    n = 2**16
    expected = p
    for _ in range(k):
        expected = eve_prob_after_iteration(expected)
    emp = simulate_eve_pa(n, p, k, (int(p * 100), k))
    m = n // 2**k
    assert abs(emp - expected) < 3 * math.sqrt(expected * (1 - expected) / m)
