"""Reproducible checks of the quantitative KLJN / TherMod claims.

Each check returns one or more :class:`ClaimResult`.  ``claims_check`` runs a
selection (by criterion id such as ``"C4"``) with an optional global
tolerance override.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import ks_2samp, norm

from kljnlab import adversary, distill, errstat, harness, power
from kljnlab.config import ScenarioConfig, load_config
from kljnlab.kljn import BitState, Choice, ResistorPair, run_bit_exchange
from kljnlab.noise import NoiseSpec
from kljnlab.seeding import derive, parallel_map
from kljnlab.thermod import AmplifierModel, ChannelModel

# two-sided p-value of a 5 sigma deviation
P_5SIGMA = float(2 * norm.sf(5.0))

RELATIONS = ("within", "at_most", "at_least", "above")


@dataclass(frozen=True)
class ClaimResult:
    claim_id: str
    anchor: str
    measured: float
    expected: float
    tolerance: float
    relation: str = "within"

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        m, e, t = self.measured, self.expected, self.tolerance
        if isinstance(m, float) and math.isnan(m):
            return False
        if self.relation == "within":
            return abs(m - e) <= t
        if self.relation == "at_most":
            return m <= e + t
        if self.relation == "at_least":
            return m >= e - t
        return m > e - t

    def row(self) -> tuple:
        return (self.claim_id, self.anchor, self.measured, self.expected, self.tolerance, self.relation, self.passed)


class _Ctx:
    def __init__(self, cfg: ScenarioConfig, tolerance: Optional[float], workers: int):
        self.cfg = cfg
        self.override = tolerance
        self.workers = workers

    def seed(self, *key):
        return derive(self.cfg.master_seed, 100, *key)

    def result(self, claim_id, anchor, measured, expected, tolerance, relation="within"):
        tol = tolerance if self.override is None else self.override
        return ClaimResult(claim_id, anchor, float(measured), float(expected), float(tol), relation)


def _z(a: np.ndarray, b: np.ndarray) -> float:
    se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
    return float((a.mean() - b.mean()) / se)


def check_mixed_indistinguishable(ctx: _Ctx, n: int = 1000) -> list[ClaimResult]:
    cfg = ctx.cfg
    hl_state = BitState(Choice.H, Choice.L)
    lh_state = BitState(Choice.L, Choice.H)

    def pair_run(i):
        hl = run_bit_exchange(cfg.pair, cfg.noise, hl_state, ctx.seed(1, 0, i))
        lh = run_bit_exchange(cfg.pair, cfg.noise, lh_state, ctx.seed(1, 1, i))
        return hl.u_w_mean_square, hl.i_w_mean_square, lh.u_w_mean_square, lh.i_w_mean_square

    stats = np.array(parallel_map(pair_run, range(n), ctx.workers))
    out = []
    for name, hl_col, lh_col in (("u_w", 0, 2), ("i_w", 1, 3)):
        a, b = stats[:, hl_col], stats[:, lh_col]
        out.append(ctx.result(f"C1.{name}_mean_z", f"HL vs LH mean of Var({name}) differ by < 5 sigma",
                              abs(_z(a, b)), 0.0, 5.0))
        out.append(ctx.result(f"C1.{name}_ks_p", f"HL vs LH Var({name}) distributions not rejected at 5 sigma",
                              ks_2samp(a, b).pvalue, P_5SIGMA, 0.0, "at_least"))
    return out


def check_eve_75(ctx: _Ctx, n_bits: int = 10_000) -> list[ClaimResult]:
    s = adversary.run_kljn_key_attack(n_bits, ctx.cfg.pair, ctx.cfg.noise, ctx.seed(2), ctx.workers)
    return [
        ctx.result("C2.accuracy", "Eve guesses KLJN bits right 75% of the time", s.accuracy, 0.75, 0.02),
        ctx.result("C2.certain_fraction", "half the KLJN bits are LL/HH and fully exposed",
                   s.certain_fraction, 0.5, 0.025),
    ]


def check_256_leakage(ctx: _Ctx, runs: int = 100, n_bits: int = 256) -> list[ClaimResult]:
    correct = [
        adversary.run_kljn_key_attack(n_bits, ctx.cfg.pair, ctx.cfg.noise, ctx.seed(3, r), ctx.workers).bits_correct
        for r in range(runs)
    ]
    return [ctx.result("C3.mean_correct_of_256", "about 192 of 256 key bits guessed by Eve",
                       np.mean(correct), 192.0, 12.0)]


def check_pa_recursion(ctx: _Ctx) -> list[ClaimResult]:
    p = Fraction(3, 4)
    for _ in range(4):
        p = distill.eve_prob_after_iteration(p)
    exact = Fraction(1, 2) + Fraction(1, 2**17)  # eps_{k+1} = 2 eps_k^2 from eps_0 = 1/4
    key = distill.amplify(distill.KeyMaterial(np.zeros(4096, dtype=np.uint8), Fraction(3, 4)), 4)
    return [
        ctx.result("C4.p_after_4", "four XOR halvings take p=0.75 to 0.5000076294", float(p), float(exact), 1e-12),
        ctx.result("C4.p_quoted", "rounded value 0.5000076294", float(p), 0.5000076294, 5e-11),
        ctx.result("C4.leakage", "leakage after four halvings is at most 1e-8 bit",
                   distill.leakage_bits(p), 1e-8, 0.0, "at_most"),
        ctx.result("C4.length_ratio", "four halvings cost 16 raw bits per final bit", 4096 / len(key), 16.0, 0.0),
    ]


def check_pa_monte_carlo(ctx: _Ctx) -> list[ClaimResult]:
    emp = distill.simulate_eve_pa(2**16, 0.75, 4, ctx.seed(5))
    return [ctx.result("C5.empirical_correctness", "simulated Eve is at chance after four halvings",
                       emp, 0.5, 3 * math.sqrt(0.25 / 4096))]


def check_power(ctx: _Ctx) -> list[ClaimResult]:
    b = ctx.cfg.power
    pk, pt = power.p_kljn(b), power.p_thermod(b)
    formula = pt - (pk + b.amp_watts + b.proc_watts + b.antenna_watts)
    probe = power.PowerBudget(b.kljn_components, amp_watts=1e-3, proc_watts=0.0, bit_period=b.bit_period)
    probe2 = power.PowerBudget(b.kljn_components, amp_watts=0.0, proc_watts=1e-3, bit_period=b.bit_period)
    strict = min(power.p_thermod(probe) - power.p_kljn(probe), power.p_thermod(probe2) - power.p_kljn(probe2))
    return [
        ctx.result("C6.formula", "P_TherMod = P_KLJN + P_amp + P_proc (+ antenna)", formula, 0.0, 0.0),
        ctx.result("C6.strict", "any amplifier or processing power makes TherMod cost more",
                   strict, 0.0, 0.0, "above"),
        ctx.result("C6.multiplier_k4", "k=4 amplification means 16 cycles per final bit",
                   power.cycle_multiplier(4, 1.0), 16.0, 0.0),
        ctx.result("C6.multiplier_k4_sifted", "sifting half the bits doubles it to 32",
                   power.cycle_multiplier(4, 0.5), 32.0, 0.0),
    ]


def check_ber(ctx: _Ctx, trials: int = 1_000_000) -> list[ClaimResult]:
    ratio = 10.0
    logs = [errstat.log_analytic_ber(ratio, n) for n in range(1, 1001)]
    violations = sum(b >= a for a, b in zip(logs, logs[1:]))
    ns = [50, 100, 200, 400]
    x = np.array(ns, dtype=float)
    y = np.array([errstat.log_analytic_ber(ratio, n) for n in ns])
    slope, intercept = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - slope * x - intercept) ** 2) / np.sum((y - y.mean()) ** 2)

    n_mc = errstat.required_samples(ratio, 1e-3)
    pt = errstat.monte_carlo_ber(
        "thermod", n_mc, trials, ctx.seed(7), pair=ResistorPair(1e3, 1e3 * ratio), workers=ctx.workers
    )
    sigma = math.sqrt(pt.ber_analytic * (1 - pt.ber_analytic) / trials)
    n6 = errstat.required_samples(ratio, 1e-6)
    consistent = errstat.analytic_ber(ratio, n6 - 1) > 1e-6 >= errstat.analytic_ber(ratio, n6)
    return [
        ctx.result("C7.monotone_violations", "BER falls with every added sample (N=1..1000)", violations, 0, 0),
        ctx.result("C7.log_affine_r2", "log BER is affine in N (exponential decay)", r2, 0.99, 0.0, "above"),
        ctx.result("C7.mc_vs_analytic_sigma", f"Monte Carlo BER matches analytic at N={n_mc}",
                   abs(pt.ber_monte_carlo - pt.ber_analytic) / sigma, 0.0, 3.0),
        ctx.result("C7.required_samples_1e-6", f"N={n6} reaches BER 1e-6 and N-1 does not",
                   float(consistent), 1.0, 0.0),
    ]


def check_thermod_insecure(ctx: _Ctx, n_bits: int = 10_000) -> list[ClaimResult]:
    amp, ch = AmplifierModel(), ChannelModel()

    def link(alpha, n, key):
        spec = NoiseSpec(samples_per_bit=n)
        return adversary.run_thermod_link(n_bits, ResistorPair(1e3, 1e3 * alpha), spec, amp, ch,
                                          ctx.seed(8, key), ctx.workers)

    base = link(10.0, 100, 0)
    eve, rx = base.eavesdropper, base.receiver
    sig = math.hypot(eve.std_error(), rx.std_error())
    parity = abs(eve.accuracy - rx.accuracy) / sig if sig > 0 else (0.0 if eve.accuracy == rx.accuracy else math.inf)

    def worst_drop(summaries):
        # largest decrease between successive settings, in units of its standard error
        worst = 0.0
        for a, b in zip(summaries, summaries[1:]):
            drop = a.accuracy - b.accuracy
            s = math.hypot(a.std_error(), b.std_error())
            if drop > 0:
                worst = max(worst, drop / s if s > 0 else math.inf)
        return worst

    by_alpha = [link(a, 100, 1 + i).eavesdropper for i, a in enumerate((1.5, 3.0, 10.0))]
    by_n = [link(10.0, n, 10 + i).eavesdropper for i, n in enumerate((10, 100))]
    return [
        ctx.result("C8.eve_accuracy", "Eve reads TherMod bits with high probability", eve.accuracy, 0.99, 0.0, "above"),
        ctx.result("C8.eve_rx_parity_sigma", "Eve does as well as the intended receiver", parity, 0.0, 3.0),
        ctx.result("C8.alpha_monotone_sigma", "larger resistance ratio helps Eve", worst_drop(by_alpha), 0.0, 2.0, "at_most"),
        ctx.result("C8.samples_monotone_sigma", "more samples help Eve", worst_drop(by_n), 0.0, 2.0, "at_most"),
    ]


def check_determinism(ctx: _Ctx) -> list[ClaimResult]:
    base = ctx.cfg.replace(n_bits=200, noise=ctx.cfg.noise.with_samples(2000), ber_samples=(10, 20), trials=2000)
    differing = 0
    with tempfile.TemporaryDirectory() as tmp:
        for system in ("kljn", "thermod"):
            cfg = base.replace(system=system)
            outputs = []
            for run, workers in enumerate((1, 4, 1)):
                out = Path(tmp) / f"{system}-{run}"
                tables = harness.run_scenario(cfg, workers) + harness.ber_curve(cfg, workers)
                if system == "kljn":
                    tables += harness.amplify(cfg, workers)
                paths = harness.write_tables(tables, out, "csv")
                paths += harness.write_tables(tables, out, "json")
                outputs.append({p.name: p.read_bytes() for p in paths})
            ref = outputs[0]
            differing += sum(o != ref for o in outputs[1:])
    return [ctx.result("C9.differing_reruns", "identical seeds give byte-identical files across worker counts",
                       differing, 0, 0)]


CLAIMS: dict[str, Callable[[_Ctx], list[ClaimResult]]] = {
    "C1": check_mixed_indistinguishable,
    "C2": check_eve_75,
    "C3": check_256_leakage,
    "C4": check_pa_recursion,
    "C5": check_pa_monte_carlo,
    "C6": check_power,
    "C7": check_ber,
    "C8": check_thermod_insecure,
    "C9": check_determinism,
}


def claims_check(
    cfg: Optional[ScenarioConfig] = None,
    claim_ids: Optional[Sequence[str]] = None,
    tolerance: Optional[float] = None,
    workers: int = 1,
) -> list[ClaimResult]:
    """Run the selected checks (all by default) and return their results.

    ``tolerance`` replaces every check's own tolerance when given.
    """
    cfg = cfg if cfg is not None else load_config(None)
    ids = list(CLAIMS) if not claim_ids else list(claim_ids)
    unknown = [c for c in ids if c not in CLAIMS]
    if unknown:
        raise KeyError(f"unknown claim id(s): {', '.join(unknown)}; choose from {', '.join(CLAIMS)}")
    ctx = _Ctx(cfg, tolerance, workers)
    results = []
    for cid in ids:
        results.extend(CLAIMS[cid](ctx))
    return results


def claims_table(results: Sequence[ClaimResult]) -> harness.Table:
    t = harness.Table("claims")
    for r in results:
        t.add(*r.row())
    return t
