"""Experiment runners and table output for the command line.

Each runner returns :class:`Table` objects with a fixed column set:

==================  ==========================================================
table               columns
==================  ==========================================================
kljn_exchanges      bit_index, alice, bob, state, u_w_mean_square,
                    i_w_mean_square, samples_used, level,
                    bob_decoded_by_alice, alice_decoded_by_bob, decode_ok,
                    eve_alice, eve_bob, eve_certain, eve_correct
kljn_summary        n_bits, samples_per_bit, alpha, decode_error_rate,
                    secure_fraction, eve_accuracy, eve_certain_fraction
thermod_bits        bit_index, bit, rx_mean_square, eve_mean_square,
                    rx_decision, eve_decision, rx_margin, eve_margin
thermod_summary     n_bits, samples_per_bit, alpha, rx_variance_ratio,
                    eve_variance_ratio, ber_analytic, receiver_accuracy,
                    eve_accuracy
attack              system, bits_attacked, bits_correct, accuracy,
                    certain_fraction, std_error
amplify             mode, iteration, key_length, raw_bits_per_final_bit,
                    eve_correct_prob, eve_correct_empirical, leakage_bits
ber_curve           samples_per_bit, ber_analytic, ber_monte_carlo, trials,
                    variance_ratio
power               quantity, system, pa_iterations, secure_fraction, value,
                    unit
claims              claim_id, anchor, measured, expected, tolerance,
                    relation, pass
==================  ==========================================================

Seed paths: KLJN exchanges use ``(master, 1)``, TherMod transmissions
``(master, 2)``, BER curves ``(master, 3, i)`` for the i-th sample count.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from kljnlab import adversary, distill, errstat, kljn, power
from kljnlab.config import ScenarioConfig
from kljnlab.kljn import DecodeError, Level
from kljnlab.seeding import derive
from kljnlab.thermod import calibrate, expected_levels

KLJN_STREAM = 1
THERMOD_STREAM = 2
BER_STREAM = 3

COLUMNS = {
    "kljn_exchanges": (
        "bit_index", "alice", "bob", "state", "u_w_mean_square", "i_w_mean_square",
        "samples_used", "level", "bob_decoded_by_alice", "alice_decoded_by_bob",
        "decode_ok", "eve_alice", "eve_bob", "eve_certain", "eve_correct",
    ),
    "kljn_summary": (
        "n_bits", "samples_per_bit", "alpha", "decode_error_rate", "secure_fraction",
        "eve_accuracy", "eve_certain_fraction",
    ),
    "thermod_bits": (
        "bit_index", "bit", "rx_mean_square", "eve_mean_square", "rx_decision",
        "eve_decision", "rx_margin", "eve_margin",
    ),
    "thermod_summary": (
        "n_bits", "samples_per_bit", "alpha", "rx_variance_ratio", "eve_variance_ratio",
        "ber_analytic", "receiver_accuracy", "eve_accuracy",
    ),
    "attack": ("system", "bits_attacked", "bits_correct", "accuracy", "certain_fraction", "std_error"),
    "amplify": (
        "mode", "iteration", "key_length", "raw_bits_per_final_bit", "eve_correct_prob",
        "eve_correct_empirical", "leakage_bits",
    ),
    "ber_curve": ("samples_per_bit", "ber_analytic", "ber_monte_carlo", "trials", "variance_ratio"),
    "power": ("quantity", "system", "pa_iterations", "secure_fraction", "value", "unit"),
    "claims": ("claim_id", "anchor", "measured", "expected", "tolerance", "relation", "pass"),
}


@dataclass
class Table:
    name: str
    rows: list[tuple] = field(default_factory=list)

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS[self.name]

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, (_plain(v) for v in row))) for row in self.rows]


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)):
        return float(value)
    if isinstance(value, (Level, kljn.Choice)):
        return value.name
    return value


def _cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------- runners


def _kljn_tables(cfg: ScenarioConfig, workers: int) -> list[Table]:
    seed = derive(cfg.master_seed, KLJN_STREAM)
    records = kljn.run_exchanges(cfg.n_bits, cfg.pair, cfg.noise, seed, workers)
    guesses = adversary.eve_guesses(records, cfg.pair, cfg.noise, seed)
    rows = Table("kljn_exchanges")
    n_err = n_mixed = 0
    for i, (rec, g) in enumerate(zip(records, guesses)):
        level = kljn.classify_loop_level(rec, cfg.pair, cfg.noise)
        a, b = rec.state.alice_choice, rec.state.bob_choice
        try:
            seen_b = kljn.party_decode(a, level)
            seen_a = kljn.party_decode(b, level)
            ok = seen_b == b and seen_a == a
        except DecodeError:
            seen_a = seen_b = None
            ok = False
        n_err += not ok
        n_mixed += level is Level.MIXED
        correct = g.guessed_alice == int(a) and g.guessed_bob == int(b)
        rows.add(
            i, int(a), int(b), rec.state.label, rec.u_w_mean_square, rec.i_w_mean_square,
            rec.samples_used, level, None if seen_b is None else int(seen_b),
            None if seen_a is None else int(seen_a), ok, g.guessed_alice, g.guessed_bob,
            g.certain, correct,
        )
    summary = adversary.score_kljn(records, guesses)
    s = Table("kljn_summary")
    s.add(
        cfg.n_bits, cfg.noise.samples_per_bit, cfg.pair.alpha(), n_err / cfg.n_bits,
        n_mixed / cfg.n_bits, summary.accuracy, summary.certain_fraction,
    )
    att = Table("attack")
    att.add("kljn", summary.bits_attacked, summary.bits_correct, summary.accuracy,
            summary.certain_fraction, summary.std_error())
    return [rows, s, att]


def _thermod_tables(cfg: ScenarioConfig, workers: int) -> list[Table]:
    seed = derive(cfg.master_seed, THERMOD_STREAM)
    res = adversary.run_thermod_link(cfg.n_bits, cfg.pair, cfg.noise, cfg.amplifier, cfg.channel, seed, workers)
    rows = Table("thermod_bits")
    for i in range(len(res.bits)):
        rows.add(
            i, res.bits[i], res.rx_mean_square[i], res.eve_mean_square[i], res.rx_decision[i],
            res.eve_decision[i], res.rx_margin[i], res.eve_margin[i],
        )
    rx_cal = calibrate(cfg.pair, cfg.noise, cfg.amplifier, cfg.channel, "receiver")
    e_low, e_high = expected_levels(cfg.pair, cfg.noise, cfg.amplifier, cfg.channel, "eavesdropper")
    eve_ratio = e_high / e_low if e_low > 0 else float("inf")
    rx, eve = res.receiver, res.eavesdropper
    s = Table("thermod_summary")
    s.add(
        cfg.n_bits, cfg.noise.samples_per_bit, cfg.pair.alpha(), rx_cal.ratio, eve_ratio,
        errstat.analytic_ber(rx_cal.ratio, cfg.noise.samples_per_bit), rx.accuracy, eve.accuracy,
    )
    att = Table("attack")
    att.add("thermod", eve.bits_attacked, eve.bits_correct, eve.accuracy, eve.certain_fraction, eve.std_error())
    return [rows, s, att]


def simulate_kljn(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    return _kljn_tables(cfg, workers)[:2]


def simulate_thermod(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    return _thermod_tables(cfg, workers)[:2]


def attack(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    runner = _kljn_tables if cfg.system == "kljn" else _thermod_tables
    return [runner(cfg, workers)[2]]


def amplify(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    """Privacy amplification on a simulated KLJN key, with and without sifting.

    The raw key is Alice's bit sequence; Eve's guess of each key bit comes
    from her per-exchange guess.  Iterations stop early if the key runs out.
    """
    seed = derive(cfg.master_seed, KLJN_STREAM)
    records = kljn.run_exchanges(cfg.n_bits, cfg.pair, cfg.noise, seed, workers)
    guesses = adversary.eve_guesses(records, cfg.pair, cfg.noise, seed)
    key = np.array([int(r.state.alice_choice) for r in records], dtype=np.uint8)
    eve = np.array([g.guessed_alice for g in guesses], dtype=np.uint8)
    classes = [kljn.classify_loop_level(r, cfg.pair, cfg.noise) for r in records]

    table = Table("amplify")
    keep = np.array([c is Level.MIXED for c in classes], dtype=bool)
    modes = (
        ("pa_only", key, eve, Fraction(3, 4)),
        ("discard_then_pa", key[keep], eve[keep], Fraction(1, 2)),
    )
    for mode, k_bits, e_bits, p in modes:
        material = distill.KeyMaterial(k_bits, p)
        for it in range(cfg.pa_iterations + 1):
            if it > 0:
                if len(material) < 2:
                    break
                material = distill.xor_halve(material)
                e_bits = distill.xor_halve_bits(e_bits)
            n = len(material)
            empirical = float(np.mean(material.bits == e_bits)) if n else None
            raw_per = cfg.n_bits / n if n else None
            table.add(mode, it, n, raw_per, material.eve_correct_prob, empirical,
                      distill.leakage_bits(material.eve_correct_prob))
    return [table]


def ber_curve(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    table = Table("ber_curve")
    for i, n in enumerate(cfg.ber_samples):
        pt = errstat.monte_carlo_ber(
            cfg.system, n, cfg.trials, derive(cfg.master_seed, BER_STREAM, i),
            pair=cfg.pair, spec=cfg.noise, amp=cfg.amplifier, ch=cfg.channel, workers=workers,
        )
        table.add(pt.samples_per_bit, pt.ber_analytic, pt.ber_monte_carlo, pt.trials, pt.variance_ratio)
    return [table]


def power_report(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    b = cfg.power
    t = Table("power")
    for c in b.kljn_components:
        t.add(f"component:{c.name}", "kljn", None, None, c.watts, "W")
    t.add("p_kljn", "kljn", None, None, power.p_kljn(b), "W")
    t.add("amp_watts", "thermod", None, None, b.amp_watts, "W")
    t.add("proc_watts", "thermod", None, None, b.proc_watts, "W")
    t.add("antenna_watts", "thermod", None, None, b.antenna_watts, "W")
    t.add("p_thermod", "thermod", None, None, power.p_thermod(b), "W")
    t.add("bit_period", "", None, None, b.bit_period, "s")
    for system in ("kljn", "thermod"):
        for k, frac in ((0, 1.0), (cfg.pa_iterations, 1.0), (cfg.pa_iterations, 0.5)):
            rep = power.energy_per_final_bit(b, k, frac, system)
            t.add("cycle_multiplier", system, k, frac, rep.cycle_multiplier, "")
            t.add("energy_per_final_bit", system, k, frac, rep.joules, "J")
    return [t]


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> list[Table]:
    """Records, summaries, attack result and power report for ``cfg.system``."""
    runner = _kljn_tables if cfg.system == "kljn" else _thermod_tables
    return runner(cfg, workers) + power_report(cfg)


# ---------------------------------------------------------------- output


def render(table: Table, fmt: str, header: bool = True) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"table": table.name, "columns": list(table.columns), "rows": table.records()}, indent=2) + "\n"
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def write_tables(tables: Iterable[Table], out_dir: str | Path, fmt: str = "csv", append: bool = False) -> list[Path]:
    """Write one ``<table>.<fmt>`` per table; ``append`` adds rows after existing ones."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for table in tables:
        path = out / f"{table.name}.{fmt}"
        if append and path.exists():
            if fmt == "csv":
                with open(path, newline="") as fh:
                    existing = next(csv.reader(fh), None)
                if existing is not None and tuple(existing) != table.columns:
                    raise ValueError(f"{path}: header does not match {table.name} columns")
                with open(path, "a", newline="") as fh:
                    fh.write(render(table, fmt, header=existing is None))
            else:
                doc = json.loads(path.read_text())
                if doc.get("columns") != list(table.columns):
                    raise ValueError(f"{path}: columns do not match {table.name}")
                doc["rows"].extend(table.records())
                path.write_text(json.dumps(doc, indent=2) + "\n")
        else:
            path.write_text(render(table, fmt))
        paths.append(path)
    return paths
