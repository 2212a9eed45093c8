import csv
import json

import pytest

from kljnlab import harness
from kljnlab.claims import CLAIMS, claims_check
from kljnlab.cli import main
from kljnlab.config import load_config

SMALL = """
system = "{system}"
master_seed = 3
n_bits = 64
trials = 500
ber_samples = [10, 20]

[noise]
samples_per_bit = 1000
"""

SUBCOMMANDS = {
    "simulate-kljn": ["kljn_exchanges", "kljn_summary"],
    "simulate-thermod": ["thermod_bits", "thermod_summary"],
    "attack": ["attack"],
    "amplify": ["amplify"],
    "ber-curve": ["ber_curve"],
    "power-report": ["power"],
}


@pytest.fixture
def config_file(tmp_path):
    def make(system="kljn"):
        p = tmp_path / f"{system}.toml"
        p.write_text(SMALL.format(system=system))
        return str(p)

    return make


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("command,tables", SUBCOMMANDS.items())
def test_subcommands_emit_documented_columns(tmp_path, config_file, command, tables):
    system = "thermod" if command == "simulate-thermod" else "kljn"
    out = tmp_path / "out"
    assert main([command, "--config", config_file(system), "--out", str(out)]) == 0
    for name in tables:
        rows = read_csv(out / f"{name}.csv")
        assert tuple(rows[0]) == harness.COLUMNS[name]
        assert len(rows) > 1


def test_ber_curve_columns_are_fixed():
    assert harness.COLUMNS["ber_curve"] == ("samples_per_bit", "ber_analytic", "ber_monte_carlo", "trials", "variance_ratio")


def test_same_seed_same_bytes(tmp_path, config_file):
    cfg = config_file("thermod")
    for run, workers in enumerate(("1", "3")):
        main(["simulate-thermod", "--config", cfg, "--out", str(tmp_path / str(run)), "--workers", workers])
    for name in ("thermod_bits.csv", "thermod_summary.csv"):
        assert (tmp_path / "0" / name).read_bytes() == (tmp_path / "1" / name).read_bytes()


def test_seed_and_trials_flags(tmp_path, config_file):
    main(["ber-curve", "--config", config_file(), "--out", str(tmp_path / "a"), "--trials", "300"])
    rows = read_csv(tmp_path / "a" / "ber_curve.csv")
    assert {r[3] for r in rows[1:]} == {"300"}
    main(["simulate-kljn", "--config", config_file(), "--out", str(tmp_path / "b"), "--seed", "4"])
    main(["simulate-kljn", "--config", config_file(), "--out", str(tmp_path / "c"), "--seed", "5"])
    assert (tmp_path / "b" / "kljn_exchanges.csv").read_bytes() != (tmp_path / "c" / "kljn_exchanges.csv").read_bytes()


def test_append_keeps_existing_rows(tmp_path, config_file):
    out = str(tmp_path)
    main(["attack", "--config", config_file(), "--out", out, "--seed", "1"])
    first = read_csv(tmp_path / "attack.csv")
    main(["attack", "--config", config_file(), "--out", out, "--seed", "2", "--append"])
    both = read_csv(tmp_path / "attack.csv")
    assert both[: len(first)] == first and len(both) == len(first) + 1


def test_json_format_and_append(tmp_path, config_file):
    out = str(tmp_path)
    main(["power-report", "--config", config_file(), "--out", out, "--format", "json"])
    doc = json.loads((tmp_path / "power.json").read_text())
    assert doc["columns"] == list(harness.COLUMNS["power"])
    n = len(doc["rows"])
    row = next(r for r in doc["rows"] if r["quantity"] == "p_thermod")
    assert row["value"] == pytest.approx(1.9)
    main(["power-report", "--config", config_file(), "--out", out, "--format", "json", "--append"])
    assert len(json.loads((tmp_path / "power.json").read_text())["rows"]) == 2 * n


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("master_seed = 1\n[pair]\nr_lo = 3\n")
    assert main(["attack", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "pair.r_lo" in capsys.readouterr().err


def test_amplify_table_tracks_recursion(tmp_path):
    cfg = load_config(None, 8).replace(n_bits=1024, noise=load_config(None).noise.with_samples(2000))
    (table,) = harness.amplify(cfg)
    pa = [r for r in table.rows if r[0] == "pa_only"]
    assert [r[2] for r in pa] == [1024, 512, 256, 128, 64]
    assert pa[-1][3] == 16.0
    assert float(pa[-1][4]) == pytest.approx(0.5000076294, abs=1e-10)
    assert pa[0][5] == pytest.approx(0.75, abs=5 * (0.1875 / 1024) ** 0.5)
    sifted = [r for r in table.rows if r[0] == "discard_then_pa"]
    assert sifted[0][3] == pytest.approx(2.0, rel=0.15)


def test_run_scenario_bundle():
    cfg = load_config(None, 2).replace(n_bits=256)
    names = [t.name for t in harness.run_scenario(cfg)]
    assert names == ["kljn_exchanges", "kljn_summary", "attack", "power"]
    attack = harness.run_scenario(cfg)[2]
    assert 192 - 40 < attack.rows[0][2] < 192 + 40


def test_claims_selection_and_tolerance_override(tmp_path):
    results = claims_check(claim_ids=["C4"])
    assert {r.claim_id.split(".")[0] for r in results} == {"C4"}
    assert all(r.passed for r in results)
    zero = claims_check(claim_ids=["C5"], tolerance=0.0)
    assert not any(r.passed for r in zero)
    with pytest.raises(KeyError):
        claims_check(claim_ids=["C42"])


def test_claims_exit_status_counts_failures(tmp_path):
    assert main(["claims-check", "--claim", "C6", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "claims.csv")
    assert tuple(rows[0]) == harness.COLUMNS["claims"]
    assert main(["claims-check", "--claim", "C2", "--tolerance", "0", "--out", str(tmp_path)]) == 2


def test_default_claims_check_passes(tmp_path):
    assert main(["claims-check", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "claims.csv")
    assert {r[0].split(".")[0] for r in rows[1:]} == set(CLAIMS)
    assert all(r[-1] == "true" for r in rows[1:])
