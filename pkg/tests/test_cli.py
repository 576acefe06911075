"""Command line surface: exit codes, JSON/CSV shapes, config overlay, replay."""

import json

import numpy as np
import pytest

from telepsim.adversary_toolkit import perfect_lookup_dag
from telepsim.cli import ConfigError, _parse_grid, _parse_int_list, main


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr().out
    return rc, out


def run_json(capsys, *argv):
    rc, out = run(capsys, *argv)
    return rc, json.loads(out)


# ---------------------------------------------------------------------------
# verify / distribution / sample / games


def test_verify_valid_pair(capsys):
    rc, doc = run_json(capsys, "verify", "--n", "1", "--cliffords", "H", "--paulis", "X")
    assert rc == 0
    assert doc["valid"] is True
    assert doc["probability_exact"] == "1/2"
    assert doc["probability"] == 0.5


def test_verify_invalid_pair_check_mode(capsys):
    rc, doc = run_json(capsys, "verify", "--cliffords", "I", "--paulis", "X")
    assert rc == 0 and doc["valid"] is False and doc["probability_exact"] == "0"
    rc = main(["verify", "--cliffords", "I", "--paulis", "X", "--check"])
    capsys.readouterr()
    assert rc == 1


def test_verify_two_positions(capsys):
    rc, doc = run_json(capsys, "verify", "--cliffords", "H,S", "--paulis", "XX")
    assert rc == 0 and doc["valid"] is True
    assert doc["probability_exact"] == "1/16"


def test_verify_n_mismatch(capsys):
    rc = main(["verify", "--n", "2", "--cliffords", "H", "--paulis", "X"])
    capsys.readouterr()
    assert rc == 2


def test_verify_missing_flag(capsys):
    rc = main(["verify", "--cliffords", "H"])
    capsys.readouterr()
    assert rc == 2


def test_distribution(capsys):
    rc, doc = run_json(capsys, "distribution", "--cliffords", "H")
    assert rc == 0
    assert doc["distribution"] == {"X": "1/2", "Z": "1/2"}


@pytest.mark.parametrize("route", ["ideal", "stabilizer"])
def test_sample_routes_clean(capsys, route):
    rc, doc = run_json(
        capsys,
        "sample",
        "--cliffords",
        "H,S",
        "--trials",
        "400",
        "--seed",
        "9",
        "--route",
        route,
        "--check",
    )
    assert rc == 0
    assert doc["invalid"] == 0
    assert sum(doc["counts"].values()) == 400


def test_sample_needs_seed(capsys):
    rc = main(["sample", "--cliffords", "H", "--trials", "10"])
    capsys.readouterr()
    assert rc == 2


def test_sample_replay_identical(capsys):
    rc1, doc1 = run_json(
        capsys, "sample", "--cliffords", "SH", "--trials", "300", "--seed", "4"
    )
    rc2, doc2 = run_json(
        capsys, "sample", "--cliffords", "SH", "--trials", "300", "--seed", "4"
    )
    assert rc1 == rc2 == 0 and doc1 == doc2


def test_games_brute_force(capsys):
    rc, doc = run_json(capsys, "games", "--brute-force", "--check")
    assert rc == 0
    assert doc["classical_value"] == "8/9"
    assert doc["classical_value_float"] == pytest.approx(8 / 9)


def test_games_quantum_trials(capsys):
    rc, doc = run_json(capsys, "games", "--trials", "2000", "--seed", "2")
    assert rc == 0
    assert doc["quantum_winrate"] > 0.97


def test_games_requires_work(capsys):
    assert main(["games"]) == 2
    capsys.readouterr()
    assert main(["games", "--trials", "100"]) == 2  # no seed
    capsys.readouterr()


# ---------------------------------------------------------------------------
# threshold scan


def test_threshold_scan_csv_and_replay(tmp_path, capsys):
    args = [
        "threshold-scan",
        "--n",
        "2",
        "--d",
        "1,3",
        "--p",
        "0,1e-3",
        "--trials",
        "200",
        "--seed",
        "11",
    ]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(f1)]) == 0
    assert main(args + ["--out", str(f2)]) == 0
    capsys.readouterr()
    assert f1.read_bytes() == f2.read_bytes()
    lines = f1.read_text().strip().splitlines()
    assert lines[0] == "n,d,p,trials,successes,rate,wilson_lo,wilson_hi,seed"
    assert len(lines) == 5
    first = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert first["n"] == "2" and first["d"] == "1" and first["successes"] == "200"


def test_threshold_scan_check_monotone(capsys):
    rc, out = run(
        capsys,
        "threshold-scan",
        "--n",
        "2",
        "--d",
        "1",
        "--p",
        "0,3e-3",
        "--trials",
        "300",
        "--seed",
        "5",
        "--check",
    )
    assert rc == 0


def test_threshold_scan_missing_args(capsys):
    rc = main(["threshold-scan", "--n", "2", "--d", "1", "--p", "0", "--trials", "10"])
    capsys.readouterr()
    assert rc == 2  # no seed
    rc = main(["threshold-scan", "--n", "2", "--seed", "1"])
    capsys.readouterr()
    assert rc == 2  # no grid


def test_grid_parsing():
    assert _parse_grid("0.1,0.2") == [0.1, 0.2]
    grid = _parse_grid("1e-3..1e-1:3")
    assert grid == pytest.approx([1e-3, 1e-2, 1e-1])
    assert len(_parse_grid("1e-3..1e-2")) == 5
    assert _parse_int_list("3,5") == [3, 5]
    with pytest.raises((ConfigError, ValueError)):
        _parse_grid("1e-3..")
    with pytest.raises((ConfigError, ValueError)):
        _parse_grid("")


# ---------------------------------------------------------------------------
# locality / restrictions / adversary


def test_locality_check(capsys):
    rc, doc = run_json(capsys, "locality-check", "--n", "8", "--d", "3", "--check")
    assert rc == 0
    assert doc["passed"] is True
    assert doc["kappa"] == 1.5
    assert doc["delta_in_rel_err"] <= 1e-12
    assert doc["meta"]["n"] == 8


def test_locality_check_tight_kappa_fails(capsys):
    rc = main(["locality-check", "--n", "8", "--d", "3", "--kappa", "0.5", "--check"])
    capsys.readouterr()
    assert rc == 1


def test_restrictions(capsys):
    rc, doc = run_json(
        capsys,
        "restrictions",
        "--n",
        "4",
        "--trials",
        "100",
        "--seed",
        "6",
        "--t-size",
        "1",
        "--check",
    )
    assert rc == 0
    assert doc["bound_failures"] == 0
    assert doc["trials"] == 100
    assert doc["params"]["q"] == 20


def test_adversary_random_dags(capsys):
    rc, doc = run_json(
        capsys,
        "adversary",
        "--n",
        "8",
        "--dags",
        "2",
        "--trials",
        "400",
        "--seed",
        "3",
        "--check",
    )
    assert rc == 0
    assert doc["violations"] == 0
    assert doc["max_rate"] < 80.0 / 81.0
    assert len(doc["reports"]) == 2
    assert doc["reports"][0]["dag_index"] == 0


def test_adversary_dag_file(tmp_path, capsys):
    path = tmp_path / "dag.json"
    path.write_text(perfect_lookup_dag().to_json())
    rc, doc = run_json(
        capsys,
        "adversary",
        "--n",
        "1",
        "--trials",
        "500",
        "--seed",
        "1",
        "--dag-file",
        str(path),
        "--check",
    )
    assert rc == 0
    assert doc["max_rate"] == 1.0
    assert doc["violations"] == 0  # a perfect lookup is wide, not shallow-paired


# ---------------------------------------------------------------------------
# config overlay


def test_config_supplies_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps({"schema": 1, "subcommand": "verify", "cliffords": "H", "paulis": "X"})
    )
    rc, doc = run_json(capsys, "verify", "--config", str(cfg))
    assert rc == 0 and doc["valid"] is True


def test_config_explicit_flag_wins(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 1, "cliffords": "H", "trials": 50}))
    rc, doc = run_json(capsys, "sample", "--config", str(cfg), "--seed", "1")
    assert rc == 0 and doc["trials"] == 50
    rc, doc = run_json(
        capsys, "sample", "--config", str(cfg), "--seed", "1", "--trials", "75"
    )
    assert rc == 0 and doc["trials"] == 75


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 1, "bogus": 1}))
    rc = main(["verify", "--config", str(cfg), "--cliffords", "H", "--paulis", "X"])
    capsys.readouterr()
    assert rc == 2


def test_config_rejects_wrong_schema(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 99}))
    rc = main(["verify", "--config", str(cfg), "--cliffords", "H", "--paulis", "X"])
    capsys.readouterr()
    assert rc == 2


def test_out_file(tmp_path, capsys):
    path = tmp_path / "res.json"
    rc = main(["verify", "--cliffords", "H", "--paulis", "X", "--out", str(path)])
    capsys.readouterr()
    assert rc == 0
    assert json.loads(path.read_text())["valid"] is True


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
