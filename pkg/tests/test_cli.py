from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from rosmac import SimConfig, State, integrate, simulate_path
from rosmac.cli import main

from conftest import CYCLE_PARAMS, START

CYCLE_FLAGS = ["-m", "3", "-c", "1", "-k", "3"]


def _read_csv(path):
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


def test_analyze_reports_structure(capsys):
    assert main(["analyze", *CYCLE_FLAGS]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["params"] == {"m": 3.0, "c": 1.0, "k": 3.0}
    assert payload["coexistence_exists"] is True
    assert payload["hopf_k"] == 2.0
    kinds = [entry["kind"] for entry in payload["equilibria"]]
    assert kinds == ["origin", "prey_only", "coexistence"]
    labels = [entry["classification"] for entry in payload["equilibria"]]
    assert labels == ["saddle", "saddle", "source"]
    inner = payload["equilibria"][2]
    assert inner["point"][0] == pytest.approx(0.5, abs=1e-15)
    assert inner["point"][1] == pytest.approx(5.0 / 12.0, abs=1e-15)
    identity = payload["trace_identity"]
    assert identity["lhs"] == pytest.approx(1.0 / 6.0, rel=1e-12)
    assert identity["rhs"] == pytest.approx(1.0 / 6.0, rel=1e-12)
    assert payload["extinction"]["outcome"] == "coexistence_possible"


def test_analyze_doomed_predator(capsys):
    assert main(["analyze", "-m", "0.5", "-c", "1", "-k", "4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["coexistence_exists"] is False
    assert payload["extinction"]["outcome"] == "predator_extinct_low_gain"
    assert payload["hopf_k"] is None
    assert payload["trace_identity"] is None


def test_missing_parameters_exit_2(capsys):
    assert main(["analyze"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err and "-m" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("rosmac ")


def test_usage_errors_exit_2(capsys, tmp_path):
    cases = [
        ["simulate-ode", *CYCLE_FLAGS, "--x0", "1"],
        ["simulate-ode", *CYCLE_FLAGS, "--x0=-1,0.5"],
        ["simulate-ode", *CYCLE_FLAGS, "--dt", "0"],
        ["phase-portrait", *CYCLE_FLAGS, "--grid", "0,1,2"],
        ["verify", *CYCLE_FLAGS, "--p", "0"],
        ["analyze", "-m", "-3", "-c", "1", "-k", "3"],
        ["analyze", *CYCLE_FLAGS, "--config", str(tmp_path / "missing.json")],
    ]
    for argv in cases:
        assert main(argv) == 2, argv
        assert "error:" in capsys.readouterr().err


def test_simulate_ode_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        [
            "simulate-ode",
            *CYCLE_FLAGS,
            "-T",
            "5",
            "--dt",
            "0.01",
            "--out",
            str(out),
            "--svg",
        ]
    )
    assert code == 0
    header, rows = _read_csv(out / "trajectory.csv")
    assert header == ["t", "N", "P"]
    assert len(rows) == 501
    # Values round-trip through the 17-significant-digit format exactly.
    traj = integrate(CYCLE_PARAMS, START, 5.0, 0.01)
    assert float(rows[0][1]) == 1.0
    assert float(rows[-1][1]) == traj.states[-1, 0]
    assert float(rows[-1][2]) == traj.states[-1, 1]
    svg = (out / "trajectory.svg").read_text()
    assert svg.startswith("<svg")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "simulate-ode"
    assert manifest["params"] == {"m": 3.0, "c": 1.0, "k": 3.0}
    assert manifest["options"]["T"] == 5.0


def test_simulate_ode_long_run_verdict(capsys):
    code = main(["simulate-ode", *CYCLE_FLAGS, "-T", "300", "--dt", "0.01"])
    assert code == 0
    assert "long-run verdict: limit_cycle" in capsys.readouterr().out


def test_phase_portrait_outputs(tmp_path, capsys):
    out = tmp_path / "portrait"
    code = main(
        [
            "phase-portrait",
            *CYCLE_FLAGS,
            "-T",
            "20",
            "--dt",
            "0.01",
            "--res",
            "10",
            "--grid",
            "0,4,0,4",
            "--out",
            str(out),
            "--svg",
        ]
    )
    assert code == 0
    header, rows = _read_csv(out / "field.csv")
    assert header == ["N", "P", "dN", "dP"]
    assert len(rows) == 100
    assert (out / "trajectory.csv").exists()
    assert "<svg" in (out / "portrait.svg").read_text()


def test_simulate_sde_reproducible_output(tmp_path, capsys):
    args = [
        "simulate-sde",
        *CYCLE_FLAGS,
        "-T",
        "2",
        "-M",
        "200",
        "--seed",
        "42",
        "--stream",
        "3",
    ]
    first = tmp_path / "a"
    second = tmp_path / "b"
    assert main([*args, "--out", str(first)]) == 0
    assert "clamp events:" in capsys.readouterr().out
    assert main([*args, "--out", str(second)]) == 0
    assert (first / "path.csv").read_bytes() == (second / "path.csv").read_bytes()
    header, rows = _read_csv(first / "path.csv")
    assert header == ["t", "N", "P"]
    cfg = SimConfig(t_end=2.0, m_steps=200, seed=42)
    path = simulate_path(CYCLE_PARAMS, START, cfg, stream_index=3)
    assert float(rows[-1][1]) == path.states[-1, 0]
    assert float(rows[-1][2]) == path.states[-1, 1]


def test_ensemble_outputs_and_zero_noise_variance(tmp_path, capsys):
    out = tmp_path / "ens"
    code = main(
        [
            "ensemble",
            *CYCLE_FLAGS,
            "-T",
            "2",
            "-M",
            "200",
            "--runs",
            "16",
            "--zero-noise",
            "--save-paths",
            "2",
            "--out",
            str(out),
            "--svg",
        ]
    )
    assert code == 0
    assert "runs: 16" in capsys.readouterr().out
    header, rows = _read_csv(out / "ensemble.csv")
    assert header == [
        "t",
        "mean_N",
        "var_N",
        "band_lo_N",
        "band_hi_N",
        "mean_P",
        "var_P",
        "band_lo_P",
        "band_hi_P",
    ]
    assert len(rows) == 201
    # Identical paths with a power-of-two run count: variance exactly zero.
    assert {row[2] for row in rows} == {"0"}
    assert {row[6] for row in rows} == {"0"}
    assert (out / "path_0000.csv").exists()
    assert (out / "path_0001.csv").exists()
    assert (out / "ensemble_n.svg").exists()
    assert (out / "ensemble_p.svg").exists()


def test_ensemble_worker_count_invariance(tmp_path):
    base = [
        "ensemble",
        *CYCLE_FLAGS,
        "-T",
        "1",
        "-M",
        "500",
        "--runs",
        "600",
        "--seed",
        "9",
    ]
    serial = tmp_path / "serial"
    threaded = tmp_path / "threaded"
    assert main([*base, "--out", str(serial)]) == 0
    assert main([*base, "--workers", "4", "--out", str(threaded)]) == 0
    assert (serial / "ensemble.csv").read_bytes() == (threaded / "ensemble.csv").read_bytes()


def test_manifest_replay_is_byte_identical(tmp_path):
    first = tmp_path / "first"
    replay = tmp_path / "replay"
    args = [
        "ensemble",
        *CYCLE_FLAGS,
        "-T",
        "2",
        "-M",
        "250",
        "--runs",
        "8",
        "--seed",
        "31",
        "--out",
        str(first),
    ]
    assert main(args) == 0
    code = main(
        [
            "ensemble",
            "--config",
            str(first / "manifest.json"),
            "--out",
            str(replay),
        ]
    )
    assert code == 0
    assert (first / "ensemble.csv").read_bytes() == (replay / "ensemble.csv").read_bytes()
    original = json.loads((first / "manifest.json").read_text())
    replayed = json.loads((replay / "manifest.json").read_text())
    original["options"].pop("out")
    replayed["options"].pop("out")
    del original["timestamp"], replayed["timestamp"]
    assert original == replayed


def test_seed_env_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RM_SEED", "77")
    out = tmp_path / "env"
    args = ["simulate-sde", *CYCLE_FLAGS, "-T", "1", "-M", "100", "--out", str(out)]
    assert main(args) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 77

    explicit = tmp_path / "explicit"
    args = [
        "simulate-sde",
        *CYCLE_FLAGS,
        "-T",
        "1",
        "-M",
        "100",
        "--seed",
        "5",
        "--out",
        str(explicit),
    ]
    assert main(args) == 0
    assert json.loads((explicit / "manifest.json").read_text())["seed"] == 5

    monkeypatch.setenv("RM_SEED", "not-a-number")
    assert main(["simulate-sde", *CYCLE_FLAGS, "-T", "1", "-M", "100"]) == 2
    assert "RM_SEED" in capsys.readouterr().err


def test_verify_passes_and_reports(tmp_path, capsys):
    out = tmp_path / "verify"
    code = main(
        [
            "verify",
            *CYCLE_FLAGS,
            "--res",
            "60",
            "-T",
            "5",
            "-M",
            "400",
            "--runs",
            "32",
            "--seed",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["all_passed"] is True
    assert payload["constants"]["c_lyap"] == pytest.approx(86.0)
    assert payload["constants"]["c_mono"] == pytest.approx(37.0 / 6.0)
    names = [check["inequality_name"] for check in payload["checks"]]
    assert names[0].startswith("generator")
    assert names[1] == "monotonicity"
    assert names[2:] == ["moment_bound_p=1", "moment_bound_p=2", "moment_bound_p=4"]
    assert all(check["passed"] for check in payload["checks"])
    assert payload["growth_proxy"]["passed"] is True
    assert payload["growth_proxy"]["worst"] <= payload["growth_proxy"]["bound"]
    saved = json.loads((out / "verify.json").read_text())
    assert saved == payload


def test_verify_sabotage_fails_with_exit_1(capsys):
    code = main(
        [
            "verify",
            *CYCLE_FLAGS,
            "--res",
            "40",
            "-T",
            "2",
            "-M",
            "200",
            "--runs",
            "8",
            "--c-override",
            "3.0",
        ]
    )
    assert code == 1
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert payload["all_passed"] is False
    assert "FAILED generator" in captured.err


def test_verify_rejects_boundary_grid(capsys):
    code = main(["verify", *CYCLE_FLAGS, "--grid", "0,10,0,10", "--res", "20"])
    assert code == 2
    assert "interior" in capsys.readouterr().err


def test_math_of_growth_proxy_matches_library(tmp_path, capsys):
    # The CLI's reported worst proxy must be reproducible from the library
    # with the same seed and stream addressing.
    code = main(
        [
            "verify",
            *CYCLE_FLAGS,
            "--res",
            "20",
            "-T",
            "3",
            "-M",
            "300",
            "--runs",
            "8",
            "--seed",
            "4",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    from rosmac import ensemble_moments

    cfg = SimConfig(t_end=3.0, m_steps=300, seed=4)
    _, proxies = ensemble_moments(
        CYCLE_PARAMS, START, cfg, 8, (1.0, 2.0, 4.0), t_min=1.0
    )
    assert payload["growth_proxy"]["worst"] == proxies.max()
    assert payload["growth_proxy"]["worst_stream"] == int(proxies.argmax())
