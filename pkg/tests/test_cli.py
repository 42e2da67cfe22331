"""Test the command-line interface."""

import json
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

from hilbert_asip.cli import cli


@pytest.fixture
def runner():
    """Provide a CLI runner working in a scratch directory."""
    runner = CliRunner()
    with runner.isolated_filesystem():
        yield runner


def test_rates(runner):
    """Test the rates report and its domain errors."""
    result = runner.invoke(cli, ["rates", "--p", "4", "--delta", "2"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["theta_bar"] == pytest.approx(26 / 53)
    assert report["delta_bar"] is None

    result = runner.invoke(cli, ["rates", "--p", "4", "--epsilon", "0.05"])
    assert json.loads(result.output)["delta_bar"] == pytest.approx(10.6)

    result = runner.invoke(cli, ["rates", "--p", "2"])
    assert result.exit_code == 2
    assert "p must exceed 2" in result.output


def test_simulate(runner, tmp_path: Path):
    """Test path export and error exit codes."""
    out = tmp_path / "paths"
    args = ["simulate", "--R", "2", "--n", "16", "--D", "3", "--output-dir", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    assert result.output.strip() == str(out)
    files = sorted(p.name for p in out.glob("path_*.csv"))
    assert files == ["path_1729_0.csv", "path_1729_1.csv"]
    lines = (out / "path_1729_0.csv").read_text().splitlines()
    assert lines[0] == "t,c1,c2,c3"
    assert len(lines) == 17
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["config"]["D"] == 3

    result = runner.invoke(cli, [*args[:-2], "--c", "1", "--output-dir", str(out)])
    assert result.exit_code == 2
    assert "lambda_1 must be below 1" in result.output

    blocker = tmp_path / "blocker"
    blocker.write_text("")
    result = runner.invoke(cli, [*args[:-2], "--output-dir", str(blocker)])
    assert result.exit_code == 3


def test_verify_reproducible(runner, tmp_path: Path):
    """Test that reruns with the same seed give byte-identical verdicts."""
    verdicts = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(
            cli, ["verify", "--suite", "rates", "--suite", "blocking", "--output-dir", str(out)]
        )
        assert result.exit_code == 0
        assert result.output.splitlines() == ["PASS rates (hard)", "PASS blocking (hard)"]
        verdicts.append(
            [(out / f"{suite}.json").read_bytes() for suite in ("rates", "blocking")]
        )
    assert verdicts[0] == verdicts[1]
    assert json.loads(verdicts[0][0])["pass"] is True

    result = runner.invoke(cli, ["report", str(tmp_path / "first")])
    assert result.exit_code == 0
    assert "| rates | hard | pass |" in result.output
    assert "| blocking | hard | pass |" in result.output
    assert "manifest" not in result.output


def test_verify_config_errors(runner, fixture_dir: Path, tmp_path: Path):
    """Test usage errors from invalid config values."""
    result = runner.invoke(
        cli, ["verify", "--pprime", "5", "--output-dir", str(tmp_path / "bad")]
    )
    assert result.exit_code == 2
    assert "pprime" in result.output

    result = runner.invoke(
        cli,
        [
            "verify",
            "--config",
            str(fixture_dir / "small_config.json"),
            "--cstar",
            "fast",
            "--output-dir",
            str(tmp_path / "bad"),
        ],
    )
    assert result.exit_code == 2


def test_mixing(runner, fixture_dir: Path):
    """Test the exact mixing table."""
    result = runner.invoke(cli, ["mixing", "--n-max", "3"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "n,beta_exact,beta_bound"
    rows = [line.split(",") for line in lines[1:]]
    assert [int(row[0]) for row in rows] == [1, 2, 3]
    assert [float(row[1]) for row in rows] == pytest.approx([0.25, 0.125, 0.0625])
    assert all(float(row[1]) <= float(row[2]) for row in rows)

    failing = fixture_dir / "failing_drift_chain.json"
    result = runner.invoke(cli, ["mixing", "--chain", str(failing)])
    assert result.exit_code == 2
    assert "Drift condition violated" in result.output

    malformed = Path("malformed_chain.json")
    malformed.write_text('{"P": [[0.5, 0.5], [0.5')
    result = runner.invoke(cli, ["mixing", "--chain", str(malformed)])
    assert result.exit_code == 2
    assert "Malformed JSON input" in result.output


def test_path_and_report_lookup(runner, tmp_path: Path, monkeypatch):
    """Test output directory lookup from the environment."""
    monkeypatch.setenv("HILBERT_ASIP_DIR", str(tmp_path))
    result = runner.invoke(cli, ["path"])
    assert result.output.strip() == str(tmp_path)

    result = runner.invoke(cli, ["report"])
    assert result.exit_code == 3

    runner.invoke(cli, ["verify", "--suite", "rates"])
    assert (tmp_path / "verify_far_1729" / "rates.json").exists()
    result = runner.invoke(cli, ["report"])
    assert result.exit_code == 0
    assert result.output.startswith("# Verification report: verify_far_1729")
    assert os.environ["HILBERT_ASIP_DIR"] == str(tmp_path)
