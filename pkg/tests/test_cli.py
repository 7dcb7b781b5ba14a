"""
Tests for the command line interface

This script runs the subcommands end to end on small synthetic logs and
checks the written files and the exit codes.
"""

import json
import os
import sys

import pandas as pd
import pytest
from dotenv import load_dotenv

# Add the project root to the Python path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Load environment variables from .env file
load_dotenv()

from src.errors import ConvergenceError, DegenerateSegmentError, IdentifiabilityError, InputError
from src.pipeline import cli, validation
from src.pipeline.cli import main


@pytest.fixture(scope="module")
def log_files(tmp_path_factory):
    directory = tmp_path_factory.mktemp("log")
    log_path, flags_path = directory / "log.csv", directory / "flags.csv"
    code = main(
        [
            "generate",
            "--out", str(log_path),
            "--flags", str(flags_path),
            "--seed", "3",
            "--monitored", "1200",
            "--unmonitored", "1200",
        ]
    )
    assert code == 0
    return str(log_path), str(flags_path)


def run_options(log_path, out_dir):
    return ["--data", log_path, "--out", str(out_dir), "--n-baskets", "6", "--m-segments", "3", "--seed", "1"]


def test_generate_writes_log(log_files):
    log_path, flags_path = log_files
    lines = pd.read_csv(log_path, dtype=str, keep_default_na=False)
    flags = pd.read_csv(flags_path, dtype=str)
    assert lines["customer_id"].str.startswith("M").any()
    assert (lines["customer_id"] == "").any()
    assert len(flags) == 1200


def test_estimate_writes_report(log_files, tmp_path, capsys):
    log_path, _ = log_files
    assert main(["estimate"] + run_options(log_path, tmp_path)) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    segments = pd.read_csv(tmp_path / "segments.csv")
    assert report["period"] == "all"
    assert report["diagnostics"]["m_segments"] == 3
    assert isinstance(report["diagnostics"]["d_hat_in_range"], bool)
    assert len(segments) == 3
    assert segments["estimated_customers"].sum() == pytest.approx(report["totals"]["estimated_customers"], rel=1e-6)
    assert "unmonitored customers" in capsys.readouterr().out


def test_estimate_is_byte_identical(log_files, tmp_path):
    log_path, _ = log_files
    assert main(["estimate"] + run_options(log_path, tmp_path / "a")) == 0
    assert main(["estimate"] + run_options(log_path, tmp_path / "b")) == 0
    for name in ("report.json", "segments.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cluster_only(log_files, tmp_path):
    log_path, _ = log_files
    assert main(["cluster-only"] + run_options(log_path, tmp_path)) == 0
    basket_types = pd.read_csv(tmp_path / "basket_types.csv")
    centers = pd.read_csv(tmp_path / "segments_centers.csv")
    assert len(basket_types) == 6
    assert len(centers) == 3
    assert {"period", "size", "db_index"} <= set(centers.columns)
    baskets = pd.read_csv(tmp_path / "baskets.csv")
    assert baskets["basket_id"].is_unique
    assert set(baskets["basket_type"]) <= {f"type-{index}" for index in range(1, 7)}
    assert baskets[["value_scaled", "premium_share", "children_share", "diversity_scaled"]].stack().between(0, 1).all()


def test_validate(log_files, tmp_path):
    log_path, flags_path = log_files
    assert main(["validate", "--flags", flags_path] + run_options(log_path, tmp_path)) == 0
    table = pd.read_csv(tmp_path / "validation.csv")
    summary = pd.read_csv(tmp_path / "validation_summary.csv")
    assert len(table) == 1
    assert set(summary["estimator"]) == {"proposed", "naive"}


def test_validate_rejects_unknown_granularity(log_files, tmp_path, capsys):
    log_path, flags_path = log_files
    code = main(["validate", "--flags", flags_path, "--period-frequency", "D"] + run_options(log_path, tmp_path))
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_validate_one_sided_flags_exit_with_two(log_files, tmp_path, capsys):
    log_path, flags_path = log_files
    flags = pd.read_csv(flags_path, dtype=str)
    flags["flag"] = "true"
    all_true = tmp_path / "all_true.csv"
    flags.to_csv(all_true, index=False)
    code = main(["validate", "--flags", str(all_true)] + run_options(log_path, tmp_path / "out"))
    assert code == 2
    assert "one-sided" in capsys.readouterr().err
    assert not (tmp_path / "out" / "validation.csv").exists()


def test_validate_unidentifiable_period_exits_with_three(monkeypatch, log_files, tmp_path, capsys):
    def unidentifiable(self, lines):
        raise IdentifiabilityError("basket type profiles are linearly dependent")

    monkeypatch.setattr(validation.CustomerEstimationService, "estimate", unidentifiable)
    log_path, flags_path = log_files
    assert main(["validate", "--flags", flags_path] + run_options(log_path, tmp_path)) == 3
    assert "linearly dependent" in capsys.readouterr().err


def test_validate_skips_periods_with_data_gaps(monkeypatch, log_files, tmp_path, capsys):
    def empty_segment(self, lines):
        raise DegenerateSegmentError("segment 2 has no customers")

    monkeypatch.setattr(validation.CustomerEstimationService, "estimate", empty_segment)
    log_path, flags_path = log_files
    assert main(["validate", "--flags", flags_path] + run_options(log_path, tmp_path)) == 2
    assert "no period could be validated" in capsys.readouterr().err


def test_simulate_scenario(tmp_path):
    assert main(["simulate", "--scenario", "ii", "--nu", "3", "--seed", "7", "--out", str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / "table1.csv")
    naive = table.loc[table["estimator"] == "naive"].iloc[0]
    assert naive["mean_ape"] == pytest.approx(40.0)
    assert naive["replications"] == 3
    assert naive["seed"] == 7
    assert not (tmp_path / "scenarios.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert {row["estimator"] for row in summary["scenarios"]} == {"naive", "mle"}

    first = (tmp_path / "table1.csv").read_bytes()
    assert main(["simulate", "--scenario", "ii", "--nu", "3", "--seed", "7", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "table1.csv").read_bytes() == first


def test_simulate_with_population_frequencies(tmp_path):
    options = ["simulate", "--scenario", "ii", "--nu", "3", "--seed", "7"]
    assert main(options + ["--out", str(tmp_path / "counted")]) == 0
    assert main(options + ["--population-frequencies", "--out", str(tmp_path / "population")]) == 0
    counted = pd.read_csv(tmp_path / "counted" / "table1.csv").set_index("estimator")
    population = pd.read_csv(tmp_path / "population" / "table1.csv").set_index("estimator")
    assert population.loc["naive", "mean_ape"] == pytest.approx(40.0)
    assert counted.loc["naive", "mean_ape"] == pytest.approx(40.0)
    assert population.loc["mle", "mean_ape"] != pytest.approx(counted.loc["mle", "mean_ape"])

def test_simulate_sweep(tmp_path):
    code = main(["simulate", "--sweep", "a0", "--grid", "100,1000,10000", "--nu", "3", "--seed", "7", "--out", str(tmp_path)])
    assert code == 0
    sweep = pd.read_csv(tmp_path / "sweep_a0.csv")
    assert len(sweep.loc[sweep["estimator"] == "mle"]) == 3
    assert sorted(sweep["value"].unique()) == [100.0, 1000.0, 10000.0]


def test_simulate_unknown_scenario(tmp_path):
    assert main(["simulate", "--scenario", "xi", "--nu", "1", "--out", str(tmp_path)]) == 2


def test_input_errors_exit_with_two(tmp_path, capsys):
    assert main(["estimate", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err

    log = tmp_path / "log.csv"
    log.write_text("basket_id,product_id,unit_price,quantity,price_level,children_flag\nB1,P1,1,1,standard,false\n")
    assert main(["estimate", "--data", str(log), "--estimator", "map", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("error, code", [(IdentifiabilityError, 3), (ConvergenceError, 4), (InputError, 2)])
def test_exit_codes(monkeypatch, log_files, tmp_path, error, code):
    def failing(*args, **kwargs):
        raise error("failed on purpose")

    monkeypatch.setattr(cli, "estimate_pipeline", failing)
    log_path, _ = log_files
    assert main(["estimate"] + run_options(log_path, tmp_path)) == code


def test_unknown_log_level_falls_back(tmp_path):
    assert main(["--log-level", "loud", "simulate", "--scenario", "xi", "--nu", "1", "--out", str(tmp_path)]) == 2
