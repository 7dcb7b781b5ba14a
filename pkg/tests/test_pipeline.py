"""
Tests for the estimation pipeline

This script tests ingestion, run configuration, the clustering and
estimation service, reports and the validation split, using synthetic
transaction logs whose true number of unique customers is known.
"""

import json
import math
import os
import sys

import numpy as np
import pandas as pd
import pytest
from dotenv import load_dotenv

# Add the project root to the Python path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Load environment variables from .env file
load_dotenv()

from src.errors import EmptyInputError, InputError, NothingToEstimateError, SplitError
from src.pipeline import (
    CustomerEstimationService,
    RunConfig,
    estimate_pipeline,
    filter_extreme_frequency,
    generate_log,
    ingest,
    load_run_config,
    split_periods,
    validate,
    validation_split,
)
from src.pipeline.reporting import write_report, write_reports
from src.pipeline.synthetic import SegmentProfile
from src.pipeline.validation import load_flags

HEADER = "basket_id,customer_id,product_id,unit_price,quantity,price_level,children_flag,timestamp\n"

# Segments that never share premium or children products
SEPARATED_PROFILES = (
    SegmentProfile(
        name="family", frequency=6.0, premium_propensity=0.0,
        children_propensity=0.95, large_basket_share=0.8, member_rate=0.8,
    ),
    SegmentProfile(
        name="premium", frequency=3.0, premium_propensity=0.95,
        children_propensity=0.0, large_basket_share=0.4, member_rate=0.6,
    ),
    SegmentProfile(
        name="budget", frequency=1.5, premium_propensity=0.0,
        children_propensity=0.0, large_basket_share=0.05, member_rate=0.3,
    ),
)


@pytest.fixture(scope="module")
def synthetic_log():
    return generate_log(seed=1, monitored=2000, unmonitored=3000)


@pytest.fixture(scope="module")
def fixed_config():
    return RunConfig(n_baskets=6, m_segments=3, seed=0, restarts=5)


def write_log(path, rows):
    path.write_text(HEADER + "".join(row + "\n" for row in rows))
    return str(path)


def visit_lines(customer, visits, start=0):
    return pd.DataFrame(
        {
            "basket_id": [f"{customer}-{start + visit}" for visit in range(visits)],
            "customer_id": customer,
            "product_id": "P1",
            "unit_price": 1.0,
            "quantity": 1,
            "price_level": "standard",
            "children_flag": False,
        }
    )


def test_ingest_rejects_malformed_row(tmp_path):
    path = write_log(
        tmp_path / "log.csv",
        [
            "B1,C1,P1,2.50,1,standard,false,2018-01-02",
            "B1,C1,P2,abc,1,standard,false,2018-01-02",
            "B2,,P3,4.00,2,high-end,true,2018-01-03",
        ],
    )
    result = ingest(path)
    assert result.summary.rows == 3
    assert result.summary.accepted == 2
    assert [row.line for row in result.summary.rejected] == [3]
    assert "unit_price" in result.summary.rejected[0].reason
    assert result.lines["customer_id"].tolist() == ["C1", ""]
    assert result.lines["line"].tolist() == [2, 4]


def test_ingest_monitored_share(tmp_path):
    rows = [f"B{i},{'C' + str(i) if i < 69 else ''},P1,1.00,1,low-end,no," for i in range(100)]
    summary = ingest(write_log(tmp_path / "log.csv", rows)).summary
    assert summary.baskets == 100
    assert summary.monitored_share == pytest.approx(0.69)
    assert summary.customers == 69


def test_ingest_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(EmptyInputError):
        ingest(str(empty))
    with pytest.raises(EmptyInputError):
        ingest(write_log(tmp_path / "header.csv", []))
    with pytest.raises(InputError):
        ingest(str(tmp_path / "missing.csv"))

    no_price = tmp_path / "no_price.csv"
    no_price.write_text("basket_id,product_id,quantity,price_level,children_flag\nB1,P1,1,standard,false\n")
    with pytest.raises(InputError, match="unit_price"):
        ingest(str(no_price))

    mixed = write_log(
        tmp_path / "mixed.csv",
        ["B1,C1,P1,1.00,1,standard,false,", "B1,C2,P2,1.00,1,standard,false,"],
    )
    with pytest.raises(InputError, match="B1"):
        ingest(mixed)


def test_ingest_semicolon_delimiter(tmp_path):
    path = tmp_path / "log.csv"
    path.write_text(HEADER.replace(",", ";") + "B1;C1;P1;1.5;2;Standard;1;2018-02-01\n")
    lines = ingest(str(path), delimiter=";").lines
    assert lines.loc[0, "price_level"] == "standard"
    assert bool(lines.loc[0, "children_flag"])
    assert lines.loc[0, "timestamp"] == pd.Timestamp("2018-02-01")


def test_filter_extreme_frequency_boundary():
    lines = pd.concat([visit_lines("heavy", 16), visit_lines("regular", 15), visit_lines("", 3)], ignore_index=True)
    filtered, removed = filter_extreme_frequency(lines, 15, 1.0)
    assert removed == 1
    assert "heavy" not in set(filtered["customer_id"])
    assert (filtered["customer_id"] == "regular").sum() == 15
    assert (filtered["customer_id"] == "").sum() == 3

    _, removed = filter_extreme_frequency(lines, math.inf, 1.0)
    assert removed == 0
    _, removed = filter_extreme_frequency(lines, 15, 12.0)
    assert removed == 0


def test_run_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("# weekly run\nN_BASKETS=auto\nBASKET_K_RANGE=3-9\nESTIMATOR=map\nGAMMA=2,2,2\nSEED=5\n")
    config = load_run_config(str(path), seed=9)
    assert config.n_baskets is None
    assert config.basket_k_range == (3, 9)
    assert config.gamma == [2.0, 2.0, 2.0]
    assert config.seed == 9

    path.write_text("ESTIMATOR=map\n")
    with pytest.raises(InputError):
        load_run_config(str(path))
    path.write_text("COLOUR=blue\n")
    with pytest.raises(InputError, match="colour"):
        load_run_config(str(path))
    with pytest.raises(InputError):
        load_run_config(None, n_baskets=2, m_segments=3)
    with pytest.raises(InputError):
        load_run_config(None, frequency_cap=0)


def test_run_config_periods():
    config = RunConfig(period_months=12)
    assert config.months == 12
    quarter = config.for_period("2018Q1", "Q")
    assert quarter.period == "2018Q1"
    assert quarter.months == 3


def test_split_periods(synthetic_log):
    dated = generate_log(seed=2, monitored=50, unmonitored=50, timestamps=True).frame()
    quarters = split_periods(dated, "Q")
    assert [label for label, _ in quarters] == ["2018Q1", "2018Q2", "2018Q3", "2018Q4"]
    assert sum(len(lines) for _, lines in quarters) == len(dated)
    assert split_periods(dated, None)[0][0] == "all"
    with pytest.raises(InputError):
        split_periods(synthetic_log.frame(), "M")


def test_cluster_period_partitions_baskets(synthetic_log, fixed_config):
    service = CustomerEstimationService(fixed_config)
    frame = synthetic_log.frame()
    period = service.cluster_period(frame)
    kept, removed = filter_extreme_frequency(frame, fixed_config.frequency_cap, fixed_config.months)
    assert period.basket_types.k == 6
    assert period.segments.k == 3
    assert period.removed_customers == removed
    assert len(period.basket_labels()) == kept["basket_id"].nunique()
    assert len(period.segment_labels()) == synthetic_log.monitored_customers - period.removed_customers

    model, frequencies = service.monitored_model(period)
    assert model.is_identifiable
    assert sorted(frequencies.frequencies) == pytest.approx([1.5, 3.0, 6.0], abs=0.75)

    tables = service.cluster_only(frame)
    assert len(tables["basket_types"]) == 6
    assert tables["segments_centers"]["size"].sum() == frequencies.customers.sum()
    assert "premium_share" in tables["segments_centers"].columns


@pytest.mark.slow
def test_estimate_recovers_unmonitored_customers(fixed_config):
    log = generate_log(seed=1, monitored=4000, unmonitored=4000, profiles=SEPARATED_PROFILES)
    report = CustomerEstimationService(fixed_config).estimate(log.frame())
    truth = log.unmonitored_customers
    assert abs(report.totals.estimated_customers - truth) / truth < 0.05
    assert abs(report.totals.naive_customers - truth) > abs(report.totals.estimated_customers - truth)
    assert report.diagnostics.converged and report.diagnostics.identifiable
    assert report.diagnostics.d_hat_in_range


@pytest.mark.slow
def test_report_invariants(synthetic_log, fixed_config):
    report = estimate_pipeline(synthetic_log.frame(), fixed_config)[0]
    table = report.segment_table()
    q_hat = table["q_hat"].to_numpy()
    recomposed = np.sum(q_hat * report.a / table["frequency"].to_numpy())
    assert recomposed == pytest.approx(report.totals.estimated_customers, rel=1e-9)
    assert table["penetration"].between(0, 1).all()
    assert table["estimated_customers"].sum() == pytest.approx(report.totals.estimated_customers)
    assert table["monitored_customers"].sum() == report.totals.monitored_customers
    assert report.totals.ratio_to_naive == pytest.approx(
        report.totals.estimated_customers / report.totals.naive_customers
    )
    assert report.a == int((synthetic_log.lines.groupby("basket_id")["customer_id"].first() == "").sum())


@pytest.mark.slow
def test_estimate_is_deterministic(synthetic_log, fixed_config, tmp_path):
    first = estimate_pipeline(synthetic_log.frame(), fixed_config)
    second = estimate_pipeline(synthetic_log.frame(), fixed_config)
    paths_a = write_report(first[0], str(tmp_path / "a"))
    paths_b = write_report(second[0], str(tmp_path / "b"))
    for path_a, path_b in zip(paths_a, paths_b):
        assert path_a.read_bytes() == path_b.read_bytes()
    payload = json.loads(paths_a[0].read_text())
    assert payload["totals"]["estimated_customers"] == first[0].totals.estimated_customers


def test_estimate_needs_unmonitored_baskets(synthetic_log, fixed_config):
    frame = synthetic_log.frame()
    monitored_only = frame.loc[frame["customer_id"] != ""]
    with pytest.raises(NothingToEstimateError):
        CustomerEstimationService(fixed_config).estimate(monitored_only)


def test_validation_split(synthetic_log, tmp_path):
    frame = synthetic_log.frame()
    split = validation_split(frame, synthetic_log.flag_map())
    hidden = split.lines["customer_id"] == ""
    flags = synthetic_log.flags.set_index("customer_id")["flag"]
    assert split.true_customers == int((~flags.astype(bool)).sum())
    assert split.flagged_customers == int(flags.astype(bool).sum())
    assert split.lines.loc[~hidden, "customer_id"].nunique() == split.flagged_customers
    assert split.lines["basket_id"].nunique() == frame.loc[frame["customer_id"] != "", "basket_id"].nunique()

    with pytest.raises(SplitError):
        validation_split(frame, {customer: True for customer in synthetic_log.flag_map()})
    with pytest.raises(InputError):
        validation_split(frame, {})

    synthetic_log.write(str(tmp_path / "log.csv"), str(tmp_path / "flags.csv"))
    assert load_flags(str(tmp_path / "flags.csv")) == synthetic_log.flag_map()


@pytest.mark.slow
def test_validation_beats_naive(fixed_config):
    log = generate_log(seed=3, monitored=4000, unmonitored=10)
    result = validate(log.frame(), log.flag_map(), fixed_config)
    assert len(result.rows) == 1
    row = result.rows[0]
    assert row.ape < row.naive_ape
    summary = result.summary()
    assert set(summary["estimator"]) == {"proposed", "naive"}


@pytest.mark.slow
def test_validation_per_period(fixed_config):
    log = generate_log(seed=4, monitored=3000, unmonitored=10, timestamps=True)
    result = validate(log.frame(), log.flag_map(), fixed_config, granularities=["Q", "Y"])
    periods = [(row.granularity, row.period) for row in result.rows]
    assert len(periods) + len(result.skipped) == 5
    assert ("Y", "2018") in periods
    assert set(result.table()["granularity"]) <= {"Q", "Y"}


@pytest.mark.slow
def test_pipeline_beats_naive_across_seeds():
    config = RunConfig(n_baskets=6, m_segments=3, seed=0, restarts=3)
    errors, naive_errors = [], []
    for seed in range(20):
        log = generate_log(seed=100 + seed, monitored=3000, unmonitored=3000, profiles=SEPARATED_PROFILES)
        report = estimate_pipeline(log.frame(), config)[0]
        truth = log.unmonitored_customers
        errors.append(abs(report.totals.estimated_customers - truth) / truth)
        naive_errors.append(abs(report.totals.naive_customers - truth) / truth)
    errors, naive_errors = np.array(errors), np.array(naive_errors)
    assert np.sum((errors < 0.05) & (errors < naive_errors)) >= 18
    assert np.median(errors) < np.median(naive_errors)


def test_write_reports_stacks_periods(tmp_path, fixed_config):
    dated = generate_log(seed=5, monitored=400, unmonitored=400, timestamps=True).frame()
    reports = estimate_pipeline(dated, fixed_config.model_copy(update={"period_frequency": "Y", "period_months": 12}))
    assert [report.period for report in reports] == ["2018"]
    paths = write_reports(reports, str(tmp_path))
    segments = pd.read_csv(paths[1])
    assert set(segments["period"].astype(str)) == {"2018"}
    assert len(segments) == 3
