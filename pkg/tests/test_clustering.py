"""
Tests for the clustering package

This script tests basket features, customer profiles, standardization,
k-means, the Davies-Bouldin index and segment frequencies.
"""

import itertools
import os
import sys

import numpy as np
import pandas as pd
import pytest
from dotenv import load_dotenv
from sklearn.metrics import davies_bouldin_score

# Add the project root to the Python path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Load environment variables from .env file
load_dotenv()

from src.clustering import (
    basket_features,
    customer_features,
    davies_bouldin,
    kmeans,
    segment_frequencies,
    select_k,
    standardize,
)
from src.errors import (
    ClusteringError,
    DegenerateBasketError,
    DegenerateSegmentError,
    InputError,
    StandardizationError,
)


def make_lines(rows):
    """Product lines from (basket, customer, product, price, quantity, level, children) tuples"""
    return pd.DataFrame(
        rows,
        columns=["basket_id", "customer_id", "product_id", "unit_price", "quantity", "price_level", "children_flag"],
    )


def blobs(seed, centers, size=40, scale=0.5):
    rng = np.random.default_rng(seed)
    return np.vstack([rng.normal(center, scale, size=(size, len(center))) for center in centers])


def test_basket_value_capped_at_quantile():
    rows = [(f"B{i:03d}", "", "P1", float(i + 1), 1, "standard", False) for i in range(99)]
    rows.append(("B999", "", "P1", 1000.0, 1, "standard", False))
    features = basket_features(make_lines(rows))
    assert features.frame.loc["B999", "value_scaled"] == 1.0
    assert features.frame["value_scaled"].between(0, 1).all()


def test_basket_without_premium_or_children():
    features = basket_features(make_lines([("B1", "C1", "P1", 2.5, 2, "standard", False)]))
    row = features.frame.loc["B1"]
    assert row["premium_share"] == 0.0
    assert row["children_share"] == 0.0
    assert row["value"] == 5.0


def test_basket_shares_and_diversity():
    lines = make_lines(
        [
            ("B1", "C1", "P1", 10.0, 1, "high-end", False),
            ("B1", "C1", "P2", 5.0, 2, "standard", True),
            ("B1", "C1", "P2", 5.0, 1, "low-end", True),
            ("B2", "", "P3", 4.0, 1, "low-end", False),
        ]
    )
    frame = basket_features(lines).frame
    assert frame.loc["B1", "value"] == 25.0
    assert frame.loc["B1", "premium_share"] == pytest.approx(10 / 25)
    assert frame.loc["B1", "children_share"] == pytest.approx(15 / 25)
    assert frame.loc["B1", "product_count"] == 2
    assert frame.loc["B2", "customer_id"] == ""


def test_value_quantile_matches_sort_oracle():
    rng = np.random.default_rng(8)
    values = rng.lognormal(3.0, 1.0, size=1000)
    rows = [(f"B{i:04d}", "", "P1", float(v), 1, "standard", False) for i, v in enumerate(values)]
    features = basket_features(make_lines(rows))

    ordered = np.sort(values)
    position = 0.95 * (len(ordered) - 1)
    low = int(np.floor(position))
    expected = ordered[low] + (position - low) * (ordered[low + 1] - ordered[low])
    assert features.value_quantile == pytest.approx(expected, rel=1e-12)


def test_zero_value_baskets_are_excluded():
    lines = make_lines(
        [
            ("B1", "", "P1", 0.0, 1, "standard", False),
            ("B2", "", "P1", 3.0, 1, "standard", False),
        ]
    )
    features = basket_features(lines)
    assert features.excluded == 1
    assert list(features.frame.index) == ["B2"]

    with pytest.raises(DegenerateBasketError):
        basket_features(lines.iloc[:1])
    with pytest.raises(InputError):
        basket_features(lines.drop(columns=["price_level"]))


def test_basket_vectors_follow_frame():
    lines = make_lines(
        [
            ("B1", "C1", "P1", 6.0, 1, "high-end", False),
            ("B1", "C1", "P2", 2.0, 1, "standard", True),
            ("B2", "", "P1", 4.0, 2, "standard", False),
        ]
    )
    features = basket_features(lines)
    vectors = features.vectors()
    assert [vector.basket_id for vector in vectors] == ["B1", "B2"]
    assert vectors[0].premium_share == pytest.approx(0.75)
    assert vectors[0].children_share == pytest.approx(0.25)
    assert vectors[1].premium_share == 0.0
    for vector, (_, row) in zip(vectors, features.frame.iterrows()):
        assert vector.value_scaled == row["value_scaled"]
        assert vector.diversity_scaled == row["diversity_scaled"]

def test_single_basket_customer_profile():
    baskets = basket_features(make_lines([("B1", "C1", "P1", 8.0, 1, "high-end", True)]))
    customers = customer_features(baskets)
    basket = baskets.frame.loc["B1"]
    profile = customers.profiles()[0]
    assert profile.customer_id == "C1"
    assert profile.visit_count == 1
    assert profile.total_value_scaled == basket["value_scaled"]
    assert profile.premium_share == basket["premium_share"]
    assert profile.children_share == basket["children_share"]
    assert profile.mean_diversity == basket["diversity_scaled"]


def test_customer_premium_share_is_value_weighted():
    lines = make_lines(
        [
            ("B1", "C1", "P1", 10.0, 1, "high-end", False),
            ("B2", "C1", "P2", 10.0, 1, "standard", False),
            ("B3", "", "P3", 1.0, 1, "standard", False),
        ]
    )
    customers = customer_features(basket_features(lines))
    assert list(customers.frame.index) == ["C1"]
    assert customers.frame.loc["C1", "premium_share"] == pytest.approx(0.5)
    assert customers.frame.loc["C1", "visit_count"] == 2


def test_customer_shares_match_line_tally():
    rng = np.random.default_rng(4)
    rows = []
    for basket in range(200):
        customer = f"C{rng.integers(0, 20):02d}"
        for line in range(int(rng.integers(1, 5))):
            rows.append(
                (
                    f"B{basket:03d}",
                    customer,
                    f"P{rng.integers(0, 50)}",
                    float(rng.uniform(1, 20)),
                    int(rng.integers(1, 4)),
                    str(rng.choice(["low-end", "standard", "high-end"])),
                    bool(rng.random() < 0.3),
                )
            )
    lines = make_lines(rows)
    customers = customer_features(basket_features(lines)).frame

    for customer, group in lines.groupby("customer_id"):
        value = (group["unit_price"] * group["quantity"]).sum()
        premium = (group["unit_price"] * group["quantity"])[group["price_level"] == "high-end"].sum()
        children = (group["unit_price"] * group["quantity"])[group["children_flag"]].sum()
        assert customers.loc[customer, "premium_share"] == pytest.approx(premium / value)
        assert customers.loc[customer, "children_share"] == pytest.approx(children / value)
        assert customers.loc[customer, "visit_count"] == group["basket_id"].nunique()


def test_customer_features_need_monitored_baskets():
    baskets = basket_features(make_lines([("B1", "", "P1", 1.0, 1, "standard", False)]))
    with pytest.raises(InputError):
        customer_features(baskets)


def test_standardize_two_points():
    z, scaling = standardize([[0.0, 1.0], [2.0, 3.0]])
    assert np.allclose(z[:, 0], [-np.sqrt(0.5), np.sqrt(0.5)])
    assert np.allclose(scaling.invert(z), [[0.0, 1.0], [2.0, 3.0]])


def test_standardize_is_idempotent():
    z, _ = standardize(np.random.default_rng(1).normal(size=(50, 3)))
    again, _ = standardize(z)
    assert np.allclose(again, z, atol=1e-9)


def test_standardize_rejects_constant_dimension():
    with pytest.raises(StandardizationError) as excinfo:
        standardize([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    assert excinfo.value.dimension == 2
    with pytest.raises(StandardizationError):
        standardize([[1.0, 2.0]])


def test_kmeans_one_dimension():
    result = kmeans([[0.0], [1.0], [9.0], [10.0]], 2, seed=0)
    assert np.allclose(result.centers.ravel(), [0.5, 9.5])
    assert result.assignments.tolist() == [1, 1, 2, 2]
    assert result.inertia == pytest.approx(1.0)

    best = min(
        sum(np.var(group) * len(group) for group in (part, [p for p in [0, 1, 9, 10] if p not in part]))
        for size in (1, 2, 3)
        for part in itertools.combinations([0, 1, 9, 10], size)
    )
    assert result.inertia == pytest.approx(best)


def test_kmeans_saturated():
    points = np.array([[0.0, 1.0], [3.0, 2.0], [5.0, 5.0]])
    result = kmeans(points, 3)
    assert result.inertia == pytest.approx(0.0)
    assert sorted(map(tuple, result.centers)) == sorted(map(tuple, points))
    assert result.sizes.tolist() == [1, 1, 1]


def test_kmeans_duplication_invariance():
    points = blobs(2, [(0, 0), (10, 0), (0, 10)])
    single = kmeans(points, 3, seed=5)
    doubled = kmeans(np.vstack([points, points]), 3, seed=5)
    assert np.allclose(single.centers, doubled.centers)


def test_kmeans_is_reproducible_and_canonical():
    points = blobs(3, [(5, 5), (0, 0), (10, 0)])
    first = kmeans(points, 3, seed=11)
    second = kmeans(points, 3, seed=11)
    assert np.array_equal(first.assignments, second.assignments)
    assert np.array_equal(first.centers, second.centers)
    assert first.centers[:, 0].tolist() == sorted(first.centers[:, 0].tolist())
    assert set(first.assignments.tolist()) == {1, 2, 3}
    assert all(a >= b - 1e-9 for a, b in zip(first.inertia_trace, first.inertia_trace[1:]))


def test_kmeans_rejects_bad_k():
    with pytest.raises(ClusteringError):
        kmeans([[0.0], [1.0]], 3)
    with pytest.raises(ClusteringError):
        kmeans([[0.0], [1.0]], 0)


def test_davies_bouldin_hand_values():
    assert davies_bouldin([[0.0], [1.0]], [1, 2]) == pytest.approx(0.0)
    assert davies_bouldin([[0.0], [0.0], [1.0], [1.0]], [1, 1, 2, 2]) == pytest.approx(0.0)
    points = [[-0.5], [0.5], [9.5], [10.5]]
    assert davies_bouldin(points, [1, 1, 2, 2]) == pytest.approx(0.1)


def test_davies_bouldin_matches_sklearn():
    points = blobs(6, [(0, 0), (3, 1), (1, 4)], scale=1.0)
    result = kmeans(points, 3, seed=1)
    assert result.db_index >= 0
    assert result.db_index == pytest.approx(davies_bouldin_score(points, result.assignments), rel=1e-9)


def test_davies_bouldin_ignores_label_values():
    points = [[-0.5], [0.5], [9.5], [10.5]]
    assert davies_bouldin(points, [7, 7, 3, 3]) == pytest.approx(davies_bouldin(points, [1, 1, 2, 2]))


def test_davies_bouldin_undefined():
    with pytest.raises(ClusteringError):
        davies_bouldin([[0.0], [1.0]], [1, 1])
    with pytest.raises(ClusteringError):
        davies_bouldin([[0.0], [2.0], [1.0], [1.0]], [1, 1, 2, 2])
    with pytest.raises(ClusteringError):
        davies_bouldin([[0.0], [1.0]], [1, 2, 2])
    assert kmeans([[0.0], [1.0], [2.0]], 1).db_index is None


def test_select_k_finds_blobs():
    for seed in range(10):
        points = blobs(seed, [(0, 0), (20, 0), (0, 20)])
        k, result = select_k(points, range(2, 7), seed=seed)
        assert k == 3
        assert result.k == 3


def test_select_k_singleton_range():
    points = blobs(0, [(0, 0), (20, 0), (0, 20)])
    k, _ = select_k(points, [2])
    assert k == 2
    with pytest.raises(ClusteringError):
        select_k(points, [1, 2])


def test_segment_frequencies_examples():
    result = segment_frequencies([1, 1], [2, 4])
    assert result.frequencies.tolist() == [3.0]
    assert result.customers.tolist() == [2]

    result = segment_frequencies([1, 2, 3, 2], [1, 1, 1, 1])
    assert result.frequencies.tolist() == [1.0, 1.0, 1.0]
    assert result.m == 3


def test_segment_frequencies_poisson_oracle():
    rng = np.random.default_rng(12)
    rates = np.array([0.5, 2.0, 6.0])
    labels = rng.integers(1, 4, size=6000)
    visits = rng.poisson(rates[labels - 1]) + 1
    result = segment_frequencies(labels, visits, m=3)
    for j in range(3):
        standard_error = np.sqrt(rates[j] / result.customers[j])
        assert abs(result.frequencies[j] - (rates[j] + 1)) < 3 * standard_error


def test_segment_frequencies_empty_segment():
    with pytest.raises(DegenerateSegmentError) as excinfo:
        segment_frequencies([1, 3], [2, 2], m=3)
    assert excinfo.value.segment == 2
