"""
Basket and Customer Features

This module derives the four clustering dimensions from product lines:
- basket value scaled by the 95% quantile of basket values
- value share of high-end (premium) products
- value share of children products
- diversity: distinct products scaled by the 90% quantile of product counts

Customer profiles aggregate the same indicators over a customer's baskets.
"""

import logging
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DegenerateBasketError, InputError
from ..stats import quantile

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = ["value_scaled", "premium_share", "children_share", "diversity_scaled"]
PROFILE_COLUMNS = ["total_value_scaled", "premium_share", "children_share", "mean_diversity"]
LINE_COLUMNS = ["basket_id", "product_id", "unit_price", "quantity", "price_level", "children_flag"]
VALUE_QUANTILE = 0.95
DIVERSITY_QUANTILE = 0.90
PREMIUM_LEVEL = "high-end"


class BasketFeatureVector(BaseModel):
    """Clustering features of one basket"""

    basket_id: str
    value_scaled: float = Field(ge=0, le=1)
    premium_share: float = Field(ge=0, le=1)
    children_share: float = Field(ge=0, le=1)
    diversity_scaled: float = Field(ge=0, le=1)


class CustomerProfile(BaseModel):
    """Clustering features of one monitored customer"""

    customer_id: str
    total_value_scaled: float = Field(ge=0, le=1)
    premium_share: float = Field(ge=0, le=1)
    children_share: float = Field(ge=0, le=1)
    mean_diversity: float = Field(ge=0, le=1)
    visit_count: int = Field(ge=1)


class BasketFeatureSet(BaseModel):
    """Basket features of one period with the quantiles used for scaling"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    frame: pd.DataFrame = Field(description="One row per basket, indexed by basket_id")
    value_quantile: float
    diversity_quantile: float
    excluded: int = Field(ge=0, description="Zero-value baskets left out")

    def points(self) -> np.ndarray:
        return self.frame[FEATURE_COLUMNS].to_numpy(dtype=float)

    def vectors(self) -> List[BasketFeatureVector]:
        return [
            BasketFeatureVector(basket_id=str(basket_id), **row)
            for basket_id, row in self.frame[FEATURE_COLUMNS].iterrows()
        ]


class CustomerFeatureSet(BaseModel):
    """Customer profiles of one period"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    frame: pd.DataFrame = Field(description="One row per customer, indexed by customer_id")
    value_quantile: float

    def points(self) -> np.ndarray:
        return self.frame[PROFILE_COLUMNS].to_numpy(dtype=float)

    def profiles(self) -> List[CustomerProfile]:
        columns = PROFILE_COLUMNS + ["visit_count"]
        return [
            CustomerProfile(customer_id=str(customer_id), **row)
            for customer_id, row in self.frame[columns].astype(object).iterrows()
        ]


def _scaled(values: pd.Series, level: float) -> tuple:
    threshold = quantile(values.to_numpy(dtype=float), level)
    if threshold <= 0:
        return pd.Series(1.0, index=values.index), threshold
    return (values / threshold).clip(upper=1.0), threshold


def basket_features(lines: pd.DataFrame) -> BasketFeatureSet:
    """
    Compute the basket features of one period.

    Args:
        lines: Product lines with basket_id, product_id, unit_price, quantity,
            price_level, children_flag and optionally customer_id

    Returns:
        BasketFeatureSet; zero-value baskets are excluded and counted
    """
    missing = [column for column in LINE_COLUMNS if column not in lines.columns]
    if missing:
        raise InputError(f"product lines are missing columns: {missing}")
    if lines.empty:
        raise InputError("no product lines to compute basket features from")

    line_value = lines["unit_price"].astype(float) * lines["quantity"].astype(float)
    work = pd.DataFrame(
        {
            "basket_id": lines["basket_id"],
            "product_id": lines["product_id"],
            "value": line_value,
            "premium_value": line_value.where(lines["price_level"] == PREMIUM_LEVEL, 0.0),
            "children_value": line_value.where(lines["children_flag"].astype(bool), 0.0),
        }
    )
    if "customer_id" in lines.columns:
        work["customer_id"] = lines["customer_id"].fillna("")

    grouped = work.groupby("basket_id", sort=True)
    baskets = grouped[["value", "premium_value", "children_value"]].sum()
    baskets["product_count"] = grouped["product_id"].nunique()
    if "customer_id" in work.columns:
        baskets["customer_id"] = grouped["customer_id"].first()

    degenerate = baskets["value"] <= 0
    excluded = int(degenerate.sum())
    if excluded:
        logger.info("Excluded %d zero-value baskets", excluded)
        baskets = baskets.loc[~degenerate]
    if baskets.empty:
        raise DegenerateBasketError("every basket has zero value")

    baskets["value_scaled"], value_quantile = _scaled(baskets["value"], VALUE_QUANTILE)
    baskets["premium_share"] = (baskets["premium_value"] / baskets["value"]).clip(0.0, 1.0)
    baskets["children_share"] = (baskets["children_value"] / baskets["value"]).clip(0.0, 1.0)
    baskets["diversity_scaled"], diversity_quantile = _scaled(
        baskets["product_count"].astype(float), DIVERSITY_QUANTILE
    )

    return BasketFeatureSet(
        frame=baskets,
        value_quantile=value_quantile,
        diversity_quantile=diversity_quantile,
        excluded=excluded,
    )


def customer_features(baskets: BasketFeatureSet) -> CustomerFeatureSet:
    """
    Aggregate basket features over each monitored customer's baskets.

    Shares are value-weighted; diversity is the mean of the baskets' scaled
    diversity; the total value is scaled by the 95% quantile across customers.

    Args:
        baskets: Basket features carrying a customer_id column

    Returns:
        CustomerFeatureSet with one profile per customer
    """
    frame = baskets.frame
    if "customer_id" not in frame.columns:
        raise InputError("basket features carry no customer ids")
    monitored = frame.loc[frame["customer_id"] != ""]
    if monitored.empty:
        raise InputError("no monitored baskets to build customer profiles from")

    grouped = monitored.groupby("customer_id", sort=True)
    customers = grouped[["value", "premium_value", "children_value"]].sum()
    customers["mean_diversity"] = grouped["diversity_scaled"].mean()
    customers["visit_count"] = grouped.size().astype(int)

    customers["total_value_scaled"], value_quantile = _scaled(customers["value"], VALUE_QUANTILE)
    customers["premium_share"] = (customers["premium_value"] / customers["value"]).clip(0.0, 1.0)
    customers["children_share"] = (customers["children_value"] / customers["value"]).clip(0.0, 1.0)

    return CustomerFeatureSet(frame=customers, value_quantile=value_quantile)
