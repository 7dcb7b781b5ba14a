"""
Synthetic Transaction Logs

This module generates transaction logs from a known segment structure so
that pipeline estimates can be scored against the true number of unique
customers. Each customer belongs to one segment, visits 1 + Poisson(f - 1)
times, and buys one basket per visit whose size, price levels and children
products follow the segment's propensities. Monitored and unmonitored
customers share the segment behaviour but not the segment mix.
"""

import logging
from datetime import date, timedelta
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..errors import InputError

logger = logging.getLogger(__name__)

CATALOG_SIZE = 400
PRICE_RANGES = {"low-end": (1.0, 3.0), "standard": (3.0, 8.0), "high-end": (8.0, 20.0)}
SMALL_BASKET = (3, 5)
LARGE_BASKET = (10, 15)
YEAR_START = date(2018, 1, 1)


class SegmentProfile(BaseModel):
    """Purchase behaviour of one customer segment"""

    name: str
    frequency: float = Field(ge=1, description="Mean visits per customer")
    premium_propensity: float = Field(ge=0, le=1)
    children_propensity: float = Field(ge=0, le=1)
    large_basket_share: float = Field(ge=0, le=1)
    member_rate: float = Field(ge=0, le=1, description="Probability of the member flag")


DEFAULT_PROFILES = [
    SegmentProfile(
        name="family", frequency=6.0, premium_propensity=0.1,
        children_propensity=0.8, large_basket_share=0.8, member_rate=0.8,
    ),
    SegmentProfile(
        name="premium", frequency=3.0, premium_propensity=0.8,
        children_propensity=0.05, large_basket_share=0.4, member_rate=0.6,
    ),
    SegmentProfile(
        name="budget", frequency=1.5, premium_propensity=0.1,
        children_propensity=0.05, large_basket_share=0.05, member_rate=0.3,
    ),
]


class SyntheticLog(BaseModel):
    """Generated product lines with their ground truth"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lines: pd.DataFrame
    flags: pd.DataFrame = Field(description="customer_id, flag of every monitored customer")
    monitored_customers: int
    unmonitored_customers: int
    segments: Dict[str, int] = Field(description="True segment of every customer")

    def frame(self) -> pd.DataFrame:
        """Product lines in the layout produced by ingestion"""
        frame = self.lines.copy()
        frame["timestamp"] = pd.to_datetime(frame["timestamp"], errors="coerce")
        frame["line"] = np.arange(2, len(frame) + 2)
        return frame

    def flag_map(self) -> Dict[str, bool]:
        return dict(zip(self.flags["customer_id"], self.flags["flag"].astype(bool)))

    def write(self, log_path: str, flags_path: Optional[str] = None) -> None:
        """Write the log (and optionally the member flags) as CSV"""
        self.lines.to_csv(log_path, index=False)
        if flags_path:
            self.flags.to_csv(flags_path, index=False)


def _customer_segments(count: int, mix: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    sizes = rng.multinomial(count, np.asarray(mix, dtype=float) / np.sum(mix))
    return np.repeat(np.arange(len(mix)), sizes)


def _basket_lines(
    basket_id: str,
    customer_id: str,
    profile: SegmentProfile,
    day: str,
    rng: np.random.Generator,
) -> List[dict]:
    low, high = LARGE_BASKET if rng.random() < profile.large_basket_share else SMALL_BASKET
    size = int(rng.integers(low, high + 1))
    products = rng.choice(CATALOG_SIZE, size=size, replace=False)
    lines = []
    for product in products:
        if rng.random() < profile.premium_propensity:
            level = "high-end"
        else:
            level = "standard" if rng.random() < 0.6 else "low-end"
        price_low, price_high = PRICE_RANGES[level]
        lines.append(
            {
                "basket_id": basket_id,
                "customer_id": customer_id,
                "product_id": f"P{int(product):04d}",
                "unit_price": round(float(rng.uniform(price_low, price_high)), 2),
                "quantity": 1 + int(rng.poisson(0.5)),
                "price_level": level,
                "children_flag": bool(rng.random() < profile.children_propensity),
                "timestamp": day,
            }
        )
    return lines


def generate_log(
    seed: int = 0,
    monitored: int = 1000,
    unmonitored: int = 1000,
    monitored_mix: Sequence[float] = (0.5, 0.35, 0.15),
    unmonitored_mix: Sequence[float] = (0.1, 0.3, 0.6),
    profiles: Sequence[SegmentProfile] = tuple(DEFAULT_PROFILES),
    timestamps: bool = False,
) -> SyntheticLog:
    """
    Generate a transaction log from a known segment structure.

    Args:
        seed: Seed of the generator
        monitored: Number of loyalty-card customers
        unmonitored: Number of customers without a card
        monitored_mix: Segment distribution of monitored customers
        unmonitored_mix: Segment distribution of unmonitored customers
        profiles: Segment behaviours
        timestamps: Spread visits uniformly over one year

    Returns:
        SyntheticLog with product lines, member flags and true customer counts
    """
    if len(monitored_mix) != len(profiles) or len(unmonitored_mix) != len(profiles):
        raise InputError("segment mixes must have one entry per profile")
    if monitored < 1 or unmonitored < 1:
        raise InputError("both monitored and unmonitored customers are needed")

    rng = np.random.default_rng(seed)
    rows: List[dict] = []
    flags: List[dict] = []
    segments: Dict[str, int] = {}
    basket_number = 0

    for prefix, count, mix in (("M", monitored, monitored_mix), ("U", unmonitored, unmonitored_mix)):
        for index, segment in enumerate(_customer_segments(count, mix, rng)):
            profile = profiles[segment]
            customer = f"{prefix}{index:06d}"
            segments[customer] = int(segment) + 1
            is_monitored = prefix == "M"
            if is_monitored:
                flags.append({"customer_id": customer, "flag": bool(rng.random() < profile.member_rate)})

            visits = 1 + int(rng.poisson(profile.frequency - 1.0))
            for _ in range(visits):
                basket_number += 1
                day = (YEAR_START + timedelta(days=int(rng.integers(0, 365)))).isoformat() if timestamps else ""
                rows.extend(
                    _basket_lines(
                        f"B{basket_number:07d}",
                        customer if is_monitored else "",
                        profile,
                        day,
                        rng,
                    )
                )

    logger.info(
        "Generated %d product lines in %d baskets (%d monitored, %d unmonitored customers)",
        len(rows),
        basket_number,
        monitored,
        unmonitored,
    )
    return SyntheticLog(
        lines=pd.DataFrame(rows),
        flags=pd.DataFrame(flags, columns=["customer_id", "flag"]),
        monitored_customers=monitored,
        unmonitored_customers=unmonitored,
        segments=segments,
    )
