"""ADA glycemic classification from fasting and two-hour OGTT values.

Thresholds (mg/dl) follow the American Diabetes Association criteria:

    T2DM     fasting >= 126  or  two-hour >= 200
    IFG      fasting in [100, 125]   (impaired fasting glucose)
    IGT      two-hour in [140, 199]  (impaired glucose tolerance)
    IFG-IGT  both impaired ranges at once
    NGT      neither                  (normal glucose tolerance)

T2DM takes precedence over the impaired categories.  Values are compared
as real numbers, without rounding.  The binary view used by the separator
is +1 for NGT and -1 for every other category.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InputError
from .model import OgttRecord

FASTING_IFG_LO = 100.0
FASTING_IFG_HI = 125.0
FASTING_T2DM = 126.0
TWO_HOUR_IGT_LO = 140.0
TWO_HOUR_IGT_HI = 199.0
TWO_HOUR_T2DM = 200.0


class GlycemicCategory(enum.Enum):
    """Five-way ADA category; .value is the serialized name."""

    NGT = "NGT"
    IFG = "IFG"
    IGT = "IGT"
    IFG_IGT = "IFG-IGT"
    T2DM = "T2DM"

    @classmethod
    def parse(cls, text: str) -> "GlycemicCategory":
        for member in cls:
            if member.value == text:
                return member
        raise InputError(f"unknown glycemic category {text!r}")


#: Binary separator target: +1 only for NGT.
NORMOGLYCEMIC = +1
DYSGLYCEMIC = -1


@dataclass(frozen=True)
class AdaLabel:
    category: GlycemicCategory
    binary: int  # +1 normoglycemic (NGT), -1 otherwise

    def __post_init__(self):
        expected = NORMOGLYCEMIC if self.category is GlycemicCategory.NGT else DYSGLYCEMIC
        if self.binary != expected:
            raise InputError(
                f"binary label {self.binary} inconsistent with {self.category.value}")


def classify_ada(fasting: float, two_hour: float) -> AdaLabel:
    """Classify a (fasting, two-hour) pair in mg/dl."""
    for name, v in (("fasting", fasting), ("two_hour", two_hour)):
        if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0.0:
            raise InputError(f"{name} must be positive and finite, got {v!r}")

    ifg = FASTING_IFG_LO <= fasting <= FASTING_IFG_HI
    igt = TWO_HOUR_IGT_LO <= two_hour <= TWO_HOUR_IGT_HI
    if fasting >= FASTING_T2DM or two_hour >= TWO_HOUR_T2DM:
        category = GlycemicCategory.T2DM
    elif ifg and igt:
        category = GlycemicCategory.IFG_IGT
    elif ifg:
        category = GlycemicCategory.IFG
    elif igt:
        category = GlycemicCategory.IGT
    else:
        category = GlycemicCategory.NGT
    binary = NORMOGLYCEMIC if category is GlycemicCategory.NGT else DYSGLYCEMIC
    return AdaLabel(category=category, binary=binary)


def classify_record(record: OgttRecord) -> AdaLabel:
    """Classify a full OGTT record by its fasting and two-hour samples."""
    return classify_ada(record.fasting, record.two_hour)
