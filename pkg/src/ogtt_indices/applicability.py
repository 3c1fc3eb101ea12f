"""Model-applicability screening for fitted OGTT records.

A fitted curve is trusted only when it oscillates slowly enough
(omega < 0.09 rad/min, strictly) and one of three fit-quality conditions
holds, checked in order:

    1. error_abs < 4.5                      (accurate fit)
    2. delta_g < 4.5  and  error_abs < 5    (flat tail, decent fit)
    3. delta_g >= 4.5 and  error_abs < 7.5  (distinct tail, looser fit)

where delta_g = |G90 - G120| is taken from the measured record.  The
delta_g = 4.5 boundary is assigned to condition 3 (the two strict
inequalities in the source rules leave it uncovered; condition 3 keeps
the tighter shape reading while still bounding the error at 7.5).  All
four thresholds are overridable for sensitivity studies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import InputError
from .estimation import FitResult
from .model import OgttRecord, error_abs as model_error_abs

#: Tolerance for the fit/record consistency check (mg/dl).
_CONSISTENCY_TOL = 1e-9


class Condition(enum.Enum):
    """Which fit-quality condition admitted the record (precedence order)."""

    COND1 = 1
    COND2 = 2
    COND3 = 3


@dataclass(frozen=True)
class ApplicabilityThresholds:
    omega_max: float = 0.09          # rad/min, strict upper bound
    error_accurate: float = 4.5      # mg/dl, condition 1
    delta_g_split: float = 4.5       # mg/dl, flat vs distinct tail
    error_flat_tail: float = 5.0     # mg/dl, condition 2
    error_distinct_tail: float = 7.5  # mg/dl, condition 3

    def __post_init__(self):
        for name in ("omega_max", "error_accurate", "delta_g_split",
                     "error_flat_tail", "error_distinct_tail"):
            if getattr(self, name) <= 0.0:
                raise InputError(f"{name} must be positive")


DEFAULT_THRESHOLDS = ApplicabilityThresholds()


@dataclass(frozen=True)
class ApplicabilityVerdict:
    applicable: bool
    omega_ok: bool
    condition: Optional[Condition]
    delta_g: float
    error_abs: float

    def __post_init__(self):
        if self.applicable != (self.omega_ok and self.condition is not None):
            raise InputError("applicable must equal omega_ok and condition present")


def check_applicability(
    record: OgttRecord,
    fit: FitResult,
    thresholds: ApplicabilityThresholds = DEFAULT_THRESHOLDS,
) -> ApplicabilityVerdict:
    """Decide whether the fitted model applies to this record."""
    recomputed = model_error_abs(record, fit.params)
    if abs(recomputed - fit.error_abs) > _CONSISTENCY_TOL:
        raise InputError(
            f"fit does not correspond to record {record.patient_id!r}: "
            f"stored error_abs {fit.error_abs!r}, recomputed {recomputed!r}")

    delta_g = abs(record.g[3] - record.g[4])
    err = fit.error_abs
    omega_ok = fit.params.omega < thresholds.omega_max

    condition: Optional[Condition] = None
    if err < thresholds.error_accurate:
        condition = Condition.COND1
    elif delta_g < thresholds.delta_g_split and err < thresholds.error_flat_tail:
        condition = Condition.COND2
    elif delta_g >= thresholds.delta_g_split and err < thresholds.error_distinct_tail:
        condition = Condition.COND3

    return ApplicabilityVerdict(
        applicable=omega_ok and condition is not None,
        omega_ok=omega_ok,
        condition=condition,
        delta_g=delta_g,
        error_abs=err,
    )


class FilterOutcome(NamedTuple):
    kept: list[tuple[OgttRecord, FitResult]]
    rejected: list[tuple[OgttRecord, FitResult]]
    kept_fraction: float


def filter_population(
    fits: list[tuple[OgttRecord, FitResult]],
    thresholds: ApplicabilityThresholds = DEFAULT_THRESHOLDS,
) -> FilterOutcome:
    """Partition (record, fit) pairs by applicability, preserving order."""
    if not fits:
        raise InputError("filter_population requires a non-empty list")
    kept, rejected = [], []
    for record, fit_result in fits:
        if check_applicability(record, fit_result, thresholds).applicable:
            kept.append((record, fit_result))
        else:
            rejected.append((record, fit_result))
    return FilterOutcome(kept, rejected, len(kept) / len(fits))
