"""Synthetic OGTT cohorts with known ground-truth curve parameters.

Two generators are provided.  ``generate_cohort`` draws curve parameters
independently per cluster (truncated normals for the indices, uniforms
for the rest), evaluates the curve at the five sample times, optionally
adds gaussian noise and clamps concentrations to the plausible range.
``reference_cohort`` builds a five-category cohort with fixed
counts (687/102/186/106/129) whose fasting and two-hour values are drawn
inside each category's glycemic band and whose phase is solved in closed
form so that the generated record reproduces its intended category; the
cluster centers are invented constants calibrated so the categories form
a clockwise arc in the standardized index plane.

All draws are deterministic functions of the supplied seeds.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .ada import GlycemicCategory, classify_ada
from .errors import GenerationError, InputError
from .model import (AckermanParams, OgttRecord, Sex, normalize_phase,
                    predict_at_sample_times)

CLAMP_LO = 40.0
CLAMP_HI = 600.0
MAX_REJECTIONS = 100


class NoiseKind(str, Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"

    @classmethod
    def parse(cls, text: str) -> "NoiseKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InputError(
                f"unknown noise kind {text!r}; expected one of "
                + ", ".join(k.value for k in cls)) from None


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement-noise description for generated records."""

    kind: NoiseKind = NoiseKind.NONE
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, NoiseKind):
            raise InputError(f"kind must be a NoiseKind, got {self.kind!r}")
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma < 0:
            raise InputError(f"sigma must be >= 0, got {self.sigma!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InputError(f"seed must be an integer, got {self.seed!r}")
        object.__setattr__(self, "sigma", sigma)


NO_NOISE = NoiseSpec()


def _interval(name: str, value: Sequence[float],
              positive_lo: bool) -> tuple[float, float]:
    try:
        lo, hi = (float(value[0]), float(value[1]))
    except (TypeError, IndexError, ValueError):
        raise InputError(f"{name} must be a (lo, hi) pair, "
                         f"got {value!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InputError(f"{name} must satisfy lo < hi, got ({lo}, {hi})")
    if positive_lo and lo <= 0:
        raise InputError(f"{name} lower end must be positive, got {lo}")
    return lo, hi


@dataclass(frozen=True)
class ClusterSpec:
    """A parameter cluster for one glycemic category."""

    category: GlycemicCategory
    center: tuple[float, float]       # (a, alpha)
    spread: tuple[float, float]       # per-coordinate standard deviation
    g0_range: tuple[float, float]     # mg/dl
    omega_range: tuple[float, float]  # rad/min
    delta_range: tuple[float, float]  # rad
    count: int

    def __post_init__(self) -> None:
        if not isinstance(self.category, GlycemicCategory):
            raise InputError(f"category must be a GlycemicCategory, "
                             f"got {self.category!r}")
        center = tuple(float(v) for v in self.center)
        spread = tuple(float(v) for v in self.spread)
        if len(center) != 2 or len(spread) != 2:
            raise InputError("center and spread must be (a, alpha) pairs")
        for name, v in (("center", center), ("spread", spread)):
            for x in v:
                if not math.isfinite(x) or x <= 0:
                    raise InputError(f"{name} values must be positive, "
                                     f"got {v}")
        g0 = _interval("g0_range", self.g0_range, positive_lo=True)
        om = _interval("omega_range", self.omega_range, positive_lo=True)
        de = _interval("delta_range", self.delta_range, positive_lo=False)
        if de[0] < -math.pi or de[1] > math.pi:
            raise InputError(f"delta_range must lie within [-pi, pi], "
                             f"got {de}")
        if not isinstance(self.count, int) or isinstance(self.count, bool) \
                or self.count < 1:
            raise InputError(f"count must be a positive integer, "
                             f"got {self.count!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "spread", spread)
        object.__setattr__(self, "g0_range", g0)
        object.__setattr__(self, "omega_range", om)
        object.__setattr__(self, "delta_range", de)


def _derive_rng(*parts: object) -> random.Random:
    """Deterministic, stream-independent RNG from labelled seed parts."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _truncated_normal(rng: random.Random, mu: float, sigma: float,
                      lo: float, hi: float, what: str) -> float:
    for _ in range(MAX_REJECTIONS):
        v = rng.gauss(mu, sigma)
        if lo < v < hi:
            return v
    raise GenerationError(
        f"drawing {what} ~ N({mu}, {sigma}) failed to land in "
        f"({lo}, {hi}) after {MAX_REJECTIONS} rejections")


def _clamp(v: float) -> float:
    return CLAMP_LO if v < CLAMP_LO else CLAMP_HI if v > CLAMP_HI else v


def generate_cohort(
        specs: Sequence[ClusterSpec],
        noise: NoiseSpec = NO_NOISE,
        seed: int = 0,
) -> list[tuple[OgttRecord, AckermanParams]]:
    """Draw records per cluster spec; returns (record, ground truth) pairs.

    Parameters are drawn deterministically from `seed` (one independent
    stream per cluster), the curve is evaluated at the five sample
    times, gaussian noise (its own stream, from `noise.seed`) is added
    if requested, and concentrations are clamped to [40, 600] mg/dl.
    """
    specs = list(specs)
    if not specs:
        raise InputError("specs must be non-empty")
    if not isinstance(noise, NoiseSpec):
        raise InputError(f"noise must be a NoiseSpec, got {noise!r}")
    noise_rng = _derive_rng("ogtt-noise", noise.seed)
    out: list[tuple[OgttRecord, AckermanParams]] = []
    for ci, spec in enumerate(specs):
        rng = _derive_rng("ogtt-cluster", seed, ci)
        for k in range(spec.count):
            a = _truncated_normal(rng, spec.center[0], spec.spread[0],
                                  0.0, math.inf, "a")
            alpha = _truncated_normal(rng, spec.center[1], spec.spread[1],
                                      0.0, math.inf, "alpha")
            params = AckermanParams(
                g0=rng.uniform(*spec.g0_range), a=a, alpha=alpha,
                omega=rng.uniform(*spec.omega_range),
                delta=rng.uniform(*spec.delta_range))
            values = list(predict_at_sample_times(params))
            if noise.kind is NoiseKind.GAUSSIAN and noise.sigma > 0:
                values = [v + noise_rng.gauss(0.0, noise.sigma)
                          for v in values]
            record = OgttRecord(
                patient_id=f"syn-{ci:02d}-{spec.category.value}-{k:04d}",
                sex=Sex.UNSPECIFIED, age=None,
                g=tuple(_clamp(v) for v in values))
            out.append((record, params))
    return out


# --- reference cohort -------------------------------------------------

# Invented cluster constants (not measured values).  Calibrated so that:
# fasting/two-hour bands sit strictly inside each category's glycemic
# thresholds, every record is representable under the default fit bounds,
# and the five categories trace a clockwise arc in standardized index
# space (normoglycemic: low amplitude / fast removal; diabetic: high
# amplitude / slow removal).
@dataclass(frozen=True)
class TargetCluster:
    category: GlycemicCategory
    count: int
    a_center: float
    a_spread: float
    a_range: tuple[float, float]
    alpha_center: float
    alpha_spread: float
    alpha_range: tuple[float, float]
    fasting_range: tuple[float, float]
    two_hour_range: tuple[float, float]
    omega_range: tuple[float, float]


REFERENCE_CLUSTERS: tuple[TargetCluster, ...] = (
    TargetCluster(GlycemicCategory.NGT, 687,
                  a_center=55.0, a_spread=10.0, a_range=(30.0, 85.0),
                  alpha_center=0.0272, alpha_spread=0.0035,
                  alpha_range=(0.020, 0.035),
                  fasting_range=(80.0, 97.0), two_hour_range=(96.0, 132.0),
                  omega_range=(0.036, 0.074)),
    TargetCluster(GlycemicCategory.IFG, 102,
                  a_center=70.0, a_spread=10.0, a_range=(44.0, 100.0),
                  alpha_center=0.0228, alpha_spread=0.0030,
                  alpha_range=(0.017, 0.030),
                  fasting_range=(101.0, 124.0), two_hour_range=(101.0, 136.0),
                  omega_range=(0.034, 0.070)),
    TargetCluster(GlycemicCategory.IGT, 186,
                  a_center=93.0, a_spread=11.0, a_range=(64.0, 126.0),
                  alpha_center=0.0136, alpha_spread=0.0022,
                  alpha_range=(0.0090, 0.0175),
                  fasting_range=(88.0, 98.0), two_hour_range=(142.0, 152.0),
                  omega_range=(0.020, 0.034)),
    TargetCluster(GlycemicCategory.IFG_IGT, 106,
                  a_center=96.0, a_spread=11.0, a_range=(66.0, 130.0),
                  alpha_center=0.0082, alpha_spread=0.0016,
                  alpha_range=(0.0055, 0.0115),
                  fasting_range=(101.0, 124.0), two_hour_range=(142.0, 160.0),
                  omega_range=(0.019, 0.032)),
    TargetCluster(GlycemicCategory.T2DM, 129,
                  a_center=88.0, a_spread=12.0, a_range=(58.0, 122.0),
                  alpha_center=0.0054, alpha_spread=0.0010,
                  alpha_range=(0.0042, 0.0072),
                  fasting_range=(128.0, 178.0), two_hour_range=(206.0, 256.0),
                  omega_range=(0.018, 0.030)),
)

# g0 must stay well inside the default per-record fit bounds
# [0.5 * fasting, 1.5 * fasting] for the record to be recoverable.
_G0_MARGIN = (0.56, 1.44)
_VALUE_MARGIN = 1.0  # keep curve values off the clamp bounds


def _solve_phase(a: float, alpha: float, omega: float, fasting: float,
                 two_hour: float) -> Optional[tuple[float, float]]:
    """Phases delta with G(0) = fasting and G(120) = two_hour, given the
    other parameters.  Returns the two analytic candidates or None.

    From G(0) - G(120) = a [cos(delta) - q cos(theta - delta)] with
    q = exp(-120 alpha), theta = 120 omega, the bracket collapses to
    R cos(delta + phi).
    """
    q = math.exp(-120.0 * alpha)
    theta = 120.0 * omega
    rx = 1.0 - q * math.cos(theta)
    ry = q * math.sin(theta)
    big_r = math.hypot(rx, ry)
    if big_r <= 0.0:
        return None
    ratio = (fasting - two_hour) / (a * big_r)
    if not -1.0 <= ratio <= 1.0:
        return None
    phi = math.atan2(ry, rx)
    base = math.acos(ratio)
    return (normalize_phase(base - phi), normalize_phase(-base - phi))


def reference_cohort(
        seed: int = 0,
        clusters: Sequence[TargetCluster] = REFERENCE_CLUSTERS,
) -> list[tuple[OgttRecord, AckermanParams]]:
    """A 1210-record five-category cohort with fixed counts per category.

    Records are noiseless; each record's fasting and two-hour values are
    drawn inside its category's glycemic band and the curve phase is
    solved so the record lands exactly on them, so ADA labeling of the
    record reproduces the intended category.  Deterministic in `seed`.
    """
    out: list[tuple[OgttRecord, AckermanParams]] = []
    for cluster in clusters:
        rng = _derive_rng("ogtt-reference", seed, cluster.category.value)
        for k in range(cluster.count):
            pair = None
            for _attempt in range(MAX_REJECTIONS):
                fasting = rng.uniform(*cluster.fasting_range)
                two_hour = rng.uniform(*cluster.two_hour_range)
                a = _truncated_normal(rng, cluster.a_center, cluster.a_spread,
                                      *cluster.a_range, "a")
                alpha = _truncated_normal(
                    rng, cluster.alpha_center, cluster.alpha_spread,
                    *cluster.alpha_range, "alpha")
                omega = rng.uniform(*cluster.omega_range)
                candidates = _solve_phase(a, alpha, omega, fasting, two_hour)
                if candidates is None:
                    continue
                for delta in candidates:
                    g0 = fasting - a * math.cos(delta)
                    if not (_G0_MARGIN[0] * fasting <= g0
                            <= _G0_MARGIN[1] * fasting):
                        continue
                    # physiological shape: glucose rises after ingestion
                    if omega * math.sin(delta) <= alpha * math.cos(delta):
                        continue
                    params = AckermanParams(g0=g0, a=a, alpha=alpha,
                                            omega=omega, delta=delta)
                    values = predict_at_sample_times(params)
                    if not all(CLAMP_LO + _VALUE_MARGIN < v
                               < CLAMP_HI - _VALUE_MARGIN for v in values):
                        continue
                    if classify_ada(values[0], values[4]).category \
                            is not cluster.category:
                        continue
                    pair = (OgttRecord(
                        patient_id=(f"syn-{cluster.category.value}"
                                    f"-{k:04d}"),
                        sex=Sex.UNSPECIFIED, age=None,
                        g=values), params)
                    break
                if pair is not None:
                    break
            if pair is None:
                raise GenerationError(
                    f"category {cluster.category.value}: record {k} found "
                    f"no feasible parameters after {MAX_REJECTIONS} "
                    f"attempts; cluster constants may be miscalibrated")
            out.append(pair)
    return out
