"""Closed-form damped-cosine glucose response and OGTT record types.

The five-sample oral glucose tolerance test (OGTT) measures plasma glucose
at 0, 30, 60, 90 and 120 minutes.  The response curve used throughout this
package is Ackerman's linearized glucose regulation model,

    G(t) = g0 + a * exp(-alpha * t) * cos(omega * t - delta)

with g0 the baseline concentration (mg/dl), a the response amplitude
(mg/dl), alpha the mean removal rate (1/min), omega the natural frequency
(rad/min) and delta the phase (rad).  The pair (a, alpha) is the diagnostic
index extracted per subject.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InputError, ParameterError

#: OGTT sampling grid in minutes.
SAMPLE_TIMES = (0.0, 30.0, 60.0, 90.0, 120.0)

#: Concentrations outside this range are rejected as physically implausible.
MAX_CONCENTRATION = 1000.0

_TWO_PI = 2.0 * math.pi


class Sex(enum.Enum):
    F = "F"
    M = "M"
    UNSPECIFIED = ""

    @classmethod
    def parse(cls, text: str) -> "Sex":
        t = text.strip().upper()
        if t in ("F", "FEMALE"):
            return cls.F
        if t in ("M", "MALE"):
            return cls.M
        if t in ("", "U", "UNSPECIFIED"):
            return cls.UNSPECIFIED
        raise InputError(f"unrecognized sex value {text!r}")


def normalize_phase(delta: float) -> float:
    """Wrap a phase angle into [-pi, pi)."""
    d = math.fmod(delta + math.pi, _TWO_PI)
    if d < 0.0:
        d += _TWO_PI
    return d - math.pi


@dataclass(frozen=True)
class AckermanParams:
    """Parameters of the response curve.  delta is stored wrapped to [-pi, pi)."""

    g0: float
    a: float
    alpha: float
    omega: float
    delta: float

    def __post_init__(self):
        for name in ("g0", "a", "alpha", "omega", "delta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if self.g0 <= 0.0:
            raise ParameterError(f"g0 must be positive, got {self.g0}")
        if self.a <= 0.0:
            raise ParameterError(f"a must be positive, got {self.a}")
        if self.alpha <= 0.0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.omega <= 0.0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        object.__setattr__(self, "delta", normalize_phase(float(self.delta)))


@dataclass(frozen=True)
class OgttRecord:
    """One subject's five-sample OGTT, concentrations in mg/dl."""

    patient_id: str
    sex: Sex
    age: int | None
    g: tuple[float, float, float, float, float]

    def __post_init__(self):
        if not self.patient_id:
            raise InputError("patient_id must be non-empty")
        if self.age is not None:
            if not isinstance(self.age, int) or isinstance(self.age, bool):
                raise InputError(f"age must be an integer, got {self.age!r}")
            if not 0 <= self.age <= 150:
                raise InputError(f"age out of range: {self.age}")
        if len(self.g) != 5:
            raise InputError(f"expected 5 concentrations, got {len(self.g)}")
        for v in self.g:
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InputError(f"concentration must be finite, got {v!r}")
            if v <= 0.0 or v >= MAX_CONCENTRATION:
                raise InputError(f"concentration out of range (0, 1000): {v}")

    @property
    def fasting(self) -> float:
        return self.g[0]

    @property
    def two_hour(self) -> float:
        return self.g[4]


def curve_value(g0: float, a: float, alpha: float, omega: float,
                delta: float, t: float) -> float:
    """Raw closed form; no validation.  Defined for a = 0 (flat curve)."""
    return g0 + a * math.exp(-alpha * t) * math.cos(omega * t - delta)


def evaluate(params: AckermanParams, t: float) -> float:
    """Model concentration at time t (minutes, t >= 0)."""
    if not (isinstance(t, (int, float)) and math.isfinite(t)) or t < 0.0:
        raise InputError(f"t must be finite and non-negative, got {t!r}")
    return curve_value(params.g0, params.a, params.alpha, params.omega,
                       params.delta, t)


def predict_at_sample_times(params: AckermanParams) -> tuple[float, ...]:
    """Model concentrations on the OGTT grid (0, 30, 60, 90, 120 min)."""
    return tuple(curve_value(params.g0, params.a, params.alpha, params.omega,
                             params.delta, t) for t in SAMPLE_TIMES)


def residuals(record: OgttRecord, params: AckermanParams) -> tuple[float, ...]:
    """Measured minus predicted concentration at each sample time."""
    preds = predict_at_sample_times(params)
    return tuple(g - p for g, p in zip(record.g, preds))


def error_abs(record: OgttRecord, params: AckermanParams) -> float:
    """Mean absolute deviation (mg/dl) over the five sample times."""
    preds = predict_at_sample_times(params)
    return sum(abs(g - p) for g, p in zip(record.g, preds)) / 5.0


def period_from_omega(omega: float) -> float:
    """Oscillation period 2*pi/omega in minutes."""
    if not (isinstance(omega, (int, float)) and math.isfinite(omega)) or omega <= 0.0:
        raise ParameterError(f"omega must be positive and finite, got {omega!r}")
    return _TWO_PI / omega

def period(params: AckermanParams) -> float:
    """Oscillation period of the fitted curve in minutes."""
    return period_from_omega(params.omega)
