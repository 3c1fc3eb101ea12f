"""Soft-margin linear classifier on (a, alpha) index points.

Each subject is reduced to an index point: peak amplitude ``a`` (mg/dl),
mean removal rate ``alpha`` (1/min), a binary label (+1 normoglycemic,
-1 dysglycemic) and its five-way glycemic category.  Training finds the
line minimizing the soft-margin objective

    P(w, b) = 0.5 * ||w||^2 + c * sum_j max(0, 1 - y_j (w . z_j + b))

over standardized features z (per-feature shift/scale recorded in the
model so raw inputs can be classified later).

The optimizer is deterministic coordinate ascent on the dual (always
updating the maximally KKT-violating pair) with an exact duality-gap
stopping rule: iteration ends when primal minus dual is at most
``tol * primal``, which certifies the returned objective is within a
``tol`` relative factor of the optimum.  The logged trace is the
best-so-far primal objective and is therefore non-increasing.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .ada import DYSGLYCEMIC, NORMOGLYCEMIC, AdaLabel, GlycemicCategory
from .errors import InputError, ModelError, TrainingError
from .model import AckermanParams

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-6
MAX_TRAINING_ITERATIONS = 200_000

_KKT_EPS = 1e-12
_SNAP_EPS = 1e-10


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class IndexPoint:
    """A subject in the a-alpha plane with its glycemic labels."""

    a: float
    alpha: float
    label: int
    category: GlycemicCategory
    patient_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _require_finite("a", self.a))
        object.__setattr__(self, "alpha", _require_finite("alpha", self.alpha))
        if self.a <= 0:
            raise InputError(f"a must be positive, got {self.a}")
        if self.alpha <= 0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if self.label not in (NORMOGLYCEMIC, DYSGLYCEMIC):
            raise InputError(f"label must be +1 or -1, got {self.label!r}")
        if not isinstance(self.category, GlycemicCategory):
            raise InputError(f"category must be a GlycemicCategory, "
                             f"got {self.category!r}")
        expected = NORMOGLYCEMIC if self.category is GlycemicCategory.NGT \
            else DYSGLYCEMIC
        if self.label != expected:
            raise InputError(
                f"label {self.label:+d} inconsistent with category "
                f"{self.category.value} for patient {self.patient_id!r}")
        if not self.patient_id:
            raise InputError("patient_id must be non-empty")


def index_point(patient_id: str, params: AckermanParams,
                ada: AdaLabel) -> IndexPoint:
    """Build an IndexPoint from fitted curve parameters and an ADA label."""
    return IndexPoint(a=params.a, alpha=params.alpha, label=ada.binary,
                      category=ada.category, patient_id=patient_id)


@dataclass(frozen=True)
class FeatureScaling:
    """Per-feature standardization (z = (x - shift) / scale) for (a, alpha)."""

    shift: tuple[float, float]
    scale: tuple[float, float]

    def __post_init__(self) -> None:
        shift = tuple(float(v) for v in self.shift)
        scale = tuple(float(v) for v in self.scale)
        if len(shift) != 2 or len(scale) != 2:
            raise ModelError("scaling needs exactly two features")
        for v in (*shift, *scale):
            if not math.isfinite(v):
                raise ModelError(f"scaling values must be finite, got {v!r}")
        if scale[0] <= 0 or scale[1] <= 0:
            raise ModelError(f"scale components must be positive, got {scale}")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    def transform(self, a: float, alpha: float) -> tuple[float, float]:
        return ((a - self.shift[0]) / self.scale[0],
                (alpha - self.shift[1]) / self.scale[1])

    @classmethod
    def from_points(cls, points: Sequence[IndexPoint]) -> "FeatureScaling":
        xs = np.array([(p.a, p.alpha) for p in points], dtype=float)
        shift = xs.mean(axis=0)
        scale = xs.std(axis=0)  # population std; recorded, so any convention
        if scale[0] <= 0 or scale[1] <= 0:
            raise TrainingError(
                "cannot standardize: a feature has zero variance "
                "(all points share that coordinate)")
        return cls(shift=(float(shift[0]), float(shift[1])),
                   scale=(float(scale[0]), float(scale[1])))


@dataclass(frozen=True)
class SvmModel:
    """Trained linear separator over standardized (a, alpha) features."""

    w: tuple[float, float]
    b: float
    c: float
    scaling: FeatureScaling

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.w)
        if len(w) != 2:
            raise ModelError("w must have exactly two components")
        for v in (*w, self.b, self.c):
            if not math.isfinite(float(v)):
                raise ModelError(f"model values must be finite, got {v!r}")
        if math.hypot(*w) == 0.0:
            raise ModelError("w must be non-zero after training")
        if self.c <= 0:
            raise ModelError(f"c must be positive, got {self.c}")
        if not isinstance(self.scaling, FeatureScaling):
            raise ModelError("scaling must be a FeatureScaling")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))

    def decision_value(self, a: float, alpha: float) -> float:
        z0, z1 = self.scaling.transform(a, alpha)
        return self.w[0] * z0 + self.w[1] * z1 + self.b

    def to_json_dict(self) -> dict:
        return {
            "w": [self.w[0], self.w[1]],
            "b": self.b,
            "c": self.c,
            "scaling": {
                "shift": [self.scaling.shift[0], self.scaling.shift[1]],
                "scale": [self.scaling.scale[0], self.scaling.scale[1]],
            },
        }

    @classmethod
    def from_json_dict(cls, data: object) -> "SvmModel":
        if not isinstance(data, dict):
            raise ModelError("model JSON must be an object")
        try:
            scaling = FeatureScaling(
                shift=tuple(data["scaling"]["shift"]),
                scale=tuple(data["scaling"]["scale"]))
            return cls(w=tuple(data["w"]), b=data["b"], c=data["c"],
                       scaling=scaling)
        except ModelError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed model JSON: {exc}") from exc


def save_model(model: SvmModel, path: str | os.PathLike) -> None:
    """Write a model to a JSON file with full decimal precision."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh, indent=2)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> SvmModel:
    """Read a model written by save_model; raises ModelError if invalid."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from exc
    return SvmModel.from_json_dict(data)


@dataclass(frozen=True)
class TrainingDiagnostics:
    """Optimizer bookkeeping: certified gap and the best-primal trace."""

    iterations: int
    gap: float
    trace: tuple[float, ...]


def hinge_objective(model: SvmModel, points: Sequence[IndexPoint]) -> float:
    """Primal soft-margin objective of a model on points (scaled space)."""
    total = 0.5 * (model.w[0] ** 2 + model.w[1] ** 2)
    for p in points:
        margin = p.label * model.decision_value(p.a, p.alpha)
        total += model.c * max(0.0, 1.0 - margin)
    return total


def train(points: Sequence[IndexPoint], c: float = DEFAULT_C,
          tol: float = DEFAULT_TOL) -> SvmModel:
    """Train the soft-margin separator; see train_detailed for diagnostics."""
    model, _ = train_detailed(points, c=c, tol=tol)
    return model


def train_detailed(
        points: Sequence[IndexPoint], c: float = DEFAULT_C,
        tol: float = DEFAULT_TOL) -> tuple[SvmModel, TrainingDiagnostics]:
    """Train and also return the gap certificate and objective trace.

    The returned model's primal objective is within a ``tol`` relative
    factor of the optimum (duality-gap certificate).  Deterministic for
    fixed inputs.
    """
    points = list(points)
    if not points:
        raise InputError("cannot train on an empty point list")
    c = _require_finite("c", c)
    tol = _require_finite("tol", tol)
    if c <= 0:
        raise InputError(f"c must be positive, got {c}")
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")

    labels = {p.label for p in points}
    if labels != {NORMOGLYCEMIC, DYSGLYCEMIC}:
        raise TrainingError(
            "training needs at least one point of each label, got only "
            + ", ".join(f"{v:+d}" for v in sorted(labels)))

    scaling = FeatureScaling.from_points(points)
    xs = np.array([scaling.transform(p.a, p.alpha) for p in points],
                  dtype=float)
    ys = np.array([float(p.label) for p in points])
    n = len(points)
    sq_norm = np.einsum("ij,ij->i", xs, xs)

    lam = np.zeros(n)
    w = np.zeros(2)
    best_primal = math.inf
    best_w = None
    best_b = 0.0
    trace: list[float] = []
    gap = math.inf
    iterations = 0
    stalled = 0

    for iterations in range(1, MAX_TRAINING_ITERATIONS + 1):
        scores = ys - xs @ w
        up = np.where(ys > 0, lam < c, lam > 0)
        low = np.where(ys > 0, lam > 0, lam < c)
        m = float(np.max(scores[up])) if up.any() else -math.inf
        big_m = float(np.min(scores[low])) if low.any() else math.inf
        if math.isinf(m):
            b = big_m
        elif math.isinf(big_m):
            b = m
        else:
            b = 0.5 * (m + big_m)

        wn = float(w @ w)
        primal = 0.5 * wn + c * float(
            np.maximum(0.0, 1.0 - ys * (xs @ w + b)).sum())
        dual = float(lam.sum()) - 0.5 * wn
        if primal < best_primal:
            best_primal = primal
            best_w = w.copy()
            best_b = b
        trace.append(best_primal)
        gap = best_primal - dual
        if gap <= tol * max(abs(best_primal), 1e-12):
            break
        if m - big_m <= _KKT_EPS:
            break  # KKT-optimal to machine precision

        i = int(np.argmax(np.where(up, scores, -math.inf)))
        j = int(np.argmin(np.where(low, scores, math.inf)))
        yi, yj = ys[i], ys[j]
        li, lj = float(lam[i]), float(lam[j])
        s = yi * yj
        if s < 0:
            lo, hi = max(0.0, lj - li), min(c, c + lj - li)
        else:
            lo, hi = max(0.0, li + lj - c), min(c, li + lj)
        eta = float(sq_norm[i] + sq_norm[j] - 2.0 * (xs[i] @ xs[j]))
        e_i = float(xs[i] @ w) - yi
        e_j = float(xs[j] @ w) - yj
        if eta > 1e-18:
            lj_new = lj + yj * (e_i - e_j) / eta
            lj_new = lo if lj_new < lo else hi if lj_new > hi else lj_new
        else:
            # flat direction: the dual is linear along it, test endpoints
            best_delta = None
            lj_new = lj
            for cand in (lo, hi):
                li_c = li + s * (lj - cand)
                dw = yi * (li_c - li) * xs[i] + yj * (cand - lj) * xs[j]
                delta = ((li_c - li) + (cand - lj)
                         - float(w @ dw) - 0.5 * float(dw @ dw))
                if best_delta is None or delta > best_delta:
                    best_delta = delta
                    lj_new = cand
        li_new = li + s * (lj - lj_new)
        # snap values within float noise of a bound exactly onto it,
        # shifting the partner to keep sum(y * lam) = 0 exact; otherwise
        # near-bound multipliers stall the violating-pair selection
        if lj_new < _SNAP_EPS * c:
            li_new += s * lj_new
            lj_new = 0.0
        elif lj_new > (1.0 - _SNAP_EPS) * c:
            li_new += s * (lj_new - c)
            lj_new = c
        if li_new < _SNAP_EPS * c:
            lj_new += s * li_new
            li_new = 0.0
        elif li_new > (1.0 - _SNAP_EPS) * c:
            lj_new += s * (li_new - c)
            li_new = c
        li_new = 0.0 if li_new < 0.0 else c if li_new > c else li_new
        lj_new = 0.0 if lj_new < 0.0 else c if lj_new > c else lj_new
        if li_new == li and lj_new == lj:
            stalled += 1
            if stalled >= 2:
                break  # no representable progress left
        else:
            stalled = 0
        w += yi * (li_new - li) * xs[i] + yj * (lj_new - lj) * xs[j]
        lam[i] = li_new
        lam[j] = lj_new

    if best_w is None:
        raise TrainingError("optimizer made no progress")
    if gap > tol * max(abs(best_primal), 1e-12):
        raise TrainingError(
            f"failed to certify tolerance {tol} after "
            f"{iterations} iterations (gap {gap:.3e})")
    if float(np.hypot(best_w[0], best_w[1])) == 0.0:
        raise TrainingError(
            "training produced a zero weight vector (degenerate data)")

    model = SvmModel(w=(float(best_w[0]), float(best_w[1])), b=float(best_b),
                     c=c, scaling=scaling)
    diag = TrainingDiagnostics(iterations=iterations, gap=float(gap),
                               trace=tuple(trace))
    return model, diag


def predict(model: SvmModel, a: float, alpha: float) -> tuple[int, float]:
    """Classify a raw (a, alpha) point.

    Returns (label, signed_distance): label is +1 when the decision value
    is >= 0 (boundary points count as normoglycemic), and the distance is
    the decision value divided by ||w|| (positive on the +1 side).
    """
    if not isinstance(model, SvmModel):
        raise ModelError(f"expected an SvmModel, got {type(model).__name__}")
    a = _require_finite("a", a)
    alpha = _require_finite("alpha", alpha)
    if a <= 0 or alpha <= 0:
        raise InputError(f"a and alpha must be positive, got ({a}, {alpha})")
    value = model.decision_value(a, alpha)
    label = NORMOGLYCEMIC if value >= 0.0 else DYSGLYCEMIC
    distance = value / math.hypot(*model.w)
    return label, distance


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; the positive class is normoglycemic (+1)."""

    true_positive: int
    false_negative: int
    false_positive: int
    true_negative: int

    @property
    def total(self) -> int:
        return (self.true_positive + self.false_negative
                + self.false_positive + self.true_negative)


@dataclass(frozen=True)
class AccuracyReport:
    """Classification quality of a model on labelled index points."""

    overall: float
    per_category: Mapping[GlycemicCategory, float]
    confusion: ConfusionMatrix
    t2dm_predicted_normoglycemic: int
    n: int


def accuracy_report(model: SvmModel,
                    points: Sequence[IndexPoint]) -> AccuracyReport:
    """Overall/per-category accuracy, confusion counts and the worst-case
    count of T2DM subjects predicted normoglycemic.

    Categories with no points are absent from per_category (not 0%).
    """
    points = list(points)
    if not points:
        raise InputError("cannot report accuracy on an empty point list")
    correct = 0
    tp = fn = fp = tn = 0
    cat_total: dict[GlycemicCategory, int] = {}
    cat_correct: dict[GlycemicCategory, int] = {}
    t2dm_as_normo = 0
    for p in points:
        predicted, _ = predict(model, p.a, p.alpha)
        hit = predicted == p.label
        correct += hit
        cat_total[p.category] = cat_total.get(p.category, 0) + 1
        cat_correct[p.category] = cat_correct.get(p.category, 0) + hit
        if p.label == NORMOGLYCEMIC:
            tp += hit
            fn += not hit
        else:
            tn += hit
            fp += not hit
        if p.category is GlycemicCategory.T2DM and \
                predicted == NORMOGLYCEMIC:
            t2dm_as_normo += 1
    per_category = {cat: cat_correct[cat] / cat_total[cat]
                    for cat in GlycemicCategory if cat in cat_total}
    return AccuracyReport(
        overall=correct / len(points),
        per_category=per_category,
        confusion=ConfusionMatrix(true_positive=tp, false_negative=fn,
                                  false_positive=fp, true_negative=tn),
        t2dm_predicted_normoglycemic=t2dm_as_normo,
        n=len(points))


def progression_angles(
        points: Sequence[IndexPoint],
        center: Optional[tuple[float, float]] = None,
) -> dict[GlycemicCategory, float]:
    """Angle (radians) of each category's centroid in standardized space.

    Features are standardized by the points' own mean and population
    standard deviation, so the cloud's centroid is the origin; ``center``
    (given in that standardized space) overrides the origin as the angle
    reference.  Angles use the standard orientation (atan2 of alpha over
    a), so "clockwise" progression means decreasing angles.
    """
    points = list(points)
    if not points:
        raise InputError("cannot compute angles on an empty point list")
    by_cat: dict[GlycemicCategory, list[IndexPoint]] = {}
    for p in points:
        by_cat.setdefault(p.category, []).append(p)
    if len(by_cat) < 2:
        raise InputError(
            f"need at least 2 categories for a progression, got {len(by_cat)}")
    scaling = FeatureScaling.from_points(points)
    cx, cy = (0.0, 0.0) if center is None else \
        (_require_finite("center[0]", center[0]),
         _require_finite("center[1]", center[1]))
    angles: dict[GlycemicCategory, float] = {}
    for cat in GlycemicCategory:
        if cat not in by_cat:
            continue
        zs = [scaling.transform(p.a, p.alpha) for p in by_cat[cat]]
        mz0 = sum(z[0] for z in zs) / len(zs)
        mz1 = sum(z[1] for z in zs) / len(zs)
        angles[cat] = math.atan2(mz1 - cy, mz0 - cx)
    return angles


def is_clockwise(angles: Mapping[GlycemicCategory, float],
                 order: Sequence[GlycemicCategory]) -> bool:
    """True if each consecutive step in `order` turns clockwise.

    A step is clockwise when the wrapped angular difference (next minus
    current, wrapped to (-pi, pi]) is negative, i.e. the minor arc to the
    next centroid goes in the decreasing-angle direction.
    """
    if len(order) < 2:
        raise InputError("order needs at least two categories")
    for cat in order:
        if cat not in angles:
            raise InputError(f"no angle for category {cat.value}")
    for prev, nxt in zip(order, order[1:]):
        diff = angles[nxt] - angles[prev]
        wrapped = math.remainder(diff, math.tau)
        if not wrapped < 0.0:
            return False
    return True
