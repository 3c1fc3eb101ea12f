"""Shared builders for the test suite.

These construct records, fit results and hand-made classifier models with
exactly controlled numeric properties so boundary behavior can be tested
without running the optimizer.
"""

from __future__ import annotations

import math

from ogtt_indices import (
    AckermanParams,
    FeatureScaling,
    FitResult,
    GlycemicCategory,
    IndexPoint,
    OgttRecord,
    Sex,
    SvmModel,
    predict_at_sample_times,
    residuals,
)


def make_record(g, patient_id="p1", sex=Sex.UNSPECIFIED, age=None):
    return OgttRecord(patient_id=patient_id, sex=sex, age=age, g=tuple(g))


def applicability_pair(omega=0.05, err=4.0, dg=2.0, patient_id="p"):
    """A (record, fit) pair with exact stored error_abs, |g90-g120| and omega.

    The record is built from the curve's own predictions: g90/g120 are
    fixed to 100+dg and 100 so their difference is the exact float `dg`,
    and the first three samples absorb the remaining absolute residual so
    the recomputed mean absolute error lands within ~1e-12 of `err` (the
    exact value of `err` is stored in the FitResult).
    """
    params = AckermanParams(g0=100.0, a=15.0, alpha=0.02, omega=omega,
                            delta=0.9)
    p = predict_at_sample_times(params)
    g3 = 100.0 + dg
    g4 = 100.0
    spent = abs(g3 - p[3]) + abs(g4 - p[4])
    rem = 5.0 * err - spent
    if rem < 0:
        raise AssertionError(
            f"helper cannot reach error {err} with dg {dg}: tail residuals "
            f"already sum to {spent}")
    w = rem / 3.0
    record = OgttRecord(patient_id=patient_id, sex=Sex.UNSPECIFIED, age=None,
                        g=(p[0] + w, p[1] + w, p[2] + w, g3, g4))
    res = residuals(record, params)
    result = FitResult(params=params, error_abs=err, residuals=res,
                       objective=sum(r * r for r in res), converged=True,
                       starts_tried=1)
    return record, result


def point(a, alpha, category, patient_id=None):
    """IndexPoint with the binary label implied by the category."""
    label = +1 if category is GlycemicCategory.NGT else -1
    pid = patient_id or f"{category.value}-{a}-{alpha}"
    return IndexPoint(a=a, alpha=alpha, label=label, category=category,
                      patient_id=pid)


def identity_model(w=(1.0, 0.0), b=0.0, c=1.0):
    """A model whose scaled space equals raw space (shift 0, scale 1)."""
    return SvmModel(w=w, b=b, c=c,
                    scaling=FeatureScaling(shift=(0.0, 0.0),
                                           scale=(1.0, 1.0)))


def standardized_layout(z_points, shift=(100.0, 0.03), scale=(10.0, 0.005)):
    """Map design points from standardized space to raw (a, alpha) pairs.

    The design must have per-coordinate mean 0 and population std 1 so
    that re-standardizing the raw points recovers the design exactly.
    """
    n = len(z_points)
    for k in range(2):
        m = sum(z[k] for z in z_points) / n
        v = sum((z[k] - m) ** 2 for z in z_points) / n
        if abs(m) > 1e-12 or abs(v - 1.0) > 1e-12:
            raise AssertionError(
                f"design coordinate {k} has mean {m}, variance {v}; "
                "expected 0 and 1")
    return [(shift[0] + scale[0] * zx, shift[1] + scale[1] * zy)
            for zx, zy in z_points]


def rotate(z_points, theta, center=(0.0, 0.0)):
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = center
    out = []
    for zx, zy in z_points:
        dx, dy = zx - cx, zy - cy
        out.append((cx + c * dx - s * dy, cy + s * dx + c * dy))
    return out
