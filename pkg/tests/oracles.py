"""Independent reference computations the tests compare the package against.

Everything here deliberately avoids the package's own solver code paths:
the curve reference uses complex exponentials, the separator references
use brute-force search over the primal variables.
"""

from __future__ import annotations

import cmath
import itertools
import math

import numpy as np


def curve_reference(g0, a, alpha, omega, delta, t):
    """G(t) via a complex-exponential route independent of the package."""
    return g0 + a * (cmath.exp((-alpha + 1j * omega) * t)
                     * cmath.exp(-1j * delta)).real


def standardize(points):
    """Population-statistics standardization of (a, alpha, label) triples.

    Returns (z, y) numpy arrays. Uses numpy's own mean/std, not the
    package's FeatureScaling.
    """
    xs = np.array([(p.a, p.alpha) for p in points], dtype=float)
    ys = np.array([p.label for p in points], dtype=float)
    z = (xs - xs.mean(axis=0)) / xs.std(axis=0)
    return z, ys


def hinge_objective_grid(z, y, c, passes=6, n=21, radius=6.0):
    """Brute-force minimum of 0.5||w||^2 + c*sum(hinge) over (w1, w2, b).

    Exhaustive grid search with iterative refinement around the best grid
    node; the returned value is an upper bound on the true optimum that
    converges to it as the grid shrinks.
    """
    center = np.zeros(3)
    r = radius
    best_val = math.inf
    for _ in range(passes):
        axes = [np.linspace(center[k] - r, center[k] + r, n)
                for k in range(3)]
        w1, w2, b = np.meshgrid(*axes, indexing="ij", sparse=True)
        margins = y[None, None, None, :] * (
            w1[..., None] * z[:, 0][None, None, None, :]
            + w2[..., None] * z[:, 1][None, None, None, :]
            + b[..., None])
        obj = 0.5 * (w1 ** 2 + w2 ** 2) \
            + c * np.maximum(0.0, 1.0 - margins).sum(axis=-1)
        flat = int(obj.argmin())
        idx = np.unravel_index(flat, obj.shape)
        best_val = float(obj[idx])
        center = np.array([axes[k][idx[k]] for k in range(3)])
        step = 2.0 * r / (n - 1)
        r = 2.0 * step
    return best_val


def best_linear_accuracy(points):
    """Best achievable accuracy of ANY line on a small point set.

    Enumerates every combinatorially distinct projection direction (the
    orderings change only at directions perpendicular to pairwise
    difference vectors), then every threshold and polarity.
    """
    z, y = standardize(points)
    m = len(points)
    dirs = [0.0, math.pi / 2, 1.0, 2.5]
    for i, j in itertools.combinations(range(m), 2):
        base = math.atan2(z[j, 1] - z[i, 1], z[j, 0] - z[i, 0])
        for off in (math.pi / 2, -math.pi / 2):
            for eps in (-1e-3, 0.0, 1e-3):
                dirs.append(base + off + eps)
    best = 0.0
    for th in dirs:
        proj = z[:, 0] * math.cos(th) + z[:, 1] * math.sin(th)
        order = np.argsort(proj)
        vals = proj[order]
        labels = y[order]
        cuts = [vals[0] - 1.0]
        cuts += [(vals[k] + vals[k + 1]) / 2.0 for k in range(m - 1)]
        cuts.append(vals[-1] + 1.0)
        for cut in cuts:
            side = np.where(vals > cut, 1.0, -1.0)
            acc = max(float((side == labels).mean()),
                      float((-side == labels).mean()))
            best = max(best, acc)
    return best


def _int_points(a, alpha, y):
    from ogtt_indices import GlycemicCategory, IndexPoint
    pts = []
    for i, (av, lv, yv) in enumerate(zip(a, alpha, y)):
        cat = GlycemicCategory.NGT if yv > 0 else GlycemicCategory.T2DM
        pts.append(IndexPoint(a=float(av), alpha=float(lv), label=int(yv),
                              category=cat, patient_id=f"s{i}"))
    return pts


def seeded_instance(k):
    """Deterministic small labelled instance (4-8 points, both classes)."""
    rng = np.random.default_rng(1000 + k)
    n = int(rng.integers(4, 9))
    a = rng.uniform(40.0, 220.0, n)
    alpha = rng.uniform(0.004, 0.05, n)
    z = np.column_stack([(a - a.mean()) / a.std(),
                         (alpha - alpha.mean()) / alpha.std()])
    w = rng.normal(size=2)
    b = float(rng.normal() * 0.5)
    y = np.where(z @ w + b >= 0.0, 1, -1)
    flips = rng.random(n) < 0.25
    y = np.where(flips, -y, y)
    if abs(int(y.sum())) == n:  # single class after flips: force both
        y[0] = -y[0]
    return _int_points(a, alpha, y)


def separable_instance(k):
    """Deterministic separable instance with a real margin (4-8 points)."""
    rng = np.random.default_rng(5000 + k)
    while True:
        n = int(rng.integers(4, 9))
        a = rng.uniform(40.0, 220.0, n)
        alpha = rng.uniform(0.004, 0.05, n)
        z = np.column_stack([(a - a.mean()) / a.std(),
                             (alpha - alpha.mean()) / alpha.std()])
        w = rng.normal(size=2)
        w /= math.hypot(*w)
        b = float(rng.normal() * 0.3)
        margins = z @ w + b
        if np.min(np.abs(margins)) < 0.3:
            continue
        y = np.where(margins >= 0.0, 1, -1)
        if abs(int(y.sum())) == n:
            continue
        return _int_points(a, alpha, y)
