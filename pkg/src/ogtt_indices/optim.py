"""Deterministic optimization primitives for the fit driver.

Two pieces live here: a seeded low-discrepancy start-point sequence
(Halton with a deterministic Cranley-Patterson shift) and a bounded
Nelder-Mead simplex minimizer working on plain Python floats.  Both are
dependency-free so results are bit-stable across library upgrades.
"""

from __future__ import annotations

import hashlib
from collections.abc import Callable, Sequence

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def _radical_inverse(index: int, base: int) -> float:
    """Van der Corput radical inverse of `index` in `base`."""
    inv = 0.0
    f = 1.0 / base
    i = index
    while i > 0:
        inv += f * (i % base)
        i //= base
        f /= base
    return inv


def _shift(seed: int, dim: int) -> float:
    """Deterministic per-dimension shift in [0, 1) derived from the seed."""
    digest = hashlib.sha256(f"halton-shift:{seed}:{dim}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


def halton_points(n: int, d: int, seed: int) -> list[tuple[float, ...]]:
    """First n points of a d-dimensional shifted Halton sequence in [0, 1)^d.

    The sequence prefix is stable: halton_points(m, d, seed) equals the
    first m entries of halton_points(n, d, seed) for m <= n.
    """
    if d > len(_PRIMES):
        raise ValueError(f"at most {len(_PRIMES)} dimensions supported")
    shifts = [_shift(seed, k) for k in range(d)]
    points = []
    for i in range(1, n + 1):
        points.append(tuple(
            (_radical_inverse(i, _PRIMES[k]) + shifts[k]) % 1.0
            for k in range(d)))
    return points


def nelder_mead(
    fn: Callable[[list[float]], float],
    x0: Sequence[float],
    tol: float,
    max_iter: int,
    step: float = 0.1,
) -> tuple[list[float], float, int, bool]:
    """Minimize fn over the unit box [0, 1]^d from x0.

    Candidates are projected onto the box before evaluation, so every
    vertex (and the returned point) stays inside bounds.  Convergence is
    declared when the simplex diameter (max inf-norm distance of any
    vertex to the best one) drops below tol; otherwise the loop stops at
    max_iter with converged=False.

    Returns (x_best, f_best, iterations, converged).
    """
    d = len(x0)

    def clip(x: list[float]) -> list[float]:
        return [0.0 if v < 0.0 else 1.0 if v > 1.0 else v for v in x]

    # initial simplex: x0 plus one step per coordinate, reflected inward
    # when the step would leave the box
    verts = [clip(list(x0))]
    for k in range(d):
        v = list(verts[0])
        v[k] = v[k] - step if v[k] + step > 1.0 else v[k] + step
        verts.append(v)
    fvals = [fn(v) for v in verts]

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = sorted(range(d + 1), key=fvals.__getitem__)
        verts = [verts[i] for i in order]
        fvals = [fvals[i] for i in order]

        best = verts[0]
        diam = 0.0
        for v in verts[1:]:
            for k in range(d):
                dk = abs(v[k] - best[k])
                if dk > diam:
                    diam = dk
        if diam < tol:
            converged = True
            break

        iterations += 1
        centroid = [sum(v[k] for v in verts[:-1]) / d for k in range(d)]
        worst = verts[-1]
        fw = fvals[-1]

        xr = clip([centroid[k] + (centroid[k] - worst[k]) for k in range(d)])
        fr = fn(xr)
        if fr < fvals[0]:
            xe = clip([centroid[k] + 2.0 * (centroid[k] - worst[k])
                       for k in range(d)])
            fe = fn(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
            continue
        if fr < fw:  # outside contraction
            xc = clip([centroid[k] + 0.5 * (xr[k] - centroid[k])
                       for k in range(d)])
            fc = fn(xc)
            if fc <= fr:
                verts[-1], fvals[-1] = xc, fc
                continue
        else:  # inside contraction
            xc = clip([centroid[k] - 0.5 * (centroid[k] - worst[k])
                       for k in range(d)])
            fc = fn(xc)
            if fc < fw:
                verts[-1], fvals[-1] = xc, fc
                continue
        # shrink toward the best vertex
        for i in range(1, d + 1):
            verts[i] = clip([best[k] + 0.5 * (verts[i][k] - best[k])
                             for k in range(d)])
            fvals[i] = fn(verts[i])

    i_best = min(range(d + 1), key=fvals.__getitem__)
    return verts[i_best], fvals[i_best], iterations, converged
