"""Deterministic plot exports of the classified index plane.

``emit_plot`` renders a cohort report either as a self-contained SVG
scatter (amplitude on x, removal rate on y, one color per glycemic
category, the classifier's decision line, and the soft-margin strip) or
as a tidy CSV for external plotting tools.  Both renderers build their
output purely from report values with fixed number formatting, so a
given report always produces byte-identical files.

The SVG decision line carries ``data-a1/alpha1/a2/alpha2`` attributes
with full-precision endpoint coordinates in data units; both endpoints
lie on the zero level set of the model's decision function, which makes
the drawn boundary independently checkable against the serialized model.
"""

from __future__ import annotations

import csv
import io
import math
import os
from typing import Callable, Optional, Sequence

from .ada import GlycemicCategory
from .errors import InputError
from .pipeline import CATEGORY_ORDER, CohortReport
from .svm import SvmModel

PLOT_FORMATS = ("svg", "csv")

#: Fixed palette, one color per glycemic category.
CATEGORY_COLORS = {
    GlycemicCategory.NGT: "#2563b0",
    GlycemicCategory.IFG: "#7b4fb5",
    GlycemicCategory.IGT: "#d99114",
    GlycemicCategory.IFG_IGT: "#d95f14",
    GlycemicCategory.T2DM: "#bd1f36",
}

_WIDTH = 840.0
_HEIGHT = 600.0
_ML, _MR, _MT, _MB = 72.0, 178.0, 46.0, 64.0  # margins: left/right/top/bottom


def emit_plot(report: CohortReport, path: str | os.PathLike,
              format: str = "svg") -> None:
    """Write the report's index-plane plot to ``path``.

    ``format`` selects ``svg`` (scatter + decision boundary) or ``csv``
    (columns patient_id, A, alpha, category, predicted, distance; one
    row per record).  Unwritable paths raise the underlying OSError.
    """
    if format not in PLOT_FORMATS:
        raise InputError(
            f"unknown plot format {format!r}; expected one of "
            f"{', '.join(PLOT_FORMATS)}")
    text = render_svg(report) if format == "svg" else render_csv(report)
    with open(path, "wb") as fh:
        fh.write(text.encode("utf-8"))


def render_csv(report: CohortReport) -> str:
    """Tidy-CSV plot data: one row per record, fixed formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("patient_id", "A", "alpha", "category", "predicted",
                     "distance"))
    for e in report.entries:
        writer.writerow((
            e.patient_id,
            format(e.params.a, ".9g"),
            format(e.params.alpha, ".9g"),
            e.category.value,
            "" if e.predicted is None else str(e.predicted),
            "" if e.distance is None else format(e.distance, ".9g"),
        ))
    return buf.getvalue()


# --- SVG rendering -----------------------------------------------------


def _decision_coefficients(model: SvmModel) -> tuple[float, float, float]:
    """Decision function as k0 + k1*A + k2*alpha over raw data coords."""
    (w1, w2) = model.w
    (s1, s2) = model.scaling.shift
    (c1, c2) = model.scaling.scale
    k1 = w1 / c1
    k2 = w2 / c2
    k0 = model.b - w1 * s1 / c1 - w2 * s2 / c2
    return k0, k1, k2


def _level_segment(k0: float, k1: float, k2: float, level: float,
                   a_lo: float, a_hi: float, al_lo: float, al_hi: float,
                   ) -> Optional[tuple[tuple[float, float],
                                       tuple[float, float]]]:
    """Chord of the line k0 + k1*A + k2*alpha = level inside the box."""
    pts: list[tuple[float, float]] = []
    if k2 != 0.0:
        for a in (a_lo, a_hi):
            al = (level - k0 - k1 * a) / k2
            if al_lo <= al <= al_hi:
                pts.append((a, al))
    if k1 != 0.0:
        for al in (al_lo, al_hi):
            a = (level - k0 - k2 * al) / k1
            if a_lo <= a <= a_hi:
                pts.append((a, al))
    uniq: list[tuple[float, float]] = []
    tol_a = 1e-9 * (a_hi - a_lo)
    tol_al = 1e-9 * (al_hi - al_lo)
    for p in pts:
        if all(abs(p[0] - q[0]) > tol_a or abs(p[1] - q[1]) > tol_al
               for q in uniq):
            uniq.append(p)
    if len(uniq) < 2:
        return None
    uniq.sort(key=lambda p: (p[0] * k2 - p[1] * k1, p[0], p[1]))
    return uniq[0], uniq[-1]


def _clip_polygon(poly: Sequence[tuple[float, float]],
                  g: Callable[[tuple[float, float]], float],
                  ) -> list[tuple[float, float]]:
    """Keep the part of a convex polygon where g(p) <= 0."""
    out: list[tuple[float, float]] = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        gp, gq = g(p), g(q)
        if gp <= 0.0:
            out.append(p)
        if (gp < 0.0) != (gq < 0.0) and gp != gq:
            t = gp / (gp - gq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _nice_ticks(lo: float, hi: float) -> list[float]:
    span = hi - lo
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 5.0, 10.0) if raw <= m * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        v = first + k * step
        ticks.append(0.0 if abs(v) < 1e-9 * step else v)
        k += 1
    return ticks


def _px(v: float) -> str:
    return format(v, ".2f")


def render_svg(report: CohortReport) -> str:
    """Self-contained SVG scatter with decision line and margin strip."""
    entries = report.entries
    a_vals = [e.params.a for e in entries]
    al_vals = [e.params.alpha for e in entries]
    a_lo, a_hi = min(a_vals), max(a_vals)
    al_lo, al_hi = min(al_vals), max(al_vals)
    a_pad = max((a_hi - a_lo) * 0.05, 1e-3 * max(abs(a_hi), 1.0))
    al_pad = max((al_hi - al_lo) * 0.05, 1e-3 * max(abs(al_hi), 1.0))
    a_lo, a_hi = a_lo - a_pad, a_hi + a_pad
    al_lo, al_hi = al_lo - al_pad, al_hi + al_pad

    plot_w = _WIDTH - _ML - _MR
    plot_h = _HEIGHT - _MT - _MB

    def X(a: float) -> float:
        return _ML + (a - a_lo) / (a_hi - a_lo) * plot_w

    def Y(al: float) -> float:
        return _MT + (1.0 - (al - al_lo) / (al_hi - al_lo)) * plot_h

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:g}" '
        f'height="{_HEIGHT:g}" viewBox="0 0 {_WIDTH:g} {_HEIGHT:g}" '
        f'font-family="sans-serif">')
    parts.append('<title>Glucose index plane: amplitude vs removal rate'
                 '</title>')
    parts.append(f'<rect x="0" y="0" width="{_WIDTH:g}" height="{_HEIGHT:g}" '
                 f'fill="#ffffff"/>')

    k0, k1, k2 = _decision_coefficients(report.model)

    # soft-margin strip: |decision| <= 1 clipped to the view box
    box = [(a_lo, al_lo), (a_hi, al_lo), (a_hi, al_hi), (a_lo, al_hi)]
    strip = _clip_polygon(box, lambda p: k0 + k1 * p[0] + k2 * p[1] - 1.0)
    if strip:
        strip = _clip_polygon(strip,
                              lambda p: -(k0 + k1 * p[0] + k2 * p[1]) - 1.0)
    if len(strip) >= 3:
        pts = " ".join(f"{_px(X(a))},{_px(Y(al))}" for a, al in strip)
        parts.append(f'<polygon class="margin-strip" points="{pts}" '
                     f'fill="#9db8dc" fill-opacity="0.25"/>')

    for level, cls in ((1.0, "margin-edge"), (-1.0, "margin-edge")):
        seg = _level_segment(k0, k1, k2, level, a_lo, a_hi, al_lo, al_hi)
        if seg is not None:
            (xa, ya), (xb, yb) = seg
            parts.append(
                f'<line class="{cls}" x1="{_px(X(xa))}" y1="{_px(Y(ya))}" '
                f'x2="{_px(X(xb))}" y2="{_px(Y(yb))}" stroke="#7d8ba1" '
                f'stroke-width="1" stroke-dasharray="5 4"/>')

    seg = _level_segment(k0, k1, k2, 0.0, a_lo, a_hi, al_lo, al_hi)
    if seg is not None:
        (xa, ya), (xb, yb) = seg
        parts.append(
            f'<line class="decision" x1="{_px(X(xa))}" y1="{_px(Y(ya))}" '
            f'x2="{_px(X(xb))}" y2="{_px(Y(yb))}" '
            f'data-a1="{xa!r}" data-alpha1="{ya!r}" '
            f'data-a2="{xb!r}" data-alpha2="{yb!r}" '
            f'stroke="#1f2933" stroke-width="1.5"/>')

    # axes frame and ticks
    parts.append(
        f'<rect x="{_px(_ML)}" y="{_px(_MT)}" width="{_px(plot_w)}" '
        f'height="{_px(plot_h)}" fill="none" stroke="#4a5568" '
        f'stroke-width="1"/>')
    for v in _nice_ticks(a_lo, a_hi):
        x = X(v)
        parts.append(f'<line x1="{_px(x)}" y1="{_px(_MT + plot_h)}" '
                     f'x2="{_px(x)}" y2="{_px(_MT + plot_h + 5)}" '
                     f'stroke="#4a5568" stroke-width="1"/>')
        parts.append(f'<text x="{_px(x)}" y="{_px(_MT + plot_h + 20)}" '
                     f'font-size="12" text-anchor="middle" '
                     f'fill="#1f2933">{format(v, "g")}</text>')
    for v in _nice_ticks(al_lo, al_hi):
        y = Y(v)
        parts.append(f'<line x1="{_px(_ML - 5)}" y1="{_px(y)}" '
                     f'x2="{_px(_ML)}" y2="{_px(y)}" '
                     f'stroke="#4a5568" stroke-width="1"/>')
        parts.append(f'<text x="{_px(_ML - 9)}" y="{_px(y + 4)}" '
                     f'font-size="12" text-anchor="end" '
                     f'fill="#1f2933">{format(v, "g")}</text>')
    parts.append(f'<text x="{_px(_ML + plot_w / 2)}" '
                 f'y="{_px(_HEIGHT - 16)}" font-size="14" '
                 f'text-anchor="middle" fill="#1f2933">'
                 f'A — response amplitude (mg/dl)</text>')
    parts.append(f'<text x="20" y="{_px(_MT + plot_h / 2)}" font-size="14" '
                 f'text-anchor="middle" fill="#1f2933" '
                 f'transform="rotate(-90 20 {_px(_MT + plot_h / 2)})">'
                 f'alpha — removal rate (1/min)</text>')

    # scatter: filled = evaluated, hollow = excluded from evaluation
    for e in entries:
        color = CATEGORY_COLORS[e.category]
        x, y = _px(X(e.params.a)), _px(Y(e.params.alpha))
        if e.evaluated:
            parts.append(f'<circle cx="{x}" cy="{y}" r="3.2" '
                         f'fill="{color}" fill-opacity="0.75"/>')
        else:
            parts.append(f'<circle cx="{x}" cy="{y}" r="3.2" fill="none" '
                         f'stroke="{color}" stroke-width="1.2"/>')

    # legend: present categories only, canonical order, with counts
    counts = {cat: sum(1 for e in entries if e.category is cat)
              for cat in CATEGORY_ORDER}
    lx = _WIDTH - _MR + 24
    ly = _MT + 10
    parts.append(f'<text x="{_px(lx)}" y="{_px(ly)}" font-size="13" '
                 f'fill="#1f2933" font-weight="bold">Category (n)</text>')
    row = 0
    for cat in CATEGORY_ORDER:
        if counts[cat] == 0:
            continue
        y0 = ly + 16 + row * 20
        parts.append(f'<rect x="{_px(lx)}" y="{_px(y0)}" width="12" '
                     f'height="12" fill="{CATEGORY_COLORS[cat]}"/>')
        parts.append(f'<text x="{_px(lx + 18)}" y="{_px(y0 + 10)}" '
                     f'font-size="12" fill="#1f2933">'
                     f'{cat.value} ({counts[cat]})</text>')
        row += 1
    y0 = ly + 26 + row * 20
    agg = report.aggregates
    parts.append(f'<text x="{_px(lx)}" y="{_px(y0)}" font-size="12" '
                 f'fill="#4a5568">accuracy {agg.overall_accuracy:.3f}</text>')
    parts.append(f'<text x="{_px(lx)}" y="{_px(y0 + 16)}" font-size="12" '
                 f'fill="#4a5568">evaluated {agg.n_evaluated}'
                 f'/{agg.n_records}</text>')

    parts.append('</svg>')
    return "\n".join(parts) + "\n"
