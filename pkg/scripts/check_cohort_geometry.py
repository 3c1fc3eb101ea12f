"""Sanity-check the built-in synthetic cohort's cluster calibration.

Verifies, for several seeds, that the five-category cohort:
  - reproduces its intended ADA category for every record,
  - traces a clockwise arc NGT -> IFG -> IGT -> IFG-IGT -> T2DM in the
    standardized index plane with a comfortable angular margin,
  - yields a trained separator with high overall and T2DM accuracy,
  - produces records the default fitter reproduces to error_abs < 0.5.

Run:  python3 scripts/check_cohort_geometry.py [n_seeds] [n_fit_sample]
"""

import math
import sys

from ogtt_indices.ada import GlycemicCategory, classify_record
from ogtt_indices.applicability import check_applicability
from ogtt_indices.estimation import default_fit_config, fit
from ogtt_indices.svm import (IndexPoint, accuracy_report, is_clockwise,
                              progression_angles, train)
from ogtt_indices.synth import reference_cohort

ORDER = [GlycemicCategory.NGT, GlycemicCategory.IFG, GlycemicCategory.IGT,
         GlycemicCategory.IFG_IGT, GlycemicCategory.T2DM]


def true_points(cohort):
    pts = []
    for record, params in cohort:
        label = classify_record(record)
        pts.append(IndexPoint(a=params.a, alpha=params.alpha,
                              label=label.binary, category=label.category,
                              patient_id=record.patient_id))
    return pts


def main() -> int:
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    n_fit = int(sys.argv[2]) if len(sys.argv) > 2 else 60
    ok = True
    for seed in range(n_seeds):
        cohort = reference_cohort(seed)
        agree = sum(
            classify_record(r).category is _intended(r) for r, _ in cohort)
        pts = true_points(cohort)
        angles = progression_angles(pts)
        deg = {c: math.degrees(angles[c]) for c in ORDER}
        margins = [_cw_margin(deg[a], deg[b])
                   for a, b in zip(ORDER, ORDER[1:])]
        clockwise = is_clockwise(angles, ORDER)
        model = train(pts, c=1.0)
        rep = accuracy_report(model, pts)
        t2dm = rep.per_category[GlycemicCategory.T2DM]
        line = (f"seed {seed}: agree {agree}/{len(cohort)}  "
                f"angles " + " ".join(f"{deg[c]:7.1f}" for c in ORDER)
                + f"  min-margin {min(margins):5.1f}  cw {clockwise}  "
                f"overall {rep.overall:.3f}  t2dm {t2dm:.3f}")
        print(line)
        ok &= (agree == len(cohort) and clockwise and min(margins) >= 5.0
               and rep.overall >= 0.80 and t2dm >= 0.90)

    cohort = reference_cohort(0)
    cfg = default_fit_config()
    step = max(1, len(cohort) // n_fit)
    sample = cohort[::step]
    worst = 0.0
    applicable = 0
    for record, _params in sample:
        result = fit(record, cfg)
        worst = max(worst, result.error_abs)
        applicable += check_applicability(record, result).applicable
    print(f"fit check on {len(sample)} records: worst error_abs "
          f"{worst:.4f}, applicable {applicable}/{len(sample)}")
    ok &= worst < 0.5 and applicable == len(sample)
    print("CALIBRATION", "OK" if ok else "FAILED")
    return 0 if ok else 1


def _intended(record):
    # patient ids look like syn-NGT-0001 or syn-IFG-IGT-0001
    name = "-".join(record.patient_id.split("-")[1:-1])
    return GlycemicCategory.parse(name)


def _cw_margin(deg_from: float, deg_to: float) -> float:
    """Positive clockwise angular step (degrees) from deg_from to deg_to."""
    return -math.remainder(deg_to - deg_from, 360.0)


if __name__ == "__main__":
    sys.exit(main())
