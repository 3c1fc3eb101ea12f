"""Glycemic thresholds: five-way category rules and the binary label."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ogtt_indices import (
    DYSGLYCEMIC,
    NORMOGLYCEMIC,
    AdaLabel,
    GlycemicCategory,
    InputError,
    classify_ada,
    classify_record,
)
from helpers import make_record

NGT = GlycemicCategory.NGT
IFG = GlycemicCategory.IFG
IGT = GlycemicCategory.IGT
IFG_IGT = GlycemicCategory.IFG_IGT
T2DM = GlycemicCategory.T2DM

#: Severity rank used for the monotonicity property (IFG and IGT are
#: incomparable single impairments; both sit between NGT and IFG-IGT).
RANK = {NGT: 0, IFG: 1, IGT: 1, IFG_IGT: 2, T2DM: 3}

# Hand-written truth table at the threshold-straddling values.
BOUNDARY_TABLE = [
    (99, 139, NGT), (99, 140, IGT), (99, 199, IGT), (99, 200, T2DM),
    (100, 139, IFG), (100, 140, IFG_IGT), (100, 199, IFG_IGT),
    (100, 200, T2DM),
    (125, 139, IFG), (125, 140, IFG_IGT), (125, 199, IFG_IGT),
    (125, 200, T2DM),
    (126, 139, T2DM), (126, 140, T2DM), (126, 199, T2DM), (126, 200, T2DM),
]


class TestCategoryRules:
    @pytest.mark.parametrize("fasting,two_hour,expected", [
        (126.0, 150.0, T2DM),
        (110.0, 150.0, IFG_IGT),
        (95.0, 120.0, NGT),
        (100.0, 139.0, IFG),
        (99.0, 140.0, IGT),
    ])
    def test_representative_pairs(self, fasting, two_hour, expected):
        assert classify_ada(fasting, two_hour).category is expected

    @pytest.mark.parametrize("fasting,two_hour,expected", BOUNDARY_TABLE)
    def test_boundary_values(self, fasting, two_hour, expected):
        assert classify_ada(float(fasting), float(two_hour)).category \
            is expected

    @pytest.mark.parametrize("fasting,two_hour", [
        (126.0, 140.0),   # diabetic fasting beats the IGT band
        (110.0, 200.0),   # diabetic two-hour beats the IFG band
        (126.0, 200.0),   # both
        (300.0, 80.0),    # fasting alone suffices
        (80.0, 300.0),    # two-hour alone suffices
    ])
    def test_diabetes_takes_precedence(self, fasting, two_hour):
        assert classify_ada(fasting, two_hour).category is T2DM

    def test_combined_impairment_needs_both_bands(self):
        assert classify_ada(105.0, 150.0).category is IFG_IGT
        assert classify_ada(105.0, 120.0).category is IFG
        assert classify_ada(90.0, 150.0).category is IGT

    # Severity is monotone over integer mg/dl values, the domain on
    # which the closed bands [100, 125] / [140, 199] tile without gaps.
    # Fractional values inside (125, 126) or (199, 200) fall between a
    # band's inclusive upper edge and the next threshold and classify
    # as the milder side, so monotonicity over all reals does not hold
    # by design (no rounding is applied before comparison).
    @given(f1=st.integers(50, 400), f2=st.integers(50, 400),
           two_hour=st.integers(50, 400))
    def test_monotone_in_fasting(self, f1, f2, two_hour):
        lo, hi = float(min(f1, f2)), float(max(f1, f2))
        assert RANK[classify_ada(lo, float(two_hour)).category] <= \
            RANK[classify_ada(hi, float(two_hour)).category]

    @given(fasting=st.integers(50, 400), t1=st.integers(50, 400),
           t2=st.integers(50, 400))
    def test_monotone_in_two_hour(self, fasting, t1, t2):
        lo, hi = float(min(t1, t2)), float(max(t1, t2))
        assert RANK[classify_ada(float(fasting), lo).category] <= \
            RANK[classify_ada(float(fasting), hi).category]

    def test_fractional_values_between_band_edges_stay_mild(self):
        assert classify_ada(125.5, 80.0).category is NGT
        assert classify_ada(80.0, 199.5).category is NGT
        assert classify_ada(125.5, 199.5).category is NGT

    @given(fasting=st.floats(1.0, 999.0), two_hour=st.floats(1.0, 999.0))
    def test_total_on_positive_finite_inputs(self, fasting, two_hour):
        label = classify_ada(fasting, two_hour)
        assert isinstance(label.category, GlycemicCategory)
        assert label.binary in (NORMOGLYCEMIC, DYSGLYCEMIC)

    @pytest.mark.parametrize("fasting,two_hour", [
        (0.0, 120.0), (-5.0, 120.0), (math.nan, 120.0), (math.inf, 120.0),
        (90.0, 0.0), (90.0, -1.0), (90.0, math.nan), (90.0, math.inf),
    ])
    def test_rejects_non_positive_or_non_finite(self, fasting, two_hour):
        with pytest.raises(InputError):
            classify_ada(fasting, two_hour)


class TestBinaryLabel:
    def test_only_normal_is_positive(self):
        assert classify_ada(95.0, 120.0).binary == NORMOGLYCEMIC
        for fasting, two_hour in [(110.0, 120.0), (95.0, 150.0),
                                  (110.0, 150.0), (130.0, 210.0)]:
            assert classify_ada(fasting, two_hour).binary == DYSGLYCEMIC

    def test_constants(self):
        assert NORMOGLYCEMIC == +1
        assert DYSGLYCEMIC == -1

    def test_label_consistency_enforced(self):
        with pytest.raises(InputError):
            AdaLabel(category=NGT, binary=DYSGLYCEMIC)
        with pytest.raises(InputError):
            AdaLabel(category=T2DM, binary=NORMOGLYCEMIC)


class TestRecordClassification:
    @pytest.mark.parametrize("g,expected", [
        ((95.0, 180.0, 160.0, 140.0, 120.0), NGT),
        ((110.0, 180.0, 160.0, 150.0, 150.0), IFG_IGT),
        ((130.0, 250.0, 230.0, 215.0, 210.0), T2DM),
    ])
    def test_uses_fasting_and_two_hour(self, g, expected):
        assert classify_record(make_record(g)).category is expected

    def test_intermediate_samples_are_ignored(self):
        base = make_record((95.0, 180.0, 160.0, 140.0, 120.0))
        spiky = make_record((95.0, 400.0, 350.0, 300.0, 120.0))
        assert classify_record(base) == classify_record(spiky)


class TestCategoryNames:
    def test_serialized_names(self):
        assert [c.value for c in GlycemicCategory] == \
            ["NGT", "IFG", "IGT", "IFG-IGT", "T2DM"]

    @pytest.mark.parametrize("cat", list(GlycemicCategory))
    def test_parse_round_trip(self, cat):
        assert GlycemicCategory.parse(cat.value) is cat

    def test_parse_unknown(self):
        with pytest.raises(InputError):
            GlycemicCategory.parse("ifg")
