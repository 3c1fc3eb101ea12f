"""Request schemas for the HTTP service.

Cohort-consuming endpoints accept either raw cohort CSV text (parsed
with the same schema and row diagnostics as file ingestion) or an
explicit record list.  All schemas reject unknown fields so client
typos surface as input errors instead of being silently ignored.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..ada import GlycemicCategory
from ..applicability import ApplicabilityThresholds
from ..errors import InputError
from ..estimation import FitConfig
from ..model import OgttRecord, Sex
from ..pipeline import IngestResult, ingest_csv_text
from ..synth import ClusterSpec, NoiseKind, NoiseSpec


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RecordIn(StrictModel):
    patient_id: str
    sex: str = ""
    age: Optional[int] = None
    g: list[float] = Field(min_length=5, max_length=5)

    def to_record(self) -> OgttRecord:
        return OgttRecord(patient_id=self.patient_id,
                          sex=Sex.parse(self.sex), age=self.age,
                          g=tuple(self.g))


class FitConfigIn(StrictModel):
    """Optional overrides of the estimation defaults."""

    g0_bounds: Optional[tuple[float, float]] = None
    a_bounds: Optional[tuple[float, float]] = None
    alpha_bounds: Optional[tuple[float, float]] = None
    omega_bounds: Optional[tuple[float, float]] = None
    delta_bounds: Optional[tuple[float, float]] = None
    n_starts: Optional[int] = None
    prior_weight: Optional[float] = None
    seed: Optional[int] = None
    max_iterations: Optional[int] = None
    convergence_tol: Optional[float] = None

    def to_config(self) -> FitConfig:
        kwargs = {k: v for k, v in self.model_dump().items() if v is not None}
        return FitConfig(**kwargs)


class ThresholdsIn(StrictModel):
    """Optional overrides of the applicability thresholds."""

    omega_max: Optional[float] = None
    error_accurate: Optional[float] = None
    delta_g_split: Optional[float] = None
    error_flat_tail: Optional[float] = None
    error_distinct_tail: Optional[float] = None

    def to_thresholds(self) -> ApplicabilityThresholds:
        kwargs = {k: v for k, v in self.model_dump().items() if v is not None}
        return ApplicabilityThresholds(**kwargs)


class CohortIn(StrictModel):
    """A cohort given either as CSV text or as structured records."""

    csv: Optional[str] = None
    records: Optional[list[RecordIn]] = None
    sequence: Optional[list[Optional[int]]] = None
    strict: bool = False

    @model_validator(mode="after")
    def _one_source(self) -> "CohortIn":
        if (self.csv is None) == (self.records is None):
            raise ValueError("provide exactly one of csv or records")
        if self.csv is not None and self.sequence is not None:
            raise ValueError(
                "sequence applies to records input only; CSV carries its "
                "own seq column")
        return self

    def resolve(self) -> IngestResult:
        if self.csv is not None:
            return ingest_csv_text(self.csv, strict=self.strict,
                                   source="request csv")
        records = [r.to_record() for r in self.records]
        sequence: list[Optional[int]]
        if self.sequence is None:
            sequence = [None] * len(records)
        elif len(self.sequence) == len(records):
            sequence = list(self.sequence)
        else:
            raise InputError(
                f"sequence length {len(self.sequence)} != record count "
                f"{len(records)}")
        return IngestResult(records=records, sequence=sequence, errors=[],
                            digest="")


class FitRequest(CohortIn):
    config: Optional[FitConfigIn] = None


class AdaRequest(StrictModel):
    """Either one fasting/two-hour pair, or a cohort to label."""

    fasting: Optional[float] = None
    two_hour: Optional[float] = None
    csv: Optional[str] = None
    records: Optional[list[RecordIn]] = None
    strict: bool = False

    @model_validator(mode="after")
    def _check(self) -> "AdaRequest":
        if (self.fasting is None) != (self.two_hour is None):
            raise ValueError("fasting and two_hour must be given together")
        n_sources = ((self.fasting is not None)
                     + (self.csv is not None)
                     + (self.records is not None))
        if n_sources != 1:
            raise ValueError(
                "provide exactly one of: a fasting/two_hour pair, csv, "
                "or records")
        return self

    def resolve(self) -> IngestResult:
        cohort = CohortIn(csv=self.csv, records=self.records,
                          strict=self.strict)
        return cohort.resolve()


class ApplicabilityRequest(CohortIn):
    config: Optional[FitConfigIn] = None
    thresholds: Optional[ThresholdsIn] = None


class TrainRequest(CohortIn):
    c: float = 1.0
    tol: float = 1e-6
    filter: bool = False
    config: Optional[FitConfigIn] = None
    thresholds: Optional[ThresholdsIn] = None


class PointIn(StrictModel):
    a: float
    alpha: float


class PredictRequest(StrictModel):
    model: dict
    points: list[PointIn] = Field(min_length=1)


class ReportRequest(CohortIn):
    mode: Literal["train", "load"] = "train"
    c: float = 1.0
    tol: float = 1e-6
    model: Optional[dict] = None
    filter: bool = False
    config: Optional[FitConfigIn] = None
    thresholds: Optional[ThresholdsIn] = None

    @model_validator(mode="after")
    def _mode_model(self) -> "ReportRequest":
        if self.mode == "load" and self.model is None:
            raise ValueError("load mode needs a model document")
        if self.mode == "train" and self.model is not None:
            raise ValueError("train mode must not carry a model document")
        return self


class ClusterSpecIn(StrictModel):
    category: str
    center: tuple[float, float]
    spread: tuple[float, float]
    g0_range: tuple[float, float]
    omega_range: tuple[float, float]
    delta_range: tuple[float, float]
    count: int

    def to_spec(self) -> ClusterSpec:
        return ClusterSpec(category=GlycemicCategory.parse(self.category),
                           center=self.center, spread=self.spread,
                           g0_range=self.g0_range,
                           omega_range=self.omega_range,
                           delta_range=self.delta_range, count=self.count)


class NoiseIn(StrictModel):
    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def to_spec(self) -> NoiseSpec:
        return NoiseSpec(kind=NoiseKind.parse(self.kind), sigma=self.sigma,
                         seed=self.seed)


class SynthRequest(StrictModel):
    """Generate the built-in reference cohort or custom clusters."""

    seed: int = 0
    preset: Literal["reference"] = "reference"
    clusters: Optional[list[ClusterSpecIn]] = None
    noise: Optional[NoiseIn] = None
    include_truth: bool = True

    @model_validator(mode="after")
    def _noise_with_clusters(self) -> "SynthRequest":
        if self.noise is not None and self.clusters is None:
            raise ValueError(
                "noise applies to custom clusters only; the reference "
                "cohort is noiseless by construction")
        return self


class TrackRequest(CohortIn):
    config: Optional[FitConfigIn] = None
    model: Optional[dict] = None


class PlotRequest(StrictModel):
    report: dict
    format: Literal["svg", "csv"] = "svg"
