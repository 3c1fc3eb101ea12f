"""Cohort orchestration: CSV ingestion, fit -> label -> filter -> classify
runs, deterministic JSON reports, and longitudinal trajectory tracking.

The cohort CSV schema is ``patient_id,sex,age,g0,g30,g60,g90,g120[,seq]``
(UTF-8, comma-separated, decimal point); ``seq`` is an optional integer
used to order repeat tests of the same patient.  Reports serialize to
JSON with a fixed key order and all floating-point values rounded to
nine significant digits, so identical inputs and configuration produce
byte-identical files.  Aggregates are pure bookkeeping over the report
entries and are re-derived and checked whenever a report is loaded.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Sequence, Union

from . import __version__
from .ada import AdaLabel, GlycemicCategory, classify_record
from .applicability import (DEFAULT_THRESHOLDS, ApplicabilityThresholds,
                            ApplicabilityVerdict, Condition,
                            check_applicability)
from .errors import (InputError, NonConvergenceError, PipelineError,
                     SchemaError, TrainingError)
from .estimation import FitConfig, FitResult, fit
from .model import MAX_CONCENTRATION, AckermanParams, OgttRecord, Sex
from .svm import (DEFAULT_TOL, ConfusionMatrix, IndexPoint, SvmModel,
                  accuracy_report, load_model, predict, progression_angles,
                  train_detailed)

#: Identifies the report file layout; bumped on incompatible changes.
REPORT_SCHEMA = "ogtt-indices/report-v1"
TRAJECTORY_SCHEMA = "ogtt-indices/trajectories-v1"

#: Required cohort CSV columns, in order.  ``seq`` may follow as a ninth.
CSV_COLUMNS = ("patient_id", "sex", "age", "g0", "g30", "g60", "g90", "g120")
SEQ_COLUMN = "seq"

#: Canonical order for category-keyed mappings in serialized output.
CATEGORY_ORDER = (
    GlycemicCategory.NGT,
    GlycemicCategory.IFG,
    GlycemicCategory.IGT,
    GlycemicCategory.IFG_IGT,
    GlycemicCategory.T2DM,
)


def _round9(x: float) -> float:
    """Round to nine significant decimal digits (report precision)."""
    return float(format(float(x), ".9g"))


# --- CSV ingestion -----------------------------------------------------


@dataclass(frozen=True)
class RowError:
    """Diagnostic for one rejected CSV row."""

    line: int  # 1-based line number in the file; the header is line 1
    field: Optional[str]
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.field is not None:
            where += f", field {self.field!r}"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class IngestResult:
    """Parsed cohort file: records in file order plus row diagnostics.

    ``sequence`` is aligned with ``records``; entries are None when the
    file has no ``seq`` column or the cell was blank.  ``digest`` is the
    SHA-256 of the raw file bytes, used as input provenance in reports.
    """

    records: list[OgttRecord]
    sequence: list[Optional[int]]
    errors: list[RowError]
    digest: str


def _parse_row(line_no: int, row: list[str], has_seq: bool,
               errors: list[RowError]) -> Optional[tuple[OgttRecord,
                                                         Optional[int]]]:
    expected = len(CSV_COLUMNS) + (1 if has_seq else 0)
    if len(row) != expected:
        errors.append(RowError(line_no, None,
                               f"expected {expected} fields, got {len(row)}"))
        return None
    cells = [c.strip() for c in row]
    before = len(errors)

    patient_id = cells[0]
    if not patient_id:
        errors.append(RowError(line_no, "patient_id", "must be non-empty"))

    sex = Sex.UNSPECIFIED
    try:
        sex = Sex.parse(cells[1])
    except InputError as exc:
        errors.append(RowError(line_no, "sex", str(exc)))

    age: Optional[int] = None
    if cells[2]:
        try:
            age = int(cells[2])
        except ValueError:
            errors.append(RowError(line_no, "age",
                                   f"not an integer: {cells[2]!r}"))
        else:
            if not 0 <= age <= 150:
                errors.append(RowError(line_no, "age",
                                       f"out of range [0, 150]: {age}"))

    values: list[float] = []
    for name, cell in zip(CSV_COLUMNS[3:], cells[3:8]):
        try:
            v = float(cell)
        except ValueError:
            errors.append(RowError(line_no, name, f"not a number: {cell!r}"))
            continue
        if not math.isfinite(v) or v <= 0.0 or v >= MAX_CONCENTRATION:
            errors.append(RowError(
                line_no, name,
                f"concentration out of range (0, {MAX_CONCENTRATION:g}): "
                f"{cell}"))
            continue
        values.append(v)

    seq: Optional[int] = None
    if has_seq and cells[8]:
        try:
            seq = int(cells[8])
        except ValueError:
            errors.append(RowError(line_no, SEQ_COLUMN,
                                   f"not an integer: {cells[8]!r}"))

    if len(errors) > before:
        return None
    try:
        record = OgttRecord(patient_id=patient_id, sex=sex, age=age,
                            g=tuple(values))
    except InputError as exc:  # backstop; field checks above should catch
        errors.append(RowError(line_no, None, str(exc)))
        return None
    return record, seq


def ingest_csv_text(text: str, strict: bool = False,
                    source: str = "<memory>") -> IngestResult:
    """Parse cohort CSV content, preserving row order.

    Structural problems (wrong header, empty input) raise SchemaError.
    Invalid rows are collected as RowError diagnostics and skipped; with
    ``strict`` the first bad row raises InputError instead.  ``source``
    names the input in error messages.
    """
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SchemaError(
            f"{source}: empty file; expected header "
            f"{','.join(CSV_COLUMNS)}[,{SEQ_COLUMN}]")
    header = [c.strip() for c in rows[0]]
    if header == list(CSV_COLUMNS):
        has_seq = False
    elif header == list(CSV_COLUMNS) + [SEQ_COLUMN]:
        has_seq = True
    else:
        missing = [c for c in CSV_COLUMNS if c not in header]
        detail = f"; missing column(s): {', '.join(missing)}" if missing else ""
        raise SchemaError(
            f"{source}: bad header {','.join(header)!r}; expected "
            f"{','.join(CSV_COLUMNS)}[,{SEQ_COLUMN}]{detail}")

    records: list[OgttRecord] = []
    sequence: list[Optional[int]] = []
    errors: list[RowError] = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:  # blank line (e.g. trailing newline)
            continue
        before = len(errors)
        parsed = _parse_row(line_no, row, has_seq, errors)
        if parsed is None:
            if strict:
                raise InputError(f"{source}: {errors[before]}")
            continue
        record, seq = parsed
        records.append(record)
        sequence.append(seq)
    return IngestResult(records=records, sequence=sequence, errors=errors,
                        digest=digest)


def ingest_csv(path: str | os.PathLike, strict: bool = False) -> IngestResult:
    """Parse a cohort CSV file; see ingest_csv_text for error behavior."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not valid UTF-8: {exc}") from exc
    return ingest_csv_text(text, strict=strict, source=str(path))


def render_cohort_csv(records: Sequence[OgttRecord],
                      sequence: Optional[Sequence[Optional[int]]] = None,
                      ) -> str:
    """Cohort CSV content for records (and optional seq keys).

    Concentrations are written with ``repr`` so a subsequent ingest
    reproduces the exact same float values.
    """
    if sequence is not None and len(sequence) != len(records):
        raise InputError(
            f"sequence length {len(sequence)} != record count {len(records)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(CSV_COLUMNS) + ([SEQ_COLUMN] if sequence is not None else [])
    writer.writerow(header)
    for i, rec in enumerate(records):
        row = [rec.patient_id, rec.sex.value,
               "" if rec.age is None else str(rec.age)]
        row.extend(repr(v) for v in rec.g)
        if sequence is not None:
            row.append("" if sequence[i] is None else str(sequence[i]))
        writer.writerow(row)
    return buf.getvalue()


def write_cohort_csv(path: str | os.PathLike,
                     records: Sequence[OgttRecord],
                     sequence: Optional[Sequence[Optional[int]]] = None,
                     ) -> str:
    """Write records to the cohort CSV schema; returns the file's SHA-256."""
    data = render_cohort_csv(records, sequence).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def truth_to_json_dict(pairs: Sequence[tuple[OgttRecord, AckermanParams]],
                       ) -> dict:
    """Ground-truth curve parameters of a synthetic cohort as a JSON doc."""
    return {
        "schema": "ogtt-indices/truth-v1",
        "truth": [
            {
                "patient_id": rec.patient_id,
                "params": {
                    "g0": p.g0, "a": p.a, "alpha": p.alpha,
                    "omega": p.omega, "delta": p.delta,
                },
            }
            for rec, p in pairs
        ],
    }


def write_truth_json(path: str | os.PathLike,
                     pairs: Sequence[tuple[OgttRecord, AckermanParams]],
                     ) -> None:
    """Side file of ground-truth curve parameters for a synthetic cohort."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth_to_json_dict(pairs), fh, indent=2)
        fh.write("\n")


def read_truth_json(path: str | os.PathLike) -> dict[str, AckermanParams]:
    """Load a ground-truth side file; last entry wins on duplicate ids."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("schema") != "ogtt-indices/truth-v1":
        raise SchemaError(f"{path}: not a ground-truth parameter file")
    out: dict[str, AckermanParams] = {}
    for item in doc.get("truth", []):
        out[item["patient_id"]] = AckermanParams(**item["params"])
    return out


# --- pipeline run ------------------------------------------------------


@dataclass(frozen=True)
class TrainMode:
    """Train a fresh classifier on the cohort's evaluated records."""

    c: float = 1.0
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c)
                and self.c > 0.0):
            raise InputError(f"c must be positive and finite, got {self.c!r}")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0.0):
            raise InputError(f"tol must be positive, got {self.tol!r}")


@dataclass(frozen=True)
class LoadMode:
    """Apply a previously saved classifier: a model file path or an
    already-loaded model (exactly one must be given)."""

    path: Optional[str] = None
    model: Optional[SvmModel] = None

    def __post_init__(self) -> None:
        if (self.path is None) == (self.model is None):
            raise InputError("LoadMode needs exactly one of path or model")

    def resolve(self) -> SvmModel:
        return self.model if self.model is not None else load_model(self.path)


SvmMode = Union[TrainMode, LoadMode]


@dataclass(frozen=True)
class ReportEntry:
    """Per-record outcome: label, fitted curve, applicability, prediction.

    ``predicted``/``distance`` are None for records excluded from
    classifier evaluation (non-converged fits or, with filtering on,
    non-applicable records).  Float fields hold report-precision values
    (nine significant digits).
    """

    patient_id: str
    category: GlycemicCategory
    binary: int
    params: AckermanParams
    error_abs: float
    verdict: ApplicabilityVerdict
    converged: bool
    evaluated: bool
    predicted: Optional[int]
    distance: Optional[float]


@dataclass(frozen=True)
class Aggregates:
    """Cohort-level summary, fully recomputable from the entry list."""

    n_records: int
    n_converged: int
    n_non_converged: int
    n_evaluated: int
    kept_fraction: float
    overall_accuracy: float
    per_category_accuracy: Mapping[GlycemicCategory, float]
    confusion: ConfusionMatrix
    t2dm_predicted_normoglycemic: int
    progression_angles: Mapping[GlycemicCategory, float]


@dataclass(frozen=True)
class Provenance:
    tool_version: str
    config_hash: str
    input_digest: str


@dataclass(frozen=True)
class CohortReport:
    """Everything one pipeline run produced, in input order."""

    provenance: Provenance
    svm_mode: str  # "train" | "load"
    filter_on: bool
    model: SvmModel
    entries: tuple[ReportEntry, ...]
    aggregates: Aggregates


def _entry_index_point(entry: ReportEntry) -> IndexPoint:
    return IndexPoint(a=entry.params.a, alpha=entry.params.alpha,
                      label=entry.binary, category=entry.category,
                      patient_id=entry.patient_id)


def compute_aggregates(entries: Sequence[ReportEntry]) -> Aggregates:
    """Derive all cohort aggregates from entries by pure bookkeeping."""
    n_records = len(entries)
    n_converged = sum(1 for e in entries if e.converged)
    evaluated = [e for e in entries if e.evaluated]
    n_evaluated = len(evaluated)
    kept_fraction = _round9(n_evaluated / n_converged) if n_converged else 0.0

    correct = sum(1 for e in evaluated if e.predicted == e.binary)
    overall = _round9(correct / n_evaluated) if n_evaluated else 0.0

    per_category: dict[GlycemicCategory, float] = {}
    for cat in CATEGORY_ORDER:
        members = [e for e in evaluated if e.category is cat]
        if members:
            hits = sum(1 for e in members if e.predicted == e.binary)
            per_category[cat] = _round9(hits / len(members))

    confusion = ConfusionMatrix(
        true_positive=sum(1 for e in evaluated
                          if e.binary == 1 and e.predicted == 1),
        false_negative=sum(1 for e in evaluated
                           if e.binary == 1 and e.predicted == -1),
        false_positive=sum(1 for e in evaluated
                           if e.binary == -1 and e.predicted == 1),
        true_negative=sum(1 for e in evaluated
                          if e.binary == -1 and e.predicted == -1),
    )
    t2dm_as_normal = sum(1 for e in evaluated
                         if e.category is GlycemicCategory.T2DM
                         and e.predicted == 1)

    angles: dict[GlycemicCategory, float] = {}
    present = {e.category for e in evaluated}
    if len(present) >= 2:
        raw = progression_angles([_entry_index_point(e) for e in evaluated])
        angles = {cat: _round9(raw[cat]) for cat in CATEGORY_ORDER
                  if cat in raw}

    return Aggregates(
        n_records=n_records,
        n_converged=n_converged,
        n_non_converged=n_records - n_converged,
        n_evaluated=n_evaluated,
        kept_fraction=kept_fraction,
        overall_accuracy=overall,
        per_category_accuracy=per_category,
        confusion=confusion,
        t2dm_predicted_normoglycemic=t2dm_as_normal,
        progression_angles=angles,
    )


def _config_hash(fit_config: FitConfig, mode: SvmMode, filter_on: bool,
                 thresholds: ApplicabilityThresholds,
                 model: SvmModel) -> str:
    """Hash of the effective configuration (model content, not path)."""
    if isinstance(mode, TrainMode):
        svm_obj: dict = {"mode": "train", "c": mode.c, "tol": mode.tol}
    else:
        svm_obj = {"mode": "load", "model": model.to_json_dict()}
    obj = {
        "fit": asdict(fit_config),
        "thresholds": asdict(thresholds),
        "filter": bool(filter_on),
        "svm": svm_obj,
    }
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _round_params(p: AckermanParams) -> AckermanParams:
    return AckermanParams(g0=_round9(p.g0), a=_round9(p.a),
                          alpha=_round9(p.alpha), omega=_round9(p.omega),
                          delta=_round9(p.delta))


def _round_verdict(v: ApplicabilityVerdict) -> ApplicabilityVerdict:
    return ApplicabilityVerdict(applicable=v.applicable, omega_ok=v.omega_ok,
                                condition=v.condition,
                                delta_g=_round9(v.delta_g),
                                error_abs=_round9(v.error_abs))


def run_pipeline(records: Sequence[OgttRecord],
                 fit_config: Optional[FitConfig] = None,
                 svm_mode: Optional[SvmMode] = None,
                 apply_filter: bool = False,
                 thresholds: ApplicabilityThresholds = DEFAULT_THRESHOLDS,
                 input_digest: str = "") -> CohortReport:
    """Fit every record, label it, optionally filter, classify, report.

    Non-converged fits stay in the entry list (flagged) but are excluded
    from training and from every aggregate.  With ``apply_filter`` the
    classifier is trained/evaluated only on applicable records and
    ``kept_fraction`` reports the surviving share of converged fits.
    """
    if not records:
        raise InputError("records must be non-empty")
    mode: SvmMode = TrainMode() if svm_mode is None else _check_mode(svm_mode)
    cfg = fit_config if fit_config is not None else FitConfig()

    fitted: list[FitResult] = []
    for rec in records:
        try:
            fitted.append(fit(rec, cfg))
        except NonConvergenceError as exc:
            fitted.append(exc.best)

    rows: list[dict] = []
    for rec, res in zip(records, fitted):
        ada = classify_record(rec)
        verdict = check_applicability(rec, res, thresholds)
        evaluated = res.converged and (verdict.applicable or not apply_filter)
        rows.append({
            "record": rec, "fit": res, "ada": ada, "verdict": verdict,
            "evaluated": evaluated,
            "params9": _round_params(res.params),
        })

    eval_rows = [r for r in rows if r["evaluated"]]
    if not eval_rows:
        raise PipelineError(
            "no records left to classify (all fits non-converged or "
            "filtered out)")
    points = [IndexPoint(a=r["params9"].a, alpha=r["params9"].alpha,
                         label=r["ada"].binary, category=r["ada"].category,
                         patient_id=r["record"].patient_id)
              for r in eval_rows]

    if isinstance(mode, TrainMode):
        try:
            model, _diag = train_detailed(points, c=mode.c, tol=mode.tol)
        except TrainingError as exc:
            raise PipelineError(f"classifier training failed: {exc}") from exc
        mode_name = "train"
    else:
        model = mode.resolve()
        mode_name = "load"

    entries: list[ReportEntry] = []
    for r in rows:
        predicted: Optional[int] = None
        distance: Optional[float] = None
        if r["evaluated"]:
            predicted, dist = predict(model, r["params9"].a,
                                      r["params9"].alpha)
            distance = _round9(dist)
        entries.append(ReportEntry(
            patient_id=r["record"].patient_id,
            category=r["ada"].category,
            binary=r["ada"].binary,
            params=r["params9"],
            error_abs=_round9(r["fit"].error_abs),
            verdict=_round_verdict(r["verdict"]),
            converged=r["fit"].converged,
            evaluated=r["evaluated"],
            predicted=predicted,
            distance=distance,
        ))

    aggregates = compute_aggregates(entries)
    _check_against_classifier_report(aggregates, model, points)

    provenance = Provenance(
        tool_version=__version__,
        config_hash=_config_hash(cfg, mode, apply_filter, thresholds, model),
        input_digest=input_digest,
    )
    return CohortReport(provenance=provenance, svm_mode=mode_name,
                        filter_on=bool(apply_filter), model=model,
                        entries=tuple(entries), aggregates=aggregates)


def _check_mode(mode: SvmMode) -> SvmMode:
    if not isinstance(mode, (TrainMode, LoadMode)):
        raise InputError(f"svm_mode must be TrainMode or LoadMode, "
                         f"got {mode!r}")
    return mode


def _check_against_classifier_report(agg: Aggregates, model: SvmModel,
                                     points: Sequence[IndexPoint]) -> None:
    """Cross-check entry bookkeeping against the classifier's own report."""
    check = accuracy_report(model, points)
    ok = (agg.overall_accuracy == _round9(check.overall)
          and agg.confusion == check.confusion
          and agg.t2dm_predicted_normoglycemic
          == check.t2dm_predicted_normoglycemic
          and {c: v for c, v in agg.per_category_accuracy.items()}
          == {c: _round9(v) for c, v in check.per_category.items()})
    if not ok:
        raise PipelineError(
            "internal inconsistency: entry bookkeeping disagrees with the "
            "classifier accuracy report")


# --- report serialization ---------------------------------------------


def report_to_json_dict(report: CohortReport) -> dict:
    """Report as a JSON-ready dict with fixed key order."""
    agg = report.aggregates
    doc: dict = {
        "schema": REPORT_SCHEMA,
        "provenance": {
            "tool_version": report.provenance.tool_version,
            "config_hash": report.provenance.config_hash,
            "input_digest": report.provenance.input_digest,
        },
        "settings": {
            "svm_mode": report.svm_mode,
            "svm_c": report.model.c,
            "filter": "on" if report.filter_on else "off",
        },
        "model": report.model.to_json_dict(),
        "aggregates": {
            "n_records": agg.n_records,
            "n_converged": agg.n_converged,
            "n_non_converged": agg.n_non_converged,
            "n_evaluated": agg.n_evaluated,
            "kept_fraction": agg.kept_fraction,
            "overall_accuracy": agg.overall_accuracy,
            "per_category_accuracy": {
                cat.value: agg.per_category_accuracy[cat]
                for cat in CATEGORY_ORDER
                if cat in agg.per_category_accuracy},
            "confusion": {
                "true_positive": agg.confusion.true_positive,
                "false_negative": agg.confusion.false_negative,
                "false_positive": agg.confusion.false_positive,
                "true_negative": agg.confusion.true_negative,
            },
            "t2dm_predicted_normoglycemic": agg.t2dm_predicted_normoglycemic,
            "progression_angles": {
                cat.value: agg.progression_angles[cat]
                for cat in CATEGORY_ORDER
                if cat in agg.progression_angles},
        },
        "entries": [
            {
                "patient_id": e.patient_id,
                "category": e.category.value,
                "binary_label": e.binary,
                "params": {
                    "g0": e.params.g0, "a": e.params.a,
                    "alpha": e.params.alpha, "omega": e.params.omega,
                    "delta": e.params.delta,
                },
                "error_abs": e.error_abs,
                "applicability": {
                    "applicable": e.verdict.applicable,
                    "omega_ok": e.verdict.omega_ok,
                    "condition": (None if e.verdict.condition is None
                                  else e.verdict.condition.value),
                    "delta_g": e.verdict.delta_g,
                    "error_abs": e.verdict.error_abs,
                },
                "converged": e.converged,
                "evaluated": e.evaluated,
                "predicted": e.predicted,
                "distance": e.distance,
            }
            for e in report.entries
        ],
    }
    return doc


def render_report_json(report: CohortReport) -> str:
    """Canonical byte-deterministic JSON text for a report."""
    return json.dumps(report_to_json_dict(report), indent=2,
                      ensure_ascii=False, allow_nan=False) + "\n"


def save_report(report: CohortReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report_json(report))


def _entry_from_json(obj: dict) -> ReportEntry:
    ap = obj["applicability"]
    cond = ap["condition"]
    return ReportEntry(
        patient_id=obj["patient_id"],
        category=GlycemicCategory.parse(obj["category"]),
        binary=int(obj["binary_label"]),
        params=AckermanParams(**obj["params"]),
        error_abs=float(obj["error_abs"]),
        verdict=ApplicabilityVerdict(
            applicable=bool(ap["applicable"]),
            omega_ok=bool(ap["omega_ok"]),
            condition=None if cond is None else Condition(cond),
            delta_g=float(ap["delta_g"]),
            error_abs=float(ap["error_abs"]),
        ),
        converged=bool(obj["converged"]),
        evaluated=bool(obj["evaluated"]),
        predicted=None if obj["predicted"] is None else int(obj["predicted"]),
        distance=None if obj["distance"] is None else float(obj["distance"]),
    )


def report_from_json_dict(doc: dict) -> CohortReport:
    """Rebuild a report from its JSON form and verify self-consistency."""
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise SchemaError(
            f"not a cohort report (expected schema {REPORT_SCHEMA!r})")
    try:
        prov = Provenance(
            tool_version=doc["provenance"]["tool_version"],
            config_hash=doc["provenance"]["config_hash"],
            input_digest=doc["provenance"]["input_digest"],
        )
        model = SvmModel.from_json_dict(doc["model"])
        entries = tuple(_entry_from_json(e) for e in doc["entries"])
        agg_doc = doc["aggregates"]
        conf = agg_doc["confusion"]
        aggregates = Aggregates(
            n_records=int(agg_doc["n_records"]),
            n_converged=int(agg_doc["n_converged"]),
            n_non_converged=int(agg_doc["n_non_converged"]),
            n_evaluated=int(agg_doc["n_evaluated"]),
            kept_fraction=float(agg_doc["kept_fraction"]),
            overall_accuracy=float(agg_doc["overall_accuracy"]),
            per_category_accuracy={
                GlycemicCategory.parse(k): float(v)
                for k, v in agg_doc["per_category_accuracy"].items()},
            confusion=ConfusionMatrix(
                true_positive=int(conf["true_positive"]),
                false_negative=int(conf["false_negative"]),
                false_positive=int(conf["false_positive"]),
                true_negative=int(conf["true_negative"]),
            ),
            t2dm_predicted_normoglycemic=int(
                agg_doc["t2dm_predicted_normoglycemic"]),
            progression_angles={
                GlycemicCategory.parse(k): float(v)
                for k, v in agg_doc["progression_angles"].items()},
        )
        settings = doc["settings"]
        report = CohortReport(
            provenance=prov,
            svm_mode=str(settings["svm_mode"]),
            filter_on=settings["filter"] == "on",
            model=model,
            entries=entries,
            aggregates=aggregates,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed cohort report: {exc!r}") from exc
    verify_report(report)
    return report


def verify_report(report: CohortReport) -> None:
    """Raise InputError when stored aggregates don't match the entries."""
    recomputed = compute_aggregates(report.entries)
    if recomputed != report.aggregates:
        raise InputError(
            "report aggregates are inconsistent with its entries")


def load_report(path: str | os.PathLike) -> CohortReport:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return report_from_json_dict(doc)


# --- longitudinal tracking --------------------------------------------


@dataclass(frozen=True)
class TrajectoryPoint:
    """One visit: ordering key, index point, glycemic label, fit error."""

    seq: int
    point: IndexPoint
    ada: AdaLabel
    error_abs: float
    distance: Optional[float]


@dataclass(frozen=True)
class Trajectory:
    """A patient's visits in strictly increasing sequence order."""

    patient_id: str
    points: tuple[TrajectoryPoint, ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise InputError(
                f"trajectory for {self.patient_id!r} needs >= 2 points")
        seqs = [p.seq for p in self.points]
        if any(b <= a for a, b in zip(seqs, seqs[1:])):
            raise InputError(
                f"trajectory for {self.patient_id!r} must have strictly "
                f"increasing sequence indices, got {seqs}")

    @property
    def categories(self) -> tuple[GlycemicCategory, ...]:
        return tuple(p.ada.category for p in self.points)


def track(records: Sequence[OgttRecord],
          sequence: Sequence[Optional[int]],
          fit_config: Optional[FitConfig] = None,
          model: Optional[SvmModel] = None) -> list[Trajectory]:
    """Build per-patient index trajectories from repeat tests.

    Records sharing a patient_id are grouped (first-appearance order),
    ordered by their ``seq`` key, fitted, and labeled.  Patients with
    fewer than two usable visits are skipped; if nothing remains, a
    warning is emitted and the result is empty.  Signed distances are
    attached when a classifier model is supplied.
    """
    if len(records) != len(sequence):
        raise InputError(
            f"sequence length {len(sequence)} != record count {len(records)}")
    by_patient: dict[str, list[tuple[Optional[int], OgttRecord]]] = {}
    for rec, seq in zip(records, sequence):
        by_patient.setdefault(rec.patient_id, []).append((seq, rec))

    out: list[Trajectory] = []
    for pid, visits in by_patient.items():
        if len(visits) < 2:
            continue
        if any(seq is None for seq, _ in visits):
            raise InputError(
                f"patient {pid!r} has repeat tests but a missing seq value")
        seqs = [seq for seq, _ in visits]
        if len(set(seqs)) != len(seqs):
            raise InputError(
                f"patient {pid!r} has duplicate seq values: {sorted(seqs)}")
        visits.sort(key=lambda sv: sv[0])

        points: list[TrajectoryPoint] = []
        for seq, rec in visits:
            try:
                res = fit(rec, fit_config)
            except NonConvergenceError:
                warnings.warn(
                    f"dropping visit seq={seq} of patient {pid!r}: "
                    f"fit did not converge", stacklevel=2)
                continue
            if not res.converged:
                warnings.warn(
                    f"dropping visit seq={seq} of patient {pid!r}: "
                    f"fit did not converge", stacklevel=2)
                continue
            ada = classify_record(rec)
            pt = IndexPoint(a=res.params.a, alpha=res.params.alpha,
                            label=ada.binary, category=ada.category,
                            patient_id=pid)
            distance = None
            if model is not None:
                distance = predict(model, pt.a, pt.alpha)[1]
            points.append(TrajectoryPoint(seq=seq, point=pt, ada=ada,
                                          error_abs=res.error_abs,
                                          distance=distance))
        if len(points) < 2:
            warnings.warn(
                f"patient {pid!r} has fewer than two usable visits; skipped",
                stacklevel=2)
            continue
        out.append(Trajectory(patient_id=pid, points=tuple(points)))

    if not out:
        warnings.warn("no patient has two or more usable visits; "
                      "nothing to track", stacklevel=2)
    return out


def trajectories_to_json_dict(trajectories: Sequence[Trajectory]) -> dict:
    """Trajectories as a JSON-ready dict (report rounding rules)."""
    return {
        "schema": TRAJECTORY_SCHEMA,
        "trajectories": [
            {
                "patient_id": tr.patient_id,
                "points": [
                    {
                        "seq": p.seq,
                        "a": _round9(p.point.a),
                        "alpha": _round9(p.point.alpha),
                        "category": p.ada.category.value,
                        "binary_label": p.ada.binary,
                        "error_abs": _round9(p.error_abs),
                        "distance": (None if p.distance is None
                                     else _round9(p.distance)),
                    }
                    for p in tr.points
                ],
            }
            for tr in trajectories
        ],
    }


def render_trajectories_json(trajectories: Sequence[Trajectory]) -> str:
    return json.dumps(trajectories_to_json_dict(trajectories), indent=2,
                      ensure_ascii=False, allow_nan=False) + "\n"
