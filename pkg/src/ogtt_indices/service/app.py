"""HTTP service exposing every library operation over JSON.

The service is stateless and touches no files: cohorts arrive as CSV
text or record lists, classifier models travel as JSON documents, and
plot endpoints return file content for the caller to persist.  Errors
map to a structured payload ``{"error": {"kind", "type", "message"}}``
where ``kind`` is ``input`` (bad request data, HTTP 400), ``pipeline``
(a valid request whose computation failed, HTTP 422), or ``io``
(HTTP 500); clients use ``kind`` to choose process exit codes.
"""

from __future__ import annotations

import warnings

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..ada import classify_ada, classify_record
from ..applicability import DEFAULT_THRESHOLDS, check_applicability
from ..errors import InputError, NonConvergenceError, OgttError, ParameterError
from ..estimation import fit
from ..model import AckermanParams
from ..pipeline import (IngestResult, LoadMode, TrainMode, render_cohort_csv,
                        report_from_json_dict, report_to_json_dict,
                        run_pipeline, track, trajectories_to_json_dict,
                        truth_to_json_dict)
from ..plotting import render_csv, render_svg
from ..svm import SvmModel, predict
from ..synth import generate_cohort, reference_cohort
from . import schemas as S


def _error_payload(kind: str, exc: BaseException) -> dict:
    return {"error": {"kind": kind, "type": type(exc).__name__,
                      "message": str(exc)}}


def _params_dict(p: AckermanParams) -> dict:
    return {"g0": p.g0, "a": p.a, "alpha": p.alpha, "omega": p.omega,
            "delta": p.delta}


def _ingest_meta(ing: IngestResult) -> dict:
    return {"row_errors": [str(e) for e in ing.errors],
            "digest": ing.digest}


def _fit_all(records, cfg):
    """Best-effort fit of every record (non-convergence kept, flagged)."""
    out = []
    for rec in records:
        try:
            out.append(fit(rec, cfg))
        except NonConvergenceError as exc:
            out.append(exc.best)
    return out


def create_app() -> FastAPI:
    app = FastAPI(title="ogtt-indices", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=_error_payload("input", exc))

    @app.exception_handler(InputError)
    async def _on_input(request: Request, exc: InputError):
        return JSONResponse(status_code=400,
                            content=_error_payload("input", exc))

    @app.exception_handler(ParameterError)
    async def _on_parameter(request: Request, exc: ParameterError):
        return JSONResponse(status_code=400,
                            content=_error_payload("input", exc))

    @app.exception_handler(OgttError)
    async def _on_pipeline(request: Request, exc: OgttError):
        return JSONResponse(status_code=422,
                            content=_error_payload("pipeline", exc))

    @app.exception_handler(OSError)
    async def _on_io(request: Request, exc: OSError):
        return JSONResponse(status_code=500, content=_error_payload("io", exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/fit")
    def fit_endpoint(body: S.FitRequest) -> dict:
        ing = body.resolve()
        cfg = body.config.to_config() if body.config else None
        fits = []
        for rec, res in zip(ing.records, _fit_all(ing.records, cfg)):
            fits.append({
                "patient_id": rec.patient_id,
                "params": _params_dict(res.params),
                "error_abs": res.error_abs,
                "converged": res.converged,
            })
        return {"fits": fits, **_ingest_meta(ing)}

    @app.post("/ada")
    def ada_endpoint(body: S.AdaRequest) -> dict:
        if body.fasting is not None:
            label = classify_ada(body.fasting, body.two_hour)
            return {"label": {"category": label.category.value,
                              "binary": label.binary}}
        ing = body.resolve()
        labels = []
        for rec in ing.records:
            label = classify_record(rec)
            labels.append({"patient_id": rec.patient_id,
                           "category": label.category.value,
                           "binary": label.binary})
        return {"labels": labels, **_ingest_meta(ing)}

    @app.post("/applicability")
    def applicability_endpoint(body: S.ApplicabilityRequest) -> dict:
        ing = body.resolve()
        cfg = body.config.to_config() if body.config else None
        th = (body.thresholds.to_thresholds() if body.thresholds
              else DEFAULT_THRESHOLDS)
        verdicts = []
        n_converged = n_kept = 0
        for rec, res in zip(ing.records, _fit_all(ing.records, cfg)):
            v = check_applicability(rec, res, th)
            if res.converged:
                n_converged += 1
                n_kept += 1 if v.applicable else 0
            verdicts.append({
                "patient_id": rec.patient_id,
                "applicable": v.applicable,
                "omega_ok": v.omega_ok,
                "condition": None if v.condition is None
                else v.condition.value,
                "delta_g": v.delta_g,
                "error_abs": v.error_abs,
                "converged": res.converged,
            })
        kept_fraction = n_kept / n_converged if n_converged else 0.0
        return {"verdicts": verdicts, "kept_fraction": kept_fraction,
                **_ingest_meta(ing)}

    @app.post("/train")
    def train_endpoint(body: S.TrainRequest) -> dict:
        ing = body.resolve()
        cfg = body.config.to_config() if body.config else None
        th = (body.thresholds.to_thresholds() if body.thresholds
              else DEFAULT_THRESHOLDS)
        report = run_pipeline(ing.records, cfg,
                              TrainMode(c=body.c, tol=body.tol),
                              apply_filter=body.filter, thresholds=th,
                              input_digest=ing.digest)
        doc = report_to_json_dict(report)
        return {"model": doc["model"], "aggregates": doc["aggregates"],
                **_ingest_meta(ing)}

    @app.post("/predict")
    def predict_endpoint(body: S.PredictRequest) -> dict:
        model = SvmModel.from_json_dict(body.model)
        predictions = []
        for pt in body.points:
            label, distance = predict(model, pt.a, pt.alpha)
            predictions.append({"label": label, "distance": distance})
        return {"predictions": predictions}

    @app.post("/report")
    def report_endpoint(body: S.ReportRequest) -> dict:
        ing = body.resolve()
        cfg = body.config.to_config() if body.config else None
        th = (body.thresholds.to_thresholds() if body.thresholds
              else DEFAULT_THRESHOLDS)
        if body.mode == "train":
            mode = TrainMode(c=body.c, tol=body.tol)
        else:
            mode = LoadMode(model=SvmModel.from_json_dict(body.model))
        report = run_pipeline(ing.records, cfg, mode,
                              apply_filter=body.filter, thresholds=th,
                              input_digest=ing.digest)
        return {"report": report_to_json_dict(report), **_ingest_meta(ing)}

    @app.post("/synth")
    def synth_endpoint(body: S.SynthRequest) -> dict:
        if body.clusters is not None:
            specs = [c.to_spec() for c in body.clusters]
            noise = body.noise.to_spec() if body.noise else None
            if noise is None:
                pairs = generate_cohort(specs, seed=body.seed)
            else:
                pairs = generate_cohort(specs, noise, seed=body.seed)
        else:
            pairs = reference_cohort(body.seed)
        records = [rec for rec, _ in pairs]
        out = {"csv": render_cohort_csv(records), "n": len(records)}
        if body.include_truth:
            out["truth"] = truth_to_json_dict(pairs)
        return out

    @app.post("/track")
    def track_endpoint(body: S.TrackRequest) -> dict:
        ing = body.resolve()
        cfg = body.config.to_config() if body.config else None
        model = (SvmModel.from_json_dict(body.model)
                 if body.model is not None else None)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            trajectories = track(ing.records, ing.sequence, cfg, model=model)
        doc = trajectories_to_json_dict(trajectories)
        doc["warnings"] = [str(w.message) for w in caught]
        return {**doc, **_ingest_meta(ing)}

    @app.post("/plot")
    def plot_endpoint(body: S.PlotRequest) -> dict:
        report = report_from_json_dict(body.report)
        content = (render_svg(report) if body.format == "svg"
                   else render_csv(report))
        return {"format": body.format, "content": content}

    return app


app = create_app()
