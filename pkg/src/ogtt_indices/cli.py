"""Command-line client for the OGTT index service.

Every subcommand sends one or two JSON requests to the HTTP service —
by default an in-process instance, or a running server via ``--server``
— and only handles local file I/O itself.  Exit codes: 0 success,
1 input/schema error, 2 pipeline error (a valid request whose
computation failed), 3 I/O error (local files or unreachable server).

The optional ``--config`` JSON file supplies defaults with top-level
sections ``fit`` (estimation settings), ``thresholds`` (applicability
cutoffs), and ``svm`` (``c``, ``tol``); command-line flags win over the
file.  ``--seed`` overrides the estimation seed and the synthesis seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import InputError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PIPELINE = 2
EXIT_IO = 3

_EXIT_BY_KIND = {"input": EXIT_INPUT, "pipeline": EXIT_PIPELINE,
                 "io": EXIT_IO}

_CONFIG_SECTIONS = ("fit", "thresholds", "svm")


class ServiceUnreachable(Exception):
    """The configured ``--server`` could not be reached."""


class _Client:
    """Uniform POST/GET wrapper over in-process or remote transport."""

    def __init__(self, server: Optional[str]):
        if server:
            import httpx

            self._httpx = httpx
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # the bundled test client emits an import-time
                # deprecation notice irrelevant to CLI users
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

                from .service import create_app

            self._httpx = None
            self._client = TestClient(create_app(),
                                      raise_server_exceptions=False)

    def post(self, path: str, body: dict):
        try:
            return self._client.post(path, json=body)
        except Exception as exc:
            if self._httpx is not None and isinstance(
                    exc, self._httpx.HTTPError):
                raise ServiceUnreachable(f"POST {path}: {exc}") from exc
            raise


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _read_json(path: str) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(doc: object) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _print_meta(body: dict) -> None:
    """Surface row diagnostics and service warnings on stderr."""
    for line in body.get("row_errors", []):
        print(f"warning: skipped row: {line}", file=sys.stderr)
    for line in body.get("warnings", []):
        print(f"warning: {line}", file=sys.stderr)


def _handle(resp) -> tuple[int, dict]:
    """Turn an HTTP response into (exit_code, body)."""
    if resp.status_code >= 400:
        try:
            err = resp.json()["error"]
        except Exception:
            err = {"kind": "pipeline", "message": resp.text.strip()}
        print(f"error ({err.get('kind', '?')}): {err.get('message', '')}",
              file=sys.stderr)
        return _EXIT_BY_KIND.get(err.get("kind"), EXIT_PIPELINE), {}
    body = resp.json()
    _print_meta(body)
    return EXIT_OK, body


def _strip_meta(body: dict) -> dict:
    return {k: v for k, v in body.items()
            if k not in ("row_errors", "digest", "warnings")}


# --- configuration merging --------------------------------------------


def _load_config(args) -> dict:
    if not args.config:
        return {}
    doc = _read_json(args.config)
    if not isinstance(doc, dict):
        raise InputError(f"{args.config}: config must be a JSON object")
    unknown = sorted(set(doc) - set(_CONFIG_SECTIONS))
    if unknown:
        raise InputError(
            f"{args.config}: unknown config section(s) "
            f"{', '.join(unknown)}; expected {', '.join(_CONFIG_SECTIONS)}")
    return doc


def _fit_config_body(args, config: dict) -> Optional[dict]:
    fit_cfg = dict(config.get("fit", {}))
    if args.seed is not None:
        fit_cfg["seed"] = args.seed
    return fit_cfg or None


def _svm_setting(args, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get("svm", {}).get(name, default)


def _cohort_body(args, config: dict) -> dict:
    body: dict = {"csv": _read_text(args.cohort), "strict": args.strict}
    cfg = _fit_config_body(args, config)
    if cfg:
        body["config"] = cfg
    if config.get("thresholds"):
        body["thresholds"] = config["thresholds"]
    return body


# --- subcommands -------------------------------------------------------


def _cmd_fit(args, client: _Client, config: dict) -> int:
    body = _cohort_body(args, config)
    body.pop("thresholds", None)
    code, out = _handle(client.post("/fit", body))
    if code == EXIT_OK:
        _write_text(args.out, _dump_json(_strip_meta(out)))
    return code


def _cmd_ada(args, client: _Client, config: dict) -> int:
    if (args.fasting is None) != (args.two_hour is None):
        raise InputError("--fasting and --two-hour must be given together")
    if (args.fasting is None) == (args.cohort is None):
        raise InputError(
            "provide either a cohort CSV or --fasting/--two-hour")
    if args.fasting is not None:
        body: dict = {"fasting": args.fasting, "two_hour": args.two_hour}
    else:
        body = {"csv": _read_text(args.cohort), "strict": args.strict}
    code, out = _handle(client.post("/ada", body))
    if code == EXIT_OK:
        _write_text(args.out, _dump_json(_strip_meta(out)))
    return code


def _cmd_filter(args, client: _Client, config: dict) -> int:
    body = _cohort_body(args, config)
    code, out = _handle(client.post("/applicability", body))
    if code == EXIT_OK:
        _write_text(args.out, _dump_json(_strip_meta(out)))
    return code


def _cmd_train(args, client: _Client, config: dict) -> int:
    body = _cohort_body(args, config)
    body["c"] = _svm_setting(args, config, "c", 1.0)
    body["tol"] = _svm_setting(args, config, "tol", 1e-6)
    if args.filter:
        body["filter"] = True
    code, out = _handle(client.post("/train", body))
    if code != EXIT_OK:
        return code
    _write_text(args.model_out, _dump_json(out["model"]))
    summary = {"model_file": args.model_out, "aggregates": out["aggregates"]}
    _write_text(args.out, _dump_json(summary))
    return EXIT_OK


def _cmd_predict(args, client: _Client, config: dict) -> int:
    if (args.a is None) != (args.alpha is None):
        raise InputError("--a and --alpha must be given together")
    if (args.a is None) == (args.cohort is None):
        raise InputError("provide either a cohort CSV or --a/--alpha")
    model_doc = _read_json(args.model)
    if args.a is not None:
        points = [{"a": args.a, "alpha": args.alpha}]
        ids = [None]
    else:
        body = {"csv": _read_text(args.cohort), "strict": args.strict}
        cfg = _fit_config_body(args, config)
        if cfg:
            body["config"] = cfg
        code, out = _handle(client.post("/fit", body))
        if code != EXIT_OK:
            return code
        points = [{"a": f["params"]["a"], "alpha": f["params"]["alpha"]}
                  for f in out["fits"]]
        ids = [f["patient_id"] for f in out["fits"]]
        if not points:
            raise InputError(f"{args.cohort}: no usable records")
    code, out = _handle(client.post("/predict",
                                    {"model": model_doc, "points": points}))
    if code != EXIT_OK:
        return code
    predictions = []
    for pid, pt, pred in zip(ids, points, out["predictions"]):
        entry = {} if pid is None else {"patient_id": pid}
        entry.update({"a": pt["a"], "alpha": pt["alpha"],
                      "label": pred["label"], "distance": pred["distance"]})
        predictions.append(entry)
    _write_text(args.out, _dump_json({"predictions": predictions}))
    return EXIT_OK


def _cmd_report(args, client: _Client, config: dict) -> int:
    if (args.mode == "load") != (args.model is not None):
        raise InputError("--model is required with --mode load "
                         "and forbidden with --mode train")
    body = _cohort_body(args, config)
    body["mode"] = args.mode
    if args.mode == "train":
        body["c"] = _svm_setting(args, config, "c", 1.0)
        body["tol"] = _svm_setting(args, config, "tol", 1e-6)
    else:
        body["model"] = _read_json(args.model)
    if args.filter:
        body["filter"] = True
    code, out = _handle(client.post("/report", body))
    if code != EXIT_OK:
        return code
    report_doc = out["report"]
    _write_text(args.out, _dump_json(report_doc))
    if args.plot:
        code, pout = _handle(client.post(
            "/plot", {"report": report_doc, "format": args.plot_format}))
        if code != EXIT_OK:
            return code
        _write_text(args.plot, pout["content"])
    return EXIT_OK


def _cmd_synth(args, client: _Client, config: dict) -> int:
    body: dict = {"seed": args.seed if args.seed is not None else 0,
                  "include_truth": args.truth_out is not None}
    if args.clusters:
        clusters = _read_json(args.clusters)
        if not isinstance(clusters, list):
            raise InputError(
                f"{args.clusters}: expected a JSON list of cluster specs")
        body["clusters"] = clusters
        if args.noise_kind != "none":
            body["noise"] = {"kind": args.noise_kind,
                             "sigma": args.noise_sigma,
                             "seed": args.noise_seed}
    code, out = _handle(client.post("/synth", body))
    if code != EXIT_OK:
        return code
    _write_text(args.out, out["csv"])
    if args.truth_out:
        _write_text(args.truth_out, _dump_json(out["truth"]))
    print(f"generated {out['n']} records", file=sys.stderr)
    return EXIT_OK


def _cmd_track(args, client: _Client, config: dict) -> int:
    body = _cohort_body(args, config)
    body.pop("thresholds", None)
    if args.model:
        body["model"] = _read_json(args.model)
    code, out = _handle(client.post("/track", body))
    if code == EXIT_OK:
        _write_text(args.out, _dump_json(_strip_meta(out)))
    return code


def _cmd_plot(args, client: _Client, config: dict) -> int:
    report_doc = _read_json(args.report)
    code, out = _handle(client.post(
        "/plot", {"report": report_doc, "format": args.format}))
    if code == EXIT_OK:
        _write_text(args.out, out["content"])
    return code


# --- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ogtt-indices",
        description="Fit five-sample OGTT records, label them with "
                    "glycemic rules, and separate normoglycemic from "
                    "dysglycemic subjects in the (A, alpha) index plane.")
    parser.add_argument("--config", metavar="FILE",
                        help="JSON config file (sections: fit, thresholds, "
                             "svm)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the estimation/synthesis seed")
    parser.add_argument("--strict", action="store_true",
                        help="fail on the first invalid CSV row instead of "
                             "skipping it")
    parser.add_argument("--server", metavar="URL", default=None,
                        help="base URL of a running service "
                             "(default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit curve parameters for each record")
    p.add_argument("cohort", help="cohort CSV file")
    p.add_argument("--out", default="-", help="output JSON path (default: -)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("ada", help="apply glycemic category rules")
    p.add_argument("cohort", nargs="?", help="cohort CSV file")
    p.add_argument("--fasting", type=float, default=None,
                   help="fasting glucose (mg/dl)")
    p.add_argument("--two-hour", type=float, default=None,
                   help="two-hour glucose (mg/dl)")
    p.add_argument("--out", default="-", help="output JSON path (default: -)")
    p.set_defaults(func=_cmd_ada)

    p = sub.add_parser("filter",
                       help="screen fits with the applicability criteria")
    p.add_argument("cohort", help="cohort CSV file")
    p.add_argument("--out", default="-", help="output JSON path (default: -)")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("train", help="train the index-plane classifier")
    p.add_argument("cohort", help="cohort CSV file")
    p.add_argument("--model-out", required=True,
                   help="where to write the model JSON")
    p.add_argument("--c", type=float, default=None,
                   help="soft-margin penalty (default 1.0)")
    p.add_argument("--tol", type=float, default=None,
                   help="training tolerance (default 1e-6)")
    p.add_argument("--filter", action="store_true",
                   help="train on applicable records only")
    p.add_argument("--out", default="-",
                   help="training summary JSON path (default: -)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict",
                       help="classify index points with a saved model")
    p.add_argument("cohort", nargs="?",
                   help="cohort CSV file (fitted before prediction)")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--a", type=float, default=None,
                   help="amplitude index (mg/dl)")
    p.add_argument("--alpha", type=float, default=None,
                   help="removal-rate index (1/min)")
    p.add_argument("--out", default="-", help="output JSON path (default: -)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("report", help="run the full cohort pipeline")
    p.add_argument("cohort", help="cohort CSV file")
    p.add_argument("--out", default="-", help="report JSON path (default: -)")
    p.add_argument("--mode", choices=("train", "load"), default="train")
    p.add_argument("--model", default=None,
                   help="model JSON file (load mode)")
    p.add_argument("--c", type=float, default=None,
                   help="soft-margin penalty (train mode, default 1.0)")
    p.add_argument("--tol", type=float, default=None,
                   help="training tolerance (train mode, default 1e-6)")
    p.add_argument("--filter", action="store_true",
                   help="restrict classification to applicable records")
    p.add_argument("--plot", default=None,
                   help="also write a plot of the report here")
    p.add_argument("--plot-format", choices=("svg", "csv"), default="svg")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    p.add_argument("--out", default="-",
                   help="cohort CSV path (default: -)")
    p.add_argument("--truth-out", default=None,
                   help="also write ground-truth parameters JSON here")
    p.add_argument("--clusters", default=None,
                   help="JSON file with custom cluster specs "
                        "(default: built-in reference cohort)")
    p.add_argument("--noise-kind", choices=("none", "gaussian"),
                   default="none", help="noise on custom clusters")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("track",
                       help="build longitudinal index trajectories")
    p.add_argument("cohort", help="cohort CSV file with a seq column")
    p.add_argument("--model", default=None,
                   help="model JSON file for signed distances")
    p.add_argument("--out", default="-", help="output JSON path (default: -)")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("plot", help="render a saved report as SVG or CSV")
    p.add_argument("--report", required=True, help="report JSON file")
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--format", choices=("svg", "csv"), default="svg")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        client = _Client(args.server)
        return args.func(args, client, config)
    except InputError as exc:
        print(f"error (input): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ServiceUnreachable as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
