"""End-to-end tests for the command-line client (run in-process)."""

import json

import pytest

from ogtt_indices import (
    OgttRecord,
    SvmModel,
    TrainMode,
    fit,
    ingest_csv_text,
    predict,
    reference_cohort,
    render_cohort_csv,
    run_pipeline,
)
from ogtt_indices.cli import (
    EXIT_INPUT,
    EXIT_IO,
    EXIT_OK,
    EXIT_PIPELINE,
    main,
)
from ogtt_indices.pipeline import render_report_json

ZIG_ROW = "zig-a,,,90,195,62,200,58"
BAD_ROW = "p-bad,,,90,150,120,110,0"


@pytest.fixture(scope="module")
def ws(tmp_path_factory, mini_records, mini_model):
    """Workspace of input files shared by the CLI tests."""
    d = tmp_path_factory.mktemp("cli")
    sub = mini_records[10:22]

    files = {"dir": d, "sub": sub}
    files["cohort"] = d / "cohort.csv"
    files["cohort"].write_text(render_cohort_csv(sub))

    files["ngt_only"] = d / "ngt.csv"
    files["ngt_only"].write_text(render_cohort_csv(mini_records[:3]))

    good = render_cohort_csv(sub[:1]).rstrip("\n")
    files["bad_row"] = d / "bad_row.csv"
    files["bad_row"].write_text(good + "\n" + BAD_ROW + "\n")

    files["bad_header"] = d / "bad_header.csv"
    files["bad_header"].write_text("patient,g0\nx,90\n")

    files["with_zig"] = d / "with_zig.csv"
    files["with_zig"].write_text(render_cohort_csv(sub).rstrip("\n")
                                 + "\n" + ZIG_ROW + "\n")

    visits = [OgttRecord(patient_id="L1", sex=r.sex, age=r.age, g=r.g)
              for r in (mini_records[20], mini_records[28],
                        mini_records[34])]
    files["visits"] = d / "visits.csv"
    files["visits"].write_text(render_cohort_csv(visits,
                                                 sequence=[1, 2, 3]))
    files["dup_seq"] = d / "dup_seq.csv"
    files["dup_seq"].write_text(render_cohort_csv(visits,
                                                  sequence=[1, 1, 3]))

    files["model"] = d / "model.json"
    files["model"].write_text(json.dumps(mini_model.to_json_dict()))

    files["not_json"] = d / "not_json.json"
    files["not_json"].write_text("{ nope")
    return files


class TestArgumentParsing:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_global_flags_precede_subcommand(self, ws):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--seed", "5", str(ws["cohort"])])
        assert exc.value.code == 2
        assert main(["--seed", "5", "fit", str(ws["cohort"]),
                     "--out", str(ws["dir"] / "seeded.json")]) == EXIT_OK


class TestFit:
    def test_stdout_json_matches_library(self, ws, capsys):
        assert main(["fit", str(ws["cohort"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"fits"}
        assert len(doc["fits"]) == len(ws["sub"])
        res = fit(ws["sub"][0])
        first = doc["fits"][0]
        assert first["patient_id"] == ws["sub"][0].patient_id
        assert first["params"]["g0"] == res.params.g0
        assert first["error_abs"] == res.error_abs
        assert first["converged"] is True

    def test_out_file(self, ws):
        out = ws["dir"] / "fits.json"
        assert main(["fit", str(ws["cohort"]), "--out", str(out)]) == EXIT_OK
        assert set(json.loads(out.read_text())) == {"fits"}

    def test_missing_cohort_file_is_io_error(self, ws, capsys):
        assert main(["fit", str(ws["dir"] / "nope.csv")]) == EXIT_IO
        assert "error (io)" in capsys.readouterr().err

    def test_bad_header_is_input_error(self, ws, capsys):
        assert main(["fit", str(ws["bad_header"])]) == EXIT_INPUT
        assert "error (input)" in capsys.readouterr().err

    def test_lenient_run_warns_and_continues(self, ws, capsys):
        assert main(["fit", str(ws["bad_row"])]) == EXIT_OK
        captured = capsys.readouterr()
        assert "warning: skipped row:" in captured.err
        assert "g120" in captured.err
        assert len(json.loads(captured.out)["fits"]) == 1

    def test_strict_run_fails_on_bad_row(self, ws, capsys):
        assert main(["--strict", "fit", str(ws["bad_row"])]) == EXIT_INPUT
        assert "error (input)" in capsys.readouterr().err


class TestAda:
    def test_single_pair(self, capsys):
        assert main(["ada", "--fasting", "130", "--two-hour", "210"]) \
            == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc == {"label": {"category": "T2DM", "binary": -1}}

    def test_cohort_labels(self, ws, capsys):
        assert main(["ada", str(ws["cohort"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["labels"]) == len(ws["sub"])

    def test_half_pair_rejected(self, capsys):
        assert main(["ada", "--fasting", "130"]) == EXIT_INPUT
        assert "together" in capsys.readouterr().err

    def test_pair_and_cohort_rejected(self, ws, capsys):
        assert main(["ada", str(ws["cohort"]), "--fasting", "130",
                     "--two-hour", "210"]) == EXIT_INPUT

    def test_no_source_rejected(self, capsys):
        assert main(["ada"]) == EXIT_INPUT


class TestFilter:
    def test_verdicts_and_kept_fraction(self, ws, capsys):
        assert main(["filter", str(ws["with_zig"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"verdicts", "kept_fraction"}
        assert len(doc["verdicts"]) == len(ws["sub"]) + 1
        assert doc["kept_fraction"] == len(ws["sub"]) / (len(ws["sub"]) + 1)
        assert doc["verdicts"][-1]["applicable"] is False


class TestTrain:
    def test_writes_model_and_summary(self, ws):
        model_out = ws["dir"] / "trained.json"
        summary_out = ws["dir"] / "summary.json"
        assert main(["train", str(ws["cohort"]), "--model-out",
                     str(model_out), "--out", str(summary_out)]) == EXIT_OK
        doc = json.loads(model_out.read_text())
        model = SvmModel.from_json_dict(doc)
        assert doc["c"] == 1.0
        summary = json.loads(summary_out.read_text())
        assert set(summary) == {"model_file", "aggregates"}
        assert summary["model_file"] == str(model_out)
        # deterministic training: equals a library run on the same cohort
        local = run_pipeline(ws["sub"], svm_mode=TrainMode(),
                             input_digest="x")
        assert model == local.model

    def test_c_flag_overrides_config_file(self, ws):
        cfg = ws["dir"] / "svm_cfg.json"
        cfg.write_text(json.dumps({"svm": {"c": 2.0}}))
        model_out = ws["dir"] / "c_model.json"
        run = lambda *extra: main([*extra, "train", str(ws["cohort"]),
                                   "--model-out", str(model_out),
                                   "--out", str(ws["dir"] / "c_sum.json")])
        assert run() == EXIT_OK
        assert json.loads(model_out.read_text())["c"] == 1.0
        assert run("--config", str(cfg)) == EXIT_OK
        assert json.loads(model_out.read_text())["c"] == 2.0
        assert main(["--config", str(cfg), "train", str(ws["cohort"]),
                     "--model-out", str(model_out), "--out", "-",
                     "--c", "4.0"]) == EXIT_OK
        assert json.loads(model_out.read_text())["c"] == 4.0

    def test_single_class_cohort_is_pipeline_error(self, ws, capsys):
        assert main(["train", str(ws["ngt_only"]), "--model-out",
                     str(ws["dir"] / "never.json")]) == EXIT_PIPELINE
        assert "error (pipeline)" in capsys.readouterr().err


class TestPredict:
    def test_single_point(self, ws, mini_model, capsys):
        assert main(["predict", "--model", str(ws["model"]),
                     "--a", "50", "--alpha", "0.02"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        label, dist = predict(mini_model, 50.0, 0.02)
        assert doc == {"predictions": [{"a": 50.0, "alpha": 0.02,
                                        "label": label, "distance": dist}]}

    def test_cohort_predictions_carry_patient_ids(self, ws, capsys):
        assert main(["predict", str(ws["cohort"]),
                     "--model", str(ws["model"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["predictions"]) == len(ws["sub"])
        assert [p["patient_id"] for p in doc["predictions"]] == \
            [r.patient_id for r in ws["sub"]]
        assert all(p["label"] in (-1, 1) for p in doc["predictions"])

    def test_half_point_rejected(self, ws, capsys):
        assert main(["predict", "--model", str(ws["model"]),
                     "--a", "50"]) == EXIT_INPUT

    def test_missing_model_file_is_io_error(self, ws):
        assert main(["predict", "--model", str(ws["dir"] / "nope.json"),
                     "--a", "50", "--alpha", "0.02"]) == EXIT_IO

    def test_invalid_model_json_is_input_error(self, ws, capsys):
        assert main(["predict", "--model", str(ws["not_json"]),
                     "--a", "50", "--alpha", "0.02"]) == EXIT_INPUT
        assert "not valid JSON" in capsys.readouterr().err


class TestReport:
    def test_file_matches_library_rendering(self, ws):
        out = ws["dir"] / "report.json"
        assert main(["report", str(ws["cohort"]), "--out", str(out)]) \
            == EXIT_OK
        ing = ingest_csv_text(ws["cohort"].read_text())
        local = run_pipeline(ing.records, svm_mode=TrainMode(),
                             input_digest=ing.digest)
        assert out.read_text() == render_report_json(local)

    def test_repeat_runs_byte_identical_including_plot(self, ws):
        paths = [(ws["dir"] / f"rep{i}.json", ws["dir"] / f"rep{i}.svg")
                 for i in (1, 2)]
        for rpt, svg in paths:
            assert main(["report", str(ws["cohort"]), "--out", str(rpt),
                         "--plot", str(svg)]) == EXIT_OK
        assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
        assert paths[0][1].read_bytes() == paths[1][1].read_bytes()
        assert paths[0][1].read_text().startswith("<svg ")

    def test_plot_format_csv(self, ws):
        plot = ws["dir"] / "rep.csv"
        assert main(["report", str(ws["cohort"]), "--out", "-",
                     "--plot", str(plot), "--plot-format", "csv"]) == EXIT_OK
        header = plot.read_text().splitlines()[0]
        assert header == "patient_id,A,alpha,category,predicted,distance"

    def test_load_mode(self, ws):
        out = ws["dir"] / "loaded.json"
        assert main(["report", str(ws["cohort"]), "--mode", "load",
                     "--model", str(ws["model"]), "--out", str(out)]) \
            == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["settings"]["svm_mode"] == "load"

    def test_load_mode_requires_model(self, ws, capsys):
        assert main(["report", str(ws["cohort"]), "--mode", "load"]) \
            == EXIT_INPUT

    def test_train_mode_forbids_model(self, ws, capsys):
        assert main(["report", str(ws["cohort"]), "--model",
                     str(ws["model"])]) == EXIT_INPUT

    def test_filter_flag_recorded_in_settings(self, ws):
        out = ws["dir"] / "filtered.json"
        assert main(["report", str(ws["with_zig"]), "--filter",
                     "--out", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["settings"]["filter"] == "on"
        assert doc["aggregates"]["n_evaluated"] == len(ws["sub"])


class TestSynth:
    def test_reference_cohort_with_truth(self, ws, capsys):
        out = ws["dir"] / "syn.csv"
        truth = ws["dir"] / "truth.json"
        assert main(["synth", "--out", str(out),
                     "--truth-out", str(truth)]) == EXIT_OK
        assert "generated 1210 records" in capsys.readouterr().err
        pairs = reference_cohort(0)
        assert out.read_text() == render_cohort_csv([r for r, _ in pairs])
        truth_doc = json.loads(truth.read_text())
        assert truth_doc["schema"] == "ogtt-indices/truth-v1"
        assert len(truth_doc["truth"]) == 1210

    def test_seed_changes_output(self, ws):
        a, b = ws["dir"] / "s0.csv", ws["dir"] / "s3.csv"
        assert main(["synth", "--out", str(a)]) == EXIT_OK
        assert main(["--seed", "3", "synth", "--out", str(b)]) == EXIT_OK
        assert a.read_text() != b.read_text()

    def test_custom_clusters_with_noise(self, ws, capsys):
        spec = [{"category": "NGT", "center": [60.0, 0.025],
                 "spread": [8.0, 0.003], "g0_range": [85.0, 100.0],
                 "omega_range": [0.03, 0.07], "delta_range": [0.5, 1.2],
                 "count": 5}]
        clusters = ws["dir"] / "clusters.json"
        clusters.write_text(json.dumps(spec))
        out = ws["dir"] / "custom.csv"
        assert main(["synth", "--out", str(out), "--clusters", str(clusters),
                     "--noise-kind", "gaussian", "--noise-sigma", "2.0",
                     "--noise-seed", "1"]) == EXIT_OK
        assert "generated 5 records" in capsys.readouterr().err
        assert len(ingest_csv_text(out.read_text()).records) == 5

    def test_clusters_file_must_hold_a_list(self, ws, capsys):
        bad = ws["dir"] / "bad_clusters.json"
        bad.write_text(json.dumps({"category": "NGT"}))
        assert main(["synth", "--out", "-", "--clusters", str(bad)]) \
            == EXIT_INPUT
        assert "JSON list" in capsys.readouterr().err


class TestTrack:
    def test_trajectory_with_distances(self, ws, capsys):
        assert main(["track", str(ws["visits"]),
                     "--model", str(ws["model"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"schema", "trajectories"}
        assert doc["schema"] == "ogtt-indices/trajectories-v1"
        traj = doc["trajectories"][0]
        assert traj["patient_id"] == "L1"
        assert [p["category"] for p in traj["points"]] == \
            ["IGT", "IFG-IGT", "T2DM"]
        assert all(p["distance"] is not None for p in traj["points"])

    def test_without_model_no_distances(self, ws, capsys):
        assert main(["track", str(ws["visits"])]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        points = doc["trajectories"][0]["points"]
        assert all(p["distance"] is None for p in points)

    def test_single_visit_cohort_warns(self, ws, capsys):
        assert main(["track", str(ws["cohort"])]) == EXIT_OK
        captured = capsys.readouterr()
        assert json.loads(captured.out)["trajectories"] == []
        assert "warning: no patient has two or more usable visits" \
            in captured.err

    def test_duplicate_seq_rejected(self, ws, capsys):
        assert main(["track", str(ws["dup_seq"])]) == EXIT_INPUT
        assert "duplicate seq" in capsys.readouterr().err


@pytest.fixture(scope="module")
def report_file(ws):
    out = ws["dir"] / "plotsrc.json"
    code = main(["report", str(ws["cohort"]), "--out", str(out)])
    assert code == EXIT_OK
    return out


class TestPlot:
    def test_svg_output(self, ws, report_file):
        out = ws["dir"] / "standalone.svg"
        assert main(["plot", "--report", str(report_file),
                     "--out", str(out)]) == EXIT_OK
        text = out.read_text()
        assert text.startswith("<svg ") and text.endswith("</svg>\n")

    def test_csv_output(self, ws, report_file):
        out = ws["dir"] / "standalone.csv"
        assert main(["plot", "--report", str(report_file), "--out", str(out),
                     "--format", "csv"]) == EXIT_OK
        assert out.read_text().splitlines()[0] == \
            "patient_id,A,alpha,category,predicted,distance"

    def test_missing_report_is_io_error(self, ws):
        assert main(["plot", "--report", str(ws["dir"] / "nope.json"),
                     "--out", "-"]) == EXIT_IO

    def test_malformed_report_is_input_error(self, ws):
        assert main(["plot", "--report", str(ws["not_json"]),
                     "--out", "-"]) == EXIT_INPUT


class TestConfigFile:
    def test_unknown_section_rejected(self, ws, capsys):
        cfg = ws["dir"] / "bad_section.json"
        cfg.write_text(json.dumps({"bogus": {}}))
        assert main(["--config", str(cfg), "fit", str(ws["cohort"])]) \
            == EXIT_INPUT
        assert "unknown config section" in capsys.readouterr().err

    def test_non_object_config_rejected(self, ws, capsys):
        cfg = ws["dir"] / "list.json"
        cfg.write_text("[1, 2]")
        assert main(["--config", str(cfg), "fit", str(ws["cohort"])]) \
            == EXIT_INPUT
        assert "JSON object" in capsys.readouterr().err

    def test_unknown_fit_key_rejected(self, ws, capsys):
        cfg = ws["dir"] / "bad_fit.json"
        cfg.write_text(json.dumps({"fit": {"nope": 1}}))
        assert main(["--config", str(cfg), "fit", str(ws["cohort"])]) \
            == EXIT_INPUT
        assert "error (input)" in capsys.readouterr().err

    def test_fit_section_applies(self, ws, capsys):
        cfg = ws["dir"] / "fit_cfg.json"
        cfg.write_text(json.dumps({"fit": {"n_starts": 4}}))
        assert main(["--config", str(cfg), "fit", str(ws["cohort"])]) \
            == EXIT_OK
        assert len(json.loads(capsys.readouterr().out)["fits"]) \
            == len(ws["sub"])
