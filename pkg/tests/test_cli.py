import json
import re
import shutil
import subprocess

import numpy as np
import pytest

from cobb_bench.cli import main
from cobb_bench.evaluation import cross_validate, reports_from_json
from cobb_bench.features import FeatureMatrix, build_matrix, parse_feature_csv, serialize_feature_csv
from cobb_bench.gait_data import TRIALS_HEADER, SyntheticConfig, synthesize_dataset

ERROR_LINE = re.compile(r"^error\[(E_[A-Z]+)\]: [^\n]+\n$")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def small_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "small.json"
    path.write_text(json.dumps({"n_participants": 12, "cycles": 2, "samples_per_cycle": 20, "seed": 5}))
    return path


@pytest.fixture(scope="module")
def trials_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("trials") / "trials.csv"
    assert main(["synth", "--out", str(path)]) == 0
    return path


class TestSynth:
    def test_default_row_count_and_determinism(self, trials_file, tmp_path):
        text = trials_file.read_bytes()
        assert text.count(b"\n") == 1 + 30 * 3 * 6 * 100
        again = tmp_path / "again.csv"
        assert main(["synth", "--out", str(again)]) == 0
        assert again.read_bytes() == text

    def test_invalid_config(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"n_participants": 0}')
        code, out, err = run(capsys, "synth", "--synthetic-config", cfg)
        assert code != 0 and out == "" and ERROR_LINE.match(err) and "E_CONFIG" in err

    def test_unwritable_path(self, capsys, tmp_path, small_config):
        code, _, err = run(capsys, "synth", "--synthetic-config", small_config, "--out", tmp_path / "no" / "x.csv")
        assert code == 1 and err.startswith("error[E_IO]")

    def test_seed_override(self, capsys, small_config):
        _, a, _ = run(capsys, "synth", "--synthetic-config", small_config, "--seed", 1)
        _, b, _ = run(capsys, "synth", "--synthetic-config", small_config, "--seed", 2)
        assert a != b and a.startswith("participant_id,")


class TestFeatures:
    def test_matches_library(self, capsys, trials_file):
        code, out, _ = run(capsys, "features", "--input", trials_file)
        assert code == 0 and out.count("\n") == 31
        assert out == serialize_feature_csv(build_matrix(synthesize_dataset(SyntheticConfig())))

    def test_malformed_row_cited(self, capsys, tmp_path, small_config):
        path = tmp_path / "t.csv"
        main(["synth", "--synthetic-config", str(small_config), "--out", str(path)])
        lines = path.read_text().split("\n")
        lines[7] = lines[7].rsplit(",", 1)[0] + ",oops"
        path.write_text("\n".join(lines))
        code, out, err = run(capsys, "features", "--input", path)
        assert code == 1 and out == "" and ERROR_LINE.match(err)
        assert err.startswith("error[E_PARSE]") and "line 8" in err

    def test_schema_violation(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(
            ",".join(TRIALS_HEADER) + "\n"
            + "".join(f"P1,-5,{k},0,0,1.0\n" for k in ("ml_force", "ap_torque", "ml_torque"))
        )
        code, _, err = run(capsys, "features", "--input", path)
        assert code == 1 and err.startswith("error[E_SCHEMA]") and "P1" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "features", "--input", tmp_path / "absent.csv")
        assert code == 1 and err.startswith("error[E_IO]")


class TestBenchmark:
    def test_two_models(self, capsys, tmp_path):
        out_file = tmp_path / "report.json"
        code, out, err = run(capsys, "benchmark", "--models", "mean_baseline,decision_tree", "--out", out_file)
        assert code == 0 and err == ""
        rows = [line for line in out.splitlines() if "+-" in line]
        assert len(rows) == 2 and rows[0].startswith("Decision tree*")
        header, reports = reports_from_json(out_file.read_text())
        assert [r.model_name for r in reports] == ["decision_tree", "mean_baseline"]
        assert header["input"] == {"kind": "synthetic", "config": SyntheticConfig().to_mapping()}
        first = out_file.read_bytes()
        assert main(["benchmark", "--models", "mean_baseline,decision_tree", "--out", str(out_file)]) == 0
        assert out_file.read_bytes() == first

    def test_report_on_stdout_summary_on_stderr(self, capsys, small_config):
        code, out, err = run(capsys, "benchmark", "--synthetic-config", small_config, "--models", "ridge", "--k", 3, "--format", "csv")
        assert code == 0 and out.startswith("# artifact=") and "Linear ridge regression*" in err

    def test_matches_library(self, capsys, small_config):
        _, out, _ = run(capsys, "cv", "--synthetic-config", small_config, "--models", "knn", "--k", 4, "--seed", 7)
        _, (rep,) = reports_from_json(out)
        fm = build_matrix(synthesize_dataset(SyntheticConfig.from_mapping(json.loads(small_config.read_text()))))
        assert rep == cross_validate(fm, "knn", 4, 7)

    def test_fit_error_writes_nothing(self, capsys, tmp_path):
        fm = FeatureMatrix(np.arange(6.0).reshape(3, 2), [20.0, 30.0, 40.0], ("a", "b", "c"), ("u", "v"))
        data = tmp_path / "tiny.csv"
        data.write_text(serialize_feature_csv(fm))
        out_file = tmp_path / "report.json"
        code, _, err = run(capsys, "benchmark", "--input", data, "--k", 3, "--out", out_file)
        assert code == 1 and err.startswith("error[E_FIT]") and "knn" in err
        assert not out_file.exists()

    @pytest.mark.parametrize(
        "argv, code",
        [
            (["benchmark", "--models", "knn,xgboost"], "E_SPEC"),
            (["benchmark", "--k", "1"], "E_USAGE"),
            (["benchmark", "--scaler", "none"], "E_USAGE"),
            (["benchmark", "--input", "a.csv", "--synthetic-config", "b.json"], "E_USAGE"),
            (["frobnicate"], "E_USAGE"),
        ],
    )
    def test_usage_errors(self, capsys, argv, code):
        status, out, err = run(capsys, *argv)
        assert status != 0 and out == "" and ERROR_LINE.match(err) and f"error[{code}]" in err


class TestGridSearch:
    def test_one_point_grid_equals_cv(self, capsys, tmp_path, small_config):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"algorithm": "ridge", "grid": {"alpha": [0.1]}}))
        code, out, _ = run(capsys, "gridsearch", "--synthetic-config", small_config, "--grid", grid, "--k", 4)
        assert code == 0
        best = json.loads(out)["best"]["report"]
        _, cv_out, _ = run(capsys, "cv", "--synthetic-config", small_config, "--models", "ridge", "--k", 4)
        _, (rep,) = reports_from_json(cv_out)
        assert best["per_fold_mae"] == list(rep.per_fold_mae)
        assert best["mean_mae"] == rep.mean_mae and best["params"] == dict(rep.params)

    def test_missing_grid_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "gridsearch", "--grid", tmp_path / "nope.json")
        assert code == 1 and err.startswith("error[E_IO]")

    def test_malformed_grid(self, capsys, tmp_path):
        grid = tmp_path / "grid.json"
        grid.write_text('{"grid": {}}')
        code, _, err = run(capsys, "gridsearch", "--grid", grid)
        assert code == 1 and err.startswith("error[E_GRID]")


class TestTrainPredict:
    def test_unbounded_tree_reproduces_targets(self, capsys, tmp_path, trials_file):
        model = tmp_path / "tree.json"
        code, _, err = run(capsys, "train", "--input", trials_file, "--models", "decision_tree", "--param", "max_depth=null", "--out", model)
        assert code == 0 and err == ""
        code, out, _ = run(capsys, "predict", "--model", model, "--input", trials_file)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "participant_id,predicted_cobb_deg" and len(lines) == 31
        fm = build_matrix(synthesize_dataset(SyntheticConfig()))
        ids, preds = zip(*(line.split(",") for line in lines[1:]))
        assert ids == fm.ids
        np.testing.assert_array_equal(np.array(preds, dtype=float), fm.targets)

    def test_width_mismatch(self, capsys, tmp_path, trials_file):
        model = tmp_path / "ridge.json"
        assert main(["train", "--input", str(trials_file), "--models", "ridge", "--out", str(model)]) == 0
        fm = parse_feature_csv(run(capsys, "features", "--input", trials_file)[1])
        narrow = FeatureMatrix(fm.rows[:, :17], fm.targets, fm.ids, fm.feature_names[:17])
        data = tmp_path / "narrow.csv"
        data.write_text(serialize_feature_csv(narrow))
        code, out, err = run(capsys, "predict", "--model", model, "--input", data)
        assert code == 1 and out == "" and err.startswith("error[E_WIDTH]")

    def test_model_file_errors(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": "other"}')
        code, _, err = run(capsys, "predict", "--model", bad)
        assert code == 1 and err.startswith("error[E_MODEL]")
        code, _, err = run(capsys, "predict", "--model", tmp_path / "missing.json")
        assert err.startswith("error[E_IO]")

    def test_bad_parameter(self, capsys, tmp_path):
        code, _, err = run(capsys, "train", "--models", "knn", "--param", "k=0", "--out", tmp_path / "m.json")
        assert code == 1 and err.startswith("error[E_SPEC]")


@pytest.mark.skipif(shutil.which("cobb-bench") is None, reason="console script not installed")
def test_console_script(tmp_path, small_config):
    proc = subprocess.run(
        ["cobb-bench", "cv", "--synthetic-config", str(small_config), "--models", "mean_baseline", "--k", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stderr == ""
    assert json.loads(proc.stdout)["reports"][0]["model_name"] == "mean_baseline"
    proc = subprocess.run(["cobb-bench", "cv"], capture_output=True, text=True, check=False)
    assert proc.returncode == 2 and ERROR_LINE.match(proc.stderr)
