import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobb_bench.evaluation import (
    CVError,
    CVReport,
    FoldAssignment,
    benchmark,
    cross_validate,
    dataset_digest,
    expand_grid,
    format_reports,
    grid_search,
    make_folds,
    mae,
    reports_from_json,
    resolve_threads,
    run_header,
    summary_table,
)
from cobb_bench.features import FeatureMatrix, build_matrix, fit_scaler
from cobb_bench.gait_data import SyntheticConfig, synthesize_dataset
from cobb_bench.regressors import RegressorSpec, fit
from cobb_bench.rng import derive_seed

from oracles import reference_folds, scripted_cv


def matrix(rows, targets):
    rows = np.asarray(rows, dtype=float)
    names = tuple(f"x{j}" for j in range(rows.shape[1]))
    return FeatureMatrix(rows, targets, tuple(f"P{i}" for i in range(len(targets))), names)


def linear_matrix(n=30, d=3, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    return matrix(X, 40 + X @ np.arange(1.0, d + 1) * 5 + noise * rng.normal(size=n))


@pytest.fixture(scope="module")
def synthetic():
    return build_matrix(synthesize_dataset(SyntheticConfig()))


class TestMae:
    def test_identical(self):
        assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_case(self):
        assert mae([30, 40], [32, 44]) == 3.0

    @given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_symmetric(self, pairs):
        a, b = zip(*pairs)
        assert mae(a, b) == mae(b, a) >= 0

    def test_symmetric_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            a, b = rng.normal(size=n) * 30, rng.normal(size=n) * 30
            assert mae(a, b) == mae(b, a)

    def test_errors(self):
        with pytest.raises(ValueError):
            mae([1, 2], [1])
        with pytest.raises(ValueError):
            mae([], [])


class TestFolds:
    def test_exhaustive_partition_properties(self):
        for n in range(2, 41):
            for k in range(2, n + 1):
                folds = make_folds(n, k, seed=n * 100 + k)
                sizes = folds.sizes()
                assert sum(sizes) == n and max(sizes) - min(sizes) <= 1 and min(sizes) >= 1
                assert sizes == sorted(sizes, reverse=True)
                tests = np.concatenate([folds.test_indices(f) for f in range(k)])
                np.testing.assert_array_equal(np.sort(tests), np.arange(n))
                assert folds.fold_of.tolist() == reference_folds(n, k, n * 100 + k)

    def test_thirty_into_ten(self):
        assert make_folds(30, 10).sizes() == [3] * 10

    def test_singletons(self):
        assert sorted(make_folds(5, 5, seed=1).fold_of.tolist()) == [0, 1, 2, 3, 4]

    def test_seed_determinism_and_variation(self):
        for n in (3, 10, 30):
            base = make_folds(n, 2 if n == 3 else 5, seed=0)
            for seed in range(1, 101):
                again = make_folds(n, base.k, seed=seed)
                assert again.fold_of.tolist() == make_folds(n, base.k, seed=seed).fold_of.tolist()
            distinct = {tuple(make_folds(n, base.k, seed=s).fold_of) for s in range(100)}
            assert len(distinct) > 1

    def test_train_and_test_complement(self):
        folds = make_folds(11, 4, seed=3)
        for f in range(4):
            assert set(folds.train_indices(f)) | set(folds.test_indices(f)) == set(range(11))
            assert not set(folds.train_indices(f)) & set(folds.test_indices(f))

    @pytest.mark.parametrize("n, k", [(5, 1), (3, 4)])
    def test_invalid(self, n, k):
        with pytest.raises(ValueError):
            make_folds(n, k)

    def test_assignment_invariants(self):
        with pytest.raises(ValueError):
            FoldAssignment(2, [0, 0, 0, 1], 0)
        with pytest.raises(ValueError):
            FoldAssignment(2, [0, 2], 0)


class TestCrossValidate:
    def test_constant_targets(self):
        rep = cross_validate(matrix(np.random.default_rng(0).normal(size=(12, 2)), np.full(12, 25.0)), "mean_baseline", k=4)
        assert rep.per_fold_mae == (0.0,) * 4 and rep.mean_mae == 0.0

    def test_leave_one_out_nearest_neighbour(self):
        x = np.arange(10.0)
        rep = cross_validate(matrix(x[:, None], x), RegressorSpec("knn", {"k": 1}), k=10, seed=5)
        assert rep.per_fold_mae == (1.0,) * 10

    @pytest.mark.parametrize("mode", ["per_fold", "global"])
    def test_matches_scripted_loop(self, mode):
        rng = np.random.default_rng(1)
        fm = matrix(rng.normal(size=(6, 3)) * [1, 10, 100], rng.normal(size=6) * 10 + 30)
        rep = cross_validate(fm, "decision_tree", k=3, seed=7, scaler_mode=mode)
        fold_of = reference_folds(6, 3, 7)

        def fit_and_predict(Xtr, ytr, Xte, fold):
            return fit("decision_tree", Xtr, ytr, seed=derive_seed(7, "decision_tree", fold)).predict(Xte)

        if mode == "per_fold":
            expected = scripted_cv(fm.rows, fm.targets, fold_of, 3, fit_and_predict)
        else:
            mu = fm.rows.mean(axis=0)
            sd = np.sqrt(((fm.rows - mu) ** 2).mean(axis=0))
            expected = scripted_cv((fm.rows - mu) / sd, fm.targets, fold_of, 3, fit_and_predict)
        np.testing.assert_allclose(rep.per_fold_mae, expected, rtol=0, atol=1e-12)

    def test_seeded_models_match_scripted_loop(self, synthetic):
        rep = cross_validate(synthetic, "bagging", k=5, seed=3)
        fold_of = reference_folds(synthetic.n, 5, 3)

        def fit_and_predict(Xtr, ytr, Xte, fold):
            return fit("bagging", Xtr, ytr, seed=derive_seed(3, "bagging", fold)).predict(Xte)

        expected = scripted_cv(synthetic.rows, synthetic.targets, fold_of, 5, fit_and_predict)
        np.testing.assert_allclose(rep.per_fold_mae, expected, rtol=0, atol=1e-12)

    def test_scaler_never_sees_test_rows(self):
        fm = linear_matrix(n=20)
        folds = make_folds(20, 5, seed=42)
        seen = []

        def recording_fitter(rows):
            seen.append(np.array(rows, copy=True))
            return fit_scaler(rows)

        cross_validate(fm, "ridge", k=5, seed=42, scaler_fitter=recording_fitter)
        assert len(seen) == 5
        for f, rows in enumerate(seen):
            test_rows = {r.tobytes() for r in fm.rows[folds.test_indices(f)]}
            assert not test_rows & {r.tobytes() for r in rows}
            np.testing.assert_array_equal(rows, fm.rows[folds.train_indices(f)])

    def test_global_mode_fits_once_on_all_rows(self):
        fm = linear_matrix(n=20)
        seen = []
        cross_validate(fm, "ridge", k=5, scaler_mode="global", scaler_fitter=lambda r: seen.append(r) or fit_scaler(r))
        assert len(seen) == 1 and seen[0].shape == (20, 3)

    def test_report_aggregates(self, synthetic):
        rep = cross_validate(synthetic, "ridge")
        assert rep.k == 10 and rep.seed == 42 and rep.scaler_mode == "per_fold"
        assert abs(rep.mean_mae - sum(rep.per_fold_mae) / 10) < 1e-12
        m = sum(rep.per_fold_mae) / 10
        assert abs(rep.std_mae - (sum((x - m) ** 2 for x in rep.per_fold_mae) / 10) ** 0.5) < 1e-12

    def test_fold_error_identifies_fold(self):
        fm = linear_matrix(n=6)
        with pytest.raises(CVError) as exc:
            cross_validate(fm, RegressorSpec("knn", {"k": 5}), k=3)
        assert exc.value.model == "knn" and exc.value.fold == 0 and "fold 0" in str(exc.value)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            cross_validate(linear_matrix(n=4), "ridge", k=5)

    def test_unknown_scaler_mode(self):
        with pytest.raises(ValueError):
            cross_validate(linear_matrix(), "ridge", scaler_mode="none")
        assert cross_validate(linear_matrix(), "ridge", k=3, scaler_mode="per-fold").scaler_mode == "per_fold"


class TestGridSearch:
    def test_expand_mapping_first_key_slowest(self):
        assert expand_grid({"a": [1, 2], "b": [3, 4]}) == [
            {"a": 1, "b": 3},
            {"a": 1, "b": 4},
            {"a": 2, "b": 3},
            {"a": 2, "b": 4},
        ]
        assert expand_grid([{"k": 1}, {"k": 2}]) == [{"k": 1}, {"k": 2}]

    @pytest.mark.parametrize("grid", [{}, [], {"a": []}, {"a": 1}])
    def test_expand_rejects(self, grid):
        with pytest.raises(ValueError):
            expand_grid(grid)

    def test_single_point_matches_cross_validate(self):
        fm = linear_matrix()
        res = grid_search(fm, "ridge", {"alpha": [0.5]})
        rep = cross_validate(fm, RegressorSpec("ridge", {"alpha": 0.5}))
        assert res.best_spec == rep.spec and res.best_mean_mae == rep.mean_mae
        assert res.best_report.per_fold_mae == rep.per_fold_mae

    def test_over_shrunk_ridge_loses(self):
        res = grid_search(linear_matrix(), "ridge", {"alpha": [1e9, 1e-9]})
        assert res.best_spec.params["alpha"] == 1e-9
        assert res.table[0].mean_mae > res.table[1].mean_mae

    def test_duplicate_tie_returns_first(self):
        res = grid_search(linear_matrix(), "knn", [{"k": 2}, {"k": 2}])
        assert res.table[0].mean_mae == res.table[1].mean_mae
        assert res.best_report.per_fold_mae == cross_validate(linear_matrix(), RegressorSpec("knn", {"k": 2})).per_fold_mae

    def test_failures_recorded_and_skipped(self):
        fm = linear_matrix(n=12)
        res = grid_search(fm, "knn", [{"k": 0}, {"k": 20}, {"k": 3}], k=3)
        assert res.table[0].spec is None and "k" in res.table[0].error
        assert res.table[1].mean_mae is None and "fold" in res.table[1].error
        assert res.best_spec.params["k"] == 3

    def test_all_failing(self):
        with pytest.raises(CVError):
            grid_search(linear_matrix(n=12), "knn", [{"k": 0}], k=3)


class TestBenchmark:
    def test_constant_baseline(self):
        reps = benchmark(matrix(np.zeros((10, 1)), np.full(10, 3.0)), ["mean_baseline"], k=5)
        assert len(reps) == 1 and reps[0].per_fold_mae == (0.0,) * 5 and reps[0].best

    def test_roster_order_and_best_flag(self, synthetic):
        reps = benchmark(synthetic, ["mean_baseline", "ridge", "knn"])
        assert [r.model_name for r in reps] == ["knn", "ridge", "mean_baseline"]
        best = [r for r in reps if r.best]
        assert len(best) == 1 and best[0].mean_mae == min(r.mean_mae for r in reps)

    def test_same_folds_as_cross_validate(self, synthetic):
        reps = benchmark(synthetic, ["knn", "decision_tree"], seed=9)
        for r in reps:
            assert r.per_fold_mae == cross_validate(synthetic, r.model_name, seed=9).per_fold_mae

    def test_serialisation_deterministic(self, synthetic):
        header = run_header(synthetic, seed=42, k=10)
        runs = [benchmark(synthetic, ["knn", "ridge", "bagging"]) for _ in range(2)]
        texts = [[format_reports(reps, header, fmt) for fmt in ("json", "csv", "md")] for reps in runs]
        assert texts[0] == texts[1]

    def test_threads_match_sequential(self, synthetic, monkeypatch):
        names = ["knn", "adaboost", "bagging", "gradient_boosting"]
        sequential = benchmark(synthetic, names, threads=0)
        monkeypatch.setenv("COBB_BENCH_THREADS", "4")
        assert resolve_threads() == 4
        assert benchmark(synthetic, names) == sequential

    def test_empty(self, synthetic):
        with pytest.raises(ValueError):
            benchmark(synthetic, [])


class TestSerialisation:
    def test_json_round_trip(self, synthetic):
        reps = benchmark(synthetic, ["ridge", "mean_baseline"], k=5)
        header, back = reports_from_json(format_reports(reps, run_header(synthetic, seed=42), "json"))
        assert back == reps
        assert header["dataset_digest"] == dataset_digest(synthetic) and header["n_features"] == 18

    def test_digest_sensitive_to_values(self, synthetic):
        rows = synthetic.rows.copy()
        rows[0, 0] = np.nextafter(rows[0, 0], np.inf)
        changed = FeatureMatrix(rows, synthetic.targets, synthetic.ids)
        assert dataset_digest(changed) != dataset_digest(synthetic)
        assert len(dataset_digest(synthetic)) == 16

    def test_csv_layout(self):
        rep = CVReport("ridge", (1.0, 2.0), 1.5, 0.5, 42, "per_fold", 2, {"alpha": 0.1}, True)
        text = format_reports([rep], {"seed": 42}, "csv")
        lines = text.splitlines()
        assert lines[0] == "# seed=42"
        assert lines[1] == "model,seed,scaler_mode,k,mean_mae,std_mae,best,fold_0,fold_1"
        assert lines[2] == "ridge,42,per_fold,2,1.5,0.5,1,1.0,2.0"

    def test_summary_table(self):
        reps = [
            CVReport("knn", (4.0, 5.0), 4.55, 0.45, 42, "per_fold", 2),
            CVReport("mean_baseline", (9.0, 9.0), 9.0, 0.0, 42, "per_fold", 2, best=False),
        ]
        reps[0] = reps[0].with_best(True)
        text = summary_table(reps)
        assert f"K-nearest neighbours*  {4.55:.1f} +- 0.5" in text
        assert "Mean baseline" in text and text.endswith("* lowest mean MAE\n")

    def test_markdown_keeps_full_precision(self):
        rep = CVReport("ridge", (0.1 + 0.2, 1.0), 0.65, 0.35, 42, "global", 2)
        md = format_reports([rep], {"seed": 42}, "md")
        assert "0.30000000000000004" in md and "| Linear ridge regression | 0.7 ± 0.3 |" in md

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            format_reports([], {}, "xml")

    def test_report_dict_round_trip(self):
        rep = CVReport("knn", (1.0,), 1.0, 0.0, 1, "per_fold", 1, {"k": 3}, True)
        assert CVReport.from_dict(json.loads(json.dumps(rep.to_dict()))) == rep
