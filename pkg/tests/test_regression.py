"""Linear model: fit/predict against an explicit elimination oracle, CV folds."""

from __future__ import annotations

import io
import json

import numpy as np
import pytest

from qdiff.regression import (
    CvReport,
    cross_validate,
    fit,
    fold_indices,
    load_model,
    mse,
    save_model,
)


def gauss_solve(A: list[list[float]], b: list[float]) -> list[float]:
    """Independent dense solver: Gauss-Jordan with partial pivoting."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[pivot] = M[pivot], M[col]
        scale = M[col][col]
        M[col] = [v / scale for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0.0:
                factor = M[r][col]
                M[r] = [v - factor * p for v, p in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def oracle_predictions(
    X: np.ndarray, y: np.ndarray, X_new: np.ndarray, eps: float = 1e-8
) -> np.ndarray:
    """Normal-equations oracle with its own standardization and solver."""
    n, d = X.shape
    means = [sum(X[:, j]) / n for j in range(d)]
    stds = []
    for j in range(d):
        var = sum((x - means[j]) ** 2 for x in X[:, j]) / n
        stds.append(var ** 0.5 if var > 0 else 1.0)
    Z = [[(X[i, j] - means[j]) / stds[j] for j in range(d)] for i in range(n)]
    y_mean = sum(y) / n
    yc = [v - y_mean for v in y]
    gram = [
        [sum(Z[i][a] * Z[i][b] for i in range(n)) + (eps if a == b else 0.0)
         for b in range(d)]
        for a in range(d)
    ]
    rhs = [sum(Z[i][a] * yc[i] for i in range(n)) for a in range(d)]
    w = gauss_solve(gram, rhs)
    intercept = sum(
        y[i] - sum(Z[i][j] * w[j] for j in range(d)) for i in range(n)
    ) / n
    out = []
    for row in X_new:
        z = [(row[j] - means[j]) / stds[j] for j in range(d)]
        out.append(intercept + sum(zj * wj for zj, wj in zip(z, w)))
    return np.asarray(out)


class TestFit:
    def test_recovers_noiseless_line(self):
        x = np.arange(10, dtype=float).reshape(-1, 1)
        y = 2.0 * x[:, 0] + 1.0
        model = fit(x, y)
        assert model.predict([3.0]) == pytest.approx(7.0, abs=1e-6)
        slope = model.weights[0] / model.feature_stds[0]
        assert slope == pytest.approx(2.0, abs=1e-6)
        assert mse(y, model.predict_many(x)) <= 1e-10

    def test_constant_target(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(12, 3))
        y = np.full(12, 4.25)
        model = fit(X, y)
        assert np.allclose(model.weights, 0.0, atol=1e-9)
        assert model.intercept == pytest.approx(4.25, abs=1e-9)

    def test_constant_column_gets_zero_weight(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(20, 3))
        X[:, 1] = 7.0
        y = X[:, 0] - 2 * X[:, 2] + 0.5
        model = fit(X, y)
        assert model.weights[1] == 0.0
        assert model.feature_stds[1] == 1.0

    def test_matches_elimination_oracle_on_random_systems(self):
        rng = np.random.default_rng(2024)
        for _ in range(10):
            X = rng.normal(size=(30, 5))
            y = rng.normal(size=30)
            model = fit(X, y)
            got = model.predict_many(X)
            want = oracle_predictions(X, y, X)
            np.testing.assert_allclose(got, want, atol=1e-8)

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 2"):
            fit(np.ones((1, 2)), np.ones(1))

    def test_non_finite_named(self):
        X = np.ones((4, 2))
        X[2, 1] = np.nan
        with pytest.raises(ValueError, match="row 2, column 1"):
            fit(X, np.ones(4))

    def test_scale_equivariance(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(25, 4))
        y = rng.normal(size=25)
        base = fit(X, y).predict_many(X)
        X_scaled = X.copy()
        X_scaled[:, 2] *= 1000.0
        scaled = fit(X_scaled, y).predict_many(X_scaled)
        np.testing.assert_allclose(scaled, base, atol=1e-8)

    def test_beats_random_linear_models(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        model = fit(X, y)
        best = mse(y, model.predict_many(X))
        Z = (X - X.mean(axis=0)) / X.std(axis=0)
        for _ in range(100):
            w = rng.normal(size=3)
            b = rng.normal()
            assert best <= mse(y, b + Z @ w) + 1e-12


class TestPredict:
    def test_dimension_mismatch(self):
        model = fit(np.eye(3), np.arange(3.0))
        with pytest.raises(ValueError, match="features"):
            model.predict([1.0, 2.0])

    def test_reevaluation_oracle(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(15, 4))
        y = rng.normal(size=15)
        model = fit(X, y)
        for _ in range(20):
            x = rng.normal(size=4)
            z = (x - model.feature_means) / model.feature_stds
            manual = model.intercept + float(z @ model.weights)
            assert model.predict(x) == pytest.approx(manual, rel=1e-12)


class TestFolds:
    def test_partition_properties(self):
        for n in range(5, 51):
            folds = fold_indices(n, 5, seed=n)
            sizes = [len(f) for f in folds]
            assert max(sizes) - min(sizes) <= 1
            assert sum(sizes) == n
            flat = np.concatenate(folds)
            assert sorted(flat.tolist()) == list(range(n))

    def test_ten_rows_five_folds_of_two(self):
        folds = fold_indices(10, 5, seed=3)
        assert [len(f) for f in folds] == [2, 2, 2, 2, 2]

    def test_k_greater_than_n_rejected(self):
        with pytest.raises(ValueError):
            fold_indices(4, 5, seed=0)


class TestCrossValidate:
    def test_noiseless_linear_data(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(40, 2))
        y = 3.0 * X[:, 0] - 1.5 * X[:, 1] + 0.25
        report = cross_validate(X, y, k=5, seed=1)
        assert all(m <= 1e-8 for m in report.fold_mse)
        assert all(r >= 1 - 1e-8 for r in report.fold_r2)

    def test_pure_noise_has_low_r2(self):
        rng = np.random.default_rng(1234)
        X = rng.normal(size=(500, 5))
        y = rng.normal(size=500)  # independent of X
        report = cross_validate(X, y, k=5, seed=99)
        assert report.mean_r2 <= 0.1

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        a = cross_validate(X, y, k=5, seed=42)
        b = cross_validate(X, y, k=5, seed=42)
        assert a == b
        c = cross_validate(X, y, k=5, seed=43)
        assert a.fold_mse != c.fold_mse

    def test_degenerate_fold_flagged(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.full(10, 2.0)  # every fold has zero target variance
        report = cross_validate(X, y, k=5, seed=0)
        assert report.degenerate_folds == [0, 1, 2, 3, 4]
        assert report.fold_r2 == [0.0] * 5


class TestModelIo:
    def test_save_load_round_trip(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 4))
        y = rng.normal(size=20)
        model = fit(X, y, feature_names=("a", "b", "c", "d"))
        buf = io.StringIO()
        save_model(model, buf)
        loaded = load_model(io.StringIO(buf.getvalue()))
        assert loaded.feature_names == model.feature_names
        np.testing.assert_allclose(loaded.predict_many(X), model.predict_many(X))

    def test_unknown_format_version_rejected(self):
        with pytest.raises(ValueError, match="format_version"):
            load_model(io.StringIO(json.dumps({"format_version": 99})))

    def test_cv_report_tsv(self):
        report = CvReport(
            fold_mse=[1.0, 2.0], fold_r2=[0.5, 0.25], mean_mse=1.5,
            mean_r2=0.375, k=2, seed=9,
        )
        buf = io.StringIO()
        report.write_tsv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "fold\tmse\tr2"
        assert lines[-1] == "mean\t1.5\t0.375"
