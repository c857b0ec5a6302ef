"""Linear difficulty predictor: standardized OLS with k-fold cross-validation.

Features are standardized to zero mean and unit variance before the solve;
constant columns get their std forced to 1, which leaves them all-zero and
therefore weightless. The normal equations carry a tiny ridge term on the
Gram matrix so collinear aggregate features (mean vs sum, for instance)
cannot blow up the solve. Cross-validation refits the standardization on
every training split, so the held-out fold never leaks into the scaler.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

MODEL_FORMAT_VERSION = 1
DEFAULT_RIDGE_EPSILON = 1e-8


@dataclass
class RegressionModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_stds: np.ndarray

    def predict(self, x: Sequence[float]) -> float:
        """Prediction for a single feature vector."""
        return float(self.predict_many(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.weights):
            raise ValueError(
                f"expected {len(self.weights)} features, got {X.shape[1]}"
            )
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise ValueError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        Z = (X - self.feature_means) / self.feature_stds
        return self.intercept + Z @ self.weights

    def to_json_obj(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "feature_means": [float(m) for m in self.feature_means],
            "feature_stds": [float(s) for s in self.feature_stds],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RegressionModel":
        version = obj.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version: {version!r}")
        return cls(
            feature_names=tuple(obj["feature_names"]),
            weights=np.asarray(obj["weights"], dtype=float),
            intercept=float(obj["intercept"]),
            feature_means=np.asarray(obj["feature_means"], dtype=float),
            feature_stds=np.asarray(obj["feature_stds"], dtype=float),
        )


def _validate_matrix(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y shape {y.shape} does not match X rows {X.shape[0]}")
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 rows, got {X.shape[0]}")
    if not np.isfinite(X).all():
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"non-finite value in X at row {bad[0]}, column {bad[1]}")
    if not np.isfinite(y).all():
        bad = int(np.argwhere(~np.isfinite(y))[0][0])
        raise ValueError(f"non-finite value in y at row {bad}")


def fit(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str] | None = None,
    ridge_epsilon: float = DEFAULT_RIDGE_EPSILON,
) -> RegressionModel:
    """Least squares on standardized features with a fitted intercept.

    Solves (Z'Z + eps*I) w = Z' y_centered via a symmetric solve, then
    sets the intercept to the residual mean, which is optimal for the
    returned weights.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _validate_matrix(X, y)
    d = X.shape[1]
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(d))
    elif len(feature_names) != d:
        raise ValueError(
            f"{len(feature_names)} feature names for {d} columns"
        )

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    constant = stds == 0.0
    stds = np.where(constant, 1.0, stds)
    Z = (X - means) / stds
    Z[:, constant] = 0.0  # exact zero keeps constant-column weights at exactly 0

    gram = Z.T @ Z + ridge_epsilon * np.eye(d)
    rhs = Z.T @ (y - y.mean())
    weights = np.linalg.solve(gram, rhs)
    intercept = float(np.mean(y - Z @ weights))

    return RegressionModel(
        feature_names=tuple(feature_names),
        weights=weights,
        intercept=intercept,
        feature_means=means,
        feature_stds=stds,
    )


def mse(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    diff = np.asarray(y_true, dtype=float) - np.asarray(y_pred, dtype=float)
    return float(np.mean(diff * diff))


def r_squared(y_true: np.ndarray, y_pred: np.ndarray) -> float | None:
    """1 - SS_res/SS_tot; None when SS_tot is zero (constant fold)."""
    y_true = np.asarray(y_true, dtype=float)
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((y_true - np.asarray(y_pred, dtype=float)) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class CvReport:
    fold_mse: list[float]
    fold_r2: list[float]
    mean_mse: float
    mean_r2: float
    k: int
    seed: int
    # Folds whose held-out targets were constant; their R² is reported as 0.
    degenerate_folds: list[int] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "fold_mse": self.fold_mse,
            "fold_r2": self.fold_r2,
            "mean_mse": self.mean_mse,
            "mean_r2": self.mean_r2,
            "k": self.k,
            "seed": self.seed,
            "degenerate_folds": self.degenerate_folds,
        }

    def write_tsv(self, stream: TextIO) -> None:
        stream.write("fold\tmse\tr2\n")
        for i, (m, r) in enumerate(zip(self.fold_mse, self.fold_r2)):
            flag = " (degenerate)" if i in self.degenerate_folds else ""
            stream.write(f"{i}\t{m:.6g}\t{r:.6g}{flag}\n")
        stream.write(f"mean\t{self.mean_mse:.6g}\t{self.mean_r2:.6g}\n")


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle split into k folds with sizes differing by at most 1."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, k)
    folds: list[np.ndarray] = []
    start = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        folds.append(perm[start : start + size])
        start += size
    return folds


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    k: int = 5,
    seed: int = 0,
    ridge_epsilon: float = DEFAULT_RIDGE_EPSILON,
) -> CvReport:
    """k-fold CV with per-fold standardization fitted on the training split."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _validate_matrix(X, y)
    folds = fold_indices(X.shape[0], k, seed)
    fold_mse: list[float] = []
    fold_r2: list[float] = []
    degenerate: list[int] = []
    all_idx = np.arange(X.shape[0])
    for i, held_out in enumerate(folds):
        train = np.setdiff1d(all_idx, held_out)
        model = fit(X[train], y[train], ridge_epsilon=ridge_epsilon)
        pred = model.predict_many(X[held_out])
        fold_mse.append(mse(y[held_out], pred))
        r2 = r_squared(y[held_out], pred)
        if r2 is None:
            degenerate.append(i)
            r2 = 0.0
        fold_r2.append(r2)
    return CvReport(
        fold_mse=fold_mse,
        fold_r2=fold_r2,
        mean_mse=float(np.mean(fold_mse)),
        mean_r2=float(np.mean(fold_r2)),
        k=k,
        seed=seed,
        degenerate_folds=degenerate,
    )


def save_model(model: RegressionModel, stream: TextIO) -> None:
    json.dump(model.to_json_obj(), stream, indent=2, sort_keys=True)
    stream.write("\n")


def load_model(stream: TextIO) -> RegressionModel:
    return RegressionModel.from_json_obj(json.load(stream))
