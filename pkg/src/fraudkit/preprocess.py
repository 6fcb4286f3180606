"""Standardization, feature correlation, and the test/train/validation split."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from fraudkit.base import BaseEstimator, NotFittedError, check_array
from fraudkit.rng import generator


class StandardScaler(BaseEstimator):
    """Per-feature standardization to mean 0, std 1.

    Uses the population std (divisor n) so refitting a transformed
    matrix yields std exactly 1. Zero-variance features map to 0.
    """

    def __init__(self):
        self.mean_ = None
        self.std_ = None

    def fit(self, X):
        X = check_array(X)
        if X.shape[0] < 1:
            raise ValueError("cannot fit scaler on an empty matrix")
        self.mean_ = X.mean(axis=0)
        self.std_ = np.sqrt(((X - self.mean_) ** 2).mean(axis=0))
        return self

    def transform(self, X):
        if self.mean_ is None:
            raise NotFittedError("scaler is not fitted")
        X = check_array(X)
        if X.shape[1] != self.mean_.shape[0]:
            raise ValueError(
                f"scaler fitted on {self.mean_.shape[0]} features, got {X.shape[1]}"
            )
        safe = np.where(self.std_ > 0, self.std_, 1.0)
        out = (X - self.mean_) / safe
        out[:, self.std_ == 0] = 0.0
        return out

    def fit_transform(self, X):
        return self.fit(X).transform(X)


def fit_scaler(ds):
    return StandardScaler().fit(ds.features)


def apply_scaler(ds, scaler):
    return ds.with_rows(scaler.transform(ds.features), ds.labels)


@dataclass
class CorrelationResult:
    matrix: np.ndarray
    names: list
    constant: np.ndarray  # bool mask of zero-variance columns

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("," + ",".join(self.names) + "\n")
            for name, row in zip(self.names, self.matrix):
                fh.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")


def correlation_matrix(ds, include_label=False):
    """Pearson correlation between features (optionally plus the label).

    Exactly symmetric with unit diagonal; pairs involving a
    zero-variance column are reported as 0 (with a warning).
    """
    X = ds.features
    names = list(ds.feature_names)
    if include_label:
        X = np.column_stack([X, ds.labels.astype(np.float64)])
        names.append(ds.label_name)
    if X.shape[0] < 2:
        raise ValueError("correlation requires at least 2 rows")

    centered = X - X.mean(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    constant = std == 0
    if constant.any():
        warnings.warn(
            f"zero-variance columns reported as correlation 0: "
            f"{[n for n, c in zip(names, constant) if c]}",
            stacklevel=2,
        )
    z = centered / np.where(constant, 1.0, std)
    p = X.shape[1]
    m = np.zeros((p, p))
    for i in range(p):
        for j in range(i + 1, p):
            if constant[i] or constant[j]:
                continue
            v = float(np.clip(np.mean(z[:, i] * z[:, j]), -1.0, 1.0))
            m[i, j] = m[j, i] = v
    np.fill_diagonal(m, 1.0)
    return CorrelationResult(matrix=m, names=names, constant=constant)


@dataclass
class SplitIndices:
    test: np.ndarray
    train: np.ndarray
    validation: np.ndarray
    seed: int


def split(n_rows, test_frac=0.035, val_frac=0.2, seed=0, labels=None, stratify=False):
    """Random test/train/validation partition of range(n_rows).

    Test takes floor(test_frac * n) rows; of the remainder, validation
    takes floor(val_frac * m) and training the rest. Deterministic per
    seed. With stratify, class proportions are preserved per partition
    (labels required).
    """
    if not (0 < test_frac < 1 and 0 < val_frac < 1):
        raise ValueError("fractions must lie in (0, 1)")
    if n_rows < 3:
        raise ValueError("need at least 3 rows to split")
    rng = generator(seed)

    def _sizes(n):
        n_test = math.floor(test_frac * n)
        n_val = math.floor(val_frac * (n - n_test))
        return n_test, n_val, n - n_test - n_val

    if stratify:
        if labels is None:
            raise ValueError("stratified split requires labels")
        labels = np.asarray(labels)
        test, val, train = [], [], []
        for cls in (0, 1):
            idx = np.flatnonzero(labels == cls)
            perm = idx[rng.permutation(idx.size)]
            n_test, n_val, _ = _sizes(idx.size)
            test.append(perm[:n_test])
            val.append(perm[n_test : n_test + n_val])
            train.append(perm[n_test + n_val :])
        test, val, train = (np.sort(np.concatenate(p)) for p in (test, val, train))
    else:
        perm = rng.permutation(n_rows)
        n_test, n_val, _ = _sizes(n_rows)
        test = np.sort(perm[:n_test])
        val = np.sort(perm[n_test : n_test + n_val])
        train = np.sort(perm[n_test + n_val :])

    if min(test.size, val.size, train.size) == 0:
        raise ValueError(
            f"too few rows ({n_rows}) for each partition to get at least one element"
        )
    return SplitIndices(test=test, train=train, validation=val, seed=seed)


def split_dataset(ds, test_frac=0.035, val_frac=0.2, seed=0, stratify=False):
    return split(
        ds.n_rows, test_frac, val_frac, seed, labels=ds.labels, stratify=stratify
    )
