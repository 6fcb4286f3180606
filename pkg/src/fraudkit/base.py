"""Estimator base class and input validation helpers."""

import inspect

import numpy as np


class FraudkitError(Exception):
    """Base class for all toolkit errors."""


class NotFittedError(FraudkitError):
    """Raised when predict/transform is called before fit."""


def check_array(X, *, ndim=2, name="X"):
    """Coerce to a float64 ndarray of the given rank and reject non-finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_labels(y, *, name="y"):
    """Coerce to a 1-D int array of binary labels (0 = non-fraud, 1 = fraud)."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {y.shape}")
    y_int = y.astype(np.int64)
    if not np.array_equal(y_int, np.asarray(y, dtype=np.float64)):
        raise ValueError(f"{name} contains non-integer labels")
    bad = np.setdiff1d(np.unique(y_int), [0, 1])
    if bad.size:
        raise ValueError(f"{name} contains labels outside {{0, 1}}: {bad.tolist()}")
    return y_int


def check_X_y(X, y):
    X = check_array(X)
    y = check_labels(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    return X, y


class BaseEstimator:
    """get_params/set_params support in the scikit-learn style.

    Parameters are discovered from the subclass __init__ signature, so
    estimators must store each constructor argument under its own name.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            p.name
            for p in sig.parameters.values()
            if p.name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
