"""Credit-card fraud detection toolkit.

Ingestion and cleaning of transaction datasets, class-imbalance
resampling (random under-sampling, NearMiss v1-v3, SMOTE), from-scratch
neural networks (1D/2D CNN, LSTM) and classical baselines, the four
confusion-matrix metrics, and a config-driven experiment harness.
"""

__version__ = "0.1.0"

from fraudkit.base import BaseEstimator, FraudkitError, NotFittedError
from fraudkit.ingest import ColumnSchema, Dataset, DatasetProfile, load_csv, profile
from fraudkit.metrics import ConfusionMatrix, MetricReport, compute_metrics, confusion
from fraudkit.preprocess import SplitIndices, StandardScaler, correlation_matrix, split
from fraudkit.resample import NearMiss, RandomUnderSampler, Smote

__all__ = [
    "BaseEstimator",
    "ColumnSchema",
    "ConfusionMatrix",
    "Dataset",
    "DatasetProfile",
    "FraudkitError",
    "MetricReport",
    "NearMiss",
    "NotFittedError",
    "RandomUnderSampler",
    "Smote",
    "SplitIndices",
    "StandardScaler",
    "compute_metrics",
    "confusion",
    "correlation_matrix",
    "load_csv",
    "profile",
    "split",
]
