"""Delimited-text ingestion, cleaning rules, and categorical encoding.

Datasets are comma-delimited UTF-8 text with a header row. Cleaning
drops columns or rows with missing values (never imputes), encodes
categorical columns ordinally by first appearance, and validates the
binary label (0 = non-fraud, 1 = fraud).
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from fraudkit.base import FraudkitError, check_array, check_labels
from fraudkit.rng import generator

KINDS = ("numeric", "categorical", "label", "drop")
MISSING_POLICIES = ("forbid", "drop_column", "drop_row")

# Cell values treated as missing, besides the empty string.
_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


class SchemaError(FraudkitError):
    pass


class ParseError(FraudkitError):
    pass


def _is_missing(cell):
    return cell.strip().lower() in _MISSING_TOKENS


@dataclass
class ColumnSchema:
    name: str
    kind: str
    missing_policy: str = "drop_row"
    categories: tuple | None = None  # filled in for encoded categorical columns

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise SchemaError(
                f"unknown missing policy {self.missing_policy!r} for {self.name!r}"
            )


def _validate_schema(schema):
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in schema")
    labels = [c for c in schema if c.kind == "label"]
    if len(labels) != 1:
        raise SchemaError(f"schema must have exactly one label column, got {len(labels)}")
    return labels[0]


class Dataset:
    """Immutable feature matrix plus binary label vector.

    schema lists the retained feature columns in matrix order followed
    by the label column.
    """

    def __init__(self, schema, features, labels):
        schema = list(schema)
        label_col = _validate_schema(schema)
        feature_cols = [c for c in schema if c.kind in ("numeric", "categorical")]
        features = check_array(features, name="features")
        labels = check_labels(labels, name="labels")
        if features.shape[0] != labels.shape[0]:
            raise ValueError("features and labels disagree on row count")
        if features.shape[1] != len(feature_cols):
            raise SchemaError(
                f"schema describes {len(feature_cols)} feature columns but "
                f"matrix has {features.shape[1]}"
            )
        features.setflags(write=False)
        labels.setflags(write=False)
        self.schema = tuple(feature_cols) + (label_col,)
        self.features = features
        self.labels = labels

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_pos(self):
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n_neg(self):
        return int(np.count_nonzero(self.labels == 0))

    @property
    def feature_names(self):
        return [c.name for c in self.schema if c.kind != "label"]

    @property
    def label_name(self):
        return self.schema[-1].name

    def take(self, indices):
        """New Dataset restricted to the given row indices (order preserved)."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.features[indices], self.labels[indices])

    def with_rows(self, features, labels):
        """New Dataset with the same schema but replaced rows."""
        return Dataset(self.schema, features, labels)

    def __repr__(self):
        return (
            f"Dataset(n_rows={self.n_rows}, n_features={self.n_features}, "
            f"n_pos={self.n_pos}, n_neg={self.n_neg})"
        )


@dataclass
class DatasetProfile:
    n_rows: int
    n_features: int
    fraud_fraction: float
    columns: dict = field(default_factory=dict)  # name -> {mean, std, n_missing, n_distinct}

    def to_dict(self):
        return {
            "n_rows": self.n_rows,
            "n_features": self.n_features,
            "fraud_fraction": self.fraud_fraction,
            "columns": self.columns,
        }


def encode_categoricals(values, categories=None):
    """Ordinal encoding by first appearance.

    Returns (codes, categories). Passing a stored categories tuple
    re-applies that mapping exactly; unseen values then raise.
    """
    values = list(values)
    if categories is None:
        mapping = {}
        for v in values:
            if v not in mapping:
                mapping[v] = len(mapping)
        categories = tuple(mapping)
    else:
        mapping = {v: i for i, v in enumerate(categories)}
    try:
        codes = np.array([mapping[v] for v in values], dtype=np.float64)
    except KeyError as exc:
        raise ParseError(f"value {exc.args[0]!r} not in stored category mapping") from exc
    return codes, tuple(categories)


def load_csv(path, schema):
    """Load a comma-delimited file and apply the cleaning rules.

    Header must contain exactly the schema's column names (any order).
    Columns with kind=drop are removed; missing values are handled per
    column policy; categorical columns are ordinally encoded.
    """
    schema = list(schema)
    label_col = _validate_schema(schema)
    by_name = {c.name: c for c in schema}

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, no header row") from None
        rows = [row for row in reader if row]

    if set(header) != set(by_name):
        missing = set(by_name) - set(header)
        extra = set(header) - set(by_name)
        raise SchemaError(
            f"{path}: header does not match schema "
            f"(missing: {sorted(missing)}, unexpected: {sorted(extra)})"
        )
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")

    # Column-major string cells, in header (file) order, drops removed.
    keep_names = [n for n in header if by_name[n].kind != "drop"]
    columns = {n: [row[header.index(n)] for row in rows] for n in keep_names}

    # Missing-value pass: drop_column removes any column containing a
    # missing cell; drop_row marks rows; forbid errors out.
    dropped_cols = set()
    bad_rows = set()
    for name in keep_names:
        col_schema = by_name[name]
        miss = [i for i, cell in enumerate(columns[name]) if _is_missing(cell)]
        if not miss:
            continue
        if col_schema.missing_policy == "forbid":
            raise ParseError(f"{path}: missing value in column {name!r} at data row {miss[0] + 1}")
        # An all-missing column is dropped outright; drop_row would empty
        # the dataset for no reason.
        if col_schema.missing_policy == "drop_column" or len(miss) == len(columns[name]):
            if col_schema.kind == "label":
                raise ParseError(f"{path}: cannot drop label column {name!r}")
            dropped_cols.add(name)
        else:
            bad_rows.update(miss)

    keep_names = [n for n in keep_names if n not in dropped_cols]
    if bad_rows:
        keep_idx = [i for i in range(len(rows)) if i not in bad_rows]
        columns = {n: [columns[n][i] for i in keep_idx] for n in keep_names}
    else:
        columns = {n: columns[n] for n in keep_names}

    out_schema = []
    feature_vectors = []
    labels = None
    for name in keep_names:
        col_schema = by_name[name]
        cells = columns[name]
        if col_schema.kind == "categorical":
            codes, categories = encode_categoricals(cells)
            out_schema.append(
                ColumnSchema(name, "categorical", col_schema.missing_policy, categories)
            )
            feature_vectors.append(codes)
        elif col_schema.kind == "numeric":
            try:
                feature_vectors.append(np.array([float(c) for c in cells], dtype=np.float64))
            except ValueError as exc:
                raise ParseError(f"{path}: unparseable numeric cell in column {name!r}: {exc}") from exc
            out_schema.append(ColumnSchema(name, "numeric", col_schema.missing_policy))
        else:  # label
            values = []
            for i, cell in enumerate(cells):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: unparseable label at data row {i + 1}: {cell!r}") from None
                if v not in (0.0, 1.0):
                    raise ParseError(f"{path}: label outside {{0,1}} at data row {i + 1}: {cell!r}")
                values.append(int(v))
            labels = np.array(values, dtype=np.int64)
            out_schema.append(ColumnSchema(name, "label", col_schema.missing_policy))

    n_rows = len(next(iter(columns.values()))) if columns else 0
    features = (
        np.column_stack(feature_vectors)
        if feature_vectors and n_rows
        else np.empty((n_rows, len(feature_vectors)), dtype=np.float64)
    )
    if labels is None:
        raise SchemaError(f"{path}: label column {label_col.name!r} was dropped by cleaning")
    return Dataset(out_schema, features, labels)


def write_csv(ds, path):
    """Write the dataset back out; floats use shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ds.feature_names + [ds.label_name])
        for i in range(ds.n_rows):
            writer.writerow([repr(float(v)) for v in ds.features[i]] + [int(ds.labels[i])])


def drop_uninformative(ds, column):
    """Remove one feature column (e.g. an all-distinct identifier)."""
    if column == ds.label_name:
        raise SchemaError(f"cannot drop label column {column!r}")
    names = ds.feature_names
    if column not in names:
        raise SchemaError(f"no such column {column!r}")
    j = names.index(column)
    schema = [c for c in ds.schema if c.name != column]
    features = np.delete(ds.features, j, axis=1)
    return Dataset(schema, features, ds.labels)


def profile(ds):
    """Exact row/feature/fraud counts and per-column summary statistics."""
    if ds.n_rows < 1:
        raise ValueError("cannot profile an empty dataset")
    columns = {}
    for j, name in enumerate(ds.feature_names):
        col = ds.features[:, j]
        columns[name] = {
            "mean": float(np.mean(col)),
            "std": float(np.sqrt(np.mean((col - np.mean(col)) ** 2))),
            "n_missing": 0,  # cleaning leaves no missing cells
            "n_distinct": int(np.unique(col).size),
        }
    return DatasetProfile(
        n_rows=ds.n_rows,
        n_features=ds.n_features,
        fraud_fraction=ds.n_pos / ds.n_rows,
        columns=columns,
    )


def subsample(ds, n, preserve_fraction=True, seed=0, n_pos=None):
    """Uniform random subsample of n rows, deterministic per seed.

    With preserve_fraction, positive count = floor(n * fraud_fraction)
    and the remainder goes to the majority class; an explicit n_pos
    target overrides the proportional count.
    """
    if n > ds.n_rows:
        raise ValueError(f"requested {n} rows from a {ds.n_rows}-row dataset")
    rng = generator(seed)
    if not preserve_fraction and n_pos is None:
        idx = rng.choice(ds.n_rows, size=n, replace=False)
        return ds.take(np.sort(idx))
    if n_pos is None:
        n_pos = math.floor(n * ds.n_pos / ds.n_rows)
    if n_pos > ds.n_pos or n - n_pos > ds.n_neg:
        raise ValueError(f"cannot draw {n_pos} positives / {n - n_pos} negatives")
    pos_idx = np.flatnonzero(ds.labels == 1)
    neg_idx = np.flatnonzero(ds.labels == 0)
    chosen = np.concatenate(
        [
            rng.choice(pos_idx, size=n_pos, replace=False),
            rng.choice(neg_idx, size=n - n_pos, replace=False),
        ]
    )
    return ds.take(np.sort(chosen))


def infer_schema(path, label, categorical=(), drop=(), missing_policy="drop_row"):
    """Build a schema from a file header: named label, listed drops and
    categoricals, everything else numeric."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    if label not in header:
        raise SchemaError(f"{path}: label column {label!r} not in header")
    schema = []
    for name in header:
        if name == label:
            schema.append(ColumnSchema(name, "label", "forbid"))
        elif name in drop:
            schema.append(ColumnSchema(name, "drop"))
        elif name in categorical:
            schema.append(ColumnSchema(name, "categorical", missing_policy))
        else:
            schema.append(ColumnSchema(name, "numeric", missing_policy))
    return schema
