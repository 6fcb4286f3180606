"""Experiment harness: plans, grid runs, sweeps, and report emission.

A plan fixes a dataset source, preprocessing, a sampler grid, a model
grid, and seeds; running it produces one result cell per grid point,
each evaluated on the untouched validation and test partitions.
Scaling is fit on the training partition only and samplers see only
training rows (no leakage). Everything numeric is a pure function of
the plan plus its global seed.
"""

import concurrent.futures
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fraudkit.ingest import infer_schema, load_csv
from fraudkit.metrics import evaluate_predictions, format_metric
from fraudkit.models import classify, make_model
from fraudkit.nn.network import save_network
from fraudkit.preprocess import StandardScaler, split
from fraudkit.resample import SamplerConfig, round_half_away
from fraudkit.rng import derive_seed
from fraudkit.svg import bar_chart
from fraudkit.synth import SyntheticSpec, gen_synthetic

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
CSV_COLUMNS = ("dataset", "model", "sampler", "ratio", "partition") + METRIC_NAMES + ("status",)


@dataclass
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.kind


@dataclass
class TrainConfig:
    lr: float = 0.001
    epochs_max: int = 100
    batch_size: int = 256
    patience: int = 5


@dataclass
class ExperimentPlan:
    name: str = "experiment"
    dataset_path: str | None = None  # csv source ...
    label: str = "Class"
    categorical: tuple = ()
    drop: tuple = ()
    synthetic: SyntheticSpec | None = None  # ... or synthetic source
    test_frac: float = 0.035
    val_frac: float = 0.2
    seed: int = 0
    threshold: float = 0.5
    jobs: int = 1
    models: list = field(default_factory=lambda: [ModelSpec("logreg")])
    samplers: list = field(default_factory=lambda: [SamplerConfig("none")])
    ratios: list = field(default_factory=lambda: [1, 2, 5, 10, 25, 50, 100])
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "out"

    def validate(self):
        if not self.models or not self.samplers or not self.ratios:
            raise ValueError("plan grids must be non-empty")
        if self.dataset_path is None and self.synthetic is None:
            raise ValueError("plan needs a dataset path or a synthetic spec")
        if self.dataset_path is not None and not Path(self.dataset_path).exists():
            raise ValueError(f"dataset file not found: {self.dataset_path}")

    @property
    def dataset_name(self):
        if self.dataset_path is not None:
            return Path(self.dataset_path).stem
        return "synthetic"


@dataclass
class Cell:
    dataset: str
    model: str
    sampler: str
    ratio: float
    partition: str
    report: object | None  # MetricReport, None when skipped
    status: str  # "ok" | "skipped: reason"
    seconds: float

    def to_row(self):
        m = self.report.to_dict() if self.report else {}
        return {
            "dataset": self.dataset,
            "model": self.model,
            "sampler": self.sampler,
            "ratio": self.ratio,
            "partition": self.partition,
            **{k: m.get(k) for k in METRIC_NAMES},
            "status": self.status,
        }


@dataclass
class RunRecord:
    plan_hash: str
    cells: list = field(default_factory=list)
    histories: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "plan_hash": self.plan_hash,
            "cells": [{**c.to_row(), "seconds": c.seconds} for c in self.cells],
            "histories": self.histories,
        }


@dataclass
class Prepared:
    """Standardized partitions; scaler statistics come from train rows only."""

    name: str
    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


def load_dataset(plan):
    if plan.synthetic is not None:
        return gen_synthetic(plan.synthetic)
    schema = infer_schema(
        plan.dataset_path, plan.label, categorical=plan.categorical, drop=plan.drop
    )
    return load_csv(plan.dataset_path, schema)


def prepare(plan, ds=None):
    """Split, then standardize all partitions with train-fitted statistics."""
    if ds is None:
        ds = load_dataset(plan)
    idx = split(
        ds.n_rows, plan.test_frac, plan.val_frac, seed=derive_seed(plan.seed, "split")
    )
    X, y = ds.features, ds.labels
    scaler = StandardScaler().fit(X[idx.train])
    return Prepared(
        name=plan.dataset_name,
        X_train=scaler.transform(X[idx.train]),
        y_train=y[idx.train],
        X_val=scaler.transform(X[idx.validation]),
        y_val=y[idx.validation],
        X_test=scaler.transform(X[idx.test]),
        y_test=y[idx.test],
    )


def _plan_hash(plan):
    blob = repr(
        (
            plan.name,
            plan.dataset_path,
            plan.label,
            tuple(plan.categorical),
            tuple(plan.drop),
            plan.synthetic,
            plan.test_frac,
            plan.val_frac,
            plan.seed,
            plan.threshold,
            [(m.kind, sorted(m.params.items())) for m in plan.models],
            [(s.method, s.nearmiss_version, s.k_neighbors, s.ratio, s.seed) for s in plan.samplers],
            list(plan.ratios),
            plan.train,
        )
    ).encode()
    return hashlib.sha256(blob).hexdigest()


def _cell_seed(plan, model_name, sampler_name, ratio):
    return derive_seed(plan.seed, f"cell/{plan.dataset_name}/{model_name}/{sampler_name}/{ratio}")


def run_cell(prepared, plan, model_spec, sampler_cfg, ratio=None, model_dir=None):
    """Train one grid cell and evaluate it on validation and test.

    Precondition violations (unsuitable model shape, unreachable sampler
    target) become skipped cells, never grid aborts. Returns
    (cells, history-or-None).
    """
    sampler_name = sampler_cfg.method
    if sampler_cfg.method == "nearmiss":
        sampler_name = f"nearmiss{sampler_cfg.nearmiss_version}"
    ratio_label = ratio if ratio is not None else sampler_cfg.ratio
    seed = _cell_seed(plan, model_spec.name, sampler_name, ratio_label)
    started = time.perf_counter()

    def skipped(reason):
        elapsed = time.perf_counter() - started
        return [
            Cell(prepared.name, model_spec.name, sampler_name, ratio_label, part, None,
                 f"skipped: {reason}", elapsed)
            for part in ("validation", "test")
        ], None

    # `ratio` is only a display label (e.g. the pre-cap sweep ratio);
    # the sampler always uses the ratio carried by its config.
    cfg = SamplerConfig(
        method=sampler_cfg.method,
        nearmiss_version=sampler_cfg.nearmiss_version,
        k_neighbors=sampler_cfg.k_neighbors,
        ratio=sampler_cfg.ratio,
        seed=derive_seed(seed, "sampler"),
    )
    try:
        sampler = cfg.build()
        if sampler is None:
            X_fit, y_fit = prepared.X_train, prepared.y_train
        else:
            X_fit, y_fit = sampler.fit_resample(prepared.X_train, prepared.y_train)
    except ValueError as exc:
        return skipped(str(exc))

    try:
        model = make_model(
            model_spec.kind,
            lr=plan.train.lr,
            epochs_max=plan.train.epochs_max,
            batch_size=plan.train.batch_size,
            patience=plan.train.patience,
            seed=derive_seed(seed, "model"),
            **model_spec.params,
        )
        if hasattr(model, "history_"):
            model.fit(X_fit, y_fit, prepared.X_val, prepared.y_val)
        else:
            model.fit(X_fit, y_fit)
    except ValueError as exc:
        return skipped(str(exc))

    cells = []
    for part, X_eval, y_eval in (
        ("validation", prepared.X_val, prepared.y_val),
        ("test", prepared.X_test, prepared.y_test),
    ):
        y_pred = classify(model, X_eval, plan.threshold)
        report = evaluate_predictions(y_eval, y_pred)
        cells.append(
            Cell(prepared.name, model_spec.name, sampler_name, ratio_label, part,
                 report, "ok", time.perf_counter() - started)
        )
    if model_dir is not None:
        _save_model(model, model_dir, f"{prepared.name}__{model_spec.name}__{sampler_name}__{ratio_label}")
    history = model.history_.to_dict() if getattr(model, "history_", None) else None
    return cells, history


def _save_model(model, model_dir, stem):
    model_dir = Path(model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    path = model_dir / f"{stem}.model"
    if hasattr(model, "network_"):
        save_network(model.network_, path)
    elif hasattr(model, "root_"):
        path.write_text(json.dumps({"kind": "dtree", "root": model.root_.to_dict()}))
    elif hasattr(model, "trees_"):
        path.write_text(
            json.dumps({"kind": "forest", "trees": [t.root_.to_dict() for t in model.trees_]})
        )


def _run_grid(plan, prepared, points, model_dir=None):
    """points: list of (model_spec, sampler_cfg, ratio-or-None); results are
    assembled in point order regardless of execution order."""
    record = RunRecord(plan_hash=_plan_hash(plan))

    def work(point):
        model_spec, sampler_cfg, ratio = point
        return run_cell(prepared, plan, model_spec, sampler_cfg, ratio, model_dir)

    if plan.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=plan.jobs) as pool:
            results = list(pool.map(work, points))
    else:
        results = [work(p) for p in points]

    for (model_spec, sampler_cfg, ratio), (cells, history) in zip(points, results):
        record.cells.extend(cells)
        if history is not None:
            key = f"{model_spec.name}/{cells[0].sampler}/{cells[0].ratio}"
            record.histories[key] = history
    return record


def sweep_imbalance(plan, model_spec=None, ratios=None, prepared=None):
    """RUS the training partition to each majority:minority ratio, train,
    and evaluate. Ratios beyond the available majority count are capped."""
    plan.validate()
    if prepared is None:
        prepared = prepare(plan)
    model_spec = model_spec or plan.models[0]
    ratios = list(ratios or plan.ratios)
    if sorted(ratios) != ratios or min(ratios) < 1:
        raise ValueError("ratios must be >= 1 and ascending")
    n_pos = int(np.sum(prepared.y_train == 1))
    n_neg = int(np.sum(prepared.y_train == 0))
    points = []
    for r in ratios:
        capped = r
        if round_half_away(r * n_pos) > n_neg:
            capped = n_neg / n_pos
        points.append((model_spec, SamplerConfig(method="rus", ratio=capped), r))
    return _run_grid(plan, prepared, points)


def compare_sampling(plan, model_spec=None, prepared=None):
    """Side-by-side sampler comparison at the plan's configured ratios."""
    plan.validate()
    if prepared is None:
        prepared = prepare(plan)
    model_spec = model_spec or plan.models[0]
    points = [(model_spec, cfg, None) for cfg in plan.samplers]
    return _run_grid(plan, prepared, points)


def run_experiment(plan, prepared=None):
    """Full grid product: every model against every sampler config."""
    plan.validate()
    if prepared is None:
        prepared = prepare(plan)
    model_dir = Path(plan.output_dir) / "models"
    points = [(m, s, None) for m in plan.models for s in plan.samplers]
    return _run_grid(plan, prepared, points, model_dir=model_dir)


def _csv_value(v):
    if v is None:
        return "undef"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_report(record, output_dir, formats=("json", "csv", "svg"), chart_name="experiment"):
    """Write record.json, cells.csv, timings.csv, and grouped-bar charts.

    Wall-clock seconds live in record.json/timings.csv only, so
    cells.csv is byte-identical across reruns of a seeded plan.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out / "record.json"
        path.write_text(json.dumps(record.to_dict(), indent=2) + "\n")
        written.append(path)
    if "csv" in formats:
        path = out / "cells.csv"
        lines = [",".join(CSV_COLUMNS)]
        for cell in record.cells:
            row = cell.to_row()
            lines.append(",".join(_csv_value(row[c]) for c in CSV_COLUMNS))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
        tpath = out / "timings.csv"
        tlines = ["dataset,model,sampler,ratio,partition,seconds"]
        for cell in record.cells:
            tlines.append(
                f"{cell.dataset},{cell.model},{cell.sampler},{cell.ratio},"
                f"{cell.partition},{cell.seconds:.6f}"
            )
        tpath.write_text("\n".join(tlines) + "\n")
        written.append(tpath)
    if "svg" in formats:
        charts = out / "charts"
        charts.mkdir(exist_ok=True)
        for partition in ("validation", "test"):
            cells = [c for c in record.cells if c.partition == partition and c.status == "ok"]
            if not cells:
                continue
            groups = [
                (
                    f"{c.model}/{c.sampler}@{c.ratio:g}",
                    {m: getattr(c.report, m) for m in METRIC_NAMES},
                )
                for c in cells
            ]
            path = charts / f"{chart_name}_{partition}.svg"
            path.write_text(bar_chart(groups, title=f"{chart_name} ({partition} data)"))
            written.append(path)
    return written
