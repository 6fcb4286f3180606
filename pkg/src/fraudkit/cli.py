"""Command-line entry point.

Subcommands: profile, explore, gen-synth, train, evaluate,
sweep-imbalance, compare-sampling, run. Exit codes: 0 success,
1 validation error, 2 runtime failure. Human-readable output goes to
stdout, diagnostics to stderr, machine formats only to files.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import fraudkit
from fraudkit.base import FraudkitError
from fraudkit.config import ConfigError, load_plan, load_schema_config, plan_to_config_text
from fraudkit.experiments import (
    compare_sampling,
    emit_report,
    run_experiment,
    sweep_imbalance,
)
from fraudkit.ingest import infer_schema, load_csv, profile, write_csv
from fraudkit.metrics import evaluate_predictions
from fraudkit.models import classify, model_from_dict, model_to_dict
from fraudkit.preprocess import StandardScaler, correlation_matrix
from fraudkit.svg import heatmap
from fraudkit.synth import SyntheticSpec, gen_synthetic

OUTPUT_DIR_ENV = "FRAUDKIT_OUTPUT_DIR"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; validation errors are exit 1 here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _dataset_args(sub):
    sub.add_argument("data", help="comma-delimited dataset file")
    sub.add_argument("--label", default="Class", help="label column name")
    sub.add_argument("--schema", help="schema config file ([columns]/[missing] sections)")
    sub.add_argument("--categorical", default="", help="comma list of categorical columns")
    sub.add_argument("--drop", default="", help="comma list of columns to drop")


def _load_dataset(args):
    if args.schema:
        schema = load_schema_config(args.schema)
    else:
        schema = infer_schema(
            args.data,
            args.label,
            categorical=[c for c in args.categorical.split(",") if c],
            drop=[c for c in args.drop.split(",") if c],
        )
    return load_csv(args.data, schema)


def _output_dir(args, default="out"):
    out = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or default
    Path(out).mkdir(parents=True, exist_ok=True)
    return Path(out)


def _plan_overrides(args):
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"plan.seed={args.seed}")
    if args.output_dir:
        overrides.append(f"plan.output_dir={args.output_dir}")
    if args.jobs is not None:
        overrides.append(f"plan.jobs={args.jobs}")
    return overrides


def _echo_resolved(plan, out):
    text = plan_to_config_text(plan)
    (out / "resolved.cfg").write_text(text)
    print(f"resolved config -> {out / 'resolved.cfg'}", file=sys.stderr)


def cmd_profile(args):
    ds = _load_dataset(args)
    print(json.dumps(profile(ds).to_dict(), indent=2))
    return 0


def cmd_explore(args):
    ds = _load_dataset(args)
    out = _output_dir(args)
    result = correlation_matrix(ds, include_label=args.include_label)
    csv_path = out / "correlation.csv"
    result.to_csv(csv_path)
    svg_path = out / "correlation.svg"
    svg_path.write_text(heatmap(result.matrix, result.names, title=Path(args.data).name))
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def cmd_gen_synth(args):
    spec = SyntheticSpec(
        n_rows=args.n_rows,
        n_features=args.n_features,
        fraud_fraction=args.fraud_fraction,
        separation=args.separation,
        seed=args.seed if args.seed is not None else 0,
    )
    ds = gen_synthetic(spec)
    write_csv(ds, args.out)
    print(f"wrote {ds.n_rows} rows ({ds.n_pos} fraud) to {args.out}")
    return 0


def cmd_train(args):
    """Train the plan's first model with its first sampler; save a bundle."""
    from fraudkit.experiments import load_dataset
    from fraudkit.models import make_model
    from fraudkit.preprocess import split
    from fraudkit.rng import derive_seed

    plan = load_plan(args.config, _plan_overrides(args))
    plan.validate()
    out = _output_dir(args, default=plan.output_dir)
    plan.output_dir = str(out)
    _echo_resolved(plan, out)

    ds = load_dataset(plan)
    idx = split(ds.n_rows, plan.test_frac, plan.val_frac, seed=derive_seed(plan.seed, "split"))
    scaler = StandardScaler().fit(ds.features[idx.train])
    X_train = scaler.transform(ds.features[idx.train])
    y_train = ds.labels[idx.train]
    X_val = scaler.transform(ds.features[idx.validation])
    y_val = ds.labels[idx.validation]
    X_test = scaler.transform(ds.features[idx.test])
    y_test = ds.labels[idx.test]

    sampler = plan.samplers[0].build()
    if sampler is not None:
        if hasattr(sampler, "seed"):
            sampler.seed = derive_seed(plan.seed, "sampler")
        X_train, y_train = sampler.fit_resample(X_train, y_train)

    spec = plan.models[0]
    model = make_model(
        spec.kind,
        lr=plan.train.lr,
        epochs_max=plan.train.epochs_max,
        batch_size=plan.train.batch_size,
        patience=plan.train.patience,
        seed=derive_seed(plan.seed, "model"),
        **spec.params,
    )
    if hasattr(model, "history_"):
        model.fit(X_train, y_train, X_val, y_val)
        (out / "history.json").write_text(json.dumps(model.history_.to_dict(), indent=2))
    else:
        model.fit(X_train, y_train)

    for name, X_eval, y_eval in (("validation", X_val, y_val), ("test", X_test, y_test)):
        report = evaluate_predictions(y_eval, classify(model, X_eval, plan.threshold))
        print(f"{name}: {json.dumps(report.to_dict())}")

    bundle = {
        "format_version": 1,
        "model": model_to_dict(model),
        "scaler": {"mean": scaler.mean_.tolist(), "std": scaler.std_.tolist()},
        "threshold": plan.threshold,
    }
    (out / "trained.model").write_text(json.dumps(bundle))
    print(f"model -> {out / 'trained.model'}")
    return 0


def cmd_evaluate(args):
    bundle = json.loads(Path(args.model).read_text())
    model = model_from_dict(bundle["model"])
    scaler = StandardScaler()
    import numpy as np

    scaler.mean_ = np.array(bundle["scaler"]["mean"])
    scaler.std_ = np.array(bundle["scaler"]["std"])
    ds = _load_dataset(args)
    X = scaler.transform(ds.features)
    y_pred = classify(model, X, bundle.get("threshold", 0.5))
    print(json.dumps(evaluate_predictions(ds.labels, y_pred).to_dict(), indent=2))
    return 0


def _run_plan_command(args, runner, chart_name):
    plan = load_plan(args.config, _plan_overrides(args))
    plan.validate()
    out = _output_dir(args, default=plan.output_dir)
    plan.output_dir = str(out)
    _echo_resolved(plan, out)
    record = runner(plan)
    emit_report(record, out, chart_name=chart_name)
    n_ok = sum(1 for c in record.cells if c.status == "ok")
    n_skip = len(record.cells) - n_ok
    print(f"{n_ok} cells ok, {n_skip} skipped; reports in {out}")
    return 0


def cmd_sweep_imbalance(args):
    return _run_plan_command(args, sweep_imbalance, "imbalance_sweep")


def cmd_compare_sampling(args):
    return _run_plan_command(args, compare_sampling, "sampling_comparison")


def cmd_run(args):
    return _run_plan_command(args, run_experiment, "experiment")


def build_parser():
    parser = _ArgumentParser(prog="fraudkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"fraudkit {fraudkit.__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("profile", help="dataset profile as JSON")
    _dataset_args(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("explore", help="correlation matrix CSV + SVG heatmap")
    _dataset_args(p)
    p.add_argument("--include-label", action="store_true")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset CSV")
    p.add_argument("out")
    p.add_argument("--n-rows", type=int, default=1000)
    p.add_argument("--n-features", type=int, default=10)
    p.add_argument("--fraud-fraction", type=float, default=0.1)
    p.add_argument("--separation", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gen_synth)

    for name, func in (
        ("train", cmd_train),
        ("sweep-imbalance", cmd_sweep_imbalance),
        ("compare-sampling", cmd_compare_sampling),
        ("run", cmd_run),
    ):
        p = sub.add_parser(name)
        p.add_argument("config", help="plan config file")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
        p.add_argument("--output-dir")
        p.add_argument("--jobs", type=int)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.set_defaults(func=func)

    p = sub.add_parser("evaluate", help="evaluate a trained model bundle on a dataset")
    p.add_argument("model")
    _dataset_args(p)
    p.set_defaults(func=cmd_evaluate)

    parser.add_argument("--seed", type=int, help="global seed; stage seeds derive from it")
    return parser


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 1
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (FraudkitError, ValueError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
