"""Command-line entry point: train, evaluate, gradcheck, and compare.

Artifacts land in the --out directory: a per-epoch CSV, a versioned JSON
summary, the best-validation checkpoint, and an SVG loss curve. All floats
in the CSV are written with repr so a repeated run with the same seed and
data produces byte-identical files apart from the wall-time column.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data, gradcheck, metrics
from .artifacts import (atomic_write_text, format_table, render_curve_svg,
                        write_csv, write_json)
from .errors import ConfigError, ContractError, DivergenceError, FormatError, ShapeError
from .kernels import BACKEND
from .nn import (Network, build_mlp, build_paper_cnn, conv2d, dense, flatten,
                 forward_pass, load_checkpoint, maxpool2, save_checkpoint)
from .trainers import (TrainerConfig, backprop_sweep, one_hot, train)

SUMMARY_FORMAT_VERSION = 1

DATASETS = ("mnist", "cifar10")
MODELS = ("mlp", "cnn")
INPUT_SHAPES = {"mnist": (1, 28, 28), "cifar10": (3, 32, 32)}


@dataclass
class ExperimentConfig:
    """Knobs for one training run; JSON config files use these exact keys."""

    dataset: str = "mnist"
    model: str = "mlp"
    hidden: list = field(default_factory=lambda: [128])
    rule: str = "backprop"
    optimizer: str = "adam"
    learning_rate: float = 0.001
    batch_size: int = 128
    epochs: int = 3
    seed: int = 0
    snapshot_mode: str = "post_update"
    patience: int | None = 10
    val_fraction: float | None = None
    limit: int | None = None
    data_dir: str | None = None
    out_dir: str = "runs"

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ConfigError(
                f"unknown dataset {self.dataset!r}; expected one of {DATASETS}"
            )
        if self.model not in MODELS:
            raise ConfigError(
                f"unknown model {self.model!r}; expected one of {MODELS}"
            )
        if self.val_fraction is not None and not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(
                f"val_fraction must be in (0, 1), got {self.val_fraction}"
            )
        if self.limit is not None and self.limit < 1:
            raise ConfigError(f"limit must be >= 1, got {self.limit}")


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config_file(path):
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(
            f"{path}: unknown config keys {unknown}; "
            f"allowed keys are {sorted(_CONFIG_KEYS)}"
        )
    return raw


def build_experiment_config(args):
    """Defaults, overridden by --config file entries, overridden by flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    mode = getattr(args, "mode", None)
    if mode is not None:
        values["snapshot_mode"] = {"pre": "pre_update", "post": "post_update"}.get(
            mode, mode
        )
    return ExperimentConfig(**values)


def resolve_data_dir(cfg_dir):
    path = cfg_dir or os.environ.get("TINYTRAIN_DATA_DIR") or "data"
    return Path(path)


def load_split(dataset, data_dir, split):
    if dataset == "mnist":
        ds = data.load_mnist(data_dir, split)
    else:
        ds = data.load_cifar10(data_dir, split)
    return data.normalize(ds)


def build_model(cfg: ExperimentConfig):
    shape = INPUT_SHAPES[cfg.dataset]
    if cfg.model == "cnn":
        return build_paper_cnn(shape, num_classes=10, seed=cfg.seed)
    dims = [int(np.prod(shape))] + [int(h) for h in cfg.hidden] + [10]
    return build_mlp(dims, seed=cfg.seed)


def _history_rows(run, param_layers):
    header = ["epoch", "train_loss", "val_loss", "val_accuracy"]
    header += [f"delta_norm_layer{i}" for i in param_layers]
    header += ["wall_time"]
    rows = []
    for rec in run.history:
        rows.append([rec.epoch, rec.train_loss, rec.val_loss, rec.val_accuracy]
                    + list(rec.delta_norms) + [rec.wall_time])
    return header, rows


def _write_run_artifacts(out_dir, cfg, net, run, report, elapsed, sizes):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = _history_rows(run, net.param_layers())
    write_csv(out / "history.csv", header, rows)
    epochs = [rec.epoch for rec in run.history]
    svg = render_curve_svg([
        ("train_loss", epochs, [rec.train_loss for rec in run.history]),
        ("val_loss", epochs, [rec.val_loss for rec in run.history]),
    ])
    atomic_write_text(out / "loss.svg", svg)
    save_checkpoint(net, out / "best.ckpt")
    summary = {
        "format_version": SUMMARY_FORMAT_VERSION,
        "config": dataclasses.asdict(cfg),
        "kernel_backend": BACKEND,
        "num_parameters": net.num_parameters(),
        "train_samples": sizes[0],
        "val_samples": sizes[1],
        "epochs_run": len(run.history),
        "best_epoch": run.best_epoch,
        "best_val_accuracy": run.best_val_accuracy,
        "stopped_early": run.stopped_early,
        "metrics": report.to_dict(),
        "wall_time_seconds": elapsed,
    }
    write_json(out / "summary.json", summary)
    return out


def run_train(args):
    cfg = build_experiment_config(args)
    data_dir = resolve_data_dir(cfg.data_dir)
    train_ds = load_split(cfg.dataset, data_dir, "train")
    if cfg.limit is not None:
        train_ds = data.Dataset(train_ds.name, train_ds.images[:cfg.limit],
                                train_ds.labels[:cfg.limit], train_ds.normalized)
    if cfg.val_fraction is not None:
        train_ds, val_ds = data.split(train_ds, 1.0 - cfg.val_fraction, cfg.seed)
    else:
        val_ds = load_split(cfg.dataset, data_dir, "test")

    net = build_model(cfg)
    tc = TrainerConfig(
        rule=cfg.rule,
        optimizer=cfg.optimizer,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
        seed=cfg.seed,
        snapshot_mode=cfg.snapshot_mode,
        patience=cfg.patience,
    )
    print(f"training {cfg.model} on {train_ds.name}: rule={cfg.rule} "
          f"optimizer={cfg.optimizer} lr={cfg.learning_rate} "
          f"batch={cfg.batch_size} epochs={cfg.epochs} seed={cfg.seed} "
          f"kernels={BACKEND}", flush=True)
    started = time.monotonic()
    run = train(net, (train_ds.images, train_ds.labels),
                (val_ds.images, val_ds.labels), tc)
    elapsed = time.monotonic() - started
    for rec in run.history:
        print(f"epoch {rec.epoch}: train_loss={rec.train_loss:.4f} "
              f"val_loss={rec.val_loss:.4f} val_acc={rec.val_accuracy:.4f}",
              flush=True)

    net.restore(run.best_params)
    report = metrics.evaluate(net, val_ds.images, val_ds.labels)
    out = _write_run_artifacts(cfg.out_dir, cfg, net, run, report, elapsed,
                               (len(train_ds), len(val_ds)))
    print(f"best epoch {run.best_epoch}: val_accuracy="
          f"{run.best_val_accuracy:.4f} ({elapsed:.1f}s)")
    print(report.text())
    print(f"artifacts written to {out}")
    return 0


def run_evaluate(args):
    net = load_checkpoint(args.checkpoint)
    data_dir = resolve_data_dir(args.data_dir)
    ds = load_split(args.dataset, data_dir, args.split)
    report = metrics.evaluate(net, ds.images, ds.labels)
    print(report.text())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "metrics.json", {
            "format_version": SUMMARY_FORMAT_VERSION,
            "checkpoint": str(args.checkpoint),
            "dataset": ds.name,
            "metrics": report.to_dict(),
        })
        print(f"metrics written to {out / 'metrics.json'}")
    return 0


def _toy_checks(seed):
    """Small fixed architectures exercised by the gradcheck command."""
    rng = np.random.default_rng(seed)
    for act in ("sigmoid", "tanh", "relu"):
        net = build_mlp([4, 5, 3], hidden_activation=act, seed=seed)
        x = rng.normal(size=(8, 4))
        t = one_hot(rng.integers(0, 3, size=8), 3)
        yield f"mlp-{act}", net, x, t
    conv_rng = np.random.default_rng(seed + 1)
    net = Network([
        conv2d(1, 2, 3, 3, "relu", rng=conv_rng),
        maxpool2(),
        flatten(),
        dense(8, 3, "softmax", rng=conv_rng),
    ], (1, 6, 6))
    x = rng.normal(size=(4, 1, 6, 6))
    t = one_hot(rng.integers(0, 3, size=4), 3)
    yield "cnn-toy", net, x, t


def run_gradcheck(args):
    failures = 0
    for name, net, x, t in _toy_checks(args.seed):
        cache = forward_pass(net, x)
        analytic = gradcheck.grads_as_dict(backprop_sweep(net, cache, t))
        if args.corrupt:
            key = sorted(analytic)[0]
            analytic[key] = analytic[key].copy()
            analytic[key].reshape(-1)[0] += 1e-2
        numeric, valid = gradcheck.finite_difference_grads(
            net, x, t, epsilon=args.epsilon
        )
        report = gradcheck.compare_grads(analytic, numeric, valid,
                                         rtol=args.rtol, atol=args.atol)
        print(f"{name}: {report.summary()}")
        failures += 0 if report.passed else 1
    if args.corrupt:
        print("corruption injected: failures above are expected")
    return 1 if failures else 0


def run_compare(args):
    cfg = build_experiment_config(args)
    data_dir = resolve_data_dir(cfg.data_dir)
    train_ds = load_split(cfg.dataset, data_dir, "train")
    val_ds = load_split(cfg.dataset, data_dir, "test")
    if cfg.limit is not None:
        train_ds = data.Dataset(train_ds.name, train_ds.images[:cfg.limit],
                                train_ds.labels[:cfg.limit], train_ds.normalized)
    seeds = list(range(args.seeds))
    rules = ("backprop", "dfa", "layerwise")
    rows = []
    results = {rule: [] for rule in rules}
    for rule in rules:
        for seed in seeds:
            net = build_model(dataclasses.replace(cfg, seed=seed))
            tc = TrainerConfig(
                rule=rule,
                optimizer=cfg.optimizer,
                learning_rate=cfg.learning_rate,
                batch_size=cfg.batch_size,
                epochs=cfg.epochs,
                seed=seed,
                snapshot_mode=cfg.snapshot_mode,
                patience=None,
            )
            started = time.monotonic()
            run = train(net, (train_ds.images, train_ds.labels),
                        (val_ds.images, val_ds.labels), tc)
            elapsed = time.monotonic() - started
            acc = run.best_val_accuracy
            results[rule].append(acc)
            rows.append([rule, seed, acc, run.best_epoch, elapsed])
            print(f"{rule} seed {seed}: accuracy={acc:.4f} ({elapsed:.1f}s)",
                  flush=True)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "compare.csv",
              ["rule", "seed", "accuracy", "best_epoch", "wall_time"], rows)
    stats = {
        rule: {
            "mean": float(np.mean(accs)),
            "std": float(np.std(accs)),
            "min": float(np.min(accs)),
            "max": float(np.max(accs)),
            "accuracies": [float(a) for a in accs],
        }
        for rule, accs in results.items()
    }
    write_json(out / "compare.json", {
        "format_version": SUMMARY_FORMAT_VERSION,
        "config": dataclasses.asdict(cfg),
        "seeds": seeds,
        "results": stats,
    })
    table = format_table(
        ["rule", "mean", "std", "min", "max"],
        [[r, f"{s['mean']:.4f}", f"{s['std']:.4f}", f"{s['min']:.4f}",
          f"{s['max']:.4f}"] for r, s in stats.items()],
    )
    print(table)
    print(f"comparison written to {out}")
    return 0


def _add_experiment_flags(p, include_rule=True):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dataset", choices=DATASETS)
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--hidden", type=int, nargs="+",
                   help="hidden layer sizes for the mlp model")
    if include_rule:
        p.add_argument("--rule", choices=("backprop", "dfa", "layerwise"))
        p.add_argument("--mode", choices=("pre", "post"),
                       help="layerwise snapshot mode")
    p.add_argument("--optimizer", choices=("sgd", "adam"))
    p.add_argument("--lr", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--val-fraction", dest="val_fraction", type=float,
                   help="carve validation out of train instead of using "
                        "the test split")
    p.add_argument("--limit", type=int, help="cap on training samples")
    p.add_argument("--data-dir", dest="data_dir",
                   help="dataset directory (default: $TINYTRAIN_DATA_DIR or ./data)")
    p.add_argument("--out", dest="out_dir", help="artifact directory")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="tinytrain",
        description="train small networks with backprop, direct feedback "
                    "alignment, or layer-wise instant updates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write artifacts")
    _add_experiment_flags(p)
    p.set_defaults(func=run_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", choices=DATASETS, default="mnist")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--out", help="directory for metrics.json")
    p.set_defaults(func=run_evaluate)

    p = sub.add_parser("gradcheck",
                       help="compare analytic gradients with finite differences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--rtol", type=float, default=1e-4)
    p.add_argument("--atol", type=float, default=1e-7)
    p.add_argument("--corrupt", action="store_true",
                   help="perturb one analytic gradient to prove the check "
                        "can fail")
    p.set_defaults(func=run_gradcheck)

    p = sub.add_parser("compare",
                       help="train every rule over several seeds and tabulate")
    _add_experiment_flags(p, include_rule=False)
    p.add_argument("--seeds", type=int, default=5,
                   help="number of seeds (0..N-1)")
    p.set_defaults(func=run_compare)

    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, ShapeError, ContractError,
            DivergenceError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
