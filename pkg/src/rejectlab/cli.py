"""``rejectlab`` command line.

Exit status: 0 on success, 1 on a runtime failure (e.g. training divergence),
2 on a usage, configuration or input-data error.

Settings come from flags, then an INI-style ``--config`` file (any section;
keys spelled like the long flags without dashes, e.g. ``lr-metric``), then
built-in defaults. The seed falls back to ``$REJECTLAB_SEED``.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from rejectlab import __version__
from rejectlab.curves import METRICS, curve, read_curve_csv, write_curve_csv
from rejectlab.data import Dataset, standardize, write_csv
from rejectlab.errors import DataError, RejectLabError, TrainingDivergenceError, UnsupportedMeasureError
from rejectlab.experiment import (
    BUILTIN_GAUSS,
    BUILTIN_PROXY,
    ExperimentSpec,
    load_source,
    run_bayes_baseline,
    run_experiment,
)
from rejectlab.models import TrainConfig, Variant, load_model, save_model, train
from rejectlab.plotting import render_curves
from rejectlab.reject import read_scores_csv, score_dataset, write_scores_csv

log = logging.getLogger("rejectlab")


class UsageError(Exception):
    pass


# name -> (type, default); every entry is both a flag and a config key
SETTINGS = {
    "data": (str, BUILTIN_GAUSS),
    "label-col": (str, "-1"),
    "positive-class": (str, None),
    "model": (str, "rslvq"),
    "measure": (str, None),
    "folds": (int, 10),
    "repeats": (int, 10),
    "epochs": (int, 100),
    "lr": (float, 0.01),
    "lr-metric": (float, None),
    "sigma": (float, 1.0),
    "prototypes-per-class": (int, 1),
    "samples-per-class": (int, 1000),
    "noise": (float, 0.05),
    "seed": (int, None),
    "jobs": (int, 1),
    "out": (str, None),
}

SUBCOMMAND_SETTINGS = {
    "generate": ("data", "samples-per-class", "noise", "seed", "out"),
    "train": ("data", "label-col", "positive-class", "model", "epochs", "lr", "lr-metric", "sigma",
              "prototypes-per-class", "samples-per-class", "noise", "seed", "out"),
    "score": ("data", "label-col", "measure", "samples-per-class", "noise", "seed", "out"),
    "curves": ("positive-class", "out"),
    "experiment": tuple(SETTINGS),
    "baseline": ("data", "samples-per-class", "noise", "folds", "repeats", "seed", "jobs", "out"),
    "plot": ("out",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rejectlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "write a synthetic dataset to CSV",
        "train": "train a prototype model and save it as JSON",
        "score": "score a dataset with a saved model",
        "curves": "compute reject curves from a scores CSV",
        "experiment": "run repeated cross-validation and write curves, manifest and plot",
        "baseline": "run the Bayes-optimal baseline on generated Gaussian data",
        "plot": "render curve CSVs to SVG",
    }
    for name, keys in SUBCOMMAND_SETTINGS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="INI-style settings file")
        p.add_argument("-v", "--verbose", action="count", default=0)
        for key in keys:
            kind, _ = SETTINGS[key]
            extra = {}
            if key == "model":
                extra["choices"] = [v.value for v in Variant]
            elif key == "measure":
                extra["choices"] = ["relsim", "conf", "bayes"]
            p.add_argument(f"--{key}", type=kind, default=None, **extra)
        if name == "score":
            p.add_argument("--model-file", required=True, help="model JSON written by `train`")
        if name == "curves":
            p.add_argument("--scores", required=True, help="scores CSV written by `score`")
        if name == "experiment":
            p.add_argument("--manifest", help="re-run the experiment recorded in this manifest.json")
        if name == "plot":
            p.add_argument("curves", nargs="+", help="curve CSV files (<metric>_<series>.csv)")
    return parser


def _settings(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise UsageError(f"cannot parse config {path}: {exc}") from None
        for section in [parser.defaults(), *(parser[s] for s in parser.sections())]:
            for key, value in section.items():
                key = key.replace("_", "-")
                if key not in SETTINGS:
                    raise UsageError(f"unknown config key {key!r} in {path}")
                cfg[key] = value
    out = {}
    for key, (kind, default) in SETTINGS.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            try:
                out[key] = kind(cfg[key])
            except ValueError:
                raise UsageError(f"config key {key!r}: cannot read {cfg[key]!r} as {kind.__name__}") from None
        else:
            out[key] = default
    if out["seed"] is None:
        env = os.environ.get("REJECTLAB_SEED")
        try:
            out["seed"] = int(env) if env else 0
        except ValueError:
            raise UsageError(f"REJECTLAB_SEED must be an integer, got {env!r}") from None
    return out


def _train_config(s) -> TrainConfig:
    return TrainConfig(
        prototypes_per_class=s["prototypes-per-class"],
        epochs=s["epochs"],
        learning_rate=s["lr"],
        learning_rate_metric=s["lr-metric"],
        sigma=s["sigma"],
        seed=s["seed"],
    )


def _spec(s) -> ExperimentSpec:
    return ExperimentSpec(
        data=s["data"],
        label_col=s["label-col"],
        positive_class=s["positive-class"],
        samples_per_class=s["samples-per-class"],
        noise=s["noise"],
        model=s["model"],
        measure=s["measure"],
        train=_train_config(s),
        folds=s["folds"],
        repeats=s["repeats"],
        seed=s["seed"],
    )


def _require_out(s, what: str) -> Path:
    if not s["out"]:
        raise UsageError(f"--out is required ({what})")
    return Path(s["out"])


def cmd_generate(args, s) -> int:
    out = _require_out(s, "output CSV path")
    if s["data"] not in (BUILTIN_GAUSS, BUILTIN_PROXY):
        raise UsageError(f"generate supports --data {BUILTIN_GAUSS} or {BUILTIN_PROXY}")
    d = load_source(_spec({**s, "model": "rslvq", "measure": None}))
    write_csv(d, out)
    log.info("wrote %d samples to %s", len(d), out)
    return 0


def cmd_train(args, s) -> int:
    out = _require_out(s, "model JSON path")
    spec = _spec({**s, "measure": None})
    d = load_source(spec)
    dz, rec = standardize(d)
    model = replace(train(dz, _train_config(s), spec.model), standardizer=rec)
    save_model(model, out)
    log.info("trained %s on %d samples -> %s", spec.model, len(d), out)
    return 0


def _align_labels(d: Dataset, class_names: tuple) -> Dataset:
    lookup = {name: k + 1 for k, name in enumerate(class_names)}
    try:
        y = np.array([lookup[d.class_names[c - 1]] for c in d.y])
    except KeyError as exc:
        raise DataError(f"label {exc.args[0]!r} is unknown to the model (classes {list(class_names)})") from None
    return Dataset(d.X, y, class_names, None, d.feature_names)


def cmd_score(args, s) -> int:
    out = _require_out(s, "scores CSV path")
    if not Path(args.model_file).is_file():
        raise UsageError(f"model file not found: {args.model_file}")
    model = load_model(args.model_file)
    d = load_source(_spec({**s, "model": "rslvq", "measure": None}))
    d = _align_labels(d, model.class_names)
    if model.standardizer is not None:
        d = d.with_features(model.standardizer.transform(d.X))
    write_scores_csv(score_dataset(model, d, s["measure"]), out)
    return 0


def cmd_curves(args, s) -> int:
    out = _require_out(s, "output directory")
    scores = read_scores_csv(args.scores)
    if s["positive-class"] is not None:
        positive = int(s["positive-class"])
    else:
        labels, counts = np.unique(scores.true, return_counts=True)
        positive = int(labels[np.argmin(counts)])
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scores).stem
    for m in METRICS:
        write_curve_csv(curve(scores, m, None if m == "accuracy" else positive), out / f"{m}_{stem}.csv")
    return 0


def cmd_experiment(args, s) -> int:
    out = _require_out(s, "output directory")
    spec = ExperimentSpec.from_manifest(args.manifest) if args.manifest else _spec(s)
    result = run_experiment(spec, jobs=s["jobs"])
    result.write(out)
    log.info("wrote %s", out)
    return 0


def cmd_baseline(args, s) -> int:
    out = _require_out(s, "output directory")
    result = run_bayes_baseline(_spec({**s, "model": "rslvq", "measure": None}), jobs=s["jobs"])
    result.write(out)
    return 0


def cmd_plot(args, s) -> int:
    out = _require_out(s, "output SVG path")
    panels = {}
    for path in args.curves:
        c = read_curve_csv(path)
        stem = Path(path).stem
        label = stem.split("_", 1)[1] if "_" in stem and stem.split("_", 1)[0] == c.metric else stem
        panels.setdefault(c.metric, []).append((label, c))
    out.write_text(render_curves(panels), encoding="utf-8")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "score": cmd_score,
    "curves": cmd_curves,
    "experiment": cmd_experiment,
    "baseline": cmd_baseline,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        s = _settings(args)
        return COMMANDS[args.command](args, s)
    except (UsageError, DataError, UnsupportedMeasureError) as exc:
        print(f"rejectlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDivergenceError, RejectLabError, OSError) as exc:
        print(f"rejectlab {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"rejectlab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
