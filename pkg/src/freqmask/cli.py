"""Command-line entry point: ``freqmask <subcommand> [flags]``.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
Flags may also be supplied through ``--config FILE`` (a JSON object keyed by
flag name with dashes replaced by underscores); explicit flags win. The
master seed falls back to the ``FREQMASK_SEED`` environment variable.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment as exp
from .detector import LinearDetector, TrainConfig, train
from .evaluation import evaluate
from .image_core import AugmentSettings, ImageBuffer, ensure_parent, load_image, save_image
from .masking import BANDS, KINDS, MaskSpec, apply_mask
from .rng import RandomStream
from .spectrum import fft2, power_spectrum
from .synth_data import FAKE_FAMILIES, build_corpus, load_corpus, save_corpus

SEED_ENV = "FREQMASK_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {v}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--config", metavar="FILE", help="JSON file of flag values; explicit flags win")


def _add_mask_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=KINDS, help="mask kind")
    p.add_argument("--ratio", type=_unit_interval, help="masking ratio r in [0, 1] (default 0.15)")
    p.add_argument("--patch-size", type=_positive_int, help="patch side p for --kind patch (default 8)")
    p.add_argument("--band", choices=BANDS, help="frequency band for --kind frequency (default all)")
    p.add_argument("--symmetric", action="store_true", help="also zero each bin's conjugate partner")
    p.add_argument("--shifted", action="store_true", help="read band bounds on the DC-centred layout")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=_positive_int, help="training epochs (default 10)")
    p.add_argument("--lr", type=_positive_float, help="SGD learning rate (default 0.05)")
    p.add_argument("--l2", type=float, help="L2 penalty (default 0.001)")
    p.add_argument("--blur-prob", type=_unit_interval, help="Gaussian blur probability (default 0.1)")
    p.add_argument("--jpeg-prob", type=_unit_interval, help="JPEG compression probability (default 0.1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freqmask", allow_abbrev=False,
                     description="Masking transforms, desk-scale detector and experiment sweeps.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text,
                           argument_default=argparse.SUPPRESS, allow_abbrev=False)
        _add_common(p)
        return p

    p = add("mask", "apply a mask to an image file")
    p.add_argument("--in", dest="input", metavar="PATH", help="input PNG/JPEG")
    p.add_argument("--out", metavar="PATH", help="output image (.png, .jpg or .jpeg)")
    _add_mask_flags(p)

    p = add("spectrum", "write a log-magnitude heat map (PNG) and raw power (CSV)")
    p.add_argument("--in", dest="input", metavar="PATH", help="input PNG/JPEG")
    p.add_argument("--out", metavar="PATH", help="heat-map PNG path")
    p.add_argument("--csv", metavar="PATH", help="power CSV path (default: --out with .csv)")
    p.add_argument("--shifted", action="store_true", help="centre DC in the heat map")

    p = add("corpus", "materialize the synthetic corpus as PNG files plus manifest.json")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--n", type=_positive_int, help="images per class and family (default 100)")
    p.add_argument("--size", type=_positive_int, help="image side (default 64)")
    p.add_argument("--train-family", choices=FAKE_FAMILIES, help="fake family in the train split")

    p = add("train", "fit a detector on a corpus directory and write it as JSON")
    p.add_argument("--data", metavar="DIR", help="corpus directory (from `corpus`)")
    p.add_argument("--out", metavar="PATH", help="detector JSON path")
    _add_mask_flags(p)
    _add_train_flags(p)

    p = add("eval", "score a corpus test split and write per-family AP as CSV")
    p.add_argument("--data", metavar="DIR", help="corpus directory (from `corpus`)")
    p.add_argument("--detector", metavar="PATH", help="detector JSON from `train`")
    p.add_argument("--out", metavar="PATH", help="report CSV path")

    p = add("experiment", "run a desk-scale sweep: types, ratios or bands")
    p.add_argument("study", choices=("types", "ratios", "bands"))
    p.add_argument("--out", metavar="DIR", help="report directory")
    p.add_argument("--seeds", type=_positive_int, help="number of seeds (default 5)")
    p.add_argument("--n", type=_positive_int, help="images per class and family (default 100)")
    p.add_argument("--size", type=_positive_int, help="image side (default 64)")
    p.add_argument("--ratio", type=_unit_interval, help="masking ratio for types/bands (default 0.15)")
    p.add_argument("--patch-size", type=_positive_int, help="patch side for types (default 8)")
    _add_train_flags(p)
    return parser


DEFAULTS = {
    "kind": None, "ratio": 0.15, "patch_size": 8, "band": "all", "symmetric": False, "shifted": False,
    "epochs": 10, "lr": 0.05, "l2": 1e-3, "blur_prob": 0.1, "jpeg_prob": 0.1,
    "n": 100, "size": 64, "seeds": 5, "train_family": "fake_grid", "csv": None,
}
MASK_ONLY = {"patch_size": "patch", "band": "frequency", "symmetric": "frequency", "shifted": "frequency"}


def _resolve(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    given = {k: v for k, v in vars(ns).items() if k != "config"}
    from_file = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}")
        if not isinstance(from_file, dict):
            raise UsageError("config file must hold a JSON object")
        sub = _subparser(parser, ns.command)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(from_file) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    opts = {**DEFAULTS, **from_file, **given}
    if opts.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        try:
            opts["seed"] = _seed(env) if env is not None else 0
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}")
    opts["_given"] = set(given) | set(from_file)
    return opts


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _require(opts: dict, *names: str) -> None:
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _mask_spec(opts: dict, default_kind) -> MaskSpec | None:
    kind = opts.get("kind") or default_kind
    for key, needs in MASK_ONLY.items():
        if key in opts["_given"] and opts[key] not in (False, None) and kind != needs:
            raise UsageError(f"--{key.replace('_', '-')} only applies to --kind {needs}"
                             + (f", not {kind}" if kind else ""))
    if kind is None:
        if "ratio" in opts["_given"]:
            raise UsageError("--ratio needs --kind")
        return None
    try:
        return MaskSpec(kind, float(opts["ratio"]), patch_size=int(opts["patch_size"]), band=opts["band"],
                        symmetric=bool(opts["symmetric"]), shifted=bool(opts["shifted"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _train_config(opts: dict, spec) -> TrainConfig:
    try:
        return TrainConfig(
            mask_spec=spec, epochs=int(opts["epochs"]), learning_rate=float(opts["lr"]),
            l2_penalty=float(opts["l2"]), seed=int(opts["seed"]),
            augment=AugmentSettings(blur_prob=float(opts["blur_prob"]), jpeg_prob=float(opts["jpeg_prob"])))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _image_format(path: str) -> str:
    ext = Path(path).suffix.lower()
    if ext == ".png":
        return "png"
    if ext in (".jpg", ".jpeg"):
        return "jpeg"
    raise UsageError(f"output must end in .png, .jpg or .jpeg: {path}")


def cmd_mask(opts: dict) -> None:
    _require(opts, "input", "out")
    spec = _mask_spec(opts, "frequency")
    fmt = _image_format(opts["out"])
    image = load_image(opts["input"])
    out = apply_mask(image, spec, RandomStream(opts["seed"]))
    ensure_parent(opts["out"])
    save_image(out, opts["out"], fmt)


def cmd_spectrum(opts: dict) -> None:
    _require(opts, "input", "out")
    _image_format(opts["out"])
    image = load_image(opts["input"])
    power = power_spectrum(fft2(image))
    heat = np.log1p(np.sqrt(power.mean(axis=2)))
    if opts["shifted"]:
        heat = np.roll(heat, (heat.shape[0] // 2, heat.shape[1] // 2), axis=(0, 1))
    peak = heat.max()
    ensure_parent(opts["out"])
    save_image(ImageBuffer(heat / peak if peak > 0 else heat), opts["out"], "png")
    csv_path = opts["csv"] or str(Path(opts["out"]).with_suffix(".csv"))
    ensure_parent(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "channel", "power"])
        h, wd, c = power.shape
        for u in range(h):
            for v in range(wd):
                for ch in range(c):
                    w.writerow([u, v, ch, repr(float(power[u, v, ch]))])


def cmd_corpus(opts: dict) -> None:
    _require(opts, "out")
    if opts["size"] < 16:
        raise UsageError("--size must be >= 16")
    if opts["n"] < 10:
        raise UsageError("--n must be >= 10")
    corpus = build_corpus(opts["seed"], opts["n"], size=opts["size"], train_family=opts["train_family"])
    save_corpus(corpus, opts["out"])


def cmd_train(opts: dict) -> None:
    _require(opts, "data", "out")
    cfg = _train_config(opts, _mask_spec(opts, None))
    corpus = load_corpus(opts["data"])
    detector = train(corpus.train_pairs(), cfg)
    detector.save(opts["out"])


def cmd_eval(opts: dict) -> None:
    _require(opts, "data", "detector", "out")
    corpus = load_corpus(opts["data"])
    detector = LinearDetector.load(opts["detector"])
    evaluate(detector, corpus.test_families(), seed=opts["seed"]).write_csv(opts["out"])


def cmd_experiment(opts: dict) -> None:
    _require(opts, "out")
    if opts["size"] < 16:
        raise UsageError("--size must be >= 16")
    if opts["n"] < 10:
        raise UsageError("--n must be >= 10")
    config = exp.SweepConfig(n_seeds=opts["seeds"], master_seed=opts["seed"],
                             n_per_class_per_family=opts["n"], size=opts["size"],
                             train=replace(_train_config(opts, None), seed=0))
    study = opts["study"]
    if study == "ratios":
        report = exp.ratio_sweep(config)
    elif study == "types":
        report = exp.compare_mask_types(config, ratio=opts["ratio"], patch_size=opts["patch_size"])
    else:
        report = exp.compare_bands(config, ratio=opts["ratio"])
    report.write(opts["out"])


COMMANDS = {
    "mask": cmd_mask,
    "spectrum": cmd_spectrum,
    "corpus": cmd_corpus,
    "train": cmd_train,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        opts = _resolve(ns, parser)
        COMMANDS[ns.command](opts)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # --help and friends
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
