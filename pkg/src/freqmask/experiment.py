"""Mask-type, masking-ratio and frequency-band sweeps on the synthetic corpus.

Each (mask spec, seed) run builds the corpus for that seed, trains a detector
with that mask spec applied at train time, evaluates it unmasked on every test
family and records per-family AP. Raw per-run rows are the source of truth;
aggregate rows (mean and sample std of mAP over seeds) are recomputed from
them.
"""
from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .detector import TrainConfig, train
from .evaluation import DEFAULT_EVAL_SEED, evaluate
from .masking import MaskSpec, mask_call_count
from .rng import derive_seed
from .synth_data import DEFAULT_SIZE, build_corpus

__all__ = [
    "BASELINE",
    "RATIO_GRID",
    "BAND_GRID",
    "REFERENCE_MAP",
    "SweepConfig",
    "RunRow",
    "AggregateRow",
    "SweepReport",
    "run_sweep",
    "ratio_sweep",
    "compare_mask_types",
    "compare_bands",
    "aggregate",
    "read_raw_csv",
]

# r = 0: the transform round-trip with no bins removed. Kept as a frequency
# spec so the masking hook runs in every training run, the baseline included.
BASELINE = MaskSpec("frequency", 0.0, band="all")
BASELINE_LABEL = "none"
DEFAULT_RATIO = 0.15
DEFAULT_PATCH = 8
RATIO_GRID = (0.0, 0.15, 0.30, 0.50, 0.70)
BAND_GRID = ("low", "mid", "high", "all")

# Reference mAP values (%) from the original ProGAN-trained CNN study. Shown
# in report headers for orientation only; desk-scale numbers are not
# comparable to them.
REFERENCE_MAP = {
    "ratios": {"0": 85.86, "0.15": 88.22, "0.3": 87.20, "0.5": 85.12, "0.7": 83.86},
    "types": {"pixel": 75.12, "patch": 86.09, "frequency": 88.22},
    "bands": {"low": 87.45, "mid": 85.35, "high": 83.38, "all": 88.22},
}


@dataclass(frozen=True)
class SweepConfig:
    specs: tuple = ()
    n_seeds: int = 5
    master_seed: int = 0
    n_per_class_per_family: int = 100
    size: int = DEFAULT_SIZE
    train_family: str = "fake_grid"
    strengths: Optional[dict] = None
    train: TrainConfig = TrainConfig()
    eval_seed: int = DEFAULT_EVAL_SEED

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be >= 1, got {self.n_seeds}")
        object.__setattr__(self, "specs", tuple(self.specs))

    def run_specs(self) -> list[MaskSpec]:
        """Baseline first, then the configured specs in order; ratio-0 specs fold into the baseline."""
        out = [BASELINE]
        for s in self.specs:
            s = BASELINE if s.ratio == 0 else s
            if s not in out:
                out.append(s)
        return out


def spec_label(spec: MaskSpec) -> str:
    return BASELINE_LABEL if spec == BASELINE else spec.label


@dataclass(frozen=True)
class RunRow:
    spec: str
    kind: str
    ratio: float
    patch_size: int
    band: str
    seed_index: int
    run_seed: int
    family: str
    ap: float
    mask_calls_train: int
    mask_calls_eval: int


RAW_FIELDS = [f for f in RunRow.__dataclass_fields__]


@dataclass(frozen=True)
class AggregateRow:
    spec: str
    kind: str
    ratio: float
    patch_size: int
    band: str
    n_seeds: int
    map_mean: float
    map_std: float
    family_ap: dict = field(default_factory=dict)


def _run_seed(master_seed: int, seed_index: int) -> int:
    return derive_seed(master_seed, seed_index)


def _run_one(spec: MaskSpec, seed_index: int, config: SweepConfig, corpus) -> list[RunRow]:
    run_seed = _run_seed(config.master_seed, seed_index)
    tcfg = replace(config.train, mask_spec=spec, seed=run_seed)
    before = mask_call_count()
    detector = train(corpus.train_pairs(), tcfg)
    after_train = mask_call_count()
    report = evaluate(detector, corpus.test_families(), seed=config.eval_seed)
    after_eval = mask_call_count()
    label = spec_label(spec)
    return [
        RunRow(label, spec.kind, spec.ratio, spec.patch_size, spec.band, seed_index, run_seed,
               r.family, r.ap, after_train - before, after_eval - after_train)
        for r in report.per_family
    ]


def aggregate(raw: Sequence[RunRow]) -> list[AggregateRow]:
    """Mean and sample std of per-run mAP for each spec, in first-seen spec order."""
    order: list[str] = []
    runs: dict[str, dict[int, list[RunRow]]] = {}
    for row in raw:
        if row.spec not in runs:
            order.append(row.spec)
            runs[row.spec] = {}
        runs[row.spec].setdefault(row.seed_index, []).append(row)
    out = []
    for label in order:
        per_seed = runs[label]
        maps = [statistics.fmean(r.ap for r in rows) for _, rows in sorted(per_seed.items())]
        fams = sorted({r.family for rows in per_seed.values() for r in rows})
        fam_ap = {f: statistics.fmean(r.ap for rows in per_seed.values() for r in rows if r.family == f)
                  for f in fams}
        first = next(iter(per_seed.values()))[0]
        out.append(AggregateRow(
            label, first.kind, first.ratio, first.patch_size, first.band, len(maps),
            statistics.fmean(maps), statistics.stdev(maps) if len(maps) > 1 else 0.0, fam_ap))
    return out


def _per_seed_map(raw: Sequence[RunRow], label: str) -> dict[int, float]:
    by_seed: dict[int, list[float]] = {}
    for r in raw:
        if r.spec == label:
            by_seed.setdefault(r.seed_index, []).append(r.ap)
    return {k: statistics.fmean(v) for k, v in sorted(by_seed.items())}


@dataclass
class SweepReport:
    name: str
    raw: list
    aggregate: list
    reference_map: dict = field(default_factory=dict)

    def map_mean(self, label: str) -> float:
        for row in self.aggregate:
            if row.spec == label:
                return row.map_mean
        raise KeyError(label)

    def per_seed_map(self, label: str) -> dict[int, float]:
        return _per_seed_map(self.raw, label)

    @property
    def labels(self) -> list[str]:
        return [r.spec for r in self.aggregate]

    def pairwise(self) -> list[tuple[str, str, float, float]]:
        """``(a, b, mean(map_a - map_b), sample std)`` over seeds for every ordered pair a after b."""
        labels = self.labels
        out = []
        for i, a in enumerate(labels):
            for b in labels[:i]:
                ma, mb = self.per_seed_map(a), self.per_seed_map(b)
                diffs = [ma[k] - mb[k] for k in ma if k in mb]
                std = statistics.stdev(diffs) if len(diffs) > 1 else 0.0
                out.append((a, b, statistics.fmean(diffs), std))
        return out

    def band_matrix(self) -> tuple[list[str], list[str], list[list[float]]]:
        """Families x band-columns of mean AP, with a trailing average row (Table-2 layout)."""
        cols = [r for r in self.aggregate if r.kind == "frequency" and r.spec != BASELINE_LABEL]
        families = sorted({f for r in cols for f in r.family_ap})
        rows = [[c.family_ap[f] for c in cols] for f in families]
        rows.append([c.map_mean for c in cols])
        return families + ["average mAP"], [c.band for c in cols], rows

    # ------------------------------------------------------------- output

    def raw_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RAW_FIELDS)
        for r in self.raw:
            w.writerow([repr(v) if isinstance(v, float) else v for v in
                        (getattr(r, f) for f in RAW_FIELDS)])
        return buf.getvalue()

    def aggregate_csv(self) -> str:
        families = sorted({f for r in self.aggregate for f in r.family_ap})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["spec", "kind", "ratio", "patch_size", "band", "n_seeds", "map_mean", "map_std"]
                   + [f"ap_{f}" for f in families])
        for r in self.aggregate:
            w.writerow([r.spec, r.kind, repr(r.ratio), r.patch_size, r.band, r.n_seeds,
                        repr(r.map_mean), repr(r.map_std)]
                       + [repr(r.family_ap[f]) for f in families])
        return buf.getvalue()

    def summary_markdown(self) -> str:
        lines = [f"# Sweep: {self.name}", ""]
        if self.reference_map:
            lines.append("Reference mAP (%) from the original large-scale study, for context only "
                         "(not expected desk-scale values):")
            lines.append("")
            for k, v in self.reference_map.items():
                lines.append(f"- {k}: {v:.2f}")
            lines.append("")
        lines += ["| spec | seeds | mAP mean | mAP std |", "|---|---|---|---|"]
        for r in self.aggregate:
            lines.append(f"| {r.spec} | {r.n_seeds} | {r.map_mean:.4f} | {r.map_std:.4f} |")
        if self.name == "types":
            lines += ["", "| A | B | mean(A - B) | std |", "|---|---|---|---|"]
            for a, b, m, s in self.pairwise():
                lines.append(f"| {a} | {b} | {m:+.4f} | {s:.4f} |")
        if self.name == "bands":
            row_names, cols, mat = self.band_matrix()
            lines += ["", "| family | " + " | ".join(cols) + " |",
                      "|---|" + "---|" * len(cols)]
            for name, vals in zip(row_names, mat):
                lines.append(f"| {name} | " + " | ".join(f"{v:.4f}" for v in vals) + " |")
        return "\n".join(lines) + "\n"

    def write(self, directory) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "raw": directory / "raw.csv",
            "aggregate": directory / "aggregate.csv",
            "summary": directory / "summary.md",
        }
        paths["raw"].write_text(self.raw_csv())
        paths["aggregate"].write_text(self.aggregate_csv())
        paths["summary"].write_text(self.summary_markdown())
        return paths


def read_raw_csv(text: str) -> list[RunRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(RunRow(
            rec["spec"], rec["kind"], float(rec["ratio"]), int(rec["patch_size"]), rec["band"],
            int(rec["seed_index"]), int(rec["run_seed"]), rec["family"], float(rec["ap"]),
            int(rec["mask_calls_train"]), int(rec["mask_calls_eval"])))
    return rows


def run_sweep(config: SweepConfig, name: str = "sweep", reference_map: Optional[dict] = None) -> SweepReport:
    """Train and evaluate every (spec, seed) pair; the corpus for seed i is shared by all specs."""
    specs = config.run_specs()
    results: dict[tuple[int, int], list[RunRow]] = {}
    for seed_index in range(config.n_seeds):
        corpus = build_corpus(_run_seed(config.master_seed, seed_index), config.n_per_class_per_family,
                              size=config.size, train_family=config.train_family,
                              strengths=config.strengths)
        for spec_index, spec in enumerate(specs):
            results[(spec_index, seed_index)] = _run_one(spec, seed_index, config, corpus)
    raw = [row for key in sorted(results) for row in results[key]]
    return SweepReport(name, raw, aggregate(raw), dict(reference_map or {}))


def ratio_sweep(config: SweepConfig, ratios: Sequence[float] = RATIO_GRID, band: str = "all") -> SweepReport:
    specs = [MaskSpec("frequency", r, band=band) for r in ratios]
    return run_sweep(replace(config, specs=tuple(specs)), "ratios", REFERENCE_MAP["ratios"])


def compare_mask_types(config: SweepConfig, ratio: float = DEFAULT_RATIO, patch_size: int = DEFAULT_PATCH) -> SweepReport:
    specs = [MaskSpec("pixel", ratio), MaskSpec("patch", ratio, patch_size=patch_size),
             MaskSpec("frequency", ratio, band="all")]
    return run_sweep(replace(config, specs=tuple(specs)), "types", REFERENCE_MAP["types"])


def compare_bands(config: SweepConfig, ratio: float = DEFAULT_RATIO) -> SweepReport:
    specs = [MaskSpec("frequency", ratio, band=b) for b in BAND_GRID]
    return run_sweep(replace(config, specs=tuple(specs)), "bands", REFERENCE_MAP["bands"])
