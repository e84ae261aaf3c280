"""Average precision per generator family and the mAP aggregate."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .detector import LinearDetector, decision_batch
from .image_core import ImageBuffer, ensure_parent
from .rng import RandomStream

__all__ = ["FamilyResult", "EvalReport", "average_precision", "evaluate"]

DEFAULT_EVAL_SEED = 0


def _ranking(scores: np.ndarray, seed: int) -> np.ndarray:
    # seeded shuffle, then stable descending sort: tied scores keep shuffled order
    perm = RandomStream(seed).permutation(scores.shape[0])
    order = np.argsort(-scores[perm], kind="stable")
    return perm[order]


def average_precision(scores, labels, seed: int = DEFAULT_EVAL_SEED) -> float:
    """Non-interpolated AP with label 1 as the positive class.

    ``AP = sum_k P(k) rel(k) / n_pos`` over the descending ranking. Ties are
    resolved by a permutation seeded with ``seed``, so the value is
    reproducible even for constant scores.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(f"scores and labels must be 1D of equal length, got {scores.shape} and {labels.shape}")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be binary 0/1")
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("average precision needs at least one positive label")
    rel = labels[_ranking(scores, seed)].astype(np.float64)
    hits = np.cumsum(rel)
    precision = hits / np.arange(1, rel.shape[0] + 1)
    return float((precision * rel).sum() / n_pos)


@dataclass(frozen=True)
class FamilyResult:
    family: str
    ap: float
    n_real: int
    n_fake: int


@dataclass(frozen=True)
class EvalReport:
    per_family: tuple[FamilyResult, ...]
    map: float

    @classmethod
    def from_results(cls, results: Sequence[FamilyResult]) -> "EvalReport":
        ordered = tuple(sorted(results, key=lambda r: r.family))
        if not ordered:
            raise ValueError("report needs at least one family")
        return cls(ordered, float(np.mean([r.ap for r in ordered])))

    def ap(self, family: str) -> float:
        for r in self.per_family:
            if r.family == family:
                return r.ap
        raise KeyError(family)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "ap", "n_real", "n_fake"])
        for r in self.per_family:
            w.writerow([r.family, repr(r.ap), r.n_real, r.n_fake])
        w.writerow(["mAP", repr(self.map),
                    sum(r.n_real for r in self.per_family),
                    sum(r.n_fake for r in self.per_family)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        ensure_parent(path)
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def evaluate(
    detector: LinearDetector,
    families: Mapping[str, Sequence[tuple[ImageBuffer, int]]],
    seed: int = DEFAULT_EVAL_SEED,
) -> EvalReport:
    """Score each family's images (fake = 1) and report AP per family plus mAP.

    Images are scored without augmentation or masking. Ranking uses the
    pre-sigmoid score, which orders images exactly as ``predict`` does but
    does not collapse saturated scores into ties.
    """
    cache: dict[int, float] = {}
    results = []
    for name in sorted(families):
        samples = families[name]
        labels = np.array([int(lbl) for _, lbl in samples])
        n_fake = int(labels.sum())
        n_real = int(labels.shape[0] - n_fake)
        if n_fake < 1 or n_real < 1:
            raise ValueError(f"family {name!r} needs at least one real and one fake image")
        todo = [img for img, _ in samples if id(img) not in cache]
        if todo:
            for img, s in zip(todo, decision_batch(detector, todo).tolist()):
                cache[id(img)] = s
        scores = np.array([cache[id(img)] for img, _ in samples])
        results.append(FamilyResult(name, average_precision(scores, labels, seed), n_real, n_fake))
    return EvalReport.from_results(results)
