import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_ap
from freqmask.detector import LinearDetector
from freqmask.evaluation import EvalReport, FamilyResult, average_precision, evaluate
from freqmask.image_core import ImageBuffer
from freqmask.rng import RandomStream


def test_perfect_ranking():
    assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_hand_example():
    # ranking 1, 0, 1: P@1 = 1, P@3 = 2/3 -> AP = 5/6
    assert average_precision([0.9, 0.5, 0.1], [1, 0, 1]) == pytest.approx(5 / 6, abs=1e-15)


def test_hand_example_four_items():
    assert average_precision([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0]) == pytest.approx(5 / 6, abs=1e-12)


def test_all_positive_is_one():
    assert average_precision([0.1, 0.5, 0.3], [1, 1, 1]) == 1.0


def test_worst_ranking():
    # positive last of n: AP = 1 / n
    assert average_precision([0.9, 0.8, 0.7, 0.1], [0, 0, 0, 1]) == pytest.approx(0.25)


def test_validation():
    with pytest.raises(ValueError):
        average_precision([0.1, 0.2], [0, 0])
    with pytest.raises(ValueError):
        average_precision([0.1, 0.2], [0, 2])
    with pytest.raises(ValueError):
        average_precision([0.1, 0.2, 0.3], [0, 1])


def test_against_brute_force_random_cases():
    rng = np.random.default_rng(0)
    for case in range(1000):
        n = int(rng.integers(1, 30))
        labels = (rng.random(n) < rng.random()).astype(int)
        if labels.sum() == 0:
            labels[rng.integers(n)] = 1
        # coarse scores so ties are common
        scores = rng.integers(0, 1 + int(rng.integers(1, 8)), size=n) / 4.0
        seed = int(rng.integers(0, 2 ** 31))
        tie_order = RandomStream(seed).permutation(n).tolist()
        got = average_precision(scores, labels, seed=seed)
        want = brute_force_ap(scores.tolist(), labels.tolist(), tie_order)
        assert abs(got - want) <= 1e-12, case


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.integers(0, 1)), min_size=1, max_size=40))
def test_bounds_and_monotone_invariance(pairs):
    scores = np.array([s for s, _ in pairs])
    labels = np.array([lbl for _, lbl in pairs])
    if labels.sum() == 0:
        labels[0] = 1
    ap = average_precision(scores, labels, seed=3)
    assert 0.0 < ap <= 1.0
    # exact order-preserving rescale keeps ranking and ties, so AP is unchanged
    assert average_precision(scores * 8.0, labels, seed=3) == ap


def test_ties_are_seeded_not_positional():
    scores = np.zeros(40)
    labels = np.r_[np.ones(20, int), np.zeros(20, int)]
    a = average_precision(scores, labels, seed=1)
    assert a == average_precision(scores, labels, seed=1)
    values = {average_precision(scores, labels, seed=s) for s in range(10)}
    assert len(values) > 1
    # positives first in input order would give 1.0 under positional tie-breaking
    assert a < 1.0


def _families(rng):
    real = [(ImageBuffer(rng.random((16, 16))), 0) for _ in range(6)]
    fam = {}
    for name in ("b", "a"):
        fam[name] = real + [(ImageBuffer(rng.random((16, 16))), 1) for _ in range(4)]
    return fam


def test_evaluate_zero_weights_is_tie_baseline():
    rng = np.random.default_rng(1)
    fams = _families(rng)
    det = LinearDetector(weights=np.zeros(33), bias=0.0)
    rep = evaluate(det, fams, seed=5)
    for name, samples in fams.items():
        labels = np.array([lbl for _, lbl in samples])
        assert rep.ap(name) == average_precision(np.zeros(len(labels)), labels, seed=5)
    assert [r.family for r in rep.per_family] == ["a", "b"]
    assert rep.map == pytest.approx(np.mean([r.ap for r in rep.per_family]), abs=0)


def test_evaluate_single_family_map_equals_ap():
    rng = np.random.default_rng(2)
    fams = {"only": _families(rng)["a"]}
    det = LinearDetector(weights=rng.normal(size=33), bias=0.1)
    rep = evaluate(det, fams)
    assert rep.map == rep.ap("only")
    assert rep.per_family[0].n_real == 6 and rep.per_family[0].n_fake == 4


def test_evaluate_needs_both_classes():
    rng = np.random.default_rng(3)
    det = LinearDetector(weights=np.zeros(33))
    with pytest.raises(ValueError):
        evaluate(det, {"x": [(ImageBuffer(rng.random((8, 8))), 1)] * 2})


def test_report_csv():
    rep = EvalReport.from_results([FamilyResult("z", 0.5, 3, 2), FamilyResult("a", 0.25, 3, 4)])
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["family", "ap", "n_real", "n_fake"]
    assert [r[0] for r in rows[1:]] == ["a", "z", "mAP"]
    assert float(rows[-1][1]) == 0.375
    assert rows[-1][2:] == ["6", "6"]
    with pytest.raises(KeyError):
        rep.ap("missing")
