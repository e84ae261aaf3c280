import math
from fractions import Fraction

import numpy as np
import pytest

from freqmask.image_core import ImageBuffer


def naive_dft2(x):
    """Direct O((HW)^2) evaluation of sum_xy I(x, y) exp(-2 pi i (ux/H + vy/W))."""
    x = np.asarray(x, dtype=float)
    h, w = x.shape[:2]
    out = np.zeros(x.shape, dtype=complex)
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    for u in range(h):
        for v in range(w):
            phase = np.exp(-2j * math.pi * (u * rows / h + v * cols / w))
            if x.ndim == 3:
                out[u, v] = (x * phase[:, :, None]).sum(axis=(0, 1))
            else:
                out[u, v] = (x * phase).sum()
    return out


def brute_force_ap(scores, labels, tie_order):
    """AP straight from the definition, O(n^2).

    Item a ranks above b when its score is higher, or scores tie and a comes
    first in ``tie_order`` (a list of positions).
    """
    n = len(scores)
    pos = {item: k for k, item in enumerate(tie_order)}

    def above(a, b):
        return scores[a] > scores[b] or (scores[a] == scores[b] and pos[a] < pos[b])

    total = 0.0
    n_pos = sum(labels)
    for i in range(n):
        if not labels[i]:
            continue
        rank = 1 + sum(1 for j in range(n) if j != i and above(j, i))
        hits = 1 + sum(1 for j in range(n) if j != i and labels[j] and above(j, i))
        total += hits / rank
    return total / n_pos


def exact_ceil(r, total):
    """ceil(r * total) with r read as the exact decimal it was written as."""
    return math.ceil(Fraction(str(r)) * total)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_image(rng):
    def make(h=16, w=16, c=1):
        return ImageBuffer(rng.random((h, w, c)))
    return make
