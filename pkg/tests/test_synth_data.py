"""Spectral measurements of the synthetic families.

These are the oracles behind the artifact-strength constants: each test
states what the planted artifact should do to the mean power spectrum
and checks it on a batch of generated images.
"""
import numpy as np
import pytest

from freqmask.masking import band_mask
from freqmask.rng import RandomStream
from freqmask.synth_data import (DEFAULT_STRENGTHS, FAMILIES, FamilyConfig, build_corpus, generate,
                                 load_corpus, notch_mask, save_corpus)


def mean_power(family, strength=None, n=100, size=64, slope=2.0, seed=100):
    cfg = FamilyConfig(family, size, strength, slope)
    acc = np.zeros((size, size))
    for i in range(n):
        img = generate(cfg, RandomStream(seed, (i,))).grayscale()
        acc += np.abs(np.fft.fft2(img)) ** 2
    return acc / n


@pytest.fixture(scope="module")
def real_power():
    return mean_power("real")


def test_images_in_unit_range_and_full_span():
    for fam in FAMILIES:
        img = generate(FamilyConfig(fam, 32), RandomStream(1))
        assert img.shape == (32, 32, 1)
        assert img.data.min() == 0.0 and img.data.max() == 1.0


def test_flat_spectrum_at_zero_slope():
    p = mean_power("real", slope=0.0)
    radial = p[np.arange(1, 32), 0]
    assert radial.max() / radial.min() < 3.0


def test_power_law_slope(real_power):
    k = np.arange(1, 32)
    slope = np.polyfit(np.log(k), np.log(real_power[k, 0]), 1)[0]
    assert slope < -1.0


def test_grid_strength_zero_is_real():
    cfg_r = FamilyConfig("real", 32)
    cfg_g = FamilyConfig("fake_grid", 32, 0.0)
    for i in range(5):
        a = generate(cfg_r, RandomStream(3, (i,)))
        b = generate(cfg_g, RandomStream(3, (i,)))
        assert np.allclose(a.data, b.data, atol=1e-12)


@pytest.mark.parametrize("strength", [2.0, 5.0])
def test_grid_comb_contrast(strength):
    # planted amplitude s * E|F| adds to random-phase noise: power ratio ~ 1 + s^2
    p = mean_power("fake_grid", strength)
    expected = 1 + strength ** 2
    for u, v, nu, nv in ((8, 0, 8, 1), (0, 8, 1, 8)):
        ratio = p[u, v] / p[nu, nv]
        assert 0.7 * expected < ratio < 1.3 * expected


def test_default_grid_contrast_is_visible():
    p = mean_power("fake_grid")
    assert p[8, 0] / p[8, 1] > 3.0


def test_highcut_attenuation(real_power):
    s = DEFAULT_STRENGTHS["fake_highcut"]
    p = mean_power("fake_highcut")
    high, mid = band_mask("high", 64, 64), band_mask("mid", 64, 64)
    # high/mid power ratio relative to real drops by (1 + s)^2
    rel = (p[high].sum() / p[mid].sum()) / (real_power[high].sum() / real_power[mid].sum())
    assert rel == pytest.approx(1 / (1 + s) ** 2, rel=0.25)


def test_midnotch_removes_annulus(real_power):
    m = notch_mask(64, DEFAULT_STRENGTHS["fake_midnotch"])
    assert m.sum() > 0
    assert (m & ~(band_mask("mid", 64, 64) | np.roll(band_mask("mid", 64, 64)[::-1, ::-1], 1, (0, 1)))).sum() == 0
    p = mean_power("fake_midnotch")
    assert p[m].sum() < 0.01 * real_power[m].sum()


def test_notch_mask_is_hermitian():
    m = notch_mask(64, 3.0)
    partner = np.roll(m[::-1, ::-1], 1, axis=(0, 1))
    assert np.array_equal(m, partner)
    assert notch_mask(64, 0.0).sum() == 0


def test_family_config_validation():
    with pytest.raises(ValueError):
        FamilyConfig("fake_blur")
    with pytest.raises(ValueError):
        FamilyConfig("real", size=8)
    with pytest.raises(ValueError):
        FamilyConfig("fake_grid", artifact_strength=-1)
    assert FamilyConfig("fake_grid").artifact_strength == DEFAULT_STRENGTHS["fake_grid"]


@pytest.fixture(scope="module")
def corpus():
    return build_corpus(5, 10, size=32)


def test_corpus_counts(corpus):
    assert len(corpus.train) == 20
    assert {s.family for s in corpus.train} == {"real", "fake_grid"}
    assert len(corpus.test) == 40
    fams = corpus.test_families()
    assert sorted(fams) == ["fake_grid", "fake_highcut", "fake_midnotch"]
    for samples in fams.values():
        labels = [lbl for _, lbl in samples]
        assert labels.count(0) == 10 and labels.count(1) == 10


def test_corpus_splits_disjoint(corpus):
    assert not {s.key for s in corpus.train} & {s.key for s in corpus.test}
    train_bytes = {s.image.tobytes() for s in corpus.train}
    assert not train_bytes & {s.image.tobytes() for s in corpus.test}


def test_corpus_deterministic(corpus):
    again = build_corpus(5, 10, size=32)
    assert [s.image.tobytes() for s in again.train + again.test] == \
        [s.image.tobytes() for s in corpus.train + corpus.test]
    other = build_corpus(6, 10, size=32)
    assert other.train[0].image.tobytes() != corpus.train[0].image.tobytes()


def test_corpus_validation():
    with pytest.raises(ValueError):
        build_corpus(0, 5)
    with pytest.raises(ValueError):
        build_corpus(0, 10, train_family="real")


def test_corpus_save_load(corpus, tmp_path):
    save_corpus(corpus, tmp_path)
    assert (tmp_path / "train" / "real" / "00000.png").is_file()
    back = load_corpus(tmp_path)
    assert len(back.train) == len(corpus.train) and len(back.test) == len(corpus.test)
    for a, b in zip(corpus.train + corpus.test, back.train + back.test):
        assert (a.family, a.label, a.key) == (b.family, b.label, b.key)
        # PNG stores 8-bit values
        assert np.abs(a.image.data - b.image.data).max() <= 0.5 / 255 + 1e-12
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "missing")
