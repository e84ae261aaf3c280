import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import naive_dft2
from freqmask import spectrum as sp
from freqmask.image_core import ImageBuffer
from freqmask.spectrum import Spectrum, fft, fft2, fft2_array, ifft2, ifft2_array, power_spectrum


def test_constant_image_dc_only():
    c = 0.3
    F = fft2(ImageBuffer(np.full((4, 4), c))).coeffs[:, :, 0].copy()
    assert abs(F[0, 0] - 16 * c) < 1e-12
    F[0, 0] = 0
    assert np.abs(F).max() < 1e-12


def test_impulse_flat_spectrum():
    x = np.zeros((1, 8))
    x[0, 0] = 1.0
    F = fft2(ImageBuffer(x)).coeffs
    np.testing.assert_allclose(F, 1.0, atol=1e-12)


def test_random_7x5_matches_naive():
    x = np.random.default_rng(0).random((7, 5, 3))
    F = fft2(ImageBuffer(x)).coeffs
    ref = naive_dft2(x)
    assert np.abs(F - ref).max() / np.abs(ref).max() < 1e-9


def test_dc_is_channel_sum():
    x = np.random.default_rng(1).random((6, 9, 3))
    F = fft2(ImageBuffer(x)).coeffs
    np.testing.assert_allclose(F[0, 0].real, x.sum(axis=(0, 1)), rtol=1e-12)


def test_ifft_dc_constant():
    h, w = 6, 5
    c = np.zeros((h, w), dtype=complex)
    c[0, 0] = h * w * 0.5
    np.testing.assert_allclose(ifft2(Spectrum(c)).data, 0.5, atol=1e-12)


def test_ifft_zero_spectrum():
    assert ifft2(Spectrum(np.zeros((5, 3)))).data.max() == 0.0


@pytest.mark.parametrize("shape", [(16, 16, 1), (13, 31, 3), (64, 48, 1), (17, 101, 1)])
def test_roundtrip(shape):
    x = np.random.default_rng(2).random(shape)
    assert np.abs(ifft2_array(fft2_array(x)).real - x).max() < 1e-6
    assert np.abs(ifft2(fft2(ImageBuffer(x))).data - x).max() < 1e-6


def test_power_constant():
    P = power_spectrum(fft2(ImageBuffer(np.full((4, 4), 0.25))))
    assert abs(P[0, 0, 0] - 16.0) < 1e-12
    P[0, 0, 0] = 0
    assert P.max() < 1e-20


def test_power_zero():
    assert power_spectrum(fft2(ImageBuffer(np.zeros((5, 7))))).max() == 0.0


@settings(max_examples=30, deadline=None)
@given(h=st.integers(1, 40), w=st.integers(1, 40), seed=st.integers(0, 10 ** 6))
def test_parseval(h, w, seed):
    x = np.random.default_rng(seed).random((h, w, 1))
    P = power_spectrum(fft2(ImageBuffer(x)))
    energy = (x ** 2).sum()
    assert abs(P.sum() / (h * w) - energy) <= 1e-6 * energy


def test_parseval_256():
    x = np.random.default_rng(3).random((256, 256, 1))
    P = power_spectrum(fft2(ImageBuffer(x)))
    energy = (x ** 2).sum()
    assert abs(P.sum() / x.size - energy) <= 1e-6 * energy


@settings(max_examples=30, deadline=None)
@given(h=st.integers(1, 24), w=st.integers(1, 24), seed=st.integers(0, 10 ** 6))
def test_linearity(h, w, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=2)
    x, y = rng.random((h, w)), rng.random((h, w))
    lhs = fft2_array(a * x + b * y)
    rhs = a * fft2_array(x) + b * fft2_array(y)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(np.abs(rhs).max(), 1e-300)


def test_hermitian_symmetry():
    x = np.random.default_rng(4).random((9, 14, 3))
    F = fft2(ImageBuffer(x)).coeffs
    h, w = F.shape[:2]
    partner = F[(-np.arange(h)) % h][:, (-np.arange(w)) % w]
    assert np.abs(F - np.conj(partner)).max() <= 1e-9 * np.abs(F).max()


def test_naive_agreement_all_small_sizes():
    rng = np.random.default_rng(5)
    for h in range(1, 17):
        for w in range(1, 17):
            x = rng.random((h, w))
            ref = naive_dft2(x)
            got = fft2_array(x)
            assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max(), (h, w)


@pytest.mark.parametrize("n", [17, 37, 97, 101, 2 * 101, 53 * 59, 224, 1009])
def test_1d_large_and_prime_lengths(n):
    # beyond the dense-matrix cutoff: composite splits and Bluestein
    x = np.random.default_rng(n).normal(size=n) + 1j * np.random.default_rng(n + 1).normal(size=n)
    k = np.arange(n)
    ref = np.exp(-2j * np.pi * (np.outer(k, k) % n) / n) @ x
    assert np.abs(fft(x) - ref).max() <= 1e-9 * np.abs(ref).max()


@pytest.mark.parametrize("n", [2, 3, 5, 7, 11, 13])
def test_bluestein_direct(n):
    x = np.random.default_rng(n).normal(size=(2, n)).astype(complex)
    ref = x @ sp._dft_matrix(n, -1)
    assert np.abs(sp._bluestein(x, -1) - ref).max() < 1e-12
    refi = x @ sp._dft_matrix(n, 1)
    assert np.abs(sp._bluestein(x, 1) - refi).max() < 1e-12


def test_plans_are_immutable():
    m = sp._dft_matrix(8, -1)
    with pytest.raises(ValueError):
        m[0, 0] = 0


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        Spectrum(np.array([[np.inf]]))
