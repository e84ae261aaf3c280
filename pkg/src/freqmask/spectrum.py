"""2D discrete Fourier transform between images and spectra.

The transform engine is a mixed-radix Cooley-Tukey recursion that splits off
small factors (handled as dense DFT matrices) and falls back to Bluestein's
chirp-z algorithm for large prime lengths, so every size is supported.
Spectra are stored unshifted, with the DC coefficient at index ``(0, 0)``.

Convention: forward transform unnormalized, inverse scaled by ``1/(H*W)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .image_core import ImageBuffer

__all__ = [
    "Spectrum",
    "fft",
    "ifft",
    "fft2",
    "ifft2",
    "fft2_array",
    "ifft2_array",
    "power_spectrum",
]

# Lengths at or below this are transformed with a dense DFT matrix.
DIRECT_MAX = 16


@lru_cache(maxsize=None)
def _dft_matrix(n: int, sign: int) -> np.ndarray:
    k = np.arange(n)
    # reduce the exponent mod n before scaling to keep the phase exact
    mat = np.exp(sign * 2j * np.pi * (np.outer(k, k) % n) / n)
    mat.flags.writeable = False
    return mat


def _smallest_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


def _split_radix(n: int) -> int:
    """Radix for one Cooley-Tukey step: largest divisor <= DIRECT_MAX, else the smallest prime factor."""
    for d in range(min(DIRECT_MAX, n - 1), 1, -1):
        if n % d == 0:
            return d
    return _smallest_factor(n)


@lru_cache(maxsize=None)
def _twiddles(n: int, p: int, sign: int) -> np.ndarray:
    m = n // p
    tw = np.exp(sign * 2j * np.pi * (np.outer(np.arange(p), np.arange(m)) % n) / n)
    tw.flags.writeable = False
    return tw


@lru_cache(maxsize=None)
def _bluestein_plan(n: int, sign: int) -> tuple[int, np.ndarray, np.ndarray]:
    size = 1
    while size < 2 * n - 1:
        size *= 2
    t = np.arange(n)
    # t^2 mod 2n is exact in integers; the chirp is periodic with period 2n
    chirp = np.exp(sign * 1j * np.pi * ((t * t) % (2 * n)) / n)
    kernel = np.zeros(size, dtype=complex)
    kernel[:n] = np.conj(chirp)
    kernel[size - n + 1:] = np.conj(chirp[1:])[::-1]
    kernel_hat = _transform(kernel, -1)
    chirp.flags.writeable = False
    kernel_hat.flags.writeable = False
    return size, chirp, kernel_hat


def _bluestein(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    size, chirp, kernel_hat = _bluestein_plan(n, sign)
    padded = np.zeros(x.shape[:-1] + (size,), dtype=complex)
    padded[..., :n] = x * chirp
    conv = _transform(_transform(padded, -1) * kernel_hat, 1) / size
    return conv[..., :n] * chirp


def _transform(x: np.ndarray, sign: int) -> np.ndarray:
    """Unnormalized DFT along the last axis with kernel ``exp(sign*2*pi*i*jk/n)``."""
    n = x.shape[-1]
    if n == 1:
        return x.astype(complex, copy=True)
    if n <= DIRECT_MAX:
        return x @ _dft_matrix(n, sign)
    p = _split_radix(n)
    if p == n:
        return _bluestein(x, sign)
    m = n // p
    batch = x.shape[:-1]
    # input index j = p*j1 + j2; output index k = k1 + m*k2
    sub = np.swapaxes(x.reshape(batch + (m, p)), -1, -2)
    inner = _transform(sub, sign) * _twiddles(n, p, sign)
    outer = _transform(np.swapaxes(inner, -1, -2), sign)
    return np.swapaxes(outer, -1, -2).reshape(batch + (n,))


def fft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized forward DFT of ``x`` along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    return np.moveaxis(_transform(x, -1), -1, axis)


def ifft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse DFT along ``axis``, scaled by ``1/n``."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    n = x.shape[-1]
    return np.moveaxis(_transform(x, 1) / n, -1, axis)


def fft2_array(data: np.ndarray) -> np.ndarray:
    """Forward 2D DFT over the first two axes of an ``(H, W)`` or ``(H, W, C)`` array."""
    return fft(fft(data, axis=1), axis=0)


def ifft2_array(coeffs: np.ndarray) -> np.ndarray:
    """Inverse 2D DFT over the first two axes; the result is complex."""
    return ifft(ifft(coeffs, axis=1), axis=0)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex ``(H, W, C)`` coefficient raster, unshifted (DC at ``[0, 0]``)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[:, :, None]
        if c.ndim != 3 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"spectrum must be (H, W) or (H, W, C), got shape {c.shape}")
        if c.shape[2] not in (1, 3):
            raise ValueError(f"spectrum must have 1 or 3 channels, got {c.shape[2]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("spectrum coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    @property
    def channels(self) -> int:
        return self.coeffs.shape[2]


def fft2(image: ImageBuffer) -> Spectrum:
    """Per-channel 2D DFT. ``F[0, 0, c]`` is the sum of channel ``c``."""
    return Spectrum(fft2_array(image.data))


def ifft2(spectrum: Spectrum) -> ImageBuffer:
    """Inverse transform, keep the real part, clamp to ``[0, 1]``.

    Use :func:`ifft2_array` for the unclamped complex result.
    """
    return ImageBuffer(np.clip(ifft2_array(spectrum.coeffs).real, 0.0, 1.0))


def power_spectrum(spectrum: Spectrum) -> np.ndarray:
    """Per-bin ``|F(u, v)|**2`` as a real ``(H, W, C)`` array."""
    c = spectrum.coeffs
    return c.real ** 2 + c.imag ** 2
