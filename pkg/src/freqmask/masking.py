"""Pixel, patch and frequency-band masking.

Spatial masks zero a random subset of pixels or non-overlapping ``p x p``
patches. Frequency masks zero a random subset of DFT bins drawn from one of
four rectangular bands of the unshifted spectrum, then return to the pixel
domain. All channels share a single draw.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .image_core import ImageBuffer
from .rng import RandomStream
from .spectrum import fft2_array, ifft2_array

__all__ = [
    "KINDS",
    "BANDS",
    "MaskSpec",
    "BandRegion",
    "pixel_mask_count",
    "patch_mask_count",
    "frequency_mask_count",
    "band_region",
    "band_mask",
    "hermitian_partner",
    "apply_spatial_mask",
    "apply_frequency_mask",
    "frequency_mask_array",
    "spatial_mask_array",
    "apply_mask",
    "mask_call_count",
]

KINDS = ("pixel", "patch", "frequency")
BANDS = ("low", "mid", "high", "all")


@dataclass(frozen=True)
class MaskSpec:
    kind: str
    ratio: float
    patch_size: int = 8
    band: str = "all"
    symmetric: bool = False
    # interpret band bounds on the DC-centred (fftshifted) layout
    shifted: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown mask kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"mask ratio must be in [0, 1], got {self.ratio}")
        if self.kind == "patch" and int(self.patch_size) < 1:
            raise ValueError(f"patch size must be >= 1, got {self.patch_size}")
        if self.band not in BANDS:
            raise ValueError(f"unknown band {self.band!r}; expected one of {BANDS}")

    @property
    def label(self) -> str:
        if self.kind == "pixel":
            return f"pixel-r{self.ratio:g}"
        if self.kind == "patch":
            return f"patch{self.patch_size}-r{self.ratio:g}"
        extra = ("-sym" if self.symmetric else "") + ("-shifted" if self.shifted else "")
        return f"frequency-{self.band}-r{self.ratio:g}{extra}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ratio": self.ratio,
            "patch_size": self.patch_size,
            "band": self.band,
            "symmetric": self.symmetric,
            "shifted": self.shifted,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MaskSpec":
        return cls(**d)


@dataclass(frozen=True)
class BandRegion:
    """Half-open bin rectangle ``[u_start, u_end) x [v_start, v_end)``; u indexes rows."""

    u_start: int
    u_end: int
    v_start: int
    v_end: int

    @property
    def area(self) -> int:
        return (self.u_end - self.u_start) * (self.v_end - self.v_start)


def _ceil_ratio(r: float, total: int) -> int:
    # ceil(r * total) without letting 0.5*8 = 4.000000000000001 round up
    prod = r * total
    nearest = round(prod)
    if math.isclose(prod, nearest, rel_tol=1e-12, abs_tol=1e-12):
        return int(nearest)
    return int(math.ceil(prod))


def pixel_mask_count(height: int, width: int, ratio: float) -> int:
    """Number of masked pixels, ``ceil(r * H * W)``."""
    return _ceil_ratio(ratio, height * width)


def patch_mask_count(height: int, width: int, patch_size: int, ratio: float) -> tuple[int, int]:
    """``(N, m)`` with ``N = floor(H*W / p**2)`` patches and ``m = ceil(r * N)`` masked."""
    if patch_size < 1:
        raise ValueError(f"patch size must be >= 1, got {patch_size}")
    n = (height * width) // (patch_size * patch_size)
    return n, _ceil_ratio(ratio, n)


def frequency_mask_count(region: BandRegion, ratio: float) -> int:
    return _ceil_ratio(ratio, region.area)


def band_region(band: str, height: int, width: int) -> BandRegion:
    """Bin bounds of a named band on an ``H x W`` spectrum; fractional bounds are floored."""
    if band == "all":
        if height < 1 or width < 1:
            raise ValueError("spectrum must be at least 1x1")
        return BandRegion(0, height, 0, width)
    if band not in BANDS:
        raise ValueError(f"unknown band {band!r}")
    if height < 4 or width < 4:
        raise ValueError(f"band {band!r} needs H, W >= 4, got {height}x{width}")
    q_h, q3_h = height // 4, (3 * height) // 4
    q_w, q3_w = width // 4, (3 * width) // 4
    if band == "low":
        return BandRegion(0, q_h, 0, q_w)
    if band == "mid":
        return BandRegion(q_h, q3_h, q_w, q3_w)
    return BandRegion(q3_h, height, q3_w, width)


def _region_bins(region: BandRegion, height: int, width: int, shifted: bool) -> tuple[np.ndarray, np.ndarray]:
    """Row-major ``(u, v)`` coordinates of the region's bins on the unshifted grid."""
    uu, vv = np.meshgrid(np.arange(region.u_start, region.u_end),
                         np.arange(region.v_start, region.v_end), indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    if shifted:
        # shifted index i holds unshifted frequency (i - H//2) mod H
        uu = (uu - height // 2) % height
        vv = (vv - width // 2) % width
    return uu, vv


def band_mask(band: str, height: int, width: int, shifted: bool = False) -> np.ndarray:
    """Boolean ``(H, W)`` membership of a band on the unshifted grid."""
    out = np.zeros((height, width), dtype=bool)
    uu, vv = _region_bins(band_region(band, height, width), height, width, shifted)
    out[uu, vv] = True
    return out


def hermitian_partner(u, v, height: int, width: int):
    return (-np.asarray(u)) % height, (-np.asarray(v)) % width


_counter_lock = threading.Lock()
_mask_calls = 0


def mask_call_count() -> int:
    """Total :func:`apply_mask` invocations in this process."""
    return _mask_calls


def spatial_mask_array(height: int, width: int, spec: MaskSpec, stream: RandomStream) -> np.ndarray:
    """Boolean ``(H, W)`` array, True where the pixel is zeroed."""
    masked = np.zeros((height, width), dtype=bool)
    if spec.kind == "pixel":
        m = pixel_mask_count(height, width, spec.ratio)
        flat = stream.sample_without_replacement(height * width, m)
        masked.ravel()[flat] = True
    elif spec.kind == "patch":
        p = int(spec.patch_size)
        _, m = patch_mask_count(height, width, p, spec.ratio)
        # whole tiles only, row-major from (0, 0). floor(HW/p^2) can exceed the
        # tile count when p does not divide H or W, so m is capped at the tiles.
        rows, cols = height // p, width // p
        chosen = stream.sample_without_replacement(rows * cols, min(m, rows * cols))
        for idx in chosen.tolist():
            r, c = divmod(idx, cols)
            masked[r * p:(r + 1) * p, c * p:(c + 1) * p] = True
    else:
        raise ValueError(f"spatial masking needs kind pixel or patch, got {spec.kind!r}")
    return masked


def apply_spatial_mask(image: ImageBuffer, spec: MaskSpec, stream: RandomStream) -> ImageBuffer:
    """Zero a random set of pixels or whole patches in every channel."""
    masked = spatial_mask_array(image.height, image.width, spec, stream)
    out = image.data.copy()
    out[masked] = 0.0
    return ImageBuffer(out)


def frequency_mask_array(
    data: np.ndarray, spec: MaskSpec, stream: RandomStream
) -> tuple[np.ndarray, np.ndarray]:
    """Frequency-mask a raw ``(H, W, C)`` array without clamping.

    Returns ``(real_output, zeroed)`` where ``zeroed`` is the boolean ``(H, W)``
    set of bins that were set to zero (including Hermitian partners when
    ``spec.symmetric``).
    """
    if spec.kind != "frequency":
        raise ValueError(f"frequency masking needs kind 'frequency', got {spec.kind!r}")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    h, w = data.shape[:2]
    region = band_region(spec.band, h, w)
    uu, vv = _region_bins(region, h, w, spec.shifted)
    count = frequency_mask_count(region, spec.ratio)
    pick = stream.sample_without_replacement(uu.shape[0], count)
    zeroed = np.zeros((h, w), dtype=bool)
    zeroed[uu[pick], vv[pick]] = True
    if spec.symmetric:
        pu, pv = hermitian_partner(uu[pick], vv[pick], h, w)
        zeroed[pu, pv] = True
    coeffs = fft2_array(data)
    coeffs[zeroed] = 0.0
    return ifft2_array(coeffs).real, zeroed


def apply_frequency_mask(image: ImageBuffer, spec: MaskSpec, stream: RandomStream) -> ImageBuffer:
    """Zero ``ceil(r * band area)`` random bins of the band, inverse-transform, keep the real part, clamp."""
    out, _ = frequency_mask_array(image.data, spec, stream)
    return ImageBuffer(np.clip(out, 0.0, 1.0))


def apply_mask(image: ImageBuffer, spec: MaskSpec, stream: RandomStream) -> ImageBuffer:
    """Single masking entry point used by the training loop."""
    global _mask_calls
    with _counter_lock:
        _mask_calls += 1
    if spec.kind == "frequency":
        return apply_frequency_mask(image, spec, stream)
    return apply_spatial_mask(image, spec, stream)
