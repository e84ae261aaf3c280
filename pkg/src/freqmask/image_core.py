"""Image buffers, PNG/JPEG I/O and the blur/JPEG train-time augmentations."""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .rng import RandomStream

__all__ = [
    "ImageBuffer",
    "ImageFormatError",
    "load_image",
    "save_image",
    "quantize",
    "gaussian_kernel",
    "gaussian_blur",
    "jpeg_compress",
    "augment",
    "AugmentSettings",
]

# Blur sigma and JPEG quality ranges of the common CNN-detector training recipe.
DEFAULT_SIGMA_RANGE = (0.0, 3.0)
DEFAULT_QUALITY_RANGE = (30, 100)
# 4:4:4, so quality alone controls the loss
JPEG_SUBSAMPLING = 0


class ImageFormatError(ValueError):
    """File exists but is not a decodable 8-bit PNG/JPEG."""


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Real-valued ``(H, W, C)`` raster in ``[0, 1]``, C in {1, 3}.

    Values are clamped to ``[0, 1]`` on construction and the stored array is
    read-only. A 2D array is promoted to a single channel.
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=np.float64)
        if d.ndim == 2:
            d = d[:, :, None]
        if d.ndim != 3 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"image must be (H, W) or (H, W, C), got shape {d.shape}")
        if d.shape[2] not in (1, 3):
            raise ValueError(f"image must have 1 or 3 channels, got {d.shape[2]}")
        if not np.all(np.isfinite(d)):
            raise ValueError("image values must be finite")
        np.clip(d, 0.0, 1.0, out=d)
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def grayscale(self) -> np.ndarray:
        """Channel mean as an ``(H, W)`` array."""
        return self.data.mean(axis=2)

    def tobytes(self) -> bytes:
        return self.data.tobytes()


def quantize(image: ImageBuffer) -> np.ndarray:
    """8-bit quantization, round-half-up of ``v * 255``."""
    return np.floor(image.data * 255.0 + 0.5).astype(np.uint8)


def _to_pil(image: ImageBuffer) -> Image.Image:
    q = quantize(image)
    if image.channels == 1:
        return Image.fromarray(q[:, :, 0], mode="L")
    return Image.fromarray(q, mode="RGB")


def _from_pil(img: Image.Image) -> ImageBuffer:
    if img.mode in ("1", "L", "LA"):
        img = img.convert("L")
    elif img.mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr"):
        img = img.convert("RGB")
    else:
        raise ImageFormatError(f"unsupported pixel mode {img.mode!r}; only 8-bit grayscale/RGB")
    return ImageBuffer(np.asarray(img, dtype=np.float64) / 255.0)


def load_image(path) -> ImageBuffer:
    """Decode a PNG or JPEG file; 8-bit value ``v`` maps to ``v / 255``.

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    ImageFormatError
        The file is not a readable PNG/JPEG.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise ImageFormatError(f"{path}: unsupported format {img.format!r}")
            img.load()
            return _from_pil(img)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: cannot decode image ({exc})") from exc


def save_image(image: ImageBuffer, path, format: str = "png", quality: int = 95) -> None:
    """Write ``image`` as 8-bit PNG (lossless after quantization) or JPEG."""
    fmt = format.lower()
    if fmt not in ("png", "jpeg", "jpg"):
        raise ValueError(f"unsupported format {format!r}")
    if fmt != "png" and not 1 <= int(quality) <= 100:
        raise ValueError(f"JPEG quality must be in 1..100, got {quality}")
    path = Path(path)
    pil = _to_pil(image)
    try:
        if fmt == "png":
            pil.save(path, format="PNG")
        else:
            pil.save(path, format="JPEG", quality=int(quality), subsampling=JPEG_SUBSAMPLING)
    except OSError as exc:
        raise OSError(f"cannot write image to {path}: {exc}") from exc


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1D Gaussian taps with radius ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(data: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = kernel.shape[0] // 2
    pad = [(0, 0)] * data.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(data, pad, mode="edge")
    n = data.shape[axis]
    out = np.zeros_like(data)
    for i, w in enumerate(kernel):
        out += w * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def gaussian_blur(image: ImageBuffer, sigma: float) -> ImageBuffer:
    """Separable Gaussian blur with clamp-to-edge borders."""
    kernel = gaussian_kernel(sigma)
    out = _convolve_axis(image.data, kernel, axis=0)
    out = _convolve_axis(out, kernel, axis=1)
    return ImageBuffer(out)


def jpeg_compress(image: ImageBuffer, quality: int) -> ImageBuffer:
    """Round-trip ``image`` through an in-memory JPEG encode/decode."""
    quality = int(quality)
    if not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be in 1..100, got {quality}")
    buf = io.BytesIO()
    _to_pil(image).save(buf, format="JPEG", quality=quality, subsampling=JPEG_SUBSAMPLING)
    buf.seek(0)
    with Image.open(buf) as img:
        img.load()
        return _from_pil(img)


@dataclass(frozen=True)
class AugmentSettings:
    blur_prob: float = 0.1
    jpeg_prob: float = 0.1
    sigma_range: tuple[float, float] = DEFAULT_SIGMA_RANGE
    quality_range: tuple[int, int] = DEFAULT_QUALITY_RANGE

    def __post_init__(self):
        for name in ("blur_prob", "jpeg_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        lo, hi = self.sigma_range
        if not 0.0 <= lo <= hi:
            raise ValueError(f"invalid sigma range {self.sigma_range}")
        qlo, qhi = self.quality_range
        if not 1 <= qlo <= qhi <= 100:
            raise ValueError(f"invalid quality range {self.quality_range}")


def augment(
    image: ImageBuffer,
    rng: RandomStream,
    blur_prob: float = 0.1,
    jpeg_prob: float = 0.1,
    sigma_range: tuple[float, float] = DEFAULT_SIGMA_RANGE,
    quality_range: tuple[int, int] = DEFAULT_QUALITY_RANGE,
) -> ImageBuffer:
    """Randomly blur, then randomly JPEG-compress.

    The two coin flips are independent. A sigma draw of exactly 0 leaves the
    image unblurred.
    """
    s = AugmentSettings(blur_prob, jpeg_prob, tuple(sigma_range), tuple(quality_range))
    out = image
    if rng.uniform_real() < s.blur_prob:
        sigma = rng.uniform(*s.sigma_range)
        if sigma > 0:
            out = gaussian_blur(out, sigma)
    if rng.uniform_real() < s.jpeg_prob:
        out = jpeg_compress(out, rng.uniform_int(*s.quality_range))
    return out


def augment_with(image: ImageBuffer, rng: RandomStream, settings: AugmentSettings) -> ImageBuffer:
    return augment(image, rng, settings.blur_prob, settings.jpeg_prob,
                   settings.sigma_range, settings.quality_range)


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
