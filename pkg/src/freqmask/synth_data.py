"""Procedural real/fake image families with planted spectral artifacts.

"Real" images are Gaussian noise shaped to a ``1/f**alpha`` power spectrum.
Each fake family starts from the same pipeline and plants one artifact in a
different part of the spectrum:

* ``fake_grid``     periodic comb at harmonics of ``(H/8, 0)`` and ``(0, W/8)``,
                    the spectral signature of an 8-pixel upsampling grid
* ``fake_highcut``  attenuates the high band region by ``1 / (1 + strength)``
* ``fake_midnotch`` zeroes a thin annulus inside the mid band region

All artifacts are applied Hermitian-symmetrically so the image stays real.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .image_core import ImageBuffer, load_image, save_image
from .masking import band_mask
from .rng import RandomStream
from .spectrum import fft2_array, ifft2_array

__all__ = [
    "FAMILIES",
    "FAKE_FAMILIES",
    "DEFAULT_STRENGTHS",
    "FamilyConfig",
    "Sample",
    "Corpus",
    "generate_real",
    "generate_fake",
    "generate",
    "build_corpus",
    "save_corpus",
    "load_corpus",
    "notch_mask",
]

FAMILIES = ("real", "fake_grid", "fake_highcut", "fake_midnotch")
FAKE_FAMILIES = FAMILIES[1:]

# Calibrated with the spectral measurements in tests/test_synth_data.py and
# the sweep log in demos/calibration.py.
DEFAULT_STRENGTHS = {
    "real": 0.0,
    "fake_grid": 2.0,
    "fake_highcut": 3.0,
    "fake_midnotch": 2.0,
}
DEFAULT_SIZE = 64
DEFAULT_SLOPE = 2.0
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class FamilyConfig:
    family_id: str
    size: int = DEFAULT_SIZE
    artifact_strength: Optional[float] = None
    spectral_slope: float = DEFAULT_SLOPE

    def __post_init__(self):
        if self.family_id not in FAMILIES:
            raise ValueError(f"unknown family {self.family_id!r}; expected one of {FAMILIES}")
        if self.size < 16:
            raise ValueError(f"image size must be >= 16, got {self.size}")
        if self.artifact_strength is None:
            object.__setattr__(self, "artifact_strength", DEFAULT_STRENGTHS[self.family_id])
        if self.artifact_strength < 0:
            raise ValueError(f"artifact strength must be >= 0, got {self.artifact_strength}")


@lru_cache(maxsize=16)
def _radial_frequency(size: int) -> np.ndarray:
    k = np.arange(size)
    d = np.minimum(k, size - k)
    r = np.sqrt(d[:, None] ** 2 + d[None, :] ** 2)
    r.flags.writeable = False
    return r


def _with_partners(mask: np.ndarray) -> np.ndarray:
    # (u, v) -> (-u mod H, -v mod W)
    partner = np.roll(mask[::-1, ::-1], 1, axis=(0, 1))
    return mask | partner


def notch_mask(size: int, width: float) -> np.ndarray:
    """Bins zeroed by ``fake_midnotch``: annulus of radial width ``width`` centred in the mid band."""
    if width <= 0:
        return np.zeros((size, size), dtype=bool)
    r = _radial_frequency(size)
    centre = 3.0 * math.sqrt(2.0) * size / 8.0
    ring = (r >= centre - width / 2.0) & (r < centre + width / 2.0)
    return _with_partners(ring & band_mask("mid", size, size))


def _shaped_spectrum(config: FamilyConfig, stream: RandomStream) -> np.ndarray:
    n = config.size
    noise = stream.normal((n, n))
    amp = 1.0 / (1.0 + _radial_frequency(n)) ** (config.spectral_slope / 2.0)
    return fft2_array(noise) * amp


def _rescale(coeffs: np.ndarray) -> ImageBuffer:
    x = ifft2_array(coeffs).real
    lo, hi = x.min(), x.max()
    if hi - lo <= 0:
        return ImageBuffer(np.zeros_like(x))
    return ImageBuffer((x - lo) / (hi - lo))


def generate_real(config: FamilyConfig, stream: RandomStream) -> ImageBuffer:
    """Noise with amplitude ``1 / (1 + |f|)**(alpha/2)``, rescaled to ``[0, 1]``."""
    if config.family_id != "real":
        raise ValueError(f"generate_real needs family 'real', got {config.family_id!r}")
    return _rescale(_shaped_spectrum(config, stream))


def _plant_grid(coeffs: np.ndarray, config: FamilyConfig, stream: RandomStream) -> None:
    n = config.size
    step = n // 8
    # comb phase follows a random grid offset so harmonics stay mutually consistent
    offset = stream.uniform_int(0, 7)
    # expected |F| of the shaped noise at the fundamental
    ref = n / (1.0 + step) ** (config.spectral_slope / 2.0)
    amp = config.artifact_strength * ref
    for k in range(1, 8):
        u = k * step
        phase = np.exp(-2j * np.pi * k * offset / 8.0)
        coeffs[u, 0] += amp * phase
        coeffs[0, u] += amp * phase


def generate_fake(config: FamilyConfig, stream: RandomStream) -> ImageBuffer:
    """Real-family pipeline plus the family's planted artifact, applied before rescaling."""
    if config.family_id not in FAKE_FAMILIES:
        raise ValueError(f"generate_fake needs a fake family, got {config.family_id!r}")
    coeffs = _shaped_spectrum(config, stream)
    n = config.size
    s = config.artifact_strength
    if config.family_id == "fake_grid":
        _plant_grid(coeffs, config, stream)
    elif config.family_id == "fake_highcut":
        coeffs[_with_partners(band_mask("high", n, n))] *= 1.0 / (1.0 + s)
    else:
        coeffs[notch_mask(n, s)] = 0.0
    return _rescale(coeffs)


def generate(config: FamilyConfig, stream: RandomStream) -> ImageBuffer:
    if config.family_id == "real":
        return generate_real(config, stream)
    return generate_fake(config, stream)


@dataclass(frozen=True, eq=False)
class Sample:
    image: ImageBuffer
    label: int
    family: str
    split: str
    index: int
    key: tuple[int, ...]


@dataclass
class Corpus:
    train: list
    test: list
    master_seed: int
    size: int
    n_per_class_per_family: int
    train_family: str
    strengths: dict = field(default_factory=dict)

    def train_pairs(self) -> list[tuple[ImageBuffer, int]]:
        return [(s.image, s.label) for s in self.train]

    def test_families(self) -> dict[str, list[tuple[ImageBuffer, int]]]:
        """Every fake family paired with the shared real test images."""
        real = [(s.image, 0) for s in self.test if s.family == "real"]
        out = {}
        for fam in sorted({s.family for s in self.test if s.family != "real"}):
            out[fam] = real + [(s.image, 1) for s in self.test if s.family == fam]
        return out


def build_corpus(
    master_seed: int,
    n_per_class_per_family: int,
    size: int = DEFAULT_SIZE,
    train_family: str = "fake_grid",
    strengths: Optional[dict] = None,
    spectral_slope: float = DEFAULT_SLOPE,
) -> Corpus:
    """Train on real + one fake family, test on real + every fake family.

    Image ``i`` of family ``f`` in split ``s`` comes from substream
    ``(s, f, i)`` of the master seed, so train and test never share a stream.
    """
    n = int(n_per_class_per_family)
    if n < 10:
        raise ValueError(f"need at least 10 images per class and family, got {n}")
    if train_family not in FAKE_FAMILIES:
        raise ValueError(f"train family must be one of {FAKE_FAMILIES}, got {train_family!r}")
    strengths = {**DEFAULT_STRENGTHS, **(strengths or {})}
    root = RandomStream(master_seed)

    def make(split_id: int, split: str, family: str) -> list[Sample]:
        f = FAMILIES.index(family)
        cfg = FamilyConfig(family, size, strengths[family], spectral_slope)
        out = []
        for i in range(n):
            key = (split_id, f, i)
            img = generate(cfg, root.derive_substream(*key))
            out.append(Sample(img, int(family != "real"), family, split, i, key))
        return out

    train = make(0, "train", "real") + make(0, "train", train_family)
    test = make(1, "test", "real")
    for fam in FAKE_FAMILIES:
        test += make(1, "test", fam)
    assert not {s.key for s in train} & {s.key for s in test}
    return Corpus(train, test, int(master_seed), size, n, train_family, strengths)


def save_corpus(corpus: Corpus, directory) -> Path:
    """Write ``<split>/<family>/<index>.png`` files and ``manifest.json``."""
    directory = Path(directory)
    entries = []
    for s in corpus.train + corpus.test:
        rel = Path(s.split) / s.family / f"{s.index:05d}.png"
        (directory / rel.parent).mkdir(parents=True, exist_ok=True)
        save_image(s.image, directory / rel, "png")
        entries.append({"split": s.split, "family": s.family, "index": s.index,
                        "label": s.label, "key": list(s.key), "path": rel.as_posix()})
    manifest = {
        "format_version": MANIFEST_VERSION,
        "master_seed": corpus.master_seed,
        "size": corpus.size,
        "n_per_class_per_family": corpus.n_per_class_per_family,
        "train_family": corpus.train_family,
        "strengths": corpus.strengths,
        "samples": entries,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_corpus(directory) -> Corpus:
    directory = Path(directory)
    path = directory / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"no corpus manifest at {path}")
    manifest = json.loads(path.read_text())
    if manifest.get("format_version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {manifest.get('format_version')!r}")
    train, test = [], []
    for e in manifest["samples"]:
        s = Sample(load_image(directory / e["path"]), int(e["label"]), e["family"],
                   e["split"], int(e["index"]), tuple(e["key"]))
        (train if e["split"] == "train" else test).append(s)
    return Corpus(train, test, manifest["master_seed"], manifest["size"],
                  manifest["n_per_class_per_family"], manifest["train_family"],
                  manifest["strengths"])
