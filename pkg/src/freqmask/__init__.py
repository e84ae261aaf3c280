"""Spatial and frequency-domain masking for training deepfake detectors."""
from .image_core import ImageBuffer, augment, gaussian_blur, jpeg_compress, load_image, save_image
from .rng import RandomStream
from .spectrum import Spectrum, fft2, ifft2, power_spectrum
from .masking import MaskSpec, BandRegion, apply_mask, band_region
from .detector import LinearDetector, TrainConfig, extract_features, predict, train
from .evaluation import EvalReport, average_precision, evaluate
from .synth_data import FamilyConfig, build_corpus, generate_fake, generate_real
from .experiment import SweepConfig, compare_bands, compare_mask_types, ratio_sweep, run_sweep

__version__ = "0.1.0"
