"""
Synthetic distortion ladders for desk-scale benchmarking.

Each kind maps a severity level (1 = mildest) to a physical magnitude and
applies it to a reference image. Noise is drawn once per seed and scaled, so
the levels of one ladder share the same noise field.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np
from scipy.ndimage import gaussian_filter
from skimage.measure import block_reduce

from model.color_space import RgbImage
from model.errors import ConfigError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 8


@dataclass(frozen=True)
class DistortedImage:
    image: RgbImage
    kind: str
    level: int
    magnitude: float


def _to_image(values: np.ndarray) -> RgbImage:
    return RgbImage(np.clip(np.rint(values), 0, 255).astype(np.uint8))


def _add_noise(pixels: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    noise = np.random.default_rng(seed).standard_normal(pixels.shape)
    return pixels + sigma * noise


def _blur(pixels: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    return gaussian_filter(pixels, sigma=(sigma, sigma, 0), mode='reflect')


def _blocking(pixels: np.ndarray, alpha: float, seed: int) -> np.ndarray:
    """Blend toward the 8x8 block means; alpha = 1 gives flat blocks."""
    height, width, _ = pixels.shape
    pad_h, pad_w = -height % BLOCK_SIZE, -width % BLOCK_SIZE
    padded = np.pad(pixels, ((0, pad_h), (0, pad_w), (0, 0)), mode='edge')
    means = block_reduce(padded, (BLOCK_SIZE, BLOCK_SIZE, 1), np.mean)
    blocks = np.repeat(np.repeat(means, BLOCK_SIZE, axis=0), BLOCK_SIZE, axis=1)[:height, :width]
    return (1.0 - alpha) * pixels + alpha * blocks


def _contrast(pixels: np.ndarray, reduction: float, seed: int) -> np.ndarray:
    mean = pixels.mean(axis=(0, 1), keepdims=True)
    return mean + (1.0 - reduction) * (pixels - mean)


@dataclass(frozen=True)
class DistortionKind:
    apply: Callable[[np.ndarray, float, int], np.ndarray]
    schedule: Callable[[int, int], float]


DISTORTIONS: Dict[str, DistortionKind] = {
    'gaussian_noise': DistortionKind(_add_noise, lambda level, levels: float(2 ** level)),
    'gaussian_blur': DistortionKind(_blur, lambda level, levels: 0.6 * level),
    'jpeg_like_blocking': DistortionKind(_blocking, lambda level, levels: level / levels),
    'contrast_shift': DistortionKind(_contrast, lambda level, levels: 0.8 * level / levels),
}


def distortion_kinds() -> List[str]:
    return list(DISTORTIONS)


def _kind(kind: str) -> DistortionKind:
    try:
        return DISTORTIONS[kind]
    except KeyError:
        raise ConfigError(f"Unknown distortion kind: {kind} (expected one of {', '.join(DISTORTIONS)})")


def distort(ref: RgbImage, kind: str, magnitude: float, seed: int = 0) -> RgbImage:
    """Apply one distortion at a physical magnitude; magnitude 0 returns the reference unchanged."""
    distortion = _kind(kind)
    if magnitude < 0:
        raise ConfigError(f"distortion magnitude must be non-negative, got {magnitude}")
    if magnitude == 0:
        return RgbImage(ref.pixels.copy())
    return _to_image(distortion.apply(ref.pixels.astype(np.float64), magnitude, seed))


def generate_distortions(ref: RgbImage, kind: str, levels: int, seed: int = 0) -> List[DistortedImage]:
    """Ladder of ``levels`` increasingly severe versions of ``ref``; severity rank equals level."""
    distortion = _kind(kind)
    if levels < 2:
        raise ConfigError(f"a distortion ladder needs at least 2 levels, got {levels}")

    ladder = []
    for level in range(1, levels + 1):
        magnitude = distortion.schedule(level, levels)
        ladder.append(DistortedImage(distort(ref, kind, magnitude, seed), kind, level, magnitude))
        logger.debug(f"{kind} level {level}: magnitude {magnitude:.6g}")
    return ladder
