"""
Seeded natural-like test images.

Natural photographs have amplitude spectra falling roughly as 1/f. These
images reproduce that with random phases, which is enough for the
wavelet statistics and distortion ladders to behave as they do on photos.
"""

from typing import Tuple

import numpy as np

from model.color_space import RgbImage

# Rows mix three independent fields into R, G, B; the first field is shared luminance.
_CHANNEL_MIX = np.array([
    [1.0, 0.35, 0.0],
    [1.0, -0.2, 0.25],
    [1.0, 0.0, -0.35],
])


def pink_field(shape: Tuple[int, int], rng: np.random.Generator, exponent: float = 1.0) -> np.ndarray:
    """Zero-mean, unit-deviation field with a 1/f**exponent amplitude spectrum."""
    fy = np.fft.fftfreq(shape[0])[:, np.newaxis]
    fx = np.fft.rfftfreq(shape[1])[np.newaxis, :]
    radius = np.hypot(fy, fx)
    radius[0, 0] = 1.0
    amplitude = radius ** -exponent
    amplitude[0, 0] = 0.0
    phase = rng.uniform(0.0, 2.0 * np.pi, size=amplitude.shape)
    field = np.fft.irfft2(amplitude * np.exp(1j * phase), s=shape)
    return (field - field.mean()) / field.std()


def pink_noise_image(height: int = 128, width: int = 128, seed: int = 0, colorful: bool = True) -> RgbImage:
    rng = np.random.default_rng(seed)
    fields = np.stack([pink_field((height, width), rng) for _ in range(3)], axis=-1)
    if not colorful:
        fields[..., 1:] = 0.0
    mixed = fields @ _CHANNEL_MIX.T
    pixels = 128.0 + 40.0 * mixed
    return RgbImage(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))
