"""
Two-tier feature distribution normalization.

Tier 1 divisively normalizes the 5x5 center of every 13x13 patch of a detail
map by the ratio of center to surround deviation. Tier 2 subtracts the grand
mean of all detail maps of a channel. The approximation map bypasses both.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from model.errors import ConfigError
from model.wavelet_bank import Decomposition, FeatureMap

logger = logging.getLogger(__name__)

# Standard deviations this small relative to the data are rounding noise.
STD_TOLERANCE = 1e-12

CENTER_SURROUND = 'cs'
MODES = ('cs', 'win3', 'win5', 'win7')


@dataclass(frozen=True)
class PatchGeometry:
    patch_size: int = 13
    center_size: int = 5
    overlap: int = 4

    def __post_init__(self):
        if self.center_size > self.patch_size or (self.patch_size - self.center_size) % 2:
            raise ConfigError(
                f"a {self.center_size}x{self.center_size} center cannot sit concentrically "
                f"in a {self.patch_size}x{self.patch_size} patch"
            )
        if not 0 <= self.overlap < self.patch_size:
            raise ConfigError(f"overlap {self.overlap} must be in [0, {self.patch_size})")

    @property
    def stride(self) -> int:
        return self.patch_size - self.overlap

    @property
    def center_offset(self) -> int:
        return (self.patch_size - self.center_size) // 2


DEFAULT_GEOMETRY = PatchGeometry()


def window_size(mode: str) -> Optional[int]:
    """Window size of a single-window mode, None for center-surround."""
    if mode not in MODES:
        raise ConfigError(f"Unknown normalization mode: {mode} (expected one of {', '.join(MODES)})")
    if mode == CENTER_SURROUND:
        return None
    return int(mode[len('win'):])


def robust_std(values: np.ndarray) -> Tuple[float, float]:
    """Mean and population standard deviation, with rounding-level deviations reported as 0."""
    mean = float(np.mean(values))
    std = float(np.std(values))
    if std <= STD_TOLERANCE * max(1.0, abs(mean)):
        std = 0.0
    return mean, std


def normalization_factor(sigma_center: float, sigma_surround: float) -> float:
    if sigma_surround != 0:
        return sigma_center / sigma_surround
    return sigma_center


def normalize_center(center: np.ndarray, sigma_center: float, sigma_surround: float) -> np.ndarray:
    """Subtract the center mean, divide by r, add the mean back."""
    mean_c = float(np.mean(center))
    r = normalization_factor(sigma_center, sigma_surround)
    if r == 0:
        return center.copy()
    return (center - mean_c) / r + mean_c


def tier1_normalize(fmap: FeatureMap, geometry: PatchGeometry = DEFAULT_GEOMETRY) -> FeatureMap:
    """Patch-wise center-surround divisive normalization of one feature map.

    Patches are anchored at the top-left corner with the geometry's stride and
    clipped at the right and bottom edges. Coefficients outside every center
    keep their values. A map smaller than one patch is its own patch and
    center, so r = 1 and it passes through.
    """
    coeffs = fmap.coefficients
    out = np.array(coeffs, dtype=np.float64, copy=True)
    height, width = coeffs.shape
    size, offset, center = geometry.patch_size, geometry.center_offset, geometry.center_size

    if height < size or width < size:
        return fmap.with_coefficients(out)

    processed = 0
    for top in range(0, height, geometry.stride):
        c_top = top + offset
        if c_top >= height:
            break
        for left in range(0, width, geometry.stride):
            c_left = left + offset
            if c_left >= width:
                break
            patch = coeffs[top:top + size, left:left + size]
            block = coeffs[c_top:c_top + center, c_left:c_left + center]
            _, sigma_surround = robust_std(patch)
            _, sigma_center = robust_std(block)
            out[c_top:c_top + center, c_left:c_left + center] = normalize_center(
                block, sigma_center, sigma_surround
            )
            processed += 1

    logger.debug(f"Tier 1: {fmap.channel} s={fmap.level} {fmap.orientation} {coeffs.shape}, {processed} patches")
    return fmap.with_coefficients(out)


def single_window_normalize(fmap: FeatureMap, k: int) -> FeatureMap:
    """Normalize every coefficient by the mean and deviation of its own k x k window."""
    if k < 1 or k % 2 == 0:
        raise ConfigError(f"single-window size must be odd, got {k}")

    coeffs = np.asarray(fmap.coefficients, dtype=np.float64)
    half = k // 2
    padded = np.pad(coeffs, half, mode='symmetric')
    windows = sliding_window_view(padded, (k, k))
    mean = windows.mean(axis=(-2, -1))
    std = windows.std(axis=(-2, -1))

    flat = std <= STD_TOLERANCE * np.maximum(1.0, np.abs(mean))
    safe_std = np.where(flat, 1.0, std)
    out = np.where(flat, coeffs, (coeffs - mean) / safe_std + mean)
    return fmap.with_coefficients(out)


def tier2_normalize(maps: List[FeatureMap]) -> List[FeatureMap]:
    """Subtract the grand mean of all detail coefficients from every detail map."""
    details = [m for m in maps if not m.is_approximation]
    if not details:
        return list(maps)

    total = sum(float(np.sum(m.coefficients)) for m in details)
    count = sum(m.coefficients.size for m in details)
    grand_mean = total / count
    logger.debug(f"Tier 2: grand mean {grand_mean:.6g} over {len(details)} detail maps")

    return [
        m if m.is_approximation else m.with_coefficients(m.coefficients - grand_mean)
        for m in maps
    ]


def normalize_decomposition(decomposition: Decomposition, mode: str = CENTER_SURROUND,
                            geometry: PatchGeometry = DEFAULT_GEOMETRY) -> Decomposition:
    """Run tier 1 (or its single-window variant) on every detail map, then tier 2."""
    k = window_size(mode)
    maps = []
    for fmap in decomposition.maps:
        if fmap.is_approximation:
            maps.append(fmap)
        elif k is None:
            maps.append(tier1_normalize(fmap, geometry))
        else:
            maps.append(single_window_normalize(fmap, k))
    return decomposition.with_maps(tier2_normalize(maps))
