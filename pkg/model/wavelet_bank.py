"""
Seven-level separable BIOR 1.5 wavelet decomposition.

Each CIELab plane is split into 22 feature maps: one approximation map and
horizontal, vertical and diagonal detail maps at seven levels. Levels are
numbered like the feature representation uses them: s = 1 is the coarsest
band and s = 7 the finest.

The default ``symmetric`` boundary runs the filter bank as lifting steps
over a half-sample symmetric extension, which keeps the transform critically
sampled and exactly invertible. An odd-length stage repeats its last sample
before splitting, so on planes whose sides are not multiples of 128 the
approximation no longer carries the exact mean: an approximation-only
reconstruction of a 128x160 plane is off by a few hundredths. Dyadic sizes
keep the mean exactly. The ``periodization`` boundary delegates to
PyWavelets.
"""

import logging
import math
import struct
import warnings
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np
import pywt

from model.errors import ConfigError, DumpFormatError, InconsistentDimensionsError, PlaneTooSmallError

logger = logging.getLogger(__name__)

LEVELS = 7
MIN_PLANE_SIZE = 128
WAVELET_NAME = 'bior1.5'
ORIENTATIONS = ('A', 'H', 'V', 'D')
DETAIL_ORIENTATIONS = ('H', 'V', 'D')
CHANNELS = ('L', 'a', 'b')
BOUNDARY_MODES = ('symmetric', 'periodization')

# Biorthogonal 1.5 analysis filters as tabulated by PyWavelets
# (pywt.Wavelet('bior1.5').dec_lo / .dec_hi) and MATLAB's wfilters('bior1.5').
# The synthesis low-pass is the Haar pair, so the long low-pass reduces to a
# Haar split followed by one update step on neighbouring details.
BIOR15_DEC_LO = (
    0.01657281518405971, -0.01657281518405971, -0.12153397801643787, 0.12153397801643787,
    0.7071067811865476, 0.7071067811865476,
    0.12153397801643787, -0.12153397801643787, -0.01657281518405971, 0.01657281518405971,
)
BIOR15_DEC_HI = (0.0, 0.0, 0.0, 0.0, -0.7071067811865476, 0.7071067811865476, 0.0, 0.0, 0.0, 0.0)

_UPDATE_NEAR = BIOR15_DEC_LO[3] / BIOR15_DEC_LO[4]   # 22/128
_UPDATE_FAR = BIOR15_DEC_LO[9] / BIOR15_DEC_LO[4]    # 3/128
_SQRT2 = math.sqrt(2.0)

FMAP_MAGIC = b'FMAP'
_FMAP_HEADER = struct.Struct('<4sIIII')


def orientation_code(orientation: str) -> int:
    return ORIENTATIONS.index(orientation)


def channel_code(channel: str) -> int:
    return CHANNELS.index(channel)


def halved(size: int, times: int) -> int:
    """Apply ceiling halving ``times`` times."""
    for _ in range(times):
        size = (size + 1) // 2
    return size


def level_shape(source_shape: Tuple[int, int], level: int) -> Tuple[int, int]:
    """Dimensions of the feature maps at level ``level`` (1 = coarsest)."""
    times = LEVELS + 1 - level
    return halved(source_shape[0], times), halved(source_shape[1], times)


@dataclass(frozen=True)
class FeatureMap:
    """One subband plane tagged with its channel, level and orientation."""

    channel: str
    level: int
    orientation: str
    coefficients: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.coefficients.shape

    @property
    def is_approximation(self) -> bool:
        return self.orientation == 'A'

    def with_coefficients(self, coefficients: np.ndarray) -> 'FeatureMap':
        return replace(self, coefficients=coefficients)


@dataclass(frozen=True)
class Decomposition:
    """The 22 feature maps of one channel, approximation first, then s ascending in H, V, D order."""

    channel: str
    source_shape: Tuple[int, int]
    maps: Tuple[FeatureMap, ...]
    boundary: str = 'symmetric'

    @property
    def approximation(self) -> FeatureMap:
        return self.maps[0]

    @property
    def details(self) -> List[FeatureMap]:
        return [m for m in self.maps if not m.is_approximation]

    def detail(self, level: int, orientation: str) -> FeatureMap:
        for fmap in self.maps:
            if fmap.level == level and fmap.orientation == orientation:
                return fmap
        raise KeyError(f"no {orientation} map at level {level}")

    def coefficient_count(self) -> int:
        return sum(m.coefficients.size for m in self.maps)

    def with_maps(self, maps: List[FeatureMap]) -> 'Decomposition':
        return replace(self, maps=tuple(maps))


def _extend_details(detail: np.ndarray) -> np.ndarray:
    """Pad the Haar details by two samples per side; a symmetric signal gives antisymmetric details."""
    pad = [(0, 0)] * (detail.ndim - 1) + [(2, 2)]
    extended = np.pad(detail, pad, mode='symmetric')
    extended[..., :2] *= -1.0
    extended[..., -2:] *= -1.0
    return extended


def _update(detail: np.ndarray) -> np.ndarray:
    ext = _extend_details(detail)
    count = detail.shape[-1]
    previous, following = ext[..., 1:count + 1], ext[..., 3:count + 3]
    before, after = ext[..., 0:count], ext[..., 4:count + 4]
    return _UPDATE_NEAR * (previous - following) + _UPDATE_FAR * (after - before)


def lifting_split(signal: np.ndarray, axis: int = -1) -> Tuple[np.ndarray, np.ndarray]:
    """One analysis stage along ``axis``; returns (low, high) of length ceil(n / 2)."""
    x = np.moveaxis(np.asarray(signal, dtype=np.float64), axis, -1)
    if x.shape[-1] % 2:
        x = np.concatenate([x, x[..., -1:]], axis=-1)
    even, odd = x[..., 0::2], x[..., 1::2]
    detail = odd - even
    low = (even + odd + _update(detail)) / _SQRT2
    high = -detail / _SQRT2
    return np.moveaxis(low, -1, axis), np.moveaxis(high, -1, axis)


def lifting_merge(low: np.ndarray, high: np.ndarray, length: int, axis: int = -1) -> np.ndarray:
    """Inverse of lifting_split, cropped to ``length`` samples along ``axis``."""
    low = np.moveaxis(np.asarray(low, dtype=np.float64), axis, -1)
    high = np.moveaxis(np.asarray(high, dtype=np.float64), axis, -1)
    detail = -high * _SQRT2
    total = low * _SQRT2 - _update(detail)
    out = np.empty(low.shape[:-1] + (2 * low.shape[-1],), dtype=np.float64)
    out[..., 0::2] = (total - detail) / 2.0
    out[..., 1::2] = (total + detail) / 2.0
    return np.moveaxis(out[..., :length], -1, axis)


class WaveletBank:
    """Decomposes planes into feature maps and reconstructs them."""

    def __init__(self, boundary: str = 'symmetric'):
        if boundary not in BOUNDARY_MODES:
            raise ConfigError(f"Unknown boundary mode: {boundary}")
        self.boundary = boundary

    def decompose(self, plane: np.ndarray, channel: str = 'L') -> Decomposition:
        plane = np.asarray(plane, dtype=np.float64)
        if plane.ndim != 2:
            raise PlaneTooSmallError(f"expected a 2D plane, got shape {plane.shape}")
        if min(plane.shape) < MIN_PLANE_SIZE:
            raise PlaneTooSmallError(
                f"plane is {plane.shape[1]}x{plane.shape[0]}; seven levels need at least {MIN_PLANE_SIZE}"
            )

        if self.boundary == 'periodization':
            approximation, bands = self._decompose_periodized(plane)
        else:
            approximation, bands = self._decompose_symmetric(plane)

        maps = [FeatureMap(channel, 1, 'A', approximation)]
        for level, (horizontal, vertical, diagonal) in enumerate(bands, start=1):
            maps.append(FeatureMap(channel, level, 'H', horizontal))
            maps.append(FeatureMap(channel, level, 'V', vertical))
            maps.append(FeatureMap(channel, level, 'D', diagonal))

        logger.debug(f"Decomposed {channel} plane {plane.shape} into {len(maps)} feature maps")
        return Decomposition(channel, plane.shape, tuple(maps), self.boundary)

    def _decompose_symmetric(self, plane: np.ndarray):
        bands = []
        current = plane
        for _ in range(LEVELS):
            low_rows, high_rows = lifting_split(current, axis=0)
            approx, vertical = lifting_split(low_rows, axis=1)
            horizontal, diagonal = lifting_split(high_rows, axis=1)
            bands.append((horizontal, vertical, diagonal))
            current = approx
        # bands were produced finest first
        return current, bands[::-1]

    def _decompose_periodized(self, plane: np.ndarray):
        with warnings.catch_warnings():
            # every coefficient of a seven-level bior1.5 transform touches the boundary
            warnings.simplefilter('ignore', UserWarning)
            coeffs = pywt.wavedec2(plane, WAVELET_NAME, mode='periodization', level=LEVELS)
        return coeffs[0], [tuple(band) for band in coeffs[1:]]

    def reconstruct(self, decomposition: Decomposition) -> np.ndarray:
        self.validate(decomposition)
        if decomposition.boundary != self.boundary:
            return WaveletBank(decomposition.boundary).reconstruct(decomposition)

        approx = decomposition.approximation.coefficients
        bands = [
            tuple(decomposition.detail(level, o).coefficients for o in DETAIL_ORIENTATIONS)
            for level in range(1, LEVELS + 1)
        ]
        height, width = decomposition.source_shape

        if self.boundary == 'periodization':
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', UserWarning)
                plane = pywt.waverec2([approx] + bands, WAVELET_NAME, mode='periodization')
            return plane[:height, :width]

        current = approx
        for level, (horizontal, vertical, diagonal) in enumerate(bands, start=1):
            stage_times = LEVELS - level
            out_height = halved(height, stage_times)
            out_width = halved(width, stage_times)
            low_rows = lifting_merge(current, vertical, out_width, axis=1)
            high_rows = lifting_merge(horizontal, diagonal, out_width, axis=1)
            current = lifting_merge(low_rows, high_rows, out_height, axis=0)
        return current

    @staticmethod
    def validate(decomposition: Decomposition):
        """Check that a decomposition holds all 22 maps with the expected dimensions."""
        maps = decomposition.maps
        expected = 1 + LEVELS * len(DETAIL_ORIENTATIONS)
        if len(maps) != expected:
            raise InconsistentDimensionsError(f"expected {expected} feature maps, got {len(maps)}")

        approximations = [m for m in maps if m.is_approximation]
        if len(approximations) != 1 or approximations[0].level != 1:
            raise InconsistentDimensionsError("exactly one approximation map at level 1 is required")

        seen = set()
        for fmap in maps:
            want = level_shape(decomposition.source_shape, fmap.level)
            if fmap.coefficients.shape != want:
                raise InconsistentDimensionsError(
                    f"{fmap.channel} {fmap.orientation} map at level {fmap.level} has shape "
                    f"{fmap.coefficients.shape}, expected {want}"
                )
            seen.add((fmap.level, fmap.orientation))
        missing = [(s, o) for s in range(1, LEVELS + 1) for o in DETAIL_ORIENTATIONS if (s, o) not in seen]
        if missing:
            raise InconsistentDimensionsError(f"missing detail maps: {missing}")


def decompose(plane: np.ndarray, channel: str = 'L', boundary: str = 'symmetric') -> Decomposition:
    return WaveletBank(boundary).decompose(plane, channel)


def reconstruct(decomposition: Decomposition) -> np.ndarray:
    return WaveletBank(decomposition.boundary).reconstruct(decomposition)


def level_statistics(decomposition: Decomposition) -> Dict[int, float]:
    """Population standard deviation of the pooled H/V/D coefficients per level, coarse to fine."""
    stats = {}
    for level in range(1, LEVELS + 1):
        pooled = np.concatenate([
            decomposition.detail(level, o).coefficients.ravel() for o in DETAIL_ORIENTATIONS
        ])
        stats[level] = float(np.std(pooled))
    return stats


def count_nonincreasing_transitions(stats: Dict[int, float]) -> int:
    """How many coarse-to-fine level transitions do not increase the standard deviation."""
    levels = sorted(stats)
    return sum(1 for s in levels[:-1] if stats[s + 1] <= stats[s])


def write_feature_map(fmap: FeatureMap, path: str):
    """Dump one feature map: 'FMAP', u32 width, height, level, code, then row-major f32.

    The code keeps the orientation in its low two bits and the channel above them.
    """
    height, width = fmap.coefficients.shape
    code = orientation_code(fmap.orientation) | (channel_code(fmap.channel) << 2)
    with open(path, 'wb') as f:
        f.write(_FMAP_HEADER.pack(FMAP_MAGIC, width, height, fmap.level, code))
        f.write(np.ascontiguousarray(fmap.coefficients, dtype='<f4').tobytes())


def read_feature_map(path: str) -> FeatureMap:
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < _FMAP_HEADER.size:
        raise DumpFormatError(f"{path}: truncated feature map header")
    magic, width, height, level, code = _FMAP_HEADER.unpack_from(data)
    if magic != FMAP_MAGIC:
        raise DumpFormatError(f"{path}: bad magic {magic!r}")
    payload = data[_FMAP_HEADER.size:]
    if len(payload) != 4 * width * height:
        raise DumpFormatError(f"{path}: expected {width * height} values, found {len(payload) // 4}")
    try:
        orientation = ORIENTATIONS[code & 0b11]
        channel = CHANNELS[code >> 2]
    except IndexError:
        raise DumpFormatError(f"{path}: bad orientation/channel code {code}")
    values = np.frombuffer(payload, dtype='<f4').reshape(height, width).astype(np.float64)
    return FeatureMap(channel, level, orientation, values)
