"""
Feature assembly and perceptual distance.

The FeatureExtractor runs the whole pipeline for one image: CIELab planes
are decomposed, normalized, frequency scaled and max pooled, and the pooled
maps are concatenated into a FeatureVector. Two vectors are compared with
the L1 distance.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from skimage.measure import block_reduce

from model.center_surround import DEFAULT_GEOMETRY, PatchGeometry, normalize_decomposition
from model.color_space import LabImage, RgbImage, srgb_to_lab
from model.errors import ConfigError, DimensionMismatchError, DumpFormatError, LayoutMismatchError
from model.frequency_scaling import ScalingParams, ScalingResult, apply_scaling
from model.wavelet_bank import (
    CHANNELS, ORIENTATIONS, Decomposition, WaveletBank, channel_code, orientation_code,
)

logger = logging.getLogger(__name__)

POOL_SIZE = 3

DUMP_MAGIC = b'CIIQF'
DUMP_VERSION = 1
_DUMP_HEADER = struct.Struct('<5sHH')
_SEGMENT_HEADER = struct.Struct('<BBBHH')


@dataclass(frozen=True)
class Segment:
    """Manifest entry for one pooled feature map inside a FeatureVector."""

    channel: str
    level: int
    orientation: str
    height: int
    width: int

    @property
    def size(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    layout: Tuple[Segment, ...]
    branch: Optional[str] = None
    color_ratio: Optional[float] = None
    degenerate: bool = False

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class QualityScore:
    e: float
    branch: str
    params: ScalingParams
    color_ratio: float = 0.0
    degenerate: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'e': self.e,
            'branch': self.branch,
            'cr': self.color_ratio,
            'degenerate': self.degenerate,
            'params': self.params.to_dict(),
        }


def max_pool(coefficients: np.ndarray, k: int = POOL_SIZE) -> np.ndarray:
    """Maximum over non-overlapping k x k tiles anchored at the top-left; edge tiles are clipped."""
    if k < 1:
        raise ConfigError(f"pooling size must be at least 1, got {k}")
    # -inf fill never wins a max, so partial tiles reduce over their real cells only
    return block_reduce(np.asarray(coefficients, dtype=np.float64), (k, k), np.max, cval=-np.inf)


def l1_distance(first: FeatureVector, second: FeatureVector) -> float:
    if first.layout != second.layout:
        raise LayoutMismatchError(
            f"feature layouts differ ({len(first.layout)} vs {len(second.layout)} segments)"
        )
    return float(np.sum(np.abs(first.values - second.values)))


def pooled_feature(decompositions: Dict[str, Decomposition], params: ScalingParams,
                   include_approximation: bool = True, branch: Optional[str] = None) -> FeatureVector:
    """Scale normalized decompositions, pool every map and concatenate.

    Segments are ordered by channel (L, a, b), then level ascending, then
    orientation A, H, V, D.
    """
    result = apply_scaling(decompositions, params, branch)
    values = []
    layout = []
    for channel in CHANNELS:
        maps = sorted(result.decompositions[channel].maps,
                      key=lambda m: (m.level, ORIENTATIONS.index(m.orientation)))
        for fmap in maps:
            if fmap.is_approximation and not include_approximation:
                continue
            pooled = max_pool(fmap.coefficients)
            layout.append(Segment(channel, fmap.level, fmap.orientation, *pooled.shape))
            values.append(pooled.ravel())

    return FeatureVector(
        values=np.concatenate(values),
        layout=tuple(layout),
        branch=result.branch,
        color_ratio=result.color_ratio,
        degenerate=result.degenerate,
    )


class FeatureExtractor:
    """Builds feature vectors and scores image pairs under one configuration."""

    def __init__(self, params: Optional[ScalingParams] = None, include_approximation: bool = True,
                 boundary: str = 'symmetric', geometry: PatchGeometry = DEFAULT_GEOMETRY):
        self.params = params or ScalingParams()
        self.include_approximation = include_approximation
        self.bank = WaveletBank(boundary)
        self.geometry = geometry

    def normalized_decompositions(self, lab: LabImage) -> Dict[str, Decomposition]:
        decompositions = {}
        for channel, plane in lab.planes().items():
            decomposition = self.bank.decompose(plane, channel)
            decompositions[channel] = normalize_decomposition(decomposition, self.params.mode, self.geometry)
        return decompositions

    def scale(self, lab: LabImage, branch: Optional[str] = None) -> ScalingResult:
        return apply_scaling(self.normalized_decompositions(lab), self.params, branch)

    def build_feature(self, lab: LabImage, branch: Optional[str] = None) -> FeatureVector:
        return pooled_feature(self.normalized_decompositions(lab), self.params,
                              self.include_approximation, branch)

    def score_pair(self, ref: RgbImage, dist: RgbImage) -> QualityScore:
        """L1 distance between the two feature vectors, both built under the reference's branch."""
        if ref.pixels.shape != dist.pixels.shape:
            raise DimensionMismatchError(
                f"reference is {ref.width}x{ref.height}, distorted is {dist.width}x{dist.height}"
            )
        return self.score_normalized(
            self.normalized_decompositions(srgb_to_lab(ref)),
            self.normalized_decompositions(srgb_to_lab(dist)),
        )

    def score_normalized(self, ref_decompositions: Dict[str, Decomposition],
                         dist_decompositions: Dict[str, Decomposition],
                         params: Optional[ScalingParams] = None) -> QualityScore:
        """Score already-normalized decompositions; ``params`` may vary K1, K2 and the threshold."""
        params = params or self.params
        ref_feature = pooled_feature(ref_decompositions, params, self.include_approximation)
        dist_feature = pooled_feature(dist_decompositions, params, self.include_approximation,
                                      branch=ref_feature.branch)
        e = l1_distance(ref_feature, dist_feature)
        logger.debug(f"Scored pair: e={e:.6g}, branch={ref_feature.branch}")
        return QualityScore(e, ref_feature.branch, params, ref_feature.color_ratio, ref_feature.degenerate)

    def normalized_reconstruction(self, lab: LabImage, channel: str = 'L') -> np.ndarray:
        """Inverse transform of one channel's coefficients after both normalization tiers."""
        decomposition = self.bank.decompose(lab.planes()[channel], channel)
        normalized = normalize_decomposition(decomposition, self.params.mode, self.geometry)
        return self.bank.reconstruct(normalized)


def build_feature(img: LabImage, params: Optional[ScalingParams] = None,
                  branch: Optional[str] = None) -> FeatureVector:
    return FeatureExtractor(params).build_feature(img, branch)


def score_pair(ref: RgbImage, dist: RgbImage, params: Optional[ScalingParams] = None) -> QualityScore:
    return FeatureExtractor(params).score_pair(ref, dist)


def write_feature_dump(feature: FeatureVector, path: str):
    """Write 'CIIQF', u16 version, u16 segment count, then per segment its header and f32 values."""
    with open(path, 'wb') as f:
        f.write(_DUMP_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, len(feature.layout)))
        offset = 0
        for segment in feature.layout:
            f.write(_SEGMENT_HEADER.pack(
                channel_code(segment.channel), segment.level, orientation_code(segment.orientation),
                segment.height, segment.width,
            ))
            chunk = feature.values[offset:offset + segment.size]
            f.write(np.ascontiguousarray(chunk, dtype='<f4').tobytes())
            offset += segment.size


def read_feature_dump(path: str) -> FeatureVector:
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < _DUMP_HEADER.size:
        raise DumpFormatError(f"{path}: truncated feature dump")
    magic, version, count = _DUMP_HEADER.unpack_from(data)
    if magic != DUMP_MAGIC:
        raise DumpFormatError(f"{path}: bad magic {magic!r}")
    if version != DUMP_VERSION:
        raise DumpFormatError(f"{path}: unsupported dump version {version}")

    offset = _DUMP_HEADER.size
    layout = []
    values = []
    for _ in range(count):
        if offset + _SEGMENT_HEADER.size > len(data):
            raise DumpFormatError(f"{path}: truncated segment header")
        ch, level, o, height, width = _SEGMENT_HEADER.unpack_from(data, offset)
        offset += _SEGMENT_HEADER.size
        nbytes = 4 * height * width
        if offset + nbytes > len(data):
            raise DumpFormatError(f"{path}: truncated segment values")
        values.append(np.frombuffer(data, dtype='<f4', count=height * width, offset=offset))
        offset += nbytes
        try:
            layout.append(Segment(CHANNELS[ch], level, ORIENTATIONS[o], height, width))
        except IndexError:
            raise DumpFormatError(f"{path}: bad channel/orientation code ({ch}, {o})")

    merged = np.concatenate(values).astype(np.float64) if values else np.zeros(0)
    return FeatureVector(merged, tuple(layout))
