"""
Frequency scaling of normalized feature maps with chroma-ratio color adaptation.

Each detail map is multiplied by delta = K2 / sigma + K1, where sigma is the
map's own standard deviation. When the color ratio Cr of an image reaches the
threshold, every orientation of every channel at level s is instead scaled by
K2 / sigma_L(s) + K2 / (sigma_a(s) * sigma_b(s)) + K1.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from model.center_surround import MODES
from model.errors import ConfigError, DegenerateLuminanceError
from model.wavelet_bank import CHANNELS, DETAIL_ORIENTATIONS, LEVELS, Decomposition

logger = logging.getLogger(__name__)

STANDARD = 'standard'
COLOR_ADAPTED = 'color_adapted'
BRANCHES = (STANDARD, COLOR_ADAPTED)


@dataclass(frozen=True)
class ScalingParams:
    k1: float = 31.0
    k2: float = 3.0
    cr_threshold: float = 0.25
    sigma_floor: float = 1e-6
    mode: str = 'cs'

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ConfigError(f"K1 and K2 must be non-negative, got K1={self.k1}, K2={self.k2}")
        if self.cr_threshold <= 0:
            raise ConfigError(f"color ratio threshold must be positive, got {self.cr_threshold}")
        if self.sigma_floor <= 0:
            raise ConfigError(f"sigma floor must be positive, got {self.sigma_floor}")
        if self.mode not in MODES:
            raise ConfigError(f"Unknown normalization mode: {self.mode}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ChannelStats:
    """Standard deviations of the normalized detail maps.

    map_sigma is keyed by (channel, s, o); level_sigma by (channel, s) and
    pools the three detail orientations of that level.
    """

    map_sigma: Dict[Tuple[str, int, str], float]
    level_sigma: Dict[Tuple[str, int], float]

    def sigma(self, channel: str, level: int) -> float:
        return self.level_sigma.get((channel, level), 0.0)

    def sigma_ab(self, level: int) -> float:
        return self.sigma('a', level) * self.sigma('b', level)


def compute_channel_stats(decompositions: Dict[str, Decomposition]) -> ChannelStats:
    map_sigma = {}
    level_sigma = {}
    for channel, decomposition in decompositions.items():
        for level in range(1, LEVELS + 1):
            pooled = []
            for orientation in DETAIL_ORIENTATIONS:
                coeffs = decomposition.detail(level, orientation).coefficients
                map_sigma[(channel, level, orientation)] = float(np.std(coeffs))
                pooled.append(coeffs.ravel())
            level_sigma[(channel, level)] = float(np.std(np.concatenate(pooled)))
    return ChannelStats(map_sigma, level_sigma)


def compute_color_ratio(stats: ChannelStats, n: int = LEVELS, sigma_floor: float = 1e-6,
                        substitute_floor: bool = False) -> float:
    """Cr = sum over levels 1..n of (sigma_a + sigma_b) / sigma_L.

    Raises DegenerateLuminanceError when a luminance deviation is below the
    floor, unless substitute_floor is set, in which case the floor is used.
    """
    degenerate = [s for s in range(1, n + 1) if stats.sigma('L', s) < sigma_floor]
    if degenerate and not substitute_floor:
        raise DegenerateLuminanceError(degenerate)

    ratio = 0.0
    for s in range(1, n + 1):
        sigma_l = max(stats.sigma('L', s), sigma_floor)
        ratio += (stats.sigma('a', s) + stats.sigma('b', s)) / sigma_l
    return ratio


def scale_factor(sigma: float, params: ScalingParams) -> float:
    return params.k2 / max(sigma, params.sigma_floor) + params.k1


def color_adapted_scale_factor(sigma_l: float, sigma_ab: float, params: ScalingParams) -> float:
    return (params.k2 / max(sigma_l, params.sigma_floor)
            + params.k2 / max(sigma_ab, params.sigma_floor)
            + params.k1)


def decide_branch(color_ratio: float, params: ScalingParams) -> str:
    return COLOR_ADAPTED if color_ratio >= params.cr_threshold else STANDARD


@dataclass
class ScalingResult:
    decompositions: Dict[str, Decomposition]
    stats: ChannelStats
    color_ratio: float
    branch: str
    degenerate: bool = False
    factors: Dict[Tuple[str, int, str], float] = field(default_factory=dict)

    def diagnostics(self) -> List[Dict[str, Any]]:
        """One row per detail map: channel, s, o, sigma, delta, Cr, branch."""
        rows = []
        for (channel, level, orientation), delta in sorted(
                self.factors.items(), key=lambda item: (CHANNELS.index(item[0][0]), item[0][1],
                                                        DETAIL_ORIENTATIONS.index(item[0][2]))):
            rows.append({
                'channel': channel,
                's': level,
                'o': orientation,
                'sigma': self.stats.map_sigma[(channel, level, orientation)],
                'delta': delta,
                'cr': self.color_ratio,
                'branch': self.branch,
            })
        return rows


def apply_scaling(decompositions: Dict[str, Decomposition], params: ScalingParams,
                  branch: Optional[str] = None) -> ScalingResult:
    """Scale every detail map by its delta; the approximation maps are left as they are.

    ``branch`` forces the standard or color-adapted path; by default the
    branch follows the image's own color ratio.
    """
    if branch is not None and branch not in BRANCHES:
        raise ConfigError(f"Unknown scaling branch: {branch}")

    stats = compute_channel_stats(decompositions)
    degenerate = False
    try:
        color_ratio = compute_color_ratio(stats, LEVELS, params.sigma_floor)
    except DegenerateLuminanceError as e:
        logger.warning(f"Degenerate luminance ({e}); substituting sigma floor {params.sigma_floor}")
        color_ratio = compute_color_ratio(stats, LEVELS, params.sigma_floor, substitute_floor=True)
        degenerate = True

    chosen = branch or decide_branch(color_ratio, params)
    factors = {}
    scaled = {}
    for channel, decomposition in decompositions.items():
        maps = []
        for fmap in decomposition.maps:
            if fmap.is_approximation:
                maps.append(fmap)
                continue
            key = (channel, fmap.level, fmap.orientation)
            if chosen == COLOR_ADAPTED:
                delta = color_adapted_scale_factor(stats.sigma('L', fmap.level), stats.sigma_ab(fmap.level), params)
            else:
                delta = scale_factor(stats.map_sigma[key], params)
            factors[key] = delta
            logger.debug(f"{channel} s={fmap.level} {fmap.orientation}: sigma={stats.map_sigma[key]:.6g}, delta={delta:.6g}")
            maps.append(fmap.with_coefficients(fmap.coefficients * delta))
        scaled[channel] = decomposition.with_maps(maps)

    logger.debug(f"Scaling: Cr={color_ratio:.6g}, branch={chosen}")
    return ScalingResult(scaled, stats, color_ratio, chosen, degenerate, factors)


def scaling_diagnostics(result: ScalingResult) -> List[Dict[str, Any]]:
    return result.diagnostics()
