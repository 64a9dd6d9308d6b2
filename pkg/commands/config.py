"""
Run configuration for the command line front end.

Values resolve in three layers: built-in defaults, then an optional flat
key=value config file, then explicit command line flags.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values

from model.center_surround import MODES
from model.errors import ConfigError
from model.frequency_scaling import ScalingParams
from model.wavelet_bank import BOUNDARY_MODES

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ('json', 'csv')
_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


@dataclass(frozen=True)
class RunConfig:
    k1: float = 31.0
    k2: float = 3.0
    cr_threshold: float = 0.25
    mode: str = 'cs'
    sigma_floor: float = 1e-6
    include_approximation: bool = True
    boundary: str = 'symmetric'
    format: str = 'json'
    jobs: int = 1
    seed: int = 0
    plcc_raw: bool = False

    def __post_init__(self):
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"Unknown output format: {self.format} (expected json or csv)")
        if self.boundary not in BOUNDARY_MODES:
            raise ConfigError(f"Unknown boundary mode: {self.boundary}")
        # ScalingParams owns the remaining invariants.
        self.scaling_params()

    def scaling_params(self) -> ScalingParams:
        return ScalingParams(self.k1, self.k2, self.cr_threshold, self.sigma_floor, self.mode)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _convert(name: str, kind: type, text: str) -> Any:
    text = str(text).strip()
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
    except ValueError:
        raise ConfigError(f"invalid value for {name}: '{text}'")
    return text


def read_config_file(path: str) -> Dict[str, Any]:
    """Parse a key=value file into typed RunConfig fields; unknown keys are errors."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for key, text in dotenv_values(path).items():
        name = key.strip().lower().replace('-', '_')
        if name not in types:
            raise ConfigError(f"{path}: unknown setting '{key}'")
        if text is None:
            raise ConfigError(f"{path}: setting '{key}' has no value")
        values[name] = _convert(name, types[name], text)
        if name == 'mode':
            values[name] = parse_mode(values[name])
    logger.debug(f"Read {len(values)} setting(s) from {path}")
    return values


def resolve_config(config_path: Optional[str] = None, **overrides) -> RunConfig:
    """Defaults, then the config file, then every override that is not None."""
    config = RunConfig()
    if config_path:
        config = replace(config, **read_config_file(config_path))
    explicit = {k: v for k, v in overrides.items() if v is not None}
    if explicit:
        config = replace(config, **explicit)
    return config


def parse_mode(text: str) -> str:
    mode = text.strip().lower()
    if mode not in MODES:
        raise ConfigError(f"Unknown normalization mode: {text} (expected one of {', '.join(MODES)})")
    return mode


def parse_axis(text: str) -> List[float]:
    """'a:b:step' expands inclusively; 'a' or 'a,b,c' are taken literally."""
    text = text.strip()
    try:
        if ':' not in text:
            values = [float(v) for v in text.split(',') if v.strip()]
        else:
            parts = [float(p) for p in text.split(':')]
            if len(parts) != 3:
                raise ValueError(text)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ConfigError(f"axis '{text}' needs start <= stop and a positive step")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(count)]
    except ValueError:
        raise ConfigError(f"invalid axis '{text}' (expected start:stop:step or a comma list)")
    if not values:
        raise ConfigError(f"axis '{text}' is empty")
    return values
