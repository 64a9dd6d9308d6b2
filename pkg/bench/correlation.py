"""
Rank and linear agreement between objective scores and subjective ratings.
"""

from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from model.errors import DegenerateInputError


def _validate(x: Sequence[float], y: Sequence[float], allow_constant: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise DegenerateInputError(f"sequences differ in length ({x.size} vs {y.size})")
    if x.size < 2:
        raise DegenerateInputError(f"at least 2 points are required, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DegenerateInputError("sequences contain non-finite values")
    if not allow_constant:
        if np.all(x == x[0]):
            raise DegenerateInputError("first sequence is constant")
        if np.all(y == y[0]):
            raise DegenerateInputError("second sequence is constant")
    return x, y


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of mid-ranks."""
    x, y = _validate(x, y)
    return float(stats.spearmanr(x, y)[0])


def kendall(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected tau-b."""
    x, y = _validate(x, y)
    return float(stats.kendalltau(x, y, variant='b')[0])


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _validate(x, y)
    return float(stats.pearsonr(x, y)[0])


def rmse(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _validate(x, y, allow_constant=True)
    return float(np.sqrt(np.mean((x - y) ** 2)))
