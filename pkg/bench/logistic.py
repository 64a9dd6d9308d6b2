"""
Five-parameter logistic mapping from objective scores to subjective ratings.

    f(x) = b1 * (1/2 - 1 / (1 + exp(b2 * (x - b3)))) + b4 * x + b5

The fit minimizes the squared residual with a Nelder-Mead simplex from three
deterministic starting points. Both axes are standardized before fitting and
the parameters are mapped back afterwards, so distances in the range of
thousands fit as well as unit-scale scores.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from model.errors import ConfigError

logger = logging.getLogger(__name__)

MIN_POINTS = 5
REFINE_ROUNDS = 3
_SIMPLEX_OPTIONS = {'xatol': 1e-10, 'fatol': 1e-16, 'maxiter': 40000, 'maxfev': 80000, 'adaptive': True}


def logistic(x, b1: float, b2: float, b3: float, b4: float, b5: float):
    x = np.asarray(x, dtype=np.float64)
    # 1 / (1 + exp(t)) == expit(-t), without overflow for large |t|
    return b1 * (0.5 - expit(-b2 * (x - b3))) + b4 * x + b5


@dataclass(frozen=True)
class LogisticFit:
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    converged: bool
    residual: float

    @property
    def params(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3, self.b4, self.b5])

    def predict(self, x) -> np.ndarray:
        return logistic(x, *self.params)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'b1': self.b1, 'b2': self.b2, 'b3': self.b3, 'b4': self.b4, 'b5': self.b5,
            'converged': self.converged,
            'residual': self.residual,
        }


def _initial_guesses(z: np.ndarray, w: np.ndarray):
    base = np.array([np.ptp(w), 1.0 / max(float(np.std(z)), 1e-12), float(np.median(z)), 0.0, float(np.mean(w))])
    flipped = base.copy()
    flipped[0] = -base[0]
    steep = base.copy()
    steep[1] = 3.0 * base[1]
    return [base, flipped, steep]


def fit_logistic(objective: Sequence[float], mos: Sequence[float]) -> LogisticFit:
    """Least-squares fit of the logistic; returns the best of the multi-start runs.

    Non-convergence is flagged on the result; the best parameters found are
    returned regardless.
    """
    x = np.asarray(objective, dtype=np.float64).ravel()
    y = np.asarray(mos, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ConfigError(f"objective and mos lengths differ ({x.size} vs {y.size})")
    if x.size < MIN_POINTS:
        raise ConfigError(f"logistic fit needs at least {MIN_POINTS} points, got {x.size}")

    x_mean, x_scale = float(np.mean(x)), float(np.std(x)) or 1.0
    y_mean, y_scale = float(np.mean(y)), float(np.std(y)) or 1.0
    z = (x - x_mean) / x_scale
    w = (y - y_mean) / y_scale

    def cost(p):
        return float(np.sum((logistic(z, *p) - w) ** 2))

    best = None
    for guess in _initial_guesses(z, w):
        result = minimize(cost, guess, method='Nelder-Mead', options=_SIMPLEX_OPTIONS)
        if best is None or result.fun < best.fun:
            best = result

    # Restart from the optimum until it stops improving.
    for _ in range(REFINE_ROUNDS):
        result = minimize(cost, best.x, method='Nelder-Mead', options=_SIMPLEX_OPTIONS)
        if result.fun >= best.fun:
            break
        best = result

    b1n, b2n, b3n, b4n, b5n = best.x
    params = (
        y_scale * b1n,
        b2n / x_scale,
        x_mean + x_scale * b3n,
        y_scale * b4n / x_scale,
        y_mean + y_scale * b5n - y_scale * b4n * x_mean / x_scale,
    )
    converged = bool(best.success) and all(np.isfinite(params))
    residual = float(np.linalg.norm(logistic(x, *params) - y))
    if not converged:
        logger.warning(f"Logistic fit did not converge: {best.message}")
    logger.debug(f"Logistic fit: params={params}, residual={residual:.6g}")
    return LogisticFit(*(float(p) for p in params), converged=converged, residual=residual)
