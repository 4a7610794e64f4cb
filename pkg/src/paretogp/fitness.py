"""Error metrics: the 1 - R^2 evolution objective and RMSE-style reporting.

Standard deviations are population (ddof=0) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class QualityVector:
    complexity: int
    error: float
    age: int = 0

    def __post_init__(self):
        if self.complexity < 1:
            raise ValueError("complexity must be >= 1")
        if not 0.0 <= self.error <= 1.0:
            raise ValueError(f"error {self.error} outside [0, 1]")
        if self.age < 0:
            raise ValueError("age must be >= 0")


def _pair(pred, obs, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    obs = np.asarray(obs, dtype=np.float64).ravel()
    if pred.shape != obs.shape:
        raise InputError(f"length mismatch: {pred.size} predictions vs {obs.size} observations")
    if pred.size < min_len:
        raise InputError(f"need at least {min_len} values, got {pred.size}")
    return pred, obs


def _r(pred: np.ndarray, obs: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        n = pred.size
        dp = pred - pred.sum() / n
        do = obs - obs.sum() / n
        sp = float(dp @ dp)
        so = float(do @ do)
        if not (math.isfinite(sp) and math.isfinite(so)) or sp == 0.0 or so == 0.0:
            return math.nan
        prod = sp * so
        # sqrt of the product keeps r exactly 1 for identical inputs
        den = math.sqrt(prod) if math.isfinite(prod) and prod > 0 else math.sqrt(sp) * math.sqrt(so)
        r = float(dp @ do) / den
    return r if math.isfinite(r) else math.nan


def pearson(pred, obs) -> float:
    """Pearson correlation, or NaN when either side is constant or non-finite."""
    return _r(*_pair(pred, obs, 2))


def scaled_correlation_error(pred, obs) -> float:
    """``1 - r^2`` with ``r`` the Pearson correlation of predictions and observations.

    Non-finite or constant predictions score 1.0, the worst value.
    """
    pred, obs = _pair(pred, obs, 2)
    r = _r(pred, obs)  # non-finite predictions give NaN here
    if math.isnan(r):
        return 1.0
    return min(1.0, max(0.0, 1.0 - r * r))


def linear_scaling(pred, obs) -> tuple[float, float]:
    """``(offset, slope)`` mapping ``pred`` onto the mean and std of ``obs``.

    The slope carries the sign of the correlation so the scaled prediction is
    positively correlated with ``obs``.
    """
    pred, obs = _pair(pred, obs, 1)
    if not np.all(np.isfinite(pred)):
        raise InputError("predictions contain non-finite values")
    sd_pred = pred.std()
    if sd_pred == 0.0 or not np.isfinite(sd_pred):
        raise InputError("predictions have zero variance; report mean(obs) instead")
    r = pearson(pred, obs) if pred.size >= 2 else float("nan")
    sign = -1.0 if r < 0 else 1.0
    slope = sign * obs.std() / sd_pred
    offset = obs.mean() - slope * pred.mean()
    return float(offset), float(slope)


def scale_to_observed(pred, obs) -> np.ndarray:
    pred_a, obs_a = _pair(pred, obs, 1)
    offset, slope = linear_scaling(pred_a, obs_a)
    sign = 1.0 if slope >= 0 else -1.0
    sd_ratio = obs_a.std() / pred_a.std()
    # centred form keeps the mean/std identities tight
    return (pred_a - pred_a.mean()) * (sign * sd_ratio) + obs_a.mean()


def rmse(pred, obs) -> float:
    pred, obs = _pair(pred, obs, 1)
    return float(np.sqrt(np.mean((obs - pred) ** 2)))


def normalized_rmse(pred, obs) -> float:
    """RMSE divided by the observed range, as a fraction."""
    pred, obs = _pair(pred, obs, 1)
    span = obs.max() - obs.min()
    if span == 0.0:
        raise InputError("observations are constant; normalized RMSE undefined")
    return rmse(pred, obs) / float(span)
