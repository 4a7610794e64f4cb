"""Diverse model ensembles: greedy residual-decorrelated selection, median prediction
and standard-deviation spread."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError
from .evolution.models import GPModel, dedupe, models_from_dict, models_to_dict
from .fitness import normalized_rmse, scaled_correlation_error


@dataclass
class Ensemble:
    members: list
    complexity_cap: int
    size: int
    train_errors: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) < 2:
            raise InputError("an ensemble needs at least two members")
        texts = [m.expression for m in self.members]
        if len(set(texts)) != len(texts):
            raise InputError("ensemble members must be distinct expressions")

    @property
    def variables(self) -> tuple:
        return self.members[0].variables

    def to_dict(self) -> dict:
        m0 = self.members[0]
        return models_to_dict(self.members, m0.variables, m0.ranges,
                              complexity_cap=self.complexity_cap, size=self.size,
                              train_errors=list(self.train_errors))

    @classmethod
    def from_dict(cls, d: dict) -> "Ensemble":
        return cls(models_from_dict(d), d["complexity_cap"], d["size"],
                   d.get("train_errors", []))


def _abs_corr(R: np.ndarray) -> np.ndarray:
    """Absolute correlation between residual rows; constant rows correlate 0."""
    Rc = R - R.mean(axis=1, keepdims=True)
    norm = np.sqrt(np.einsum("ij,ij->i", Rc, Rc))
    safe = np.where(norm > 0, norm, 1.0)
    U = Rc / safe[:, None]
    C = np.abs(U @ U.T)
    C[norm == 0, :] = 0.0
    C[:, norm == 0] = 0.0
    return np.clip(C, 0.0, 1.0)


def residuals(models: Sequence[GPModel], training) -> np.ndarray:
    """Observed minus scaled prediction, one row per model."""
    y = np.asarray(training.y, dtype=np.float64)
    return np.vstack([y - m.predict(training.X) for m in models])


def create_ensemble(model_set, training, size: int = 6, complexity_cap: int = 150) -> Ensemble:
    """Pick ``size`` members: seed with the most typical model, then add greedily.

    The seed has the highest median absolute residual correlation to the other
    candidates.  Each following step adds the candidate whose largest absolute
    residual correlation with the current members is smallest.  Ties go to lower
    error, then lower complexity, then earlier position.
    """
    models = list(getattr(model_set, "models", model_set))
    pool = [m for m in dedupe(models) if m.complexity <= complexity_cap]
    pool = [m for m in pool if np.all(np.isfinite(m.predict(training.X)))]
    if len(pool) < size:
        raise InputError(f"need {size} eligible models with complexity <= {complexity_cap}, "
                         f"found {len(pool)} (short by {size - len(pool)})")
    if len(pool) == size:
        chosen = list(range(size))
    else:
        C = _abs_corr(residuals(pool, training))
        n = len(pool)
        order_key = [(m.error, m.complexity, i) for i, m in enumerate(pool)]
        typical = [np.median(np.delete(C[i], i)) for i in range(n)]
        seed = min(range(n), key=lambda i: (-typical[i],) + order_key[i])
        chosen = [seed]
        worst = C[seed].copy()  # max |corr| with current members
        while len(chosen) < size:
            rest = [i for i in range(n) if i not in chosen]
            nxt = min(rest, key=lambda i: (worst[i],) + order_key[i])
            chosen.append(nxt)
            worst = np.maximum(worst, C[nxt])
    members = [pool[i] for i in chosen]
    errs = [scaled_correlation_error(m.predict(training.X), training.y) for m in members]
    return Ensemble(members, complexity_cap, size, errs)


@dataclass
class PredictionBand:
    point: np.ndarray
    spread: np.ndarray
    valid: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        return self.point - self.spread

    @property
    def upper(self) -> np.ndarray:
        return self.point + self.spread


def member_predictions(e: Ensemble, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(e.variables):
        raise InputError(f"rows must have {len(e.variables)} columns ({list(e.variables)})")
    return np.vstack([m.predict(X) for m in e.members])


def band_from_predictions(P: np.ndarray) -> PredictionBand:
    """Median and population std over members (rows of ``P``), ignoring non-finite values."""
    P = np.where(np.isfinite(P), P, np.nan)
    valid = ~np.all(np.isnan(P), axis=0)
    point = np.full(P.shape[1], np.nan)
    spread = np.full(P.shape[1], np.nan)
    if valid.any():
        Q = P[:, valid]
        point[valid] = np.nanmedian(Q, axis=0)
        spread[valid] = np.nanstd(Q, axis=0)
    return PredictionBand(point, spread, valid)


def ensemble_predict(e: Ensemble, X) -> PredictionBand:
    return band_from_predictions(member_predictions(e, X))


def evaluate_ensemble(e: Ensemble, test, training=None) -> dict:
    """Normalized test RMSE of the median prediction plus per-member errors.

    Returns ``normalized_rmse``, ``members`` (complexity, train error, test
    error, expression) and ``pairs`` (observed, point, spread) for plotting.
    """
    if not len(test.y):
        raise InputError("test set is empty")
    band = ensemble_predict(e, test.X)
    ok = band.valid
    members = []
    for k, m in enumerate(e.members):
        if training is not None:
            tr = scaled_correlation_error(m.predict(training.X), training.y)
        elif e.train_errors:
            tr = e.train_errors[k]
        else:
            tr = m.error
        members.append({"expression": m.expression, "complexity": m.complexity,
                        "train_error": tr,
                        "test_error": scaled_correlation_error(m.predict(test.X), test.y)})
    nrmse = normalized_rmse(band.point[ok], test.y[ok]) if ok.any() else float("nan")
    return {
        "normalized_rmse": nrmse,
        "valid_rows": int(ok.sum()),
        "members": members,
        "pairs": {"observed": test.y, "point": band.point, "spread": band.spread},
    }
