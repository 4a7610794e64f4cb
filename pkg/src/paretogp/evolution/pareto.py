"""Nondominated sorting, layered truncation and Pareto tournaments (all minimisation)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import _kernels


def _objectives(points) -> np.ndarray:
    F = np.asarray(points, dtype=np.float64)
    if F.ndim != 2:
        raise ValueError("objective array must be 2-D (n_points, n_objectives)")
    # non-finite objective values rank as worst
    return np.where(np.isfinite(F), F, np.finfo(np.float64).max)


def nondominated_sort(points) -> list[list[int]]:
    """Indices of ``points`` grouped into successive Pareto layers.

    Layer 0 is the nondominated set; layer ``k`` is nondominated once layers
    ``< k`` are removed.  Each layer lists indices in ascending order.
    """
    F = _objectives(points)
    n = F.shape[0]
    if n == 0:
        return []
    D = _kernels.dominance_matrix(np.ascontiguousarray(F))
    remaining = D.sum(axis=0).astype(np.int64)  # how many points dominate j
    layers = []
    current = np.flatnonzero(remaining == 0)
    assigned = np.zeros(n, dtype=bool)
    while current.size:
        layers.append(current.tolist())
        assigned[current] = True
        remaining -= D[current].sum(axis=0)
        current = np.flatnonzero((remaining == 0) & ~assigned)
    return layers


def nondominated(points) -> list[int]:
    F = _objectives(points)
    if F.shape[0] == 0:
        return []
    D = _kernels.dominance_matrix(np.ascontiguousarray(F))
    return np.flatnonzero(~D.any(axis=0)).tolist()


def select_by_layers(points, k: int, tiebreak: Sequence[int] | None = None) -> list[int]:
    """Choose ``k`` indices by admitting whole Pareto layers, truncating the last.

    Members of the partially admitted layer are ordered lexicographically by the
    objective columns listed in ``tiebreak`` (default: column order), then by index.
    """
    F = _objectives(points)
    if k >= F.shape[0]:
        return list(range(F.shape[0]))
    cols = list(range(F.shape[1])) if tiebreak is None else list(tiebreak)
    chosen: list[int] = []
    for layer in nondominated_sort(F):
        if len(chosen) + len(layer) <= k:
            chosen.extend(layer)
            if len(chosen) == k:
                break
            continue
        ranked = sorted(layer, key=lambda i: tuple(F[i, c] for c in cols) + (i,))
        chosen.extend(ranked[:k - len(chosen)])
        break
    return chosen


def pareto_tournament(points, rng: np.random.Generator, size: int = 30) -> list[int]:
    """Sample ``size`` entrants without replacement; return the nondominated ones.

    Winners are returned in the order they were drawn.
    """
    n = len(points)
    if n < size:
        raise ValueError(f"population of {n} is smaller than tournament size {size}")
    entrants = rng.choice(n, size=size, replace=False)
    F = _objectives(points)[entrants]
    return [int(entrants[i]) for i in nondominated(F)]
