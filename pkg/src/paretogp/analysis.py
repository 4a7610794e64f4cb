"""Post-run curation: robustness screening, model-set selection and variable drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .evolution.models import GPModel, dedupe, models_from_dict, models_to_dict
from .evolution.pareto import nondominated_sort
from .expr import evaluate_rows, interval_eval
from .fitness import scaled_correlation_error


def filter_robust(models: Sequence[GPModel], ranges=None) -> list[GPModel]:
    """Distinct models whose interval bound over ``ranges`` is finite and singularity-free.

    ``ranges`` defaults to each model's own recorded training ranges.
    """
    kept = []
    for m in dedupe(models):
        box = m.ranges if ranges is None else ranges
        iv = interval_eval(m.tree, box)
        if not iv.pathological and iv.bounded:
            kept.append(m)
    return kept


@dataclass
class ModelSet:
    models: list
    max_error: float
    max_complexity: float
    retain_fraction: float
    source_size: int
    layers: list = field(default_factory=list)  # Pareto layer index per member
    diagnostics: str = ""

    def __len__(self) -> int:
        return len(self.models)

    def to_dict(self) -> dict:
        variables = self.models[0].variables if self.models else ()
        ranges = self.models[0].ranges if self.models else ()
        return models_to_dict(
            self.models, variables, ranges,
            selection={"max_error": self.max_error, "max_complexity": self.max_complexity,
                       "retain_fraction": self.retain_fraction},
            source_size=self.source_size, layers=list(self.layers),
            diagnostics=self.diagnostics)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSet":
        sel = d["selection"]
        return cls(models_from_dict(d), sel["max_error"], sel["max_complexity"],
                   sel["retain_fraction"], d["source_size"], d.get("layers", []),
                   d.get("diagnostics", ""))


def select_model_set(models: Sequence[GPModel], max_error: float, max_complexity: float,
                     retain_fraction: float = 1.0) -> ModelSet:
    """Threshold on error and complexity, then keep the given fraction closest to
    the (complexity, error) Pareto front: whole layers first, the last layer cut
    by ascending error."""
    if not 0.0 < retain_fraction <= 1.0:
        raise ValueError("retain_fraction must be in (0, 1]")
    models = list(models)
    passed = [m for m in models if m.error <= max_error and m.complexity <= max_complexity]
    if not passed:
        msg = (f"no model among {len(models)} has error <= {max_error} "
               f"and complexity <= {max_complexity}")
        if models:
            msg += (f"; best error {min(m.error for m in models):.4f}, "
                    f"lowest complexity {min(m.complexity for m in models)}")
        return ModelSet([], max_error, max_complexity, retain_fraction, len(models), [], msg)

    n_keep = max(1, math.ceil(retain_fraction * len(passed) - 1e-9))
    F = np.array([(m.complexity, m.error) for m in passed], dtype=np.float64)
    chosen, layer_of = [], []
    for k, layer in enumerate(nondominated_sort(F)):
        room = n_keep - len(chosen)
        if room <= 0:
            break
        if len(layer) > room:
            layer = sorted(layer, key=lambda i: (F[i, 1], F[i, 0], i))[:room]
        chosen.extend(layer)
        layer_of.extend([k] * len(layer))
    return ModelSet([passed[i] for i in chosen], max_error, max_complexity, retain_fraction,
                    len(models), layer_of)


@dataclass(frozen=True)
class VariableScore:
    name: str
    value: Optional[float]  # None when the variable occurs in no model
    rank: int
    n_models: int


def _ranked(names: Sequence[str], values: dict, counts: dict) -> list[VariableScore]:
    present = sorted((n for n in names if values.get(n) is not None),
                     key=lambda n: (-values[n], names.index(n)))
    absent = [n for n in names if values.get(n) is None]
    return [VariableScore(n, values.get(n), r + 1, counts.get(n, 0))
            for r, n in enumerate(present + absent)]


def variable_presence(model_set, names: Optional[Sequence[str]] = None) -> list[VariableScore]:
    """Share of models using each variable (counted once per model), sorted descending."""
    models = list(getattr(model_set, "models", model_set))
    if not models:
        raise ValueError("empty model set")
    names = list(names or models[0].variables)
    counts = {n: 0 for n in names}
    for m in models:
        for i in m.used:
            counts[m.variables[i]] += 1
    values = {n: counts[n] / len(models) for n in names}
    return _ranked(names, values, counts)


def variable_contribution(model_set, training) -> list[VariableScore]:
    """Median error increase when a variable's column is replaced by its training mean.

    Only models containing the variable contribute to its median; the result is
    floored at zero.  Variables used by no model get ``value=None``.
    """
    models = list(getattr(model_set, "models", model_set))
    names = list(training.names)
    X = np.asarray(training.X, dtype=np.float64)
    y = training.y
    means = X.mean(axis=0)
    per_var: dict[str, list] = {n: [] for n in names}
    for m in models:
        base = scaled_correlation_error(evaluate_rows(m.tree, X), y)
        for i in sorted(m.used):
            Xa = X.copy()
            Xa[:, i] = means[i]
            ablated = scaled_correlation_error(evaluate_rows(m.tree, Xa), y)
            per_var[m.variables[i]].append(ablated - base)
    values = {n: (max(0.0, float(np.median(v))) if v else None) for n, v in per_var.items()}
    counts = {n: len(v) for n, v in per_var.items()}
    return _ranked(names, values, counts)


@dataclass(frozen=True)
class Niche:
    variables: tuple
    count: int
    best_error: float
    best_expression: str


def niche_by_variable_combination(model_set) -> list[Niche]:
    """Group models by their exact variable set; rows sorted by best error."""
    models = list(getattr(model_set, "models", model_set))
    if not models:
        raise ValueError("empty model set")
    groups: dict[tuple, list] = {}
    for m in models:
        key = tuple(sorted(m.variables[i] for i in m.used))
        groups.setdefault(key, []).append(m)
    rows = []
    for key, ms in groups.items():
        best = min(ms, key=lambda m: (m.error, m.complexity))
        rows.append(Niche(key, len(ms), best.error, best.expression))
    rows.sort(key=lambda r: (r.best_error, len(r.variables), r.variables))
    return rows
