"""GPModel / RunArchive records, their JSON form, and merging of runs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import ArtifactMissingError, InputError
from ..expr import Tree, complexity, evaluate_rows, format_tree, parse, variables_used
from ..fitness import QualityVector


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 300
    elite_size: int = 50
    tournament_size: int = 30
    crossover_rate: float = 0.9
    subtree_mutation_rate: float = 0.05
    depth_preserving_mutation_rate: float = 0.05
    max_complexity: int = 1000
    time_budget_seconds: Optional[float] = 2000.0
    max_generations: Optional[int] = None
    independent_evolutions: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        rates = (self.crossover_rate, self.subtree_mutation_rate,
                 self.depth_preserving_mutation_rate)
        if any(r < 0 for r in rates) or sum(rates) > 1.0 + 1e-12:
            raise InputError("variation rates must be non-negative and sum to <= 1")
        if min(self.population_size, self.elite_size, self.tournament_size,
               self.max_complexity, self.independent_evolutions) < 1:
            raise InputError("sizes must be positive")
        if self.elite_size >= self.population_size:
            raise InputError("elite_size must be smaller than population_size")
        if self.tournament_size > self.population_size:
            raise InputError("tournament_size cannot exceed population_size")
        if self.time_budget_seconds is None and self.max_generations is None:
            raise InputError("set time_budget_seconds, max_generations or both")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown evolution settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class GPModel:
    """An expression plus its quality and the data schema it was built on.

    ``offset`` and ``slope`` map raw tree output onto the response scale
    (fitted on the training data of the producing run).
    """

    tree: Tree
    error: float
    variables: tuple
    ranges: tuple
    age: int = 0
    run_id: int = 0
    generation: int = 0
    offset: float = 0.0
    slope: float = 1.0
    complexity: int = field(init=False)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        self.complexity = complexity(self.tree)

    @property
    def expression(self) -> str:
        return format_tree(self.tree, self.variables)

    @property
    def quality(self) -> QualityVector:
        return QualityVector(self.complexity, self.error, self.age)

    @property
    def used(self) -> set[int]:
        return variables_used(self.tree)

    def raw_predict(self, X) -> np.ndarray:
        return evaluate_rows(self.tree, X)

    def predict(self, X) -> np.ndarray:
        return self.offset + self.slope * evaluate_rows(self.tree, X)

    def to_dict(self) -> dict:
        return {
            "expression": self.expression,
            "complexity": self.complexity,
            "error": self.error,
            "age": self.age,
            "run": self.run_id,
            "generation": self.generation,
            "offset": self.offset,
            "slope": self.slope,
        }

    @classmethod
    def from_dict(cls, d: dict, variables: Sequence[str], ranges: Sequence) -> "GPModel":
        tree = parse(d["expression"], variables)
        model = cls(tree=tree, error=float(d["error"]), variables=variables, ranges=ranges,
                    age=int(d.get("age", 0)), run_id=int(d.get("run", 0)),
                    generation=int(d.get("generation", 0)),
                    offset=float(d.get("offset", 0.0)), slope=float(d.get("slope", 1.0)))
        if "complexity" in d and int(d["complexity"]) != model.complexity:
            raise InputError(f"stored complexity {d['complexity']} disagrees with "
                             f"expression {d['expression']!r} ({model.complexity})")
        return model


def dedupe(models: Sequence[GPModel]) -> list[GPModel]:
    """Drop repeated expressions, keeping the first occurrence."""
    seen = set()
    out = []
    for m in models:
        key = m.expression
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


@dataclass
class RunArchive:
    models: list
    variables: tuple
    ranges: tuple
    config: dict
    generations: int
    run_id: int = 0
    response: str = "y"

    def to_dict(self) -> dict:
        return {
            "run": self.run_id,
            "generations": self.generations,
            "response": self.response,
            "variables": list(self.variables),
            "ranges": [list(r) for r in self.ranges],
            "config": self.config,
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunArchive":
        variables = tuple(d["variables"])
        ranges = tuple(tuple(r) for r in d["ranges"])
        models = [GPModel.from_dict(m, variables, ranges) for m in d["models"]]
        return cls(models=models, variables=variables, ranges=ranges,
                   config=d.get("config", {}), generations=int(d.get("generations", 0)),
                   run_id=int(d.get("run", 0)), response=d.get("response", "y"))

    def save(self, path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "RunArchive":
        return cls.from_dict(read_json(path))


def merge_runs(archives: Sequence[RunArchive]) -> list[GPModel]:
    """Concatenate archives and drop repeated expressions (first occurrence wins)."""
    if not archives:
        return []
    schema = tuple(archives[0].variables)
    for a in archives[1:]:
        if tuple(a.variables) != schema:
            raise InputError(f"run {a.run_id} uses variables {list(a.variables)}, "
                             f"expected {list(schema)}")
    return dedupe([m for a in archives for m in a.models])


def models_to_dict(models: Sequence[GPModel], variables, ranges, **extra) -> dict:
    out = dict(extra)
    out["variables"] = list(variables)
    out["ranges"] = [list(r) for r in ranges]
    out["models"] = [m.to_dict() for m in models]
    return out


def models_from_dict(d: dict) -> list[GPModel]:
    variables = tuple(d["variables"])
    ranges = tuple(tuple(r) for r in d["ranges"])
    return [GPModel.from_dict(m, variables, ranges) for m in d["models"]]


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, allow_nan=True) + "\n")


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArtifactMissingError(f"missing artifact: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
