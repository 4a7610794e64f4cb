"""Pareto GP evolution: engine, selection utilities and archives."""

from .engine import evolve, evolve_many
from .models import (
    EvolutionConfig,
    GPModel,
    RunArchive,
    dedupe,
    merge_runs,
    models_from_dict,
    models_to_dict,
)
from .pareto import nondominated, nondominated_sort, pareto_tournament, select_by_layers

__all__ = [
    "EvolutionConfig", "GPModel", "RunArchive", "dedupe", "evolve", "evolve_many",
    "merge_runs", "models_from_dict", "models_to_dict", "nondominated",
    "nondominated_sort", "pareto_tournament", "select_by_layers",
]
