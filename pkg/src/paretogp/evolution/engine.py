"""The ParetoGP generation loop over (complexity, error, age)."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..errors import InputError
from ..expr import (
    TreeConfig,
    compile_tree,
    complexity,
    crossover,
    depth_preserving_mutation,
    format_tree,
    ramped_population,
    subtree_mutation,
)
from .. import _kernels
from ..fitness import linear_scaling, scaled_correlation_error
from .models import EvolutionConfig, GPModel, RunArchive, dedupe
from .pareto import nondominated, pareto_tournament, select_by_layers

log = logging.getLogger(__name__)

# truncation inside a partially admitted layer: error, then complexity, then age
_TIEBREAK = (1, 0, 2)


@dataclass(frozen=True)
class _Individual:
    tree: object
    text: str
    complexity: int
    error: float
    age: int
    born: int


class _Evaluator:
    def __init__(self, X: np.ndarray, y: np.ndarray):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self._cache: dict[str, float] = {}

    def predict(self, tree) -> np.ndarray:
        ops, args, consts = compile_tree(tree)
        return _kernels.eval_program(ops, args, consts, self.X)

    def make(self, tree, age: int, born: int) -> _Individual:
        text = format_tree(tree)
        err = self._cache.get(text)
        if err is None:
            err = scaled_correlation_error(self.predict(tree), self.y)
            self._cache[text] = err
        return _Individual(tree, text, complexity(tree), err, age, born)


def _objectives(inds, with_age: bool = True) -> np.ndarray:
    if with_age:
        return np.array([(i.complexity, i.error, i.age) for i in inds], dtype=np.float64)
    return np.array([(i.complexity, i.error) for i in inds], dtype=np.float64)


def _select(inds: list, k: int) -> list:
    """Layered selection of ``k`` individuals, distinct expressions first."""
    if k >= len(inds):
        return list(inds)
    seen = set()
    firsts, dups = [], []
    for i, ind in enumerate(inds):
        (dups if ind.text in seen else firsts).append(i)
        seen.add(ind.text)
    F = _objectives(inds)
    if len(firsts) >= k:
        picked = [firsts[j] for j in select_by_layers(F[firsts], k, _TIEBREAK)]
    else:
        extra = select_by_layers(F[dups], k - len(firsts), _TIEBREAK)
        picked = firsts + [dups[j] for j in extra]
    return [inds[i] for i in picked]


def _front(inds: list) -> list:
    """Distinct members of the 2-D (complexity, error) nondominated set."""
    uniq = list({i.text: i for i in reversed(inds)}.values())
    uniq.sort(key=lambda i: (i.complexity, i.error, i.text))
    if not uniq:
        return []
    keep = nondominated(_objectives(uniq, with_age=False))
    return [uniq[j] for j in keep]


def check_dataset(dataset) -> None:
    X = np.asarray(dataset.X)
    y = np.asarray(dataset.y)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise InputError("dataset needs at least 2 rows and 1 input column")
    if y.shape[0] != X.shape[0]:
        raise InputError("response length does not match input rows")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise InputError("dataset contains missing or non-finite values")
    if np.std(y) == 0.0:
        raise InputError("response has zero variance")


def evolve(dataset, config: EvolutionConfig, run_id: int = 0, seed=None) -> RunArchive:
    """Run one independent evolution and return its archive.

    ``dataset`` needs ``X``, ``y``, ``names`` and ``ranges``.  ``seed`` (int or
    ``numpy.random.SeedSequence``) defaults to ``config.rng_seed``.  The run
    stops after ``max_generations`` generations or once ``time_budget_seconds``
    has elapsed at the end of a generation, whichever comes first.
    """
    check_dataset(dataset)
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    ev = _Evaluator(dataset.X, dataset.y)
    tcfg = TreeConfig(n_variables=ev.X.shape[1], max_complexity=config.max_complexity)
    N, E, T = config.population_size, config.elite_size, config.tournament_size
    cx = config.crossover_rate
    sm = cx + config.subtree_mutation_rate
    dp = sm + config.depth_preserving_mutation_rate

    start = time.perf_counter()
    pop = [ev.make(t, 0, 0) for t in ramped_population(tcfg, rng, N)]
    archive = _front(pop)
    gen = 0
    while True:
        if config.max_generations is not None and gen >= config.max_generations:
            break
        if (config.time_budget_seconds is not None
                and time.perf_counter() - start >= config.time_budget_seconds):
            break

        elite = _select(pop, E)
        F = _objectives(pop)
        offspring: list[_Individual] = []
        while len(offspring) < N:
            for w in pareto_tournament(F, rng, T):
                if len(offspring) >= N:
                    break
                parent = pop[w]
                u = rng.random()
                if u < cx:
                    mates = pareto_tournament(F, rng, T)
                    mate = pop[mates[int(rng.integers(len(mates)))]]
                    tree = crossover(parent.tree, mate.tree, rng, config.max_complexity)
                elif u < sm:
                    tree = subtree_mutation(parent.tree, rng, tcfg)
                elif u < dp:
                    tree = depth_preserving_mutation(parent.tree, rng, tcfg)
                else:
                    tree = parent.tree
                # the parent supplying the root passes on its age
                offspring.append(ev.make(tree, parent.age + 1, gen + 1))

        survivors = [replace(e, age=e.age + 1) for e in elite]
        pop = _select(survivors + offspring, N)
        archive = _front(archive + pop)
        gen += 1
        log.info("run %d gen %d best_error %.6f front %d", run_id, gen,
                 min(i.error for i in pop), len(archive))

    y = ev.y
    models = []
    for ind in pop + archive:
        pred = ev.predict(ind.tree)
        try:
            offset, slope = linear_scaling(pred, y)
        except InputError:
            offset, slope = float(y.mean()), 0.0
        models.append(GPModel(tree=ind.tree, error=ind.error, variables=dataset.names,
                              ranges=dataset.ranges, age=ind.age, run_id=run_id,
                              generation=ind.born, offset=offset, slope=slope))
    return RunArchive(models=dedupe(models), variables=tuple(dataset.names),
                      ranges=tuple(tuple(r) for r in dataset.ranges),
                      config=config.to_dict(), generations=gen, run_id=run_id,
                      response=getattr(dataset, "response_name", "y"))


def _evolve_job(args):
    dataset, config, run_id, seed = args
    return evolve(dataset, config, run_id=run_id, seed=seed)


def evolve_many(dataset, config: EvolutionConfig, jobs: int = 1,
                seed: Optional[int] = None) -> list[RunArchive]:
    """``config.independent_evolutions`` runs with seeds spawned from one root seed.

    Results do not depend on ``jobs``.
    """
    check_dataset(dataset)
    root = np.random.SeedSequence(config.rng_seed if seed is None else seed)
    tasks = [(dataset, config, i, s)
             for i, s in enumerate(root.spawn(config.independent_evolutions))]
    if jobs <= 1:
        return [_evolve_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evolve_job, tasks))
