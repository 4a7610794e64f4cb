import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import trees
from paretogp import _kernels
from paretogp.expr import compile_tree

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")


@needs_numba
@settings(max_examples=300, deadline=None)
@given(trees)
def test_eval_backends_agree_bitwise(tree):
    X = np.random.default_rng(3).uniform(-4, 4, (64, 3))
    X[0] = 0.0
    prog = compile_tree(tree)
    a = _kernels.eval_program_numpy(*prog, X)
    b = _kernels.eval_program_numba(*prog, X)
    np.testing.assert_array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("n, m", [(1, 2), (50, 2), (200, 3), (100, 5)])
def test_dominance_backends_agree(n, m):
    rng = np.random.default_rng(n * m)
    F = rng.integers(0, 6, (n, m)).astype(np.float64)  # many ties
    np.testing.assert_array_equal(_kernels.dominance_matrix_numpy(F),
                                  _kernels.dominance_matrix_numba(F))


def test_dominance_matrix_definition():
    F = np.array([[1.0, 1.0], [1.0, 2.0], [2.0, 1.0], [1.0, 1.0]])
    D = _kernels.dominance_matrix_numpy(F)
    assert D[0, 1] and D[0, 2] and not D[0, 3] and not D[3, 0]
    assert not D[1, 2] and not D[2, 1]
    assert not D.diagonal().any()


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PARETOGP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c",
                          "from paretogp import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


RUN = """
import json
from paretogp.evolution import EvolutionConfig, evolve
from paretogp.synthetic import correlated_benchmark
ds = correlated_benchmark(n=150, n_inputs=4, drivers=(0, 1))
cfg = EvolutionConfig(population_size=40, elite_size=8, tournament_size=8,
                      max_generations=4, time_budget_seconds=None)
print(json.dumps(evolve(ds, cfg, seed=1).to_dict()))
"""


@needs_numba
def test_backends_give_identical_runs():
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, PARETOGP_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", RUN], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
