"""Random tree generation and the three variation operators.

All randomness comes from an explicitly passed ``numpy.random.Generator``.
Evolved trees keep a Plus root; only non-root nodes are ever replaced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import (
    BINARY,
    FUNCTIONS,
    MAX_VARIADIC_ARITY,
    Const,
    Node,
    Primitive,
    Tree,
    Var,
    complexity,
    depth,
    replace_at,
    walk,
)

MAX_RETRIES = 8


@dataclass(frozen=True)
class TreeConfig:
    """Knobs for generating trees over ``n_variables`` input columns."""

    n_variables: int
    max_complexity: int = 1000
    const_bound: float = 10.0
    variable_prob: float = 0.5  # terminal is a variable rather than a constant
    grow_leaf_prob: float = 0.3
    init_depths: tuple = (2, 6)
    mutation_depths: tuple = (1, 4)
    max_root_arity: int = 4


def random_constant(rng: np.random.Generator, bound: float = 10.0) -> Const:
    # integers and 4-decimal reals, half each
    if rng.random() < 0.5:
        b = int(bound)
        return Const(int(rng.integers(-b, b + 1)))
    return Const(round(float(rng.uniform(-bound, bound)), 4))


def random_terminal(config: TreeConfig, rng: np.random.Generator) -> Tree:
    if rng.random() < config.variable_prob:
        return Var(int(rng.integers(config.n_variables)))
    return random_constant(rng, config.const_bound)


def _arity(op: Primitive, rng: np.random.Generator) -> int:
    if op.variadic:
        return int(rng.integers(2, MAX_VARIADIC_ARITY + 1))
    return 2 if op in BINARY else 1


def _build(config: TreeConfig, rng: np.random.Generator, d: int, method: str) -> Tree:
    if d <= 1:
        return random_terminal(config, rng)
    if method == "grow" and rng.random() < config.grow_leaf_prob:
        return random_terminal(config, rng)
    op = FUNCTIONS[int(rng.integers(len(FUNCTIONS)))]
    k = _arity(op, rng)
    if method == "exact":
        # one designated child reaches the full depth, the rest grow freely
        lead = int(rng.integers(k))
        kids = tuple(_build(config, rng, d - 1, "exact" if i == lead else "grow")
                     for i in range(k))
    else:
        kids = tuple(_build(config, rng, d - 1, method) for _ in range(k))
    return Node(op, kids)


def random_tree(config: TreeConfig, rng: np.random.Generator, depth_limit: int,
                method: str = "half") -> Tree:
    """Random expression of depth at most ``depth_limit`` (a leaf has depth 1).

    ``method`` is ``"grow"``, ``"full"``, ``"exact"`` (depth exactly
    ``depth_limit``) or ``"half"`` (a fair coin between grow and full).
    Draws exceeding the complexity cap are redrawn; after ``MAX_RETRIES``
    failures the depth limit shrinks by one.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    if method == "half":
        method = "grow" if rng.random() < 0.5 else "full"
    d = depth_limit
    while True:
        for _ in range(MAX_RETRIES):
            tree = _build(config, rng, d, method)
            if complexity(tree) <= config.max_complexity:
                return tree
        if d == 1:
            return random_terminal(config, rng)
        d -= 1


def random_individual(config: TreeConfig, rng: np.random.Generator,
                      depth_limit: int, method: str = "half") -> Node:
    """A template tree: a Plus root over 1..``max_root_arity`` random subtrees."""
    for _ in range(MAX_RETRIES):
        k = int(rng.integers(1, config.max_root_arity + 1))
        kids = tuple(random_tree(config, rng, max(1, depth_limit - 1), method)
                     for _ in range(k))
        tree = Node(Primitive.PLUS, kids)
        if complexity(tree) <= config.max_complexity:
            return tree
    return Node(Primitive.PLUS, (random_terminal(config, rng),))


def ramped_population(config: TreeConfig, rng: np.random.Generator, n: int) -> list[Node]:
    """Ramped half-and-half over ``config.init_depths`` (inclusive)."""
    lo, hi = config.init_depths
    depths = list(range(lo, hi + 1))
    out = []
    for i in range(n):
        d = depths[i % len(depths)]
        out.append(random_individual(config, rng, d, "grow" if (i // len(depths)) % 2 else "full"))
    return out


def _non_root_paths(tree: Tree) -> list[tuple]:
    return [p for p, _ in walk(tree) if p]


def _pick(rng: np.random.Generator, items: list):
    return items[int(rng.integers(len(items)))]


def crossover(a: Tree, b: Tree, rng: np.random.Generator, max_complexity: int = 1000) -> Tree:
    """Replace a random non-root subtree of ``a`` with a random subtree of ``b``."""
    targets = _non_root_paths(a)
    if not targets:
        return a
    donors = [t for _, t in walk(b)]
    for _ in range(MAX_RETRIES):
        child = replace_at(a, _pick(rng, targets), _pick(rng, donors))
        if complexity(child) <= max_complexity:
            return child
    return a


def subtree_mutation(tree: Tree, rng: np.random.Generator, config: TreeConfig) -> Tree:
    """Replace a random non-root subtree with a freshly grown random subtree."""
    targets = _non_root_paths(tree)
    if not targets:
        return tree
    lo, hi = config.mutation_depths
    for _ in range(MAX_RETRIES):
        path = _pick(rng, targets)
        d = int(rng.integers(lo, hi + 1))
        child = replace_at(tree, path, random_tree(config, rng, d, "grow"))
        if complexity(child) <= config.max_complexity:
            return child
    return tree


def depth_preserving_mutation(tree: Tree, rng: np.random.Generator, config: TreeConfig) -> Tree:
    """Replace a random non-root subtree with a random one of exactly the same depth."""
    targets = [(p, t) for p, t in walk(tree) if p]
    if not targets:
        return tree
    for _ in range(MAX_RETRIES):
        path, old = _pick(rng, targets)
        d = depth(old)
        new = _build(config, rng, d, "exact")
        child = replace_at(tree, path, new)
        if complexity(child) <= config.max_complexity:
            return child
    return tree
