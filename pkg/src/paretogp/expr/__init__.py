"""Expression trees: structure, evaluation, text form, ranges and variation."""

from .grammar import format_tree, parse
from .interval import Interval, interval_eval
from .tree import (
    Const,
    Node,
    Primitive,
    Tree,
    Var,
    compile_tree,
    complexity,
    depth,
    evaluate,
    evaluate_rows,
    plus,
    size,
    times,
    variables_used,
    walk,
)
from .variation import (
    TreeConfig,
    crossover,
    depth_preserving_mutation,
    ramped_population,
    random_individual,
    random_tree,
    subtree_mutation,
)

__all__ = [
    "Const", "Interval", "Node", "Primitive", "Tree", "TreeConfig", "Var",
    "compile_tree", "complexity", "crossover", "depth", "depth_preserving_mutation",
    "evaluate", "evaluate_rows", "format_tree", "interval_eval", "parse", "plus",
    "ramped_population", "random_individual", "random_tree", "size",
    "subtree_mutation", "times", "variables_used", "walk",
]
