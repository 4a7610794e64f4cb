"""Immutable expression trees over the arithmetic primitive set."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .. import _kernels
from ..errors import InputError

MAX_VARIADIC_ARITY = 5


class Primitive(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"  # unary negation
    SUBTRACT = "Subtract"
    DIVIDE = "Divide"
    TIMES = "Times"
    SQRT = "Sqrt"
    SQUARE = "Square"
    INVERSE = "Inverse"

    @property
    def variadic(self) -> bool:
        return self in (Primitive.PLUS, Primitive.TIMES)

    def arity_ok(self, n: int) -> bool:
        if self.variadic:
            # single-argument Plus/Times is tolerated (template roots like Plus(x0))
            return 1 <= n <= MAX_VARIADIC_ARITY
        if self in (Primitive.SUBTRACT, Primitive.DIVIDE):
            return n == 2
        return n == 1


UNARY = (Primitive.MINUS, Primitive.SQRT, Primitive.SQUARE, Primitive.INVERSE)
BINARY = (Primitive.SUBTRACT, Primitive.DIVIDE)
VARIADIC = (Primitive.PLUS, Primitive.TIMES)
FUNCTIONS = VARIADIC + BINARY + UNARY

_OPCODES = {
    Primitive.PLUS: _kernels.OP_PLUS,
    Primitive.TIMES: _kernels.OP_TIMES,
    Primitive.SUBTRACT: _kernels.OP_SUBTRACT,
    Primitive.DIVIDE: _kernels.OP_DIVIDE,
    Primitive.MINUS: _kernels.OP_MINUS,
    Primitive.SQRT: _kernels.OP_SQRT,
    Primitive.SQUARE: _kernels.OP_SQUARE,
    Primitive.INVERSE: _kernels.OP_INVERSE,
}


@dataclass(frozen=True)
class Const:
    value: Union[int, float]

    children = ()


@dataclass(frozen=True)
class Var:
    index: int

    children = ()


@dataclass(frozen=True)
class Node:
    op: Primitive
    children: tuple

    def __post_init__(self):
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))
        if not self.op.arity_ok(len(self.children)):
            raise ValueError(f"{self.op.value} cannot take {len(self.children)} arguments")


Tree = Union[Const, Var, Node]


def plus(*children: Tree) -> Node:
    return Node(Primitive.PLUS, children)


def times(*children: Tree) -> Node:
    return Node(Primitive.TIMES, children)


def is_leaf(tree: Tree) -> bool:
    return not isinstance(tree, Node)


def size(tree: Tree) -> int:
    """Number of nodes."""
    if isinstance(tree, Node):
        return 1 + sum(size(c) for c in tree.children)
    return 1


def depth(tree: Tree) -> int:
    """Depth with a single leaf counting as 1."""
    if isinstance(tree, Node):
        return 1 + max(depth(c) for c in tree.children)
    return 1


def _size_and_complexity(tree: Tree) -> tuple[int, int]:
    if not isinstance(tree, Node):
        return 1, 1
    n, c = 1, 0
    for child in tree.children:
        cn, cc = _size_and_complexity(child)
        n += cn
        c += cc
    return n, c + n


def complexity(tree: Tree) -> int:
    """Expressional complexity: the sum of subtree sizes over every node."""
    return _size_and_complexity(tree)[1]


def variables_used(tree: Tree) -> set[int]:
    if isinstance(tree, Var):
        return {tree.index}
    out: set[int] = set()
    for child in tree.children:
        out |= variables_used(child)
    return out


def walk(tree: Tree, path: tuple = ()) -> Iterator[tuple[tuple, Tree]]:
    """Pre-order traversal yielding ``(path, subtree)``; paths are child-index tuples."""
    yield path, tree
    for i, child in enumerate(tree.children):
        yield from walk(child, path + (i,))


def subtree_at(tree: Tree, path: tuple) -> Tree:
    for i in path:
        tree = tree.children[i]
    return tree


def replace_at(tree: Tree, path: tuple, new: Tree) -> Tree:
    if not path:
        return new
    head, rest = path[0], path[1:]
    children = list(tree.children)
    children[head] = replace_at(children[head], rest, new)
    return Node(tree.op, tuple(children))


def compile_tree(tree: Tree) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten to the postfix ``(ops, args, consts)`` form the kernels consume."""
    ops: list[int] = []
    args: list[int] = []
    consts: list[float] = []

    def emit(t):
        if isinstance(t, Const):
            ops.append(_kernels.OP_CONST)
            args.append(len(consts))
            consts.append(float(t.value))
        elif isinstance(t, Var):
            ops.append(_kernels.OP_VAR)
            args.append(t.index)
        else:
            for c in t.children:
                emit(c)
            ops.append(_OPCODES[t.op])
            args.append(len(t.children))

    emit(tree)
    return (np.asarray(ops, dtype=np.int64), np.asarray(args, dtype=np.int64),
            np.asarray(consts, dtype=np.float64))


def _check_columns(tree: Tree, n_columns: int) -> None:
    used = variables_used(tree)
    if used and (max(used) >= n_columns or min(used) < 0):
        raise InputError(f"expression references variable x{max(used)} but data has "
                         f"{n_columns} columns")


def evaluate_rows(tree: Tree, X) -> np.ndarray:
    """Evaluate on every row of the 2-D array ``X``.

    Singularities (sqrt of a negative, division or inversion by zero) give NaN,
    which propagates to the output.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InputError("data must be a 2-D array")
    _check_columns(tree, X.shape[1])
    ops, args, consts = compile_tree(tree)
    return _kernels.eval_program(ops, args, consts, X)


def evaluate(tree: Tree, row) -> float:
    """Evaluate on a single row vector."""
    row = np.asarray(row, dtype=np.float64).reshape(1, -1)
    return float(evaluate_rows(tree, row)[0])
