"""Interval-arithmetic range analysis for screening unstable expressions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .tree import Const, Primitive, Tree, Var

_INF = math.inf


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    pathological: bool = False

    def __post_init__(self):
        if not self.pathological and not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


PATHOLOGICAL = Interval(-_INF, _INF, True)


def _make(lo: float, hi: float) -> Interval:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return PATHOLOGICAL
    return Interval(lo, hi)


def _mul(a: Interval, b: Interval) -> Interval:
    corners = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return _make(min(corners), max(corners))


def _reciprocal(b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        return PATHOLOGICAL
    return _make(1.0 / b.hi, 1.0 / b.lo)


def _as_interval(r) -> Interval:
    if isinstance(r, Interval):
        return r
    lo, hi = r
    return Interval(float(lo), float(hi))


def interval_eval(tree: Tree, ranges: Sequence) -> Interval:
    """Bound ``tree`` over the box ``ranges`` (one ``Interval`` or ``(lo, hi)`` per column).

    The result is flagged pathological when any subexpression divides or
    inverts an interval containing zero, takes the square root of an interval
    reaching below zero, or overflows to an unbounded endpoint.
    """
    boxes = [_as_interval(r) for r in ranges]
    return _eval(tree, boxes)


def _eval(tree: Tree, boxes: list[Interval]) -> Interval:
    if isinstance(tree, Const):
        return _make(float(tree.value), float(tree.value))
    if isinstance(tree, Var):
        box = boxes[tree.index]
        return box if box.bounded else PATHOLOGICAL

    args = []
    for child in tree.children:
        iv = _eval(child, boxes)
        if iv.pathological:
            return PATHOLOGICAL
        args.append(iv)

    op = tree.op
    if op is Primitive.PLUS:
        lo, hi = args[0].lo, args[0].hi
        for iv in args[1:]:
            lo += iv.lo
            hi += iv.hi
        return _make(lo, hi)
    if op is Primitive.TIMES:
        acc = args[0]
        for iv in args[1:]:
            acc = _mul(acc, iv)
            if acc.pathological:
                return PATHOLOGICAL
        return acc
    if op is Primitive.SUBTRACT:
        a, b = args
        return _make(a.lo - b.hi, a.hi - b.lo)
    if op is Primitive.DIVIDE:
        a, b = args
        if b.lo <= 0.0 <= b.hi:
            return PATHOLOGICAL
        # direct quotients keep rounding consistent with point evaluation
        corners = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
        return _make(min(corners), max(corners))
    if op is Primitive.MINUS:
        (a,) = args
        return _make(-a.hi, -a.lo)
    if op is Primitive.SQRT:
        (a,) = args
        if a.lo < 0.0:
            return PATHOLOGICAL
        return _make(math.sqrt(a.lo), math.sqrt(a.hi))
    if op is Primitive.SQUARE:
        (a,) = args
        if a.lo >= 0.0:
            return _make(a.lo * a.lo, a.hi * a.hi)
        if a.hi <= 0.0:
            return _make(a.hi * a.hi, a.lo * a.lo)
        return _make(0.0, max(a.lo * a.lo, a.hi * a.hi))
    if op is Primitive.INVERSE:
        return _reciprocal(args[0])
    raise ValueError(f"unknown primitive {op}")
