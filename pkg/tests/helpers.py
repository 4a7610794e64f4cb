"""Shared builders for tests that need hand-made models."""

import numpy as np

from paretogp.evolution import GPModel
from paretogp.expr import parse
from paretogp.fitness import linear_scaling, scaled_correlation_error


def make_model(text, names, ranges, data=None, error=None):
    """Parse ``text`` into a GPModel; score and scale it on ``data`` when given."""
    tree = parse(text, names)
    offset, slope = 0.0, 1.0
    if data is not None:
        X = np.asarray(data.X)
        from paretogp.expr import evaluate_rows
        raw = evaluate_rows(tree, X)
        if error is None:
            error = scaled_correlation_error(raw, data.y)
        if np.all(np.isfinite(raw)) and np.ptp(raw) > 0:
            offset, slope = linear_scaling(raw, data.y)
    return GPModel(tree=tree, error=0.5 if error is None else error, variables=names,
                   ranges=ranges, offset=offset, slope=slope)


class Table:
    """Minimal dataset stand-in: X, y, names, ranges."""

    def __init__(self, X, y, names):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.names = tuple(names)
        self.ranges = tuple((float(c.min()), float(c.max())) for c in self.X.T)
