"""Composite tensor Gauss-Legendre rules on boxes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetError, ParameterError

MAX_NODES = 2_000_000


@lru_cache(maxsize=None)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(a: float, b: float, max_width: float, breakpoints=()) -> np.ndarray:
    """Uniform panel edges on ``[a, b]`` of width at most ``max_width``, merged with breakpoints."""
    if not b > a:
        raise ParameterError("empty interval")
    count = max(1, int(np.ceil((b - a) / max_width - 1e-12)))
    edges = np.linspace(a, b, count + 1)
    bp = np.asarray(breakpoints, dtype=float)
    bp = bp[(bp > a) & (bp < b)]
    edges = np.unique(np.concatenate([edges, bp]))
    # drop slivers created by breakpoints landing next to a uniform edge
    keep = np.concatenate([[True], np.diff(edges) > 1e-12 * (b - a)])
    edges = edges[keep]
    edges[-1] = b
    return edges


def gauss_legendre_1d(edges, order: int):
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(order)
    mid = (edges[:-1] + edges[1:]) / 2
    half = np.diff(edges) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``(n, d)`` and weights ``(n,)`` of a composite tensor rule.

    ``panel_index`` maps each node to its panel so callers can accumulate
    per-panel partial sums in a fixed order.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    panels: int
    panel_index: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def describe(self) -> dict:
        return {"order": self.order, "panels": self.panels, "nodes": int(len(self.weights))}


def tensor_rule(edges_per_axis, order: int = 12, max_nodes: int = MAX_NODES) -> QuadratureRule:
    """Tensor Gauss-Legendre rule with ``order`` nodes per panel per axis."""
    if order < 1:
        raise ParameterError("quadrature order must be positive")
    counts = [len(e) - 1 for e in edges_per_axis]
    total = int(np.prod(counts)) * order ** len(counts)
    if total > max_nodes:
        raise BudgetError(f"quadrature needs {total} nodes, budget is {max_nodes}")
    rules = [gauss_legendre_1d(e, order) for e in edges_per_axis]
    pidx = [np.repeat(np.arange(c), order) for c in counts]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    igrids = np.meshgrid(*pidx, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    panel = np.ravel_multi_index([g.ravel() for g in igrids], counts)
    # sort by panel so each panel's nodes are contiguous
    order_ix = np.argsort(panel, kind="stable")
    return QuadratureRule(nodes[order_ix], weights[order_ix], order, int(np.prod(counts)), panel[order_ix])


def box_rule(lower, upper, max_width: float, order: int = 12, breakpoints=None) -> QuadratureRule:
    lower = np.atleast_1d(lower)
    upper = np.atleast_1d(upper)
    bps = breakpoints if breakpoints is not None else [()] * len(lower)
    edges = [panel_edges(a, b, max_width, bp) for a, b, bp in zip(lower, upper, bps)]
    return tensor_rule(edges, order)
