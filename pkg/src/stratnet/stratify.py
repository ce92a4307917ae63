"""Class-connectivity stratification matrices and wealth-thresholded
rich-club curves, normalized by null-model ensembles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .econ import ClassPartition
from .graph import GraphError, SocialGraph
from .nullmodels import NullEnsembleStats, ShuffleConfig, run_ensemble


class StratifyError(ValueError):
    pass


def class_link_matrix(g: SocialGraph, partition: ClassPartition) -> np.ndarray:
    """Symmetric n x n matrix of edge counts by class pair.

    Intra-class edges are counted once (diagonal holds the plain count).
    """
    if partition.labels.size != g.n_nodes:
        raise StratifyError("partition does not cover the graph's node set")
    n = partition.n_classes
    counts = np.zeros((n, n), dtype=np.int64)
    if g.n_edges:
        cu = partition.labels[g.edges[:, 0]] - 1
        cv = partition.labels[g.edges[:, 1]] - 1
        lo, hi = np.minimum(cu, cv), np.maximum(cu, cv)
        np.add.at(counts, (lo, hi), 1)
        counts = counts + np.triu(counts, 1).T
    return counts


@dataclass
class StratMatrix:
    """Observed-over-null link count ratios with a reliability mask."""

    ratio: np.ndarray
    reliable: np.ndarray     # False where the null mean is below the floor
    null_floor: float


def stratification_matrix(counts: np.ndarray, null_counts: np.ndarray,
                          null_floor: float = 1.0) -> StratMatrix:
    """Element-wise observed / null-expected link counts.

    Cells whose null mean falls below ``null_floor`` expected links are
    flagged unreliable (ratio set to NaN) instead of reporting noise.
    """
    counts = np.asarray(counts, dtype=np.float64)
    null_counts = np.asarray(null_counts, dtype=np.float64)
    if counts.shape != null_counts.shape:
        raise StratifyError("count matrices differ in shape")
    reliable = null_counts >= null_floor
    ratio = np.full_like(counts, np.nan)
    np.divide(counts, null_counts, out=ratio, where=reliable)
    return StratMatrix(ratio=ratio, reliable=reliable, null_floor=null_floor)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Divide each row by its sum so rows sum to one."""
    m = np.asarray(matrix, dtype=np.float64)
    sums = np.nansum(m, axis=1)
    if np.any(sums <= 0):
        raise StratifyError("zero row cannot be normalized")
    return m / sums[:, None]


def equal_wealth_thresholds(wealth: np.ndarray, segments: int) -> np.ndarray:
    """Cumulative-wealth threshold values: k * total / segments, k = 0..segments-1."""
    total = float(np.sum(wealth))
    return np.arange(segments) * total / segments


@dataclass
class ResidualDensityCurve:
    """Density of the graph left after removing the poorest nodes.

    Thresholds are cumulative-wealth values; at threshold t the removed
    set is the longest ascending-wealth prefix with cumulative wealth <= t.
    phi is NaN where fewer than 2 nodes remain.
    """

    thresholds: np.ndarray
    phi: np.ndarray
    n_remaining: np.ndarray
    e_remaining: np.ndarray
    removal_order: np.ndarray = field(repr=False, default=None)


def residual_density_curve(g: SocialGraph, wealth: Sequence[float],
                           segments: int = 100) -> ResidualDensityCurve:
    """Track graph density while removing nodes in ascending wealth order.

    Removal happens at equal cumulative-wealth thresholds (ties broken by
    node id).  Edge counts are maintained incrementally; the brute-force
    equivalent is an induced-subgraph density at every threshold.
    """
    w = np.asarray(wealth, dtype=np.float64)
    if w.size != g.n_nodes:
        raise StratifyError("wealth vector does not cover the graph")
    if segments < 2:
        raise StratifyError("need at least 2 segments")
    order = np.lexsort((np.arange(w.size), w))   # ascending wealth, ties by id
    cum = np.cumsum(w[order])
    thresholds = equal_wealth_thresholds(w, segments)
    # removed count at threshold t: longest prefix with cum <= t
    removed_at = np.searchsorted(cum, thresholds, side="right")

    adj = [[] for _ in range(g.n_nodes)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    alive = np.ones(g.n_nodes, dtype=bool)
    n_alive, e_alive = g.n_nodes, g.n_edges

    phi = np.empty(segments)
    n_rem = np.empty(segments, dtype=np.int64)
    e_rem = np.empty(segments, dtype=np.int64)
    removed = 0
    for k in range(segments):
        while removed < removed_at[k]:
            node = order[removed]
            alive[node] = False
            e_alive -= sum(1 for nb in adj[node] if alive[nb])
            n_alive -= 1
            removed += 1
        n_rem[k] = n_alive
        e_rem[k] = e_alive
        phi[k] = (2.0 * e_alive / (n_alive * (n_alive - 1))
                  if n_alive >= 2 else np.nan)
    return ResidualDensityCurve(thresholds=thresholds, phi=phi,
                                n_remaining=n_rem, e_remaining=e_rem,
                                removal_order=order)


def rich_club(phi: np.ndarray, phi_null: np.ndarray) -> np.ndarray:
    """Pointwise ratio of observed to null-model residual density."""
    phi = np.asarray(phi, dtype=np.float64)
    phi_null = np.asarray(phi_null, dtype=np.float64)
    if phi.shape != phi_null.shape:
        raise StratifyError("density curves differ in length")
    rho = np.full_like(phi, np.nan)
    ok = np.isfinite(phi) & np.isfinite(phi_null) & (phi_null > 0)
    rho[ok] = phi[ok] / phi_null[ok]
    return rho


def null_class_link_matrix(g: SocialGraph, partition: ClassPartition,
                           cfg: ShuffleConfig, realizations: int) -> NullEnsembleStats:
    """Ensemble mean of the class link matrix over shuffled graphs."""
    return run_ensemble(g, cfg, realizations,
                        lambda h: class_link_matrix(h, partition))


def null_density_curve(g: SocialGraph, wealth: Sequence[float],
                       cfg: ShuffleConfig, realizations: int,
                       segments: int = 100) -> NullEnsembleStats:
    """Ensemble mean of the residual density curve over shuffled graphs.

    The removal order depends only on wealth and node ids, so it is the
    same in every realization.
    """
    return run_ensemble(
        g, cfg, realizations,
        lambda h: residual_density_curve(h, wealth, segments).phi)
