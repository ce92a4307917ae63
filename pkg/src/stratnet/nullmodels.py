"""Degree-preserving graph randomization and seeded ensemble statistics.

Two shuffles are provided:

* NM1 -- classic double edge swap: keeps the degree sequence, destroys
  degree-degree correlations.
* NM2 -- degree-matched swap: one end of the second edge must have the
  same degree as the chosen end of the first, so the multiset of
  endpoint-degree pairs over edges (and hence knn(k) and assortativity)
  is preserved exactly.

Swap counts are *successful* swaps; rejected proposals (self-loop,
multi-edge, identical edge pair) do not count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List

import numpy as np

from .graph import GraphError, SocialGraph


class EnsembleWarningError(RuntimeError):
    """Too many realizations hit their proposal budget before the swap target."""


class NullModel(str, Enum):
    NM1 = "nm1"
    NM2 = "nm2"


@dataclass(frozen=True)
class ShuffleConfig:
    model: NullModel = NullModel.NM1
    swap_multiplier: float = 5.0
    seed: int = 0
    max_attempt_factor: int = 100

    def __post_init__(self):
        if self.swap_multiplier <= 0:
            raise ValueError("swap_multiplier must be positive")
        if self.max_attempt_factor <= 0:
            raise ValueError("max_attempt_factor must be positive")


@dataclass(frozen=True)
class ShuffleResult:
    graph: SocialGraph
    swaps_done: int
    swaps_target: int
    proposals: int
    exhausted: bool          # attempt budget hit before reaching target
    skipped_unique_degree: int = 0   # NM2 only


@dataclass
class NullEnsembleStats:
    realizations: int
    seeds: List[int]
    mean: np.ndarray                 # reducer output averaged over R
    warning_count: int = 0
    model: NullModel = NullModel.NM1
    extra: dict = field(default_factory=dict)


def splitmix64(seed: int, index: int) -> int:
    """Derive the per-realization seed ``index`` from a master seed."""
    mask = (1 << 64) - 1
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


def _finish(g: SocialGraph, edges: list, done: int, target: int,
            proposals: int, exhausted: bool, skipped: int = 0) -> ShuffleResult:
    out = SocialGraph.from_edge_list(g.n_nodes, edges, node_ids=g.node_ids)
    return ShuffleResult(graph=out, swaps_done=done, swaps_target=target,
                         proposals=proposals, exhausted=exhausted,
                         skipped_unique_degree=skipped)


def nm1_shuffle(g: SocialGraph, cfg: ShuffleConfig) -> ShuffleResult:
    """Randomize by double edge swaps, rejecting self-loops and multi-edges."""
    m = g.n_edges
    if m < 2:
        raise GraphError("need at least 2 edges to shuffle")
    target = int(np.ceil(cfg.swap_multiplier * m))
    budget = int(cfg.max_attempt_factor * cfg.swap_multiplier * m)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    edges = [tuple(e) for e in g.edges.tolist()]
    present = set(edges)
    done = proposals = 0
    batch = 1 << 14
    while done < target and proposals < budget:
        # RNG calls are batched; the per-proposal draws stay in a fixed
        # order so the result is still a pure function of the seed
        idx = rng.integers(0, m, size=(batch, 2))
        flips = rng.integers(0, 2, size=batch)
        for t in range(batch):
            if done >= target or proposals >= budget:
                break
            proposals += 1
            i, j = int(idx[t, 0]), int(idx[t, 1])
            if i == j:
                continue
            a, b = edges[i]
            c, d = edges[j]
            # orientation flip gives the two possible rewirings equal odds
            if flips[t]:
                c, d = d, c
            if a == c or a == d or b == c or b == d:
                continue
            e1 = (a, c) if a < c else (c, a)
            e2 = (b, d) if b < d else (d, b)
            if e1 in present or e2 in present:
                continue
            present.discard(edges[i])
            present.discard(edges[j])
            present.add(e1)
            present.add(e2)
            edges[i], edges[j] = e1, e2
            done += 1
    return _finish(g, edges, done, target, proposals, done < target)


class _DegreeRegistry:
    """Edge-side registry keyed by endpoint degree, O(1) sample/move.

    One entry per edge side, encoded as slot * 2 + side; an entry lives in
    the bucket of the degree of that side's node.  Node degrees never
    change during the shuffle, so entries only move buckets when a slot's
    endpoint is replaced.
    """

    def __init__(self, edges: list, deg: np.ndarray):
        self.buckets: dict = {}
        self.pos: dict = {}
        for slot, (u, v) in enumerate(edges):
            self._add(2 * slot, int(deg[u]))
            self._add(2 * slot + 1, int(deg[v]))

    def _add(self, enc: int, k: int):
        b = self.buckets.setdefault(k, [])
        self.pos[enc] = (k, len(b))
        b.append(enc)

    def move(self, enc: int, new_k: int):
        k, i = self.pos.pop(enc)
        b = self.buckets[k]
        last = b.pop()
        if i < len(b):
            b[i] = last
            self.pos[last] = (k, i)
        self._add(enc, new_k)


def nm2_shuffle(g: SocialGraph, cfg: ShuffleConfig) -> ShuffleResult:
    """Degree-matched swap preserving the edge degree-pair multiset.

    Picks edge (a,b) and end a with degree k, then a second edge with an
    end c of the same degree, and exchanges the opposite ends.  Edges
    whose matched end has a degree held by no other node are skipped.
    """
    m = g.n_edges
    if m < 2:
        raise GraphError("need at least 2 edges to shuffle")
    target = int(np.ceil(cfg.swap_multiplier * m))
    budget = int(cfg.max_attempt_factor * cfg.swap_multiplier * m)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    deg = g.degrees()
    nodes_per_degree = np.bincount(deg)
    edges = [tuple(e) for e in g.edges.tolist()]
    present = set(edges)
    registry = _DegreeRegistry(edges, deg)

    buckets = registry.buckets
    done = proposals = skipped = 0
    batch = 1 << 14
    while done < target and proposals < budget:
        idx = rng.integers(0, m, size=batch)
        sides = rng.integers(0, 2, size=batch)
        picks = rng.random(batch)   # uniform position within the degree bucket
        for t in range(batch):
            if done >= target or proposals >= budget:
                break
            proposals += 1
            i = int(idx[t])
            side_i = int(sides[t])
            a = edges[i][side_i]
            b = edges[i][1 - side_i]
            k = int(deg[a])
            if nodes_per_degree[k] < 2:
                skipped += 1
                continue
            bucket = buckets.get(k)
            if not bucket:
                continue
            enc_j = bucket[int(picks[t] * len(bucket))]
            j, side_j = enc_j >> 1, enc_j & 1
            if j == i:
                continue
            c = edges[j][side_j]
            d = edges[j][1 - side_j]
            # new edges (a,d) and (c,b); degrees of both pairs unchanged
            if a == d or c == b:
                continue
            e1 = (a, d) if a < d else (d, a)
            e2 = (c, b) if c < b else (b, c)
            if e1 == e2 or e1 in present or e2 in present:
                continue
            present.discard(edges[i])
            present.discard(edges[j])
            present.add(e1)
            present.add(e2)
            edges[i] = (a, d) if side_i == 0 else (d, a)
            edges[j] = (c, b) if side_j == 0 else (b, c)
            registry.move(2 * i + 1 - side_i, int(deg[d]))
            registry.move(2 * j + 1 - side_j, int(deg[b]))
            done += 1
    return _finish(g, edges, done, target, proposals, done < target, skipped)


_SHUFFLERS: dict = {NullModel.NM1: nm1_shuffle, NullModel.NM2: nm2_shuffle}


def shuffle(g: SocialGraph, cfg: ShuffleConfig) -> ShuffleResult:
    return _SHUFFLERS[cfg.model](g, cfg)


def run_ensemble(g: SocialGraph, cfg: ShuffleConfig, realizations: int,
                 reducer: Callable[[SocialGraph], np.ndarray],
                 max_warning_rate: float = 0.10) -> NullEnsembleStats:
    """Average ``reducer`` over R independent seeded shuffles.

    Per-realization seeds are splitmix64(cfg.seed, i) so any single
    realization can be reproduced in isolation.  Reduction is done in
    ascending realization index, keeping float sums deterministic.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    seeds = [splitmix64(cfg.seed, i) for i in range(realizations)]
    acc = None
    warnings = 0
    for s in seeds:
        res = shuffle(g, ShuffleConfig(model=cfg.model,
                                       swap_multiplier=cfg.swap_multiplier,
                                       seed=s,
                                       max_attempt_factor=cfg.max_attempt_factor))
        if res.exhausted:
            warnings += 1
        val = np.asarray(reducer(res.graph), dtype=np.float64)
        acc = val.copy() if acc is None else acc + val
    if warnings > max_warning_rate * realizations:
        raise EnsembleWarningError(
            f"{warnings}/{realizations} realizations hit the attempt budget")
    return NullEnsembleStats(realizations=realizations, seeds=seeds,
                             mean=acc / realizations, warning_count=warnings,
                             model=cfg.model)
