"""Undirected simple social graph built from raw interaction events.

The graph is stored as a canonical edge array (each edge once, u < v)
over a contiguous 0..N-1 node index, with a mapping back to the external
string ids carried by the raw event log.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.stats import t as t_dist


class GraphError(ValueError):
    """Raised when a graph operation receives unusable input."""


class EventKind(str, Enum):
    CALL = "call"
    SMS = "sms"


@dataclass(frozen=True)
class EventRecord:
    """One communication event between two external ids."""

    caller: str
    callee: str
    timestamp: float
    kind: EventKind = EventKind.CALL
    duration: float = 0.0
    cell_lat: Optional[float] = None
    cell_lon: Optional[float] = None

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp: {self.timestamp}")
        if self.duration < 0:
            raise ValueError(f"negative duration: {self.duration}")


@dataclass(frozen=True)
class DirectedInteractionGraph:
    """Deduplicated directed who-contacted-whom graph over external ids."""

    nodes: frozenset
    arcs: frozenset  # ordered (caller, callee) pairs, no self-arcs

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)


@dataclass(frozen=True)
class SocialGraph:
    """Undirected simple graph over contiguous node indices 0..N-1.

    ``edges`` is an (m, 2) int array with edges[i, 0] < edges[i, 1], sorted
    lexicographically so equal graphs have identical arrays.  ``node_ids``
    maps index -> external id.  Immutable after construction.
    """

    n_nodes: int
    edges: np.ndarray
    node_ids: tuple = ()
    index_of: dict = field(default_factory=dict, repr=False)

    @staticmethod
    def from_edge_list(n_nodes: int, edges: Iterable[tuple],
                       node_ids: Sequence = ()) -> "SocialGraph":
        arr = np.asarray(sorted({(min(u, v), max(u, v)) for u, v in edges
                                 if u != v}), dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            raise GraphError("edge endpoint outside 0..N-1")
        ids = tuple(node_ids) if node_ids else tuple(str(i) for i in range(n_nodes))
        if len(ids) != n_nodes:
            raise GraphError("node_ids length must equal n_nodes")
        return SocialGraph(n_nodes=n_nodes, edges=arr, node_ids=ids,
                           index_of={x: i for i, x in enumerate(ids)})

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        if self.n_edges == 0:
            return np.zeros(self.n_nodes, dtype=np.int64)
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def adjacency(self) -> sparse.csr_matrix:
        m = self.n_edges
        if m == 0:
            return sparse.csr_matrix((self.n_nodes, self.n_nodes))
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * m, dtype=np.int8)
        return sparse.csr_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n_nodes, self.n_nodes))

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}


def build_interaction_graph(events: Sequence[EventRecord]) -> DirectedInteractionGraph:
    """Deduplicate an event log into a directed interaction graph.

    Self-events are dropped; raises GraphError if nothing remains.
    """
    if not events:
        raise GraphError("empty event log")
    arcs = {(e.caller, e.callee) for e in events if e.caller != e.callee}
    if not arcs:
        raise GraphError("no non-self events in log")
    nodes = {a for a, _ in arcs} | {b for _, b in arcs}
    return DirectedInteractionGraph(nodes=frozenset(nodes), arcs=frozenset(arcs))


def recursive_activity_filter(g: DirectedInteractionGraph) -> DirectedInteractionGraph:
    """Iteratively drop nodes lacking either an incoming or outgoing arc.

    Returns the fixpoint subgraph where every node has in-degree >= 1 and
    out-degree >= 1.  May return an empty graph.
    """
    out_n = defaultdict(set)
    in_n = defaultdict(set)
    for a, b in g.arcs:
        out_n[a].add(b)
        in_n[b].add(a)
    alive = set(g.nodes)
    queue = [n for n in alive if not out_n[n] or not in_n[n]]
    while queue:
        n = queue.pop()
        if n not in alive:
            continue
        alive.discard(n)
        for m in out_n[n]:
            in_n[m].discard(n)
            if m in alive and not in_n[m]:
                queue.append(m)
        for m in in_n[n]:
            out_n[m].discard(n)
            if m in alive and not out_n[m]:
                queue.append(m)
    arcs = frozenset((a, b) for a, b in g.arcs if a in alive and b in alive)
    return DirectedInteractionGraph(nodes=frozenset(alive), arcs=arcs)


def undirect_and_simplify(g: DirectedInteractionGraph) -> SocialGraph:
    """Collapse arcs to undirected simple edges over a compact index."""
    ids = tuple(sorted(g.nodes))
    idx = {x: i for i, x in enumerate(ids)}
    pairs = {(min(idx[a], idx[b]), max(idx[a], idx[b])) for a, b in g.arcs}
    return SocialGraph.from_edge_list(len(ids), pairs, node_ids=ids)


def _component_labels(g: SocialGraph) -> np.ndarray:
    _, labels = connected_components(g.adjacency(), directed=False)
    return labels


def largest_component(g: SocialGraph) -> SocialGraph:
    """Induced subgraph on the largest connected component.

    Size ties are broken toward the component containing the smallest
    node index, so output is deterministic.
    """
    if g.n_nodes == 0:
        raise GraphError("empty graph has no components")
    labels = _component_labels(g)
    sizes = np.bincount(labels)
    best = sizes.max()
    # np.argmax over component-of-first-occurrence: labels from csgraph are
    # assigned in node order, so the smallest label among max-size comps
    # contains the globally smallest node index of those comps.
    winners = np.flatnonzero(sizes == best)
    keep = np.flatnonzero(labels == winners.min())
    return induce_subgraph(g, keep)


def induce_subgraph(g: SocialGraph, keep: Iterable[int]) -> SocialGraph:
    """Subgraph on ``keep`` (node indices) with all internal edges."""
    keep_arr = np.unique(np.asarray(list(keep), dtype=np.int64))
    if keep_arr.size == 0:
        raise GraphError("cannot induce subgraph on empty node set")
    if keep_arr.min() < 0 or keep_arr.max() >= g.n_nodes:
        raise GraphError("keep set contains nodes outside the graph")
    remap = np.full(g.n_nodes, -1, dtype=np.int64)
    remap[keep_arr] = np.arange(keep_arr.size)
    if g.n_edges:
        mask = (remap[g.edges[:, 0]] >= 0) & (remap[g.edges[:, 1]] >= 0)
        new_edges = remap[g.edges[mask]]
    else:
        new_edges = np.empty((0, 2), dtype=np.int64)
    ids = tuple(g.node_ids[i] for i in keep_arr)
    return SocialGraph.from_edge_list(keep_arr.size, map(tuple, new_edges),
                                      node_ids=ids)


def degree_assortativity(g: SocialGraph):
    """Pearson correlation of degrees across edge endpoints.

    Uses both orientations of every edge (the symmetric estimator).
    Returns (r, two-sided p, standard error).
    """
    if g.n_edges < 2:
        raise GraphError("need at least 2 edges for assortativity")
    deg = g.degrees()
    x = np.concatenate([deg[g.edges[:, 0]], deg[g.edges[:, 1]]]).astype(float)
    y = np.concatenate([deg[g.edges[:, 1]], deg[g.edges[:, 0]]]).astype(float)
    if np.ptp(x) == 0:
        raise GraphError("degree variance is zero (regular graph)")
    r = float(np.corrcoef(x, y)[0, 1])
    n = x.size
    se = float(np.sqrt((1.0 - r * r) / (n - 2)))
    if abs(r) >= 1.0:
        p = 0.0
    else:
        tstat = r * np.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * t_dist.sf(abs(tstat), df=n - 2))
    return r, p, se


def knn_curve(g: SocialGraph) -> dict:
    """Mean neighbour degree per degree class.

    For each observed degree k: the average over nodes of degree k of the
    mean degree of their neighbours.
    """
    if g.n_edges < 1:
        raise GraphError("knn curve needs at least one edge")
    deg = g.degrees()
    # every node in degree class k contributes k neighbour degrees, so the
    # class mean of per-node means reduces to an exact integer ratio:
    # sum of partner degrees over class stubs / (n_k * k)
    neigh_deg_sum = np.zeros(g.n_nodes, dtype=np.int64)
    np.add.at(neigh_deg_sum, g.edges[:, 0], deg[g.edges[:, 1]])
    np.add.at(neigh_deg_sum, g.edges[:, 1], deg[g.edges[:, 0]])
    out: dict = {}
    for k in np.unique(deg[deg > 0]):
        members = deg == k
        out[int(k)] = float(int(neigh_deg_sum[members].sum())
                            / (int(members.sum()) * int(k)))
    return out
