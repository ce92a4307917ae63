"""Geodesic distances, home/work inference, inter-class spatial matrices,
and commuting-distance distribution deltas."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .econ import ClassPartition
from .graph import EventRecord, SocialGraph

EARTH_RADIUS_KM = 6371.0


def wrap_longitude(lon: float) -> float:
    """Normalize a longitude in degrees to (-180, 180]."""
    lon = (lon + 180.0) % 360.0 - 180.0
    return 180.0 if lon == -180.0 else lon


class GeoError(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise GeoError(f"latitude out of range: {self.lat}")
        if not (-180.0 < self.lon <= 180.0):
            raise GeoError(f"longitude out of range: {self.lon}")


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    la1, lo1, la2, lo2 = map(np.radians, (a.lat, a.lon, b.lat, b.lon))
    s = (np.sin((la2 - la1) / 2.0) ** 2
         + np.cos(la1) * np.cos(la2) * np.sin((lo2 - lo1) / 2.0) ** 2)
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0))))


@dataclass(frozen=True)
class ActivityWindows:
    """Hour/weekday windows used to split events into home and work context."""

    night_start: int = 22
    night_end: int = 7          # exclusive; window wraps midnight
    work_start: int = 9
    work_end: int = 17
    weekend_days: Tuple[int, ...] = (5, 6)   # Mon=0

    def is_home_time(self, ts: float) -> bool:
        dt = datetime.fromtimestamp(ts, tz=timezone.utc)
        if dt.weekday() in self.weekend_days:
            return True
        return dt.hour >= self.night_start or dt.hour < self.night_end

    def is_work_time(self, ts: float) -> bool:
        dt = datetime.fromtimestamp(ts, tz=timezone.utc)
        if dt.weekday() in self.weekend_days:
            return False
        return self.work_start <= dt.hour < self.work_end


def _modal_cell(events: Sequence[EventRecord], min_appearances: int) -> Optional[GeoPoint]:
    counts: Counter = Counter()
    first_seen: Dict[tuple, float] = {}
    for e in events:
        key = (e.cell_lat, e.cell_lon)
        counts[key] += 1
        if key not in first_seen or e.timestamp < first_seen[key]:
            first_seen[key] = e.timestamp
    if not counts:
        return None
    top = max(counts.values())
    tied = [k for k, c in counts.items() if c == top]
    best = min(tied, key=lambda k: first_seen[k])
    if top < min_appearances:
        return None
    return GeoPoint(lat=best[0], lon=best[1])


def infer_home_work(events: Sequence[EventRecord], min_appearances: int = 10,
                    windows: ActivityWindows = ActivityWindows()
                    ) -> Tuple[Optional[GeoPoint], Optional[GeoPoint]]:
    """Modal cell over night/weekend hours (home) and weekday office hours (work).

    Each location needs at least ``min_appearances`` events at the modal
    cell; modal ties go to the cell seen earliest.
    """
    located = [e for e in events if e.cell_lat is not None and e.cell_lon is not None]
    home = _modal_cell([e for e in located if windows.is_home_time(e.timestamp)],
                       min_appearances)
    work = _modal_cell([e for e in located if windows.is_work_time(e.timestamp)],
                       min_appearances)
    return home, work


def class_distance_matrix(g: SocialGraph, partition: ClassPartition,
                          locations: Dict[int, GeoPoint]) -> np.ndarray:
    """Mean zip-to-zip distance over connected ego pairs, by class pair.

    Edges with a missing endpoint location are excluded from numerator
    and denominator.  Cells with zero located links are NaN.
    """
    n = partition.n_classes
    dist_sum = np.zeros((n, n))
    link_cnt = np.zeros((n, n), dtype=np.int64)
    for u, v in g.edges:
        pu, pv = locations.get(int(u)), locations.get(int(v))
        if pu is None or pv is None:
            continue
        d = haversine(pu, pv)
        i, j = partition.labels[u] - 1, partition.labels[v] - 1
        dist_sum[i, j] += d
        link_cnt[i, j] += 1
        if i != j:
            dist_sum[j, i] += d
            link_cnt[j, i] += 1
    out = np.full((n, n), np.nan)
    np.divide(dist_sum, link_cnt, out=out, where=link_cnt > 0)
    return out


def located_link_counts(g: SocialGraph, partition: ClassPartition,
                        locations: Dict[int, GeoPoint]) -> np.ndarray:
    """Symmetric per-class-pair counts of edges with both endpoints located."""
    n = partition.n_classes
    cnt = np.zeros((n, n), dtype=np.int64)
    for u, v in g.edges:
        if locations.get(int(u)) is None or locations.get(int(v)) is None:
            continue
        i, j = partition.labels[u] - 1, partition.labels[v] - 1
        cnt[i, j] += 1
        if i != j:
            cnt[j, i] += 1
    return cnt


def relative_distance_matrix(dmat: np.ndarray, link_counts: np.ndarray) -> np.ndarray:
    """Deviation of each class-pair distance from the row class's mean
    neighbour distance, relative to that mean.  Not symmetric."""
    dmat = np.asarray(dmat, dtype=np.float64)
    counts = np.asarray(link_counts, dtype=np.float64)
    if dmat.shape != counts.shape:
        raise GeoError("distance matrix and link counts differ in shape")
    n = dmat.shape[0]
    out = np.full((n, n), np.nan)
    for i in range(n):
        ok = np.isfinite(dmat[i]) & (counts[i] > 0)
        total = counts[i, ok].sum()
        if total == 0:
            continue
        row_mean = float(np.dot(counts[i, ok], dmat[i, ok]) / total)
        if row_mean <= 0:
            continue
        out[i, ok] = (dmat[i, ok] - row_mean) / row_mean
    return out


@dataclass
class CommuteDeltaTable:
    """Per-class commuting distance histograms minus the population histogram.

    bin_edges are in km; the first bin is a dedicated zero-distance bin
    (same-cell commutes), the rest are logarithmic.
    """

    bin_edges: np.ndarray            # len B+1, edges of the log bins
    p_all: np.ndarray                # len B+1 including the zero bin at [0]
    p_class: np.ndarray              # (n_classes, B+1); NaN rows = no commuters
    delta: np.ndarray                # p_class - p_all
    commuters_per_class: np.ndarray


def log_bin_edges(lo_km: float = 0.1, hi_km: float = 1000.0, bins: int = 30) -> np.ndarray:
    return np.logspace(np.log10(lo_km), np.log10(hi_km), bins + 1)


def commute_delta(homework: Dict[int, Tuple[GeoPoint, GeoPoint]],
                  partition: ClassPartition,
                  bin_edges: Optional[np.ndarray] = None) -> CommuteDeltaTable:
    """Class-vs-population commuting distance distribution differences.

    Distances below the first log edge (including exact zeros) land in the
    dedicated zero/short bin; distances above the last edge are clamped
    into the top bin.
    """
    edges = log_bin_edges() if bin_edges is None else np.asarray(bin_edges, float)
    nbins = edges.size - 1
    n = partition.n_classes

    dists: Dict[int, float] = {}
    for node, (home, work) in homework.items():
        dists[node] = haversine(home, work)
    if not dists:
        raise GeoError("no users with both home and work locations")

    def histogram(nodes: Iterable[int]) -> Optional[np.ndarray]:
        h = np.zeros(nbins + 1)
        count = 0
        for node in nodes:
            if node not in dists:
                continue
            d = dists[node]
            if d < edges[0]:
                h[0] += 1
            else:
                b = int(np.searchsorted(edges, d, side="right")) - 1
                h[1 + min(b, nbins - 1)] += 1
            count += 1
        if count == 0:
            return None
        return h / count

    p_all = histogram(dists.keys())
    p_class = np.full((n, nbins + 1), np.nan)
    commuters = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        members = partition.members(k)
        commuters[k - 1] = sum(1 for node in members if int(node) in dists)
        h = histogram(int(node) for node in members)
        if h is not None:
            p_class[k - 1] = h
    delta = p_class - p_all[None, :]
    return CommuteDeltaTable(bin_edges=edges, p_all=p_all, p_class=p_class,
                             delta=delta, commuters_per_class=commuters)
