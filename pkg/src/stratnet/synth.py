"""Synthetic society generator with planted, tunable correlations.

Every phenomenon the analysis pipeline measures (wealth inequality,
status homophily, rich clubs, spatial class clustering, class-dependent
commuting) can be planted here with a known strength, which makes the
generator the verification oracle for the whole pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .econ import ClassPartition, partition_equal_wealth
from .geo import EARTH_RADIUS_KM, GeoPoint, wrap_longitude
from .graph import SocialGraph


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_nodes: int = 10_000
    n_edges: int = 50_000
    pareto_alpha: float = 1.5
    wealth_min: float = 1.0
    n_classes: int = 9
    homophily: float = 0.0               # 0 = none; larger = stronger
    spatial_clusters: int = 9
    cluster_dispersion_km: float = 20.0
    class_cluster_coupling: float = 0.0  # 0 = independent, 1 = deterministic
    rich_club_boost: float = 1.0         # edge weight multiplier inside top set
    rich_club_top_fraction: float = 0.01
    commute_class_coupling: float = 0.0  # exponent on class index for median
    commute_median_km: float = 5.0
    commute_sigma: float = 0.6           # log-scale spread
    region_center: tuple = (23.0, -102.0)
    region_half_deg: tuple = (8.0, 10.0)
    seed: int = 0

    def __post_init__(self):
        max_edges = self.n_nodes * (self.n_nodes - 1) // 2
        if self.n_edges > max_edges:
            raise SynthError("edge budget exceeds the complete graph")
        if self.pareto_alpha <= 1:
            raise SynthError("pareto_alpha must exceed 1 (finite mean)")
        if self.wealth_min <= 0:
            raise SynthError("wealth_min must be positive")
        if self.homophily < 0:
            raise SynthError("homophily must be >= 0")
        if not 0.0 <= self.class_cluster_coupling <= 1.0:
            raise SynthError("class_cluster_coupling must be in [0, 1]")
        if self.rich_club_boost < 1.0:
            raise SynthError("rich_club_boost must be >= 1")
        if not -1.0 <= self.commute_class_coupling <= 1.0:
            raise SynthError("commute_class_coupling must be in [-1, 1]")


def _rng(cfg: SynthConfig, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([cfg.seed, stream]))


def sample_wealth(cfg: SynthConfig) -> np.ndarray:
    """I.i.d. Pareto(alpha, wealth_min) draws, deterministic per seed."""
    rng = _rng(cfg, 0)
    u = rng.random(cfg.n_nodes)
    return cfg.wealth_min * (1.0 - u) ** (-1.0 / cfg.pareto_alpha)


def place_population(cfg: SynthConfig, partition: ClassPartition) -> Dict[int, GeoPoint]:
    """Cluster centers in a bounded region; class-biased cluster choice.

    With probability class_cluster_coupling a node goes to a cluster
    matched to its class (class k -> cluster (k-1) mod n_clusters),
    otherwise to a uniformly random cluster.  Position is the center plus
    isotropic Gaussian noise of the configured dispersion.
    """
    rng = _rng(cfg, 1)
    lat0, lon0 = cfg.region_center
    dlat, dlon = cfg.region_half_deg
    centers = np.column_stack([
        rng.uniform(lat0 - dlat, lat0 + dlat, cfg.spatial_clusters),
        rng.uniform(lon0 - dlon, lon0 + dlon, cfg.spatial_clusters),
    ])
    km_per_deg_lat = 111.32
    out: Dict[int, GeoPoint] = {}
    for node in range(cfg.n_nodes):
        matched = (int(partition.labels[node]) - 1) % cfg.spatial_clusters
        if rng.random() < cfg.class_cluster_coupling:
            c = matched
        else:
            c = int(rng.integers(0, cfg.spatial_clusters))
        lat_c, lon_c = centers[c]
        noise_km = rng.normal(0.0, cfg.cluster_dispersion_km, size=2)
        lat = lat_c + noise_km[0] / km_per_deg_lat
        lon = lon_c + noise_km[1] / (km_per_deg_lat * np.cos(np.radians(lat_c)))
        out[node] = GeoPoint(lat=float(np.clip(lat, -90.0, 90.0)),
                             lon=wrap_longitude(float(lon)))
    return out


def generate_graph(cfg: SynthConfig, partition: ClassPartition,
                   wealth: np.ndarray) -> SocialGraph:
    """Sample n_edges distinct edges with class-homophilic acceptance.

    Candidate (u, v) is accepted with weight exp(-h * |class(u)-class(v)|),
    multiplied by rich_club_boost when both endpoints sit in the top
    wealth percentile.  h=0 and boost=1 reduces to a uniform G(n, m).
    """
    rng = _rng(cfg, 2)
    n, m = cfg.n_nodes, cfg.n_edges
    labels = partition.labels
    cutoff = np.quantile(wealth, 1.0 - cfg.rich_club_top_fraction)
    is_top = wealth >= cutoff
    w_max = cfg.rich_club_boost
    edges = set()
    max_proposals = 500 * m + 10_000
    proposals = 0
    batch = max(1024, m)
    while len(edges) < m:
        if proposals > max_proposals:
            raise SynthError("edge budget infeasible under the given weights")
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        accept_u = rng.random(batch)
        proposals += batch
        weights = np.exp(-cfg.homophily * np.abs(labels[us] - labels[vs]))
        weights = np.where(is_top[us] & is_top[vs],
                           weights * cfg.rich_club_boost, weights)
        ok = (us != vs) & (accept_u < weights / w_max)
        for u, v in zip(us[ok], vs[ok]):
            e = (int(u), int(v)) if u < v else (int(v), int(u))
            if e not in edges:
                edges.add(e)
                if len(edges) == m:
                    break
    return SocialGraph.from_edge_list(n, edges)


def _destination(p: GeoPoint, distance_km: float, bearing_rad: float) -> GeoPoint:
    """Point at a given great-circle distance and bearing from p."""
    delta = distance_km / EARTH_RADIUS_KM
    la1, lo1 = np.radians(p.lat), np.radians(p.lon)
    la2 = np.arcsin(np.sin(la1) * np.cos(delta)
                    + np.cos(la1) * np.sin(delta) * np.cos(bearing_rad))
    lo2 = lo1 + np.arctan2(np.sin(bearing_rad) * np.sin(delta) * np.cos(la1),
                           np.cos(delta) - np.sin(la1) * np.sin(la2))
    lat = float(np.degrees(la2))
    return GeoPoint(lat=lat, lon=wrap_longitude(float(np.degrees(lo2))))


def assign_commutes(cfg: SynthConfig, partition: ClassPartition,
                    homes: Dict[int, GeoPoint]) -> Dict[int, GeoPoint]:
    """Work location per node: log-normal commute distance, uniform bearing.

    The log-normal median scales as class_index ** commute_class_coupling,
    so coupling 0 decouples commute length from class entirely.
    """
    rng = _rng(cfg, 3)
    out: Dict[int, GeoPoint] = {}
    for node in range(cfg.n_nodes):
        if node not in homes:
            continue
        k = int(partition.labels[node])
        median = cfg.commute_median_km * k ** cfg.commute_class_coupling
        d = float(rng.lognormal(np.log(median), cfg.commute_sigma))
        bearing = float(rng.uniform(0.0, 2.0 * np.pi))
        out[node] = _destination(homes[node], d, bearing)
    return out


@dataclass
class Society:
    """Everything the analysis pipeline consumes, with known ground truth."""

    config: SynthConfig
    graph: SocialGraph
    wealth: np.ndarray
    partition: ClassPartition
    homes: Dict[int, GeoPoint] = field(default_factory=dict)
    works: Dict[int, GeoPoint] = field(default_factory=dict)


def generate_society(cfg: SynthConfig, with_geo: bool = True) -> Society:
    wealth = sample_wealth(cfg)
    partition = partition_equal_wealth(wealth, cfg.n_classes)
    graph = generate_graph(cfg, partition, wealth)
    homes: Dict[int, GeoPoint] = {}
    works: Dict[int, GeoPoint] = {}
    if with_geo:
        homes = place_population(cfg, partition)
        works = assign_commutes(cfg, partition, homes)
    return Society(config=cfg, graph=graph, wealth=wealth,
                   partition=partition, homes=homes, works=works)
