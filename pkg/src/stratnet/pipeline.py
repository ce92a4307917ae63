"""Stage orchestration: ingest -> graph -> classes -> structure -> space.

Each stage reads its inputs from the output directory of the previous
stages and writes its own files before the next stage starts, so any
suffix of the stage list can be re-run against existing upstream outputs.
All randomness flows from the single configured seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import econ, geo, graph as graphmod, io as ionet
from .econ import partition_equal_wealth, ClassPartition
from .geo import GeoPoint
from .nullmodels import NullModel, ShuffleConfig, splitmix64  # noqa: F401
from .stratify import (null_class_link_matrix, null_density_curve,
                       residual_density_curve, rich_club,
                       stratification_matrix, normalize_rows, class_link_matrix)

STAGES = ["ingest", "graph", "classify", "stratify", "richclub",
          "spatial", "commute"]

# Published reference values for a proprietary population-scale dataset.
# Not reproducible at desk scale; shipped for the informational
# comparison table in the run report only, never asserted.
REFERENCE_CONSTANTS = {
    "gini_amp": 0.461,
    "gini_amd": 0.627,
    "pareto_alpha_amp": 1.315,
    "pareto_alpha_amd": 1.140,
    "pareto_split_amp": [0.27, 0.73],
    "pareto_split_amd": [0.19, 0.81],
    "pearson_amp_income": 0.758,
    "pearson_amp_salary": 0.691,
    "pearson_amp_debt": 0.104,
    "degree_assortativity": -0.00813,
    "richest_class_self_link_ratio": 2.25,
    "max_rich_club_coefficient": 8.0,
}


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    events: Optional[Path] = None
    transactions: Optional[Path] = None
    profiles: Optional[Path] = None
    locations: Optional[Path] = None
    out_dir: Path = Path("out")
    stages: List[str] = field(default_factory=lambda: list(STAGES))
    n_classes: int = 9
    segments: int = 100
    null_model: NullModel = NullModel.NM1
    realizations: int = 100
    swap_multiplier: float = 5.0
    seed: int = 0
    min_appearances: int = 10
    threads: int = 1

    @staticmethod
    def from_toml(path, **overrides) -> "RunConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        kwargs: dict = {}
        inputs = data.get("inputs", {})
        for key in ("events", "transactions", "profiles", "locations"):
            if key in inputs:
                kwargs[key] = Path(inputs[key])
        analysis = data.get("analysis", {})
        for key in ("n_classes", "segments", "realizations",
                    "swap_multiplier", "seed", "min_appearances", "threads"):
            if key in analysis:
                kwargs[key] = analysis[key]
        if "null_model" in analysis:
            kwargs["null_model"] = NullModel(analysis["null_model"])
        if "stages" in analysis:
            kwargs["stages"] = list(analysis["stages"])
        output = data.get("output", {})
        if "dir" in output:
            kwargs["out_dir"] = Path(output["dir"])
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**kwargs)

    def shuffle_config(self, stream: int) -> ShuffleConfig:
        return ShuffleConfig(model=self.null_model,
                             swap_multiplier=self.swap_multiplier,
                             seed=splitmix64(self.seed, stream))


@dataclass
class AnalysisReport:
    stages_run: List[str]
    files: Dict[str, str]          # relative path -> sha256
    metadata: dict
    reference_comparison: dict


# --- shared load/store helpers ----------------------------------------------


def _nodes_path(out: Path) -> Path:
    return out / "graph_nodes.csv"


def _edges_path(out: Path) -> Path:
    return out / "graph_edges.csv"


def load_graph(out: Path):
    """Rebuild the analysis graph and aligned AMP vector from stage files."""
    users, amps = [], []
    with open(_nodes_path(out), newline="") as fh:
        for row in csv.DictReader(fh):
            users.append(row["user"])
            amps.append(float(row["amp"]))
    edges = []
    with open(_edges_path(out), newline="") as fh:
        for row in csv.DictReader(fh):
            edges.append((int(row["u"]), int(row["v"])))
    g = graphmod.SocialGraph.from_edge_list(len(users), edges, node_ids=users)
    return g, np.asarray(amps)


def load_partition(out: Path, n_classes: int) -> ClassPartition:
    labels = []
    with open(out / "classes.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            labels.append(int(row["class"]))
    labels = np.asarray(labels, dtype=np.int64)
    sums = np.zeros(n_classes)
    sizes = np.bincount(labels - 1, minlength=n_classes)
    return ClassPartition(n_classes=n_classes, labels=labels,
                          class_sums=sums, class_sizes=sizes)


# --- stages -----------------------------------------------------------------


def stage_ingest(cfg: RunConfig) -> List[Path]:
    diags = ionet.validate_inputs(events=cfg.events,
                                  transactions=cfg.transactions,
                                  profiles=cfg.profiles,
                                  locations=cfg.locations)
    path = cfg.out_dir / "diagnostics.json"
    ionet.write_json(path, {
        "fatal": [str(d) for d in diags.items if d.severity == "fatal"],
        "warnings": [str(d) for d in diags.items if d.severity == "warning"],
    })
    diags.raise_if_fatal()
    return [path]


def compute_amps(transactions) -> Dict[str, float]:
    by_user: Dict[str, list] = {}
    for rec in transactions:
        by_user.setdefault(rec.user, []).append(rec)
    amps = {}
    for user, recs in by_user.items():
        try:
            amps[user] = econ.average_monthly_purchase(recs)
        except econ.InactiveUserError:
            continue
    return amps


def stage_graph(cfg: RunConfig) -> List[Path]:
    events = ionet.read_events(cfg.events)
    transactions = ionet.read_transactions(cfg.transactions)
    amps = compute_amps(transactions)

    dg = graphmod.build_interaction_graph(events)
    dg = graphmod.recursive_activity_filter(dg)
    g = graphmod.undirect_and_simplify(dg)
    keep = [i for i, uid in enumerate(g.node_ids) if uid in amps]
    g = graphmod.induce_subgraph(g, keep)
    g = graphmod.largest_component(g)

    nodes_path, edges_path = _nodes_path(cfg.out_dir), _edges_path(cfg.out_dir)
    ionet.write_csv(nodes_path, ["index", "user", "amp"],
                    [(i, uid, amps[uid]) for i, uid in enumerate(g.node_ids)])
    ionet.write_csv(edges_path, ["u", "v"],
                    [(int(u), int(v)) for u, v in g.edges])
    return [nodes_path, edges_path]


def stage_classify(cfg: RunConfig) -> List[Path]:
    g, amps = load_graph(cfg.out_dir)
    partition = partition_equal_wealth(amps, cfg.n_classes)
    classes_path = cfg.out_dir / "classes.csv"
    ionet.write_csv(classes_path, ["index", "user", "class"],
                    [(i, uid, int(partition.labels[i]))
                     for i, uid in enumerate(g.node_ids)])

    curve = econ.lorenz_curve(amps)
    top_people, top_wealth = econ.pareto_split(curve)
    g_coeff = econ.gini(curve)
    summary = {
        "n_individuals": int(amps.size),
        "gini": g_coeff,
        "pareto_split_top_people": top_people,
        "pareto_split_top_wealth": top_wealth,
        "pareto_alpha_from_gini_identity": (1.0 + 1.0 / g_coeff) / 2.0,
        "class_sizes": partition.class_sizes.tolist(),
        "class_sums": partition.class_sums.tolist(),
    }
    try:
        summary["pareto_alpha_hill"] = econ.pareto_tail_index(amps)
    except econ.EconError:
        summary["pareto_alpha_hill"] = None
    inequality_path = cfg.out_dir / "inequality.json"
    ionet.write_json(inequality_path, summary)
    written = [classes_path, inequality_path]

    if cfg.profiles is not None:
        prof_map = ionet.read_profiles(cfg.profiles)
        profiles = []
        for i, uid in enumerate(g.node_ids):
            p = prof_map.get(uid, econ.EgoProfile(user=uid))
            p.amp = float(amps[i])
            profiles.append(p)
        demo = econ.class_demographics(partition, profiles)
        demo_path = cfg.out_dir / "demographics.csv"
        ionet.write_csv(demo_path,
                        ["class", "size", "mean_amp", "mean_age", "fraction_women"],
                        [(d["class"], d["size"], d["mean_amp"], d["mean_age"],
                          d["fraction_women"]) for d in demo])
        written.append(demo_path)
    return written


def stage_stratify(cfg: RunConfig) -> List[Path]:
    g, _ = load_graph(cfg.out_dir)
    partition = load_partition(cfg.out_dir, cfg.n_classes)
    counts = class_link_matrix(g, partition)
    stats = null_class_link_matrix(g, partition, cfg.shuffle_config(stream=1),
                                   cfg.realizations)
    strat = stratification_matrix(counts.astype(float), stats.mean)
    paths = []
    for name, matrix in [("class_links.csv", counts.astype(float)),
                         ("null_class_links.csv", stats.mean),
                         ("strat_matrix.csv", strat.ratio),
                         ("strat_matrix_rownorm.csv", normalize_rows(strat.ratio))]:
        p = cfg.out_dir / name
        ionet.write_matrix_csv(p, matrix)
        paths.append(p)
    meta = cfg.out_dir / "stratify_meta.json"
    ionet.write_json(meta, {
        "null_model": stats.model.value,
        "realizations": stats.realizations,
        "seeds": stats.seeds,
        "swap_multiplier": cfg.swap_multiplier,
        "warning_count": stats.warning_count,
        "unreliable_cells": int((~strat.reliable).sum()),
    })
    paths.append(meta)
    return paths


def stage_richclub(cfg: RunConfig) -> List[Path]:
    g, amps = load_graph(cfg.out_dir)
    observed = residual_density_curve(g, amps, cfg.segments)
    stats = null_density_curve(g, amps, cfg.shuffle_config(stream=2),
                               cfg.realizations, cfg.segments)
    rho = rich_club(observed.phi, stats.mean)
    path = cfg.out_dir / "rich_club.csv"
    ionet.write_csv(path,
                    ["threshold", "phi", "phi_null", "rho",
                     "n_remaining", "e_remaining"],
                    [(float(t), float(p), float(pn), float(r), int(n), int(e))
                     for t, p, pn, r, n, e in zip(
                         observed.thresholds, observed.phi, stats.mean, rho,
                         observed.n_remaining, observed.e_remaining)])
    meta = cfg.out_dir / "richclub_meta.json"
    ionet.write_json(meta, {
        "null_model": stats.model.value,
        "realizations": stats.realizations,
        "seeds": stats.seeds,
        "segments": cfg.segments,
        "warning_count": stats.warning_count,
    })
    return [path, meta]


def _zip_locations(cfg: RunConfig, g) -> Dict[int, GeoPoint]:
    locs = ionet.read_locations(cfg.locations)
    out = {}
    for i, uid in enumerate(g.node_ids):
        point = locs.get(uid, {}).get("zip")
        if point is not None:
            out[i] = point
    return out


def stage_spatial(cfg: RunConfig) -> List[Path]:
    g, _ = load_graph(cfg.out_dir)
    partition = load_partition(cfg.out_dir, cfg.n_classes)
    locations = _zip_locations(cfg, g)
    dmat = geo.class_distance_matrix(g, partition, locations)
    counts = geo.located_link_counts(g, partition, locations)
    rel = geo.relative_distance_matrix(dmat, counts)
    p1, p2 = cfg.out_dir / "class_distance.csv", cfg.out_dir / "relative_distance.csv"
    ionet.write_matrix_csv(p1, dmat)
    ionet.write_matrix_csv(p2, rel)
    return [p1, p2]


def _homework(cfg: RunConfig, g) -> Dict[int, tuple]:
    """Home/work per node: stated locations first, inference as fallback."""
    locs = ionet.read_locations(cfg.locations) if cfg.locations else {}
    inferred: Dict[str, tuple] = {}
    need_inference = [uid for uid in g.node_ids
                      if not {"home", "work"} <= locs.get(uid, {}).keys()]
    if need_inference and cfg.events is not None:
        events = ionet.read_events(cfg.events)
        by_user: Dict[str, list] = {}
        for e in events:
            if e.cell_lat is None:
                continue
            by_user.setdefault(e.caller, []).append(e)
        for uid in need_inference:
            if uid in by_user:
                inferred[uid] = geo.infer_home_work(by_user[uid],
                                                    cfg.min_appearances)
    out = {}
    for i, uid in enumerate(g.node_ids):
        slot = locs.get(uid, {})
        home = slot.get("home") or (inferred.get(uid) or (None, None))[0]
        work = slot.get("work") or (inferred.get(uid) or (None, None))[1]
        if home is not None and work is not None:
            out[i] = (home, work)
    return out


def stage_commute(cfg: RunConfig) -> List[Path]:
    g, _ = load_graph(cfg.out_dir)
    partition = load_partition(cfg.out_dir, cfg.n_classes)
    homework = _homework(cfg, g)
    table = geo.commute_delta(homework, partition)
    n = partition.n_classes
    header = (["bin_lo_km", "bin_hi_km", "p_all"]
              + [f"p_class_{k}" for k in range(1, n + 1)]
              + [f"delta_{k}" for k in range(1, n + 1)])
    rows = []
    nbins = table.p_all.size
    for b in range(nbins):
        lo = 0.0 if b == 0 else float(table.bin_edges[b - 1])
        hi = float(table.bin_edges[b]) if b else float(table.bin_edges[0])
        rows.append([lo, hi, float(table.p_all[b])]
                    + [float(table.p_class[k, b]) for k in range(n)]
                    + [float(table.delta[k, b]) for k in range(n)])
    path = cfg.out_dir / "commute_delta.csv"
    ionet.write_csv(path, header, rows)
    return [path]


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "graph": stage_graph,
    "classify": stage_classify,
    "stratify": stage_stratify,
    "richclub": stage_richclub,
    "spatial": stage_spatial,
    "commute": stage_commute,
}


def _quarantine(paths: List[Path]):
    for p in paths:
        if p.exists():
            p.rename(p.with_name(p.name + ".quarantine"))


def run(cfg: RunConfig) -> AnalysisReport:
    """Execute the configured stages in dependency order and emit a report.

    A stage failure aborts the run, quarantines that stage's partial
    outputs, and raises StageError naming the stage.
    """
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    unknown = [s for s in cfg.stages if s not in STAGES]
    if unknown:
        raise ValueError(f"unknown stages: {unknown}")
    ordered = [s for s in STAGES if s in cfg.stages]
    files: Dict[str, str] = {}
    written_all: List[Path] = []
    for stage in ordered:
        written: List[Path] = []
        try:
            written = _STAGE_FUNCS[stage](cfg)
        except Exception as exc:
            _quarantine(written)
            raise StageError(stage, exc) from exc
        written_all.extend(written)
    for p in written_all:
        files[str(p.relative_to(cfg.out_dir))] = ionet.sha256_digest(p)
    metadata = {
        "seed": cfg.seed,
        "null_model": cfg.null_model.value,
        "realizations": cfg.realizations,
        "swap_multiplier": cfg.swap_multiplier,
        "n_classes": cfg.n_classes,
        "segments": cfg.segments,
        "stages": ordered,
    }
    comparison = _reference_comparison(cfg)
    report = AnalysisReport(stages_run=ordered, files=files,
                            metadata=metadata,
                            reference_comparison=comparison)
    ionet.write_json(cfg.out_dir / "report.json", {
        "stages_run": report.stages_run,
        "files": report.files,
        "metadata": report.metadata,
        "reference_comparison": report.reference_comparison,
    })
    return report


def _reference_comparison(cfg: RunConfig) -> dict:
    """Informational side-by-side of computed values vs published constants."""
    out = {"reference": REFERENCE_CONSTANTS, "computed": {}}
    inequality = cfg.out_dir / "inequality.json"
    if inequality.exists():
        import json
        with open(inequality) as fh:
            summary = json.load(fh)
        out["computed"]["gini_amp"] = summary.get("gini")
        out["computed"]["pareto_split_amp"] = [
            summary.get("pareto_split_top_people"),
            summary.get("pareto_split_top_wealth")]
        out["computed"]["pareto_alpha_amp"] = summary.get("pareto_alpha_hill")
    return out
