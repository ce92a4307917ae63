"""Socioeconomic network stratification toolkit.

Builds a social graph from interaction events, assigns individuals to
equal-wealth classes from their spending records, and measures how
strongly the network is stratified by status: class link matrices
against degree-preserving null models, wealth-thresholded rich-club
curves, and spatial/commuting correlations.  A seeded synthetic society
generator with planted correlations serves as the verification oracle.
"""

from .econ import (ClassPartition, EgoProfile, LorenzCurve, TransactionRecord,
                   average_monthly_debt, average_monthly_purchase,
                   class_demographics, gini, lorenz_curve,
                   pareto_split, pareto_tail_index, partition_equal_wealth,
                   pearson_with_se)
from .geo import (CommuteDeltaTable, GeoPoint, class_distance_matrix,
                  commute_delta, haversine, infer_home_work,
                  relative_distance_matrix)
from .graph import (DirectedInteractionGraph, EventRecord, SocialGraph,
                    build_interaction_graph, degree_assortativity,
                    induce_subgraph, knn_curve, largest_component,
                    recursive_activity_filter, undirect_and_simplify)
from .nullmodels import (NullEnsembleStats, NullModel, ShuffleConfig,
                         ShuffleResult, nm1_shuffle, nm2_shuffle, run_ensemble)
from .stratify import (ResidualDensityCurve, StratMatrix, class_link_matrix,
                       normalize_rows, residual_density_curve, rich_club,
                       stratification_matrix)
from .synth import SynthConfig, generate_society

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
