"""Growing attributed citation-style networks through local processes.

The package grows directed networks one arriving node at a time. The main
model explores the existing graph with an attribute-biased random walk and
links to visited nodes; seven reference models (uniform, preferential
attachment, triangle closing, fitness, undirected walks, forest fire) and a
degree-preserving rewiring null share the same growth schedules. A metrics
module measures degree, clustering, mixing, distance and densification
structure, and a fitting module estimates model parameters by grid search.
"""

from .baselines import (
    configuration_rewire,
    grow_dms,
    grow_forest_fire,
    grow_hk,
    grow_ka,
    grow_rw_mu,
    grow_san,
    grow_uniform,
)
from .fitting import (
    FitResult,
    GridSpec,
    MetricVector,
    ModelComparison,
    compare_models,
    evaluate_candidate,
    fit_grid,
    grow_model,
    normalize_and_select,
    replicate_metrics,
)
from .graph import (
    GraphFileError,
    GraphSnapshot,
    TemporalAttributedDigraph,
    bfs_seed_subgraph,
    induced_subgraph,
    pair_seed_graph,
    read_graph,
    weakly_connected_components,
    write_graph,
)
from .metrics import (
    DegreeClusteringCurve,
    LognormalFit,
    MixingMatrix,
    densification_series,
    dpl_exponent,
    effective_diameter,
    global_assortativity,
    in_degrees,
    ks_statistic,
    local_assortativity,
    local_assortativity_values,
    local_clustering,
    local_clustering_values,
    lognormal_fit,
    mean_local_clustering,
    mean_path_length,
    mean_proximity,
    out_degrees,
    permutation_test_one_sided,
    proximity_statistic,
    sampled_distances,
    wre,
)
from .schedule import GrowthSchedule, mean_outdegree_by_epoch, realize_out_degree
from .walk import (
    GrowthStats,
    WalkParams,
    grow,
    random_walk_attach,
    select_seed,
    walk_distance_samples,
)

__version__ = "0.1.0"
