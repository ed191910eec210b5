"""Globally one-to-one entity matching across several data sources."""

from .baselines import (
    InstanceTooLarge,
    ManyManyResolution,
    exact_bipartite,
    exact_multipartite_bruteforce,
    many_many,
    sequential_bipartite,
)
from .evaluation import (
    PrPoint,
    default_thresholds,
    f1_score,
    pr_curve,
    pr_real,
    pr_synth,
    weight_report,
)
from .graph import (
    NULL_ENTITY,
    Clique,
    ContractViolation,
    EntityRef,
    GraphError,
    Matching,
    MultipartiteGraph,
    ParseError,
    TruthSet,
    apply_threshold,
    clique_weight,
    from_dense,
    load_graph,
    matching_weight,
    pair_score,
    read_edges,
    read_truth,
    validate_one_to_one,
    write_edges,
    write_truth,
)
from .greedy import CliqueForest, MergeOutcome, greedy_match
from .mp import (
    AlphaStore,
    MpConfig,
    MpDiagnostics,
    final_selection,
    solve_mp,
    stepwise_search,
    update_round,
)
from .synth import SynthConfig, SynthWorld, generate

__version__ = "0.1.0"
