"""Structure learning for Gaussian precision matrices via empirically
centered G-Wishart posteriors."""

__version__ = "0.1.0"

from .errors import (
    DegenerateDraw,
    DimensionMismatch,
    EgwishError,
    EmptyChain,
    InvalidPair,
    NotDecomposable,
    NotPD,
    SeedRequired,
    SupportViolation,
)
from .graph import (
    CliqueTree,
    Graph,
    ParamIndex,
    band_graph,
    clique_decomposition,
    complete_graph,
    empty_graph,
    flip_edge,
    from_json_dict,
    is_decomposable,
    is_perfect_elimination,
    mcs_order,
    pair_from_index,
    pair_index,
    param_index,
    path_graph,
    read_adjacency_csv,
    read_graph_json,
    star_graph,
    to_json_dict,
    write_adjacency_csv,
    write_graph_json,
)
from .matrixio import read_matrix_csv, write_matrix_csv
from .estimation import (
    MleConfig,
    PrecisionEstimate,
    SampleCov,
    curvature_matrix,
    fit_mle,
    kkt_violation,
    log_det_minus_trace,
    log_likelihood,
    sample_cov_from_data,
)
from .gwishart import (
    GWishartParams,
    NormConstEstimate,
    analytic_log_norm,
    laplace_log_norm,
    log_density,
    mc_log_norm,
)
from .posterior import (
    GraphPrior,
    GraphScore,
    PosteriorConfig,
    ScoreCache,
    conditional_posterior_params,
    dimension_penalty,
    log_graph_prior,
    score_graph,
    write_scores_csv,
)
from .sampler import (
    ChainResult,
    DegreeRankPosterior,
    McmcConfig,
    degree_posterior,
    edge_inclusion,
    median_probability_model,
    run_chain,
    write_chain_jsonl,
)
from .simulate import (
    SimulationTruth,
    make_model,
    model_ar1,
    model_ar2,
    model_random,
    model_star,
    sample_mvn,
)
from .metrics import (
    ConfusionCounts,
    LogNormErrorReport,
    ReplicationRow,
    confusion,
    lognorm_error_report,
    read_replication_csv,
    rel_error_lognorm,
    sp_se_mcc,
    write_replication_csv,
)
from .svgplot import LineSeries, line_plot

__all__ = [
    "__version__",
    "DegenerateDraw",
    "DimensionMismatch",
    "EgwishError",
    "EmptyChain",
    "InvalidPair",
    "NotDecomposable",
    "NotPD",
    "SeedRequired",
    "SupportViolation",
    "CliqueTree",
    "Graph",
    "ParamIndex",
    "band_graph",
    "clique_decomposition",
    "complete_graph",
    "empty_graph",
    "flip_edge",
    "from_json_dict",
    "is_decomposable",
    "is_perfect_elimination",
    "mcs_order",
    "pair_from_index",
    "pair_index",
    "param_index",
    "path_graph",
    "read_adjacency_csv",
    "read_graph_json",
    "star_graph",
    "to_json_dict",
    "write_adjacency_csv",
    "write_graph_json",
    "read_matrix_csv",
    "write_matrix_csv",
    "MleConfig",
    "PrecisionEstimate",
    "SampleCov",
    "curvature_matrix",
    "fit_mle",
    "kkt_violation",
    "log_det_minus_trace",
    "log_likelihood",
    "sample_cov_from_data",
    "GWishartParams",
    "NormConstEstimate",
    "analytic_log_norm",
    "laplace_log_norm",
    "log_density",
    "mc_log_norm",
    "GraphPrior",
    "GraphScore",
    "PosteriorConfig",
    "ScoreCache",
    "conditional_posterior_params",
    "dimension_penalty",
    "log_graph_prior",
    "score_graph",
    "write_scores_csv",
    "ChainResult",
    "DegreeRankPosterior",
    "McmcConfig",
    "degree_posterior",
    "edge_inclusion",
    "median_probability_model",
    "run_chain",
    "write_chain_jsonl",
    "SimulationTruth",
    "make_model",
    "model_ar1",
    "model_ar2",
    "model_random",
    "model_star",
    "sample_mvn",
    "ConfusionCounts",
    "LogNormErrorReport",
    "ReplicationRow",
    "confusion",
    "lognorm_error_report",
    "read_replication_csv",
    "rel_error_lognorm",
    "sp_se_mcc",
    "write_replication_csv",
    "LineSeries",
    "line_plot",
]
