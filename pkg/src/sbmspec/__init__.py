"""Two-class stochastic blockmodels and normalized vs unnormalized spectral
clustering: sampling, embeddings, oracle-center quality metrics, their
closed-form asymptotics, simulation sweeps and blockmodel link prediction."""

from .clustering import (
    ClusterAssignment,
    SpectralEmbedding,
    kmeans,
    kmeans_balanced_best,
    spectral_cluster,
    spectral_embedding,
)
from .config import ConfigError, ExperimentConfig, build_config, load_config
from .eigen import EigenPairs, ZeroDegreeError, adjacency_matrix, normalize_adjacency, top_k_eigenpairs
from .graph import (
    EdgeListParseError,
    Graph,
    InconsistentUniverseError,
    NodeLabeling,
    largest_connected_component,
    load_edge_list,
    merge_snapshots,
    prune_min_degree,
)
from .linkpred import (
    FittedBlockProbabilities,
    PredictionEval,
    auc,
    cross_validate_k,
    evaluate_protocol,
    fit_phat,
    katz_scores,
    score_pairs,
)
from .metrics import (
    QualityMetrics,
    ResidualDecomposition,
    empirical_vs_analytic,
    eigenvalue_deviation,
    misclassification_rate,
    quality_metrics,
    residual_decomposition,
)
from .sbm import (
    AnalyticDistances,
    BlockModelParams,
    DegenerateModelError,
    analytic_distances,
    densities,
    population_spectrum,
    sample,
    sample_blocks,
    sparse_limit_ratio,
)

__version__ = "0.1.0"
