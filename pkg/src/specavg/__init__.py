"""specavg: eigenvector and singular-vector estimation for large
matrices by averaging the spectral decompositions of many independently
Bernoulli-subsampled sparse copies, with the perturbation, incoherence,
variance, and concentration machinery to predict and validate the error.
"""

from .blowup import (
    BlowupTrace,
    binomial_tail_lower_bound,
    blowup_experiment,
    degree_threshold,
    gram_diagonal,
    sample_centered_sparse,
    sample_degrees,
    sampling_rate,
)
from .errors import (
    AllDrawsFailed,
    DegenerateGapWarning,
    DomainError,
    DuplicateEigenvalue,
    EmptyGraph,
    InfeasibleSupports,
    InvalidVn,
    LengthMismatch,
    NoConvergence,
    NodeIdOverflow,
    OutsidePerturbativeRegime,
    ParseError,
    ShapeMismatch,
    SpecAvgError,
    ZeroMatrix,
    ZeroVariance,
)
from .estimator import (
    AveragingPlan,
    EstimatorReport,
    VarianceBudget,
    estimate,
    estimate_rect,
    quadratic_form_variance,
    recommend_samples,
    residual_norm_moment_bounds,
    residual_second_moment_diag,
    strong_separation_ok,
    variance_bound,
)
from .experiments import (
    GoogleOperator,
    RankReport,
    SyntheticSpec,
    WebGraph,
    generate_power_law_graph,
    google_matrix,
    load_edge_list,
    pagerank,
    perron_vector,
    spearman_rho,
    speedup_benchmark,
    sweep_alignment,
    sweep_pagerank,
    sweep_sample_count,
    synth_rect,
    synth_symmetric,
    write_edge_list,
)
from .incoherence import (
    Admissibility,
    BoundReport,
    RectSpectralModel,
    SpectralModel,
    fit_alpha,
    incoherence,
    incoherence_bound,
    incoherence_bound_rect,
    incoherence_rect,
    max_entry_bound,
    perturbation_admissible,
    spectral_model_from_dense,
)
from .matrix_core import (
    DenseSymmetric,
    EigenPair,
    SparseCSR,
    fix_sign,
    hadamard,
    leading_singular_triplet,
    norms,
    numerical_rank,
    spectral_norm,
    top_k_eigen,
)
from .matrix_market import read_matrix_market, write_matrix_market
from .perturbation import (
    DeltaOperator,
    PerturbationExpansion,
    ReducedResolvent,
    exact_eigenvector,
    expand,
    reduced_resolvent,
    regularized_vector,
    second_order_vector,
    separation,
)
from .subsample import (
    CenteredBernoulliMatrix,
    SampleConfig,
    SampleDraw,
    centered_values,
    concentration_profile,
    draw_c,
    draw_paired,
    draw_sample,
    median_deviation_bound,
    residual,
)

__version__ = "0.1.0"
