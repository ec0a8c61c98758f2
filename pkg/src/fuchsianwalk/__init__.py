"""Random walks on Fuchsian groups given by explicit SL2(R) generators.

Simulates n-step generator products with overflow-safe scaled arithmetic,
classifies the sampled elements, computes geometric lengths, and estimates
the limit laws of log||g_n...g_1|| (law of large numbers, central limit
theorem, large deviations, local limit theorem, iterated logarithm), with an
exact enumeration oracle at small word length.
"""

from .errors import (
    DegenerateInput,
    DomainError,
    EmptyInput,
    FuchsianWalkError,
    NoInverse,
    NumericFailure,
    ParseError,
    TooLarge,
    ValidationError,
)
from .groups import (
    CertStatus,
    Custom,
    GeneratorSet,
    HypothesisReport,
    Pants,
    Sanov,
    dump_config,
    load,
    pants,
    sanov,
    validate,
)
from .rng import SplitMix64
from .sl2 import (
    ElementClass,
    Mat2,
    ScaledMat,
    classify,
    from_mat2,
    geom_length,
    identity,
    log_op_norm,
    mul,
    observe,
    restore,
    signed_log_trace,
)
from .stats import (
    Atom,
    ExactDistribution,
    LawEstimates,
    LdpPoint,
    clt_ks,
    estimate_lambda1,
    estimate_laws,
    estimate_phi,
    exact_distribution,
    hyperbolic_fraction,
    ldp_estimate,
    lil_normalize,
    llt_window,
    normal_cdf,
    render_summary_json,
)
from .walk import (
    Checkpoint,
    PathTrajectory,
    StepLaw,
    WalkSample,
    read_samples_csv,
    simulate_batch,
    simulate_path,
    write_samples_csv,
)
from .words import (
    Word,
    algebraic_length,
    count_reduced,
    cyclic_reduce,
    enumerate_words,
    evaluate,
    format_word,
    free_reduce,
    parse,
    sample_cyclic_reduced,
    sample_reduced,
)

__version__ = "0.1.0"
