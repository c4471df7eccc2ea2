"""countsample: exact and parallel sampling from discrete product
distributions via conditional-marginal (counting) oracles."""

from .coupler import (
    CouplerKind,
    Distribution,
    RandomTape,
    couple,
    gumbel_trick,
    min_coupler,
)
from .gf2 import BitMatrix, BitVector, rank, solution_count_log2, solve_affine_with_pinning
from .gridmatch import GridMatchingOracle, fkt_match_count, match_count
from .hardness import (
    HardnessInstance,
    HardnessOracle,
    ParameterInfeasible,
    count_hypercube,
    generate,
    marginal_oracle_view,
    probe_no_info,
)
from .oracle import (
    AffineCodeOracle,
    ApproximateOracle,
    ConditionalOracle,
    MalformedQuery,
    MarginalQuery,
    MarkovChainOracle,
    OracleError,
    PairCopyOracle,
    Pinning,
    ProductOracle,
    TableOracle,
    ZeroMeasurePinning,
    approximate_wrap,
    oracle_from_json,
)
from .sampler import (
    Mode,
    PermutationMode,
    Sample,
    SamplerConfig,
    SamplerTrace,
    compute_abar,
    deterministic_round_bound,
    efficient_sample,
    parallel_sample,
    resolve_theta,
    run_sampler,
    sequential_sample,
)
from .diagnostics import DistanceReport, check_coupler_robustness, check_pinning_lemma, kl, tv

__all__ = [
    "AffineCodeOracle",
    "ApproximateOracle",
    "BitMatrix",
    "BitVector",
    "ConditionalOracle",
    "CouplerKind",
    "DistanceReport",
    "Distribution",
    "GridMatchingOracle",
    "HardnessInstance",
    "HardnessOracle",
    "MalformedQuery",
    "MarginalQuery",
    "MarkovChainOracle",
    "Mode",
    "OracleError",
    "PairCopyOracle",
    "ParameterInfeasible",
    "PermutationMode",
    "Pinning",
    "ProductOracle",
    "RandomTape",
    "Sample",
    "SamplerConfig",
    "SamplerTrace",
    "TableOracle",
    "ZeroMeasurePinning",
    "approximate_wrap",
    "check_coupler_robustness",
    "check_pinning_lemma",
    "compute_abar",
    "couple",
    "count_hypercube",
    "deterministic_round_bound",
    "efficient_sample",
    "fkt_match_count",
    "generate",
    "gumbel_trick",
    "kl",
    "marginal_oracle_view",
    "match_count",
    "min_coupler",
    "oracle_from_json",
    "parallel_sample",
    "probe_no_info",
    "rank",
    "resolve_theta",
    "run_sampler",
    "sequential_sample",
    "solution_count_log2",
    "solve_affine_with_pinning",
    "tv",
]
