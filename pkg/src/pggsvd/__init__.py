"""Secure MIMO precoding for wiretap channels with finite-alphabet inputs.

Modules
-------
constellation
    BPSK / QPSK / square-QAM alphabets and product enumeration.
gsvd
    Generalized SVD of the (Bob, Eve) channel pair.
mi
    Mutual information, MMSE matrix and gradients under discrete inputs.
precoders
    GSVD baseline, PG-GSVD structure and the gradient-ascent optimizer.
secrecy
    Secrecy-rate evaluators, high-SNR checks, addition-count model.
harness
    Channel generation, SNR sweeps and CSV persistence.
"""

from ._version import __version__
from .constellation import (
    MAX_ENUMERATION,
    Constellation,
    EnumerationOverflowError,
    Scheme,
    make_constellation,
    parse_modulation,
    product_points,
)
from .gsvd import (
    GsvdDecomposition,
    RankAmbiguityError,
    WiretapChannel,
    gsvd,
    numerical_rank,
    reconstruct,
    subspace_dims,
)
from .harness import (
    ConfigError,
    CurveFormatError,
    ExperimentConfig,
    SecrecyCurve,
    SecrecyRow,
    average_curves,
    format_csv,
    generate_channel,
    load_config,
    parse_config,
    read_csv,
    run_sweep,
    write_csv,
)
from .mi import (
    MiEstimate,
    MiResult,
    NoiseQuadrature,
    analyze,
    mi_gradient,
    mi_gradient_mmse,
    mmse_matrix,
    mutual_information,
    scalar_mi,
)
from .precoders import (
    GsvdDesign,
    HattedGains,
    InfeasiblePairingError,
    OptimOptions,
    OptimResult,
    PgGsvdPrecoder,
    assemble_G,
    best_of,
    decoupling_residual,
    dft_unitary,
    group_channels,
    gsvd_precoder,
    hatted_gains,
    high_snr_construction,
    optimize_pg_gsvd,
    pair_subchannels,
    polar_unitary,
    precoder_from_gsvd_design,
)
from .secrecy import (
    ComplexityReport,
    SecrecyEstimate,
    Theorem2Check,
    addition_counts,
    gsvd_design_rate,
    gsvd_high_snr_bound,
    secrecy_rate_exact,
    secrecy_rate_exact_estimate,
    secrecy_rate_grouped,
    secrecy_rate_grouped_estimate,
    theorem2_condition,
)

__all__ = [
    "__version__",
    "MAX_ENUMERATION",
    "Constellation",
    "EnumerationOverflowError",
    "Scheme",
    "make_constellation",
    "parse_modulation",
    "product_points",
    "GsvdDecomposition",
    "RankAmbiguityError",
    "WiretapChannel",
    "gsvd",
    "numerical_rank",
    "reconstruct",
    "subspace_dims",
    "ConfigError",
    "CurveFormatError",
    "ExperimentConfig",
    "SecrecyCurve",
    "SecrecyRow",
    "average_curves",
    "format_csv",
    "generate_channel",
    "load_config",
    "parse_config",
    "read_csv",
    "run_sweep",
    "write_csv",
    "MiEstimate",
    "MiResult",
    "NoiseQuadrature",
    "analyze",
    "mi_gradient",
    "mi_gradient_mmse",
    "mmse_matrix",
    "mutual_information",
    "scalar_mi",
    "GsvdDesign",
    "HattedGains",
    "InfeasiblePairingError",
    "OptimOptions",
    "OptimResult",
    "PgGsvdPrecoder",
    "assemble_G",
    "best_of",
    "decoupling_residual",
    "dft_unitary",
    "group_channels",
    "gsvd_precoder",
    "hatted_gains",
    "high_snr_construction",
    "optimize_pg_gsvd",
    "pair_subchannels",
    "polar_unitary",
    "precoder_from_gsvd_design",
    "ComplexityReport",
    "SecrecyEstimate",
    "Theorem2Check",
    "addition_counts",
    "gsvd_design_rate",
    "gsvd_high_snr_bound",
    "secrecy_rate_exact",
    "secrecy_rate_exact_estimate",
    "secrecy_rate_grouped",
    "secrecy_rate_grouped_estimate",
    "theorem2_condition",
]
