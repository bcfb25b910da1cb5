"""Statistical characterization of transformer and transmission line
electrical parameters in power grid cases.

The toolkit parses grid case data into branch records, computes the
descriptive statistics of per-unit reactance, MVA rating, and X/R ratio
per voltage class, fits candidate distribution families scored by KL
divergence, validates a grid against reference profiles, and samples
synthetic parameters that reproduce the reference statistics.

Entry points: the `gridparams` console command (see cli.build_parser)
or the module APIs re-exported here.
"""

from .distributions import Exponential, Gev, Normal, Tls, cdf, pdf, quantile, sample
from .fitting import FitResult, KlScore, fit_mle, kl_divergence, select_best
from .ingest import (
    BranchKind,
    BranchRecord,
    classify_branch,
    filter_valid,
    parse_branch_csv,
    parse_matpower_case,
)
from .per_unit import BaseSpec, rebase_impedance, to_own_base, xr_ratio
from .profiles import (
    ParameterKind,
    ReferenceEntry,
    ValidationThresholds,
    builtin_profile,
    validate,
)
from .sampler import calibrate_reactance_tls, generate_lines, generate_transformers
from .stats import band_fraction, histogram, pearson, spearman, summarize

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BaseSpec",
    "BranchKind",
    "BranchRecord",
    "Exponential",
    "FitResult",
    "Gev",
    "KlScore",
    "Normal",
    "ParameterKind",
    "ReferenceEntry",
    "Tls",
    "ValidationThresholds",
    "band_fraction",
    "builtin_profile",
    "calibrate_reactance_tls",
    "cdf",
    "classify_branch",
    "filter_valid",
    "fit_mle",
    "generate_lines",
    "generate_transformers",
    "histogram",
    "kl_divergence",
    "parse_branch_csv",
    "parse_matpower_case",
    "pdf",
    "pearson",
    "quantile",
    "rebase_impedance",
    "sample",
    "select_best",
    "spearman",
    "summarize",
    "to_own_base",
    "validate",
    "xr_ratio",
]
