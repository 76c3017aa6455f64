"""Fit tempered preferential attachment and power-law-with-exponential-decay
degree distributions to empirical degree histograms."""

__version__ = "0.1.0"

from .distributions import (
    DEFAULT_TOL,
    ModelEvaluation,
    PledParams,
    TpaParams,
    pled_ccdf,
    pled_normalizer,
    pled_pmf,
    tabulate,
    tpa_ccdf,
    tpa_p_a2,
    tpa_pmf,
    tpa_tail_ratio,
)
from .empirical import (
    DegreeHistogram,
    EmpiricalDistribution,
    empirical_ccdf,
    parse_histogram,
    truncate_renormalize,
)
from .fitting import FitConfig, FitReport, fit_pled, fit_tpa, log_ccdf_residuals, r_squared
from .sampler import SampleSpec, sample
