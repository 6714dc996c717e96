"""Bayesian posterior of mutual information for categorical count data."""
from .errors import BayesMIError, InputError, NumericalDomainError
from .tables import CountTable, PriorSpec, marginals, with_prior
from .specfun import ln_gamma, psi, psi_integer
from .moments import MomentSummary, core_stats, empirical_mi, mean_exact, summarize
from .missing import em_mle, leading_moments, mle_one_side, variance_general, variance_one_side
from .distfit import FittedDist, fit, fit_with_fallback, quantile, tail_above
from .mc import mi_posterior_mc, sample_dirichlet, tail_exponent_probe
from .filters import FilterConfig, FilterDecision, decide, select

__version__ = "0.1.0"
