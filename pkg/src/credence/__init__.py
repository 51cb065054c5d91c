"""Credence goods with a partially credible expert.

Closed-form equilibrium values, prices and welfare for the two-type model,
plus brute-force oracles that check them.
"""

from .envelopes import (
    EnvelopePair,
    PiecewiseAffine,
    chi_lower,
    indirect_utility,
    pi,
    pi_envelopes,
    q_hat,
    q_lower,
    qbar,
    qtilde,
    thresholds,
)
from .equilibrium import (
    Experiment,
    Mode,
    PEqValue,
    SignallingStrategy,
    benchmark_value,
    chi_star,
    equilibrium_profile,
    equilibrium_value,
    ev_star,
    optimal_experiment,
    optimal_prices,
    outcome_distribution,
    p_eq_value,
    public_credibility_optimum,
    public_credibility_value,
    v_star,
)
from .errors import (
    AlphabetMismatch,
    AssumptionViolation,
    ConfigError,
    CredenceError,
    DomainError,
    InfeasibleError,
    ModeError,
    PriceListError,
    RegionError,
)
from .model import (
    EPS,
    Action,
    ModelParams,
    PriceList,
    Region,
    Scenario,
    best_responses,
    classify_region,
    validate_params,
)
from .welfare import client_value_set, discontinuity_gaps, eu_star, total_surplus, u_star

__version__ = "0.1.0"
