"""
umedopt - minimum gross-error-sensitivity estimation for integer-supported
one-parameter families through the uniform median.
"""

# Distributions and families
from .families import (
    AT_INFINITY,
    BinomialFamily,
    ContaminatedDistribution,
    EmpiricalDistribution,
    FiniteDistribution,
    IntegerDistribution,
    ParametricFamily,
    PointMass,
    PoissonDistribution,
    PoissonFamily,
    contaminate,
    empirical_from_sample,
    make_generator,
    poisson_pmf,
    register_family,
    resolve_family,
    sample_family,
    sample_poisson,
)

# Uniform median
from .umedian import UmedResult, huber_psi, k0, umed, umed_huber, umed_oracle

# Estimators
from .estimator import (
    EstimateResult,
    HampelConfig,
    SolverSettings,
    estimate_hampel,
    estimate_mle,
    estimate_optimal,
    g,
    g_inverse,
    hampel_c,
    m0,
    make_estimator,
)

# Asymptotics
from .asymptotics import (
    LawCase,
    LimitLaw,
    asymptotic_efficiency,
    efficiency_table,
    estimator_limit_law,
    g_lateral,
    g_prime,
    sigma2_umed,
    umed_covariance,
    umed_gradient,
    umed_limit_law,
)

# Contamination bias
from .contamination_bias import BiasRecord, MaxBiasResult, asymptotic_bias, bias_table, ges_numeric, max_bias

# Simulation
from .results import CellKey, CellRecord, SimulationResult
from .montecarlo import SimulationConfig, finite_sample_efficiency, max_mse_table, run_cell, run_simulation

# Input
from .data_loader import SampleFileLoader

from .errors import (
    ConfigError,
    DomainError,
    EstimationError,
    InvariantError,
    SimulationError,
    UmedOptError,
)

__all__ = [
    'AT_INFINITY',
    'BinomialFamily',
    'ContaminatedDistribution',
    'EmpiricalDistribution',
    'FiniteDistribution',
    'IntegerDistribution',
    'ParametricFamily',
    'PointMass',
    'PoissonDistribution',
    'PoissonFamily',
    'contaminate',
    'empirical_from_sample',
    'make_generator',
    'poisson_pmf',
    'register_family',
    'resolve_family',
    'sample_family',
    'sample_poisson',
    'UmedResult',
    'huber_psi',
    'k0',
    'umed',
    'umed_huber',
    'umed_oracle',
    'EstimateResult',
    'HampelConfig',
    'SolverSettings',
    'estimate_hampel',
    'estimate_mle',
    'estimate_optimal',
    'g',
    'g_inverse',
    'hampel_c',
    'm0',
    'make_estimator',
    'LawCase',
    'LimitLaw',
    'asymptotic_efficiency',
    'efficiency_table',
    'estimator_limit_law',
    'g_lateral',
    'g_prime',
    'sigma2_umed',
    'umed_covariance',
    'umed_gradient',
    'umed_limit_law',
    'BiasRecord',
    'MaxBiasResult',
    'asymptotic_bias',
    'bias_table',
    'ges_numeric',
    'max_bias',
    'CellKey',
    'CellRecord',
    'SimulationResult',
    'SimulationConfig',
    'finite_sample_efficiency',
    'max_mse_table',
    'run_cell',
    'run_simulation',
    'SampleFileLoader',
    'ConfigError',
    'DomainError',
    'EstimationError',
    'InvariantError',
    'SimulationError',
    'UmedOptError',
]
