"""
Asymptotic bias of estimator functionals under point contamination
(1 - eps) F_theta + eps delta_x0, its maximum over x0 and the numeric
gross-error sensitivity.

The x0 search set is {0, 1, ..., ceil(3 * mean(F_theta))} plus AT_INFINITY.
Beyond the median-crossing region every finite x0 gives the AT_INFINITY
value, so the supremum is attained on this set.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import pandas as pd

from .asymptotics import boundary_cell
from .errors import DomainError, EstimationError
from .estimator import EstimateResult, estimate_optimal
from .families import (
    AT_INFINITY,
    ContaminationPoint,
    IntegerDistribution,
    ParametricFamily,
    contaminate,
    is_at_infinity,
    resolve_family,
)

_LOGGER = logging.getLogger("umedopt.bias")

Functional = Callable[[IntegerDistribution, ParametricFamily], EstimateResult]

# largest eps for which the contaminated uniform median stays finite
EPS_CAP = 0.5


@dataclass(frozen=True)
class BiasRecord:
    x0: ContaminationPoint
    theta_contaminated: float
    bias: float


@dataclass(frozen=True)
class MaxBiasResult:
    """Overall maximum (ties go to AT_INFINITY), the grid-only maximum and the AT_INFINITY value."""
    bias: float
    argmax: ContaminationPoint
    grid_bias: float
    grid_argmax: int
    infinity_bias: float
    records: Tuple[BiasRecord, ...]


def format_x0(x0: ContaminationPoint):
    return "inf" if is_at_infinity(x0) else int(x0)


def contamination_grid(
    family: ParametricFamily,
    theta: float,
    include_infinity: bool = True,
    span: float = 3.0,
) -> List[ContaminationPoint]:
    """0..ceil(span * mean), optionally followed by AT_INFINITY."""
    family = resolve_family(family)
    top = math.ceil(round(span * family.mean(theta), 9))
    grid: List[ContaminationPoint] = list(range(top + 1))
    if include_infinity:
        grid.append(AT_INFINITY)
    return grid


def _check_eps(eps: float) -> float:
    if not (0.0 <= eps < EPS_CAP):
        raise DomainError(f"contamination rate must lie in [0, {EPS_CAP}), got {eps}")
    return float(eps)


def asymptotic_bias(
    family: ParametricFamily,
    theta: float,
    eps: float,
    x0: ContaminationPoint,
    estimator: Optional[Functional] = None,
) -> BiasRecord:
    family = resolve_family(family)
    eps = _check_eps(eps)
    estimator = estimator or estimate_optimal
    mixture = contaminate(family.at(theta), eps, x0)
    theta_c = estimator(mixture, family).theta_hat
    return BiasRecord(x0=x0, theta_contaminated=theta_c, bias=abs(theta_c - theta))


def max_bias(
    family: ParametricFamily,
    theta: float,
    eps: float,
    estimator: Optional[Functional] = None,
) -> MaxBiasResult:
    family = resolve_family(family)
    eps = _check_eps(eps)
    start = time.perf_counter()
    records = tuple(
        asymptotic_bias(family, theta, eps, x0, estimator)
        for x0 in contamination_grid(family, theta)
    )
    finite = [r for r in records if not is_at_infinity(r.x0)]
    # first maximal grid point
    grid_best = max(finite, key=lambda r: r.bias)
    at_inf = records[-1].bias
    if at_inf >= grid_best.bias:
        bias, argmax = at_inf, AT_INFINITY
    else:
        bias, argmax = grid_best.bias, grid_best.x0
    _LOGGER.debug(
        "max_bias family=%s theta=%g eps=%g bias=%.6f argmax=%s grid_points=%d duration_sec=%.3f",
        family.name, theta, eps, bias, argmax, len(finite), time.perf_counter() - start,
    )
    return MaxBiasResult(
        bias=bias,
        argmax=argmax,
        grid_bias=grid_best.bias,
        grid_argmax=int(grid_best.x0),
        infinity_bias=at_inf,
        records=records,
    )


def ges_numeric(
    family: ParametricFamily,
    theta: float,
    eps: float = 1e-4,
    estimator: Optional[Functional] = None,
) -> float:
    """max over the contamination grid of |T((1 - eps) F_theta + eps delta_x0) - theta| / eps."""
    family = resolve_family(family)
    if boundary_cell(family.at(theta)) is not None:
        raise DomainError(f"gross-error sensitivity is evaluated at interior parameters only, theta={theta}")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    return max_bias(family, theta, eps, estimator).bias / eps


def bias_table(
    family: ParametricFamily,
    thetas: Iterable[float],
    epsilons: Iterable[float],
    estimator: Optional[Functional] = None,
) -> pd.DataFrame:
    """One row per (eps, theta), eps-major as in the printed max-bias table."""
    family = resolve_family(family)
    thetas = list(thetas)
    rows = []
    for eps in epsilons:
        for theta in thetas:
            try:
                res = max_bias(family, theta, eps, estimator)
            except EstimationError as e:
                raise EstimationError(f"cell eps={eps:g}, theta={theta:g}: {e}", target=e.target) from e
            rows.append({
                "eps": float(eps),
                "theta": float(theta),
                "max_bias": res.bias,
                "argmax": format_x0(res.argmax),
                "grid_max_bias": res.grid_bias,
                "grid_argmax": res.grid_argmax,
                "infinity_bias": res.infinity_bias,
            })
    return pd.DataFrame(rows, columns=[
        "eps", "theta", "max_bias", "argmax", "grid_max_bias", "grid_argmax", "infinity_bias",
    ])
