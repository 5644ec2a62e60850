"""
Estimators built on the uniform median.

- estimate_optimal: the minimum gross-error-sensitivity estimator, solving
  umed(F_n) = umed(F_theta) = g(theta).
- estimate_hampel: Hampel's optimal M-estimator with Huber truncation m of
  the centred score. For m <= m0(theta) it coincides with estimate_optimal.
- estimate_mle: the maximum-likelihood benchmark.

All three are functionals of an IntegerDistribution: pass an
EmpiricalDistribution for estimation, any other distribution for asymptotic
(bias, influence) computations. Scalar roots are found by geometric bracket
expansion followed by bisection, stopping at residual_tol or once the bracket
is narrow enough. estimate_optimal starts from a guess that depends on the
umed target alone; the others start from the sample mean. g has kinks
where k0(F_theta) jumps, so no derivative-based steps are taken.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from .errors import DomainError, EstimationError, InvariantError
from .families import IntegerDistribution, ParametricFamily, resolve_family
from .umedian import huber_psi, k0, umed

_LOGGER = logging.getLogger("umedopt.estimator")


@dataclass(frozen=True)
class SolverSettings:
    residual_tol: float = 1e-10
    bracket_rtol: float = 1e-12
    expansion_factor: float = 2.0
    max_expansions: int = 200
    bounds: Optional[Tuple[float, float]] = None  # None -> family.search_bounds

    def bounds_for(self, family: ParametricFamily) -> Tuple[float, float]:
        return self.bounds if self.bounds is not None else family.search_bounds


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class HampelConfig:
    m: float
    c_tol: float = 1e-13
    theta_tol: float = 1e-12

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise DomainError(f"Huber truncation m must be positive, got {self.m}")


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: float
    umed_target: float
    iterations: int
    residual: float
    method: str = "optimal"
    m: Optional[float] = None


class _ResidualReached(Exception):
    def __init__(self, x: float, fx: float):
        super().__init__(x, fx)
        self.x = x
        self.fx = fx


def _solve_increasing(
    func: Callable[[float], float],
    guess: float,
    bounds: Tuple[float, float],
    settings: SolverSettings,
    kind: str,
    out_of_range: str,
) -> Tuple[float, int, float]:
    """
    Root of a nondecreasing func inside bounds. Returns (root, iterations, residual).
    Expands geometrically from guess until the sign changes, then bisects.
    Stops at the first point with |func| < residual_tol, else once the bracket
    is narrower than bracket_rtol * (1 + |root|).
    """
    start = time.perf_counter()
    evaluations = 0

    def checked(t: float) -> float:
        nonlocal evaluations
        evaluations += 1
        ft = func(t)
        if ft == 0.0 or abs(ft) < settings.residual_tol:
            raise _ResidualReached(t, ft)
        return ft

    lo_bound, hi_bound = bounds
    x = min(max(guess, lo_bound), hi_bound)
    try:
        fx = checked(x)
        expansions = 0
        a, b = x, x
        if fx < 0.0:
            while True:
                if b >= hi_bound or expansions >= settings.max_expansions:
                    raise EstimationError(out_of_range)
                a, b = b, min(b * settings.expansion_factor, hi_bound)
                expansions += 1
                if checked(b) > 0.0:
                    break
        else:
            while True:
                if a <= lo_bound or expansions >= settings.max_expansions:
                    raise EstimationError(out_of_range)
                a, b = max(a / settings.expansion_factor, lo_bound), a
                expansions += 1
                if checked(a) < 0.0:
                    break
        root = optimize.bisect(
            checked, a, b,
            xtol=settings.bracket_rtol, rtol=max(settings.bracket_rtol, 1e-15),
            maxiter=500, disp=False,
        )
        residual = abs(func(root))
    except _ResidualReached as hit:
        root, residual = hit.x, abs(hit.fx)

    _LOGGER.debug(
        "solve kind=%s root=%.12g iterations=%d residual=%.3g duration_sec=%.4f",
        kind, root, evaluations, residual, time.perf_counter() - start,
    )
    return float(root), evaluations, float(residual)


# ---------------------------------------------------------------------------
# Optimal (umed-matching) estimator
# ---------------------------------------------------------------------------


def g(family: ParametricFamily, theta: float) -> float:
    """g(theta) = umed(F_theta): continuous and strictly increasing in theta."""
    return umed(family.at(theta)).value


def g_inverse(
    family: ParametricFamily,
    target: float,
    guess: Optional[float] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Tuple[float, int, float]:
    """Solve g(theta) = target. Returns (theta, iterations, residual)."""
    family = resolve_family(family)
    bounds = settings.bounds_for(family)
    if guess is None:
        guess = family.umed_guess(target)
    return _solve_increasing(
        lambda t: g(family, t) - target,
        guess, bounds, settings,
        kind="umed_match",
        out_of_range=f"target outside family range: umed={target:.6g} is not attained by {family.name} within {bounds}",
    )


def estimate_optimal(
    dist: IntegerDistribution,
    family: ParametricFamily,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> EstimateResult:
    """
    Minimum gross-error-sensitivity estimate: theta_hat with umed(F_theta_hat) = umed(F).

    Args:
        dist: sample (EmpiricalDistribution) or any distribution, for functional use
        family: parametric family or registry name
        settings: solver bounds and tolerances

    Returns:
        EstimateResult with theta_hat, the matched umed target, iterations and residual

    Raises:
        EstimationError: if umed(F) is not attained by the family within the search bounds
    """
    family = resolve_family(family)
    target = umed(dist).value
    theta, iterations, residual = g_inverse(family, target, settings=settings)
    return EstimateResult(theta_hat=theta, umed_target=target, iterations=iterations, residual=residual)


# ---------------------------------------------------------------------------
# Hampel-optimal M-estimator
# ---------------------------------------------------------------------------


def m0(family: ParametricFamily, theta: float) -> float:
    """Half the smaller score gap around k0*(theta) = k0(F_theta); only the upper gap when k0* = 0."""
    family = resolve_family(family)
    k = k0(family.at(theta))
    gaps = [float(family.score(k + 1, theta) - family.score(k, theta))]
    if k > 0:
        gaps.append(float(family.score(k, theta) - family.score(k - 1, theta)))
    if min(gaps) <= 0.0:
        raise DomainError(f"score not strictly monotone in k around k0={k} at theta={theta}")
    return 0.5 * min(gaps)


def hampel_c(family: ParametricFamily, m: float, theta: float, tol: float = 1e-13) -> float:
    """
    Centering constant c(m, theta) with E_theta psi^H_m(psi0(X, theta) - c) = 0.
    The expectation is continuous and nonincreasing in c; it is truncated at
    the family's tail bound.
    """
    if not m > 0.0:
        raise DomainError(f"Huber truncation m must be positive, got {m}")
    family = resolve_family(family)
    dist = family.at(theta)
    kmax = dist.upper_bound
    scores = family.score(np.arange(kmax + 1), theta)
    probs = dist.pmf_array(kmax)

    def centred(c: float) -> float:
        return float(huber_psi(scores - c, m) @ probs)

    a, b = float(scores.min()) - m, float(scores.max()) + m
    fa, fb = centred(a), centred(b)
    if not (fa > 0.0 > fb):
        raise InvariantError(f"no sign change for c in [{a}, {b}] (values {fa}, {fb}) at theta={theta}, m={m}")
    return float(optimize.bisect(centred, a, b, xtol=tol, maxiter=500))


def hampel_equation(
    dist: IntegerDistribution, family: ParametricFamily, m: float, theta: float, c_tol: float = 1e-13,
) -> float:
    """Lambda(theta) = E_F psi^H_m(psi0(X, theta) - c(m, theta)); nonincreasing in theta."""
    c = hampel_c(family, m, theta, tol=c_tol)
    return dist.expect(lambda ks: huber_psi(family.score(ks, theta) - c, m), at_infinity=m)


def estimate_hampel(
    dist: IntegerDistribution,
    family: ParametricFamily,
    cfg: HampelConfig,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> EstimateResult:
    """
    Hampel optimal M-estimate with Huber truncation cfg.m.

    Args:
        dist: sample or distribution
        family: parametric family or registry name
        cfg: truncation m and the c and theta tolerances
        settings: bounds and bracket expansion settings

    Returns:
        EstimateResult with method "hampel". At a jump of Lambda the crossing
        point is returned.
    """
    family = resolve_family(family)
    theta, iterations, residual = _solve_increasing(
        lambda t: -hampel_equation(dist, family, cfg.m, t, c_tol=cfg.c_tol),
        family.initial_guess(dist), settings.bounds_for(family),
        # Lambda may jump at the root: only the bracket width ends the search
        SolverSettings(
            residual_tol=0.0, bracket_rtol=cfg.theta_tol,
            expansion_factor=settings.expansion_factor, max_expansions=settings.max_expansions,
        ),
        kind="hampel",
        out_of_range="estimating equation has no root in range",
    )
    return EstimateResult(
        theta_hat=theta, umed_target=umed(dist).value, iterations=iterations,
        residual=residual, method="hampel", m=cfg.m,
    )


# ---------------------------------------------------------------------------
# Maximum likelihood
# ---------------------------------------------------------------------------


def estimate_mle(
    dist: IntegerDistribution,
    family: ParametricFamily,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> EstimateResult:
    family = resolve_family(family)
    target = umed(dist).value
    closed = family.mle(dist)
    if closed is not None:
        return EstimateResult(theta_hat=float(closed), umed_target=target, iterations=0, residual=0.0, method="mle")
    if dist.mass_at_infinity > 0.0:
        raise EstimationError("likelihood equation is unbounded under contamination at infinity")
    theta, iterations, residual = _solve_increasing(
        lambda t: -dist.expect(lambda ks: family.score(ks, t)),
        family.initial_guess(dist), settings.bounds_for(family), settings,
        kind="mle",
        out_of_range="likelihood equation has no root in range",
    )
    return EstimateResult(theta_hat=theta, umed_target=target, iterations=iterations, residual=residual, method="mle")


# ---------------------------------------------------------------------------
# Estimators by name
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorSpec:
    """
    A named estimator functional: "optimal", "mle" or "hampel:<m>".
    Instances are picklable so they can be shipped to worker processes.
    """
    kind: str
    m: Optional[float] = None

    @property
    def label(self) -> str:
        return f"hampel:{self.m:g}" if self.kind == "hampel" else self.kind

    def __call__(self, dist: IntegerDistribution, family: ParametricFamily) -> EstimateResult:
        if self.kind == "optimal":
            return estimate_optimal(dist, family)
        if self.kind == "mle":
            return estimate_mle(dist, family)
        return estimate_hampel(dist, family, HampelConfig(m=self.m))


def make_estimator(name: str) -> EstimatorSpec:
    text = str(name).strip().lower().replace(" ", "")
    if text in ("optimal", "mle"):
        return EstimatorSpec(kind=text)
    if text.startswith("hampel"):
        arg = text[len("hampel"):].strip(":()").replace("m=", "")
        try:
            m = float(arg)
        except ValueError:
            raise DomainError(f"hampel estimator needs a truncation level, e.g. 'hampel:0.05', got {name!r}") from None
        HampelConfig(m=m)
        return EstimatorSpec(kind="hampel", m=m)
    raise DomainError(f"Unknown estimator: {name!r}. Supported: optimal, mle, hampel:<m>")
