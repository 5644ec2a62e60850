"""
Asymptotic behaviour of the uniform median and of the optimal estimator.

Interior case (F(K) > 0.5 at K = k0(F)): sqrt(n)(umed(F_n) - umed(F)) is
normal with variance

    sigma^2 = 0.25 / p0^3 * (4 F1 (F1 - 1 + p0) - p0 + 1),   F1 = F(K - 1)

and the estimator inherits sigma^2 / g'(theta)^2 by the delta method.

Boundary case (F(K) = 0.5): the limit is a two-sided normal, with scale
1/(2 p(K)) below zero and 1/(2 p(K + 1)) above it; for the estimator each
side is further divided by the matching one-sided derivative of g.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .errors import DomainError
from .estimator import g
from .families import IntegerDistribution, ParametricFamily, resolve_family
from .umedian import BOUNDARY_TOL, k0

_LOGGER = logging.getLogger("umedopt.asymptotics")


class LawCase(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class LimitLaw:
    """
    H(t) = Phi(t / sqrt(sigma2)) in the interior case;
    H(t) = Phi(t / left_scale) for t <= 0 and Phi(t / right_scale) for t > 0
    in the boundary case.
    """
    case: LawCase
    sigma2: Optional[float] = None
    left_scale: Optional[float] = None
    right_scale: Optional[float] = None

    def __post_init__(self):
        if self.case is LawCase.INTERIOR:
            if not (self.sigma2 is not None and self.sigma2 > 0.0):
                raise DomainError(f"interior limit law needs a positive variance, got {self.sigma2}")
        elif not (self.left_scale and self.right_scale and self.left_scale > 0.0 and self.right_scale > 0.0):
            raise DomainError(
                f"boundary limit law needs positive scales, got ({self.left_scale}, {self.right_scale})"
            )

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.case is LawCase.INTERIOR:
            out = stats.norm.cdf(t / math.sqrt(self.sigma2))
        else:
            scale = np.where(t <= 0.0, self.left_scale, self.right_scale)
            out = stats.norm.cdf(t / scale)
        return float(out) if out.ndim == 0 else out

    @property
    def variance(self) -> float:
        if self.case is LawCase.INTERIOR:
            return float(self.sigma2)
        s_lo, s_hi = self.left_scale, self.right_scale
        # two half-normals glued at zero
        return 0.5 * (s_lo ** 2 + s_hi ** 2) - (s_hi - s_lo) ** 2 / (2.0 * math.pi)

    def as_dict(self) -> dict:
        return {
            "case": self.case.value,
            "sigma2": self.sigma2,
            "left_scale": self.left_scale,
            "right_scale": self.right_scale,
            "variance": self.variance,
        }


def boundary_cell(dist: IntegerDistribution) -> Optional[int]:
    """
    K with F(K) = 0.5 within BOUNDARY_TOL, or None. Checks k0 and k0 - 1 so a
    parameter sitting a rounding error below the boundary is still caught.
    """
    k = k0(dist)
    if abs(dist.cdf(k) - 0.5) < BOUNDARY_TOL:
        return k
    if k > 0 and abs(dist.cdf(k - 1) - 0.5) < BOUNDARY_TOL:
        return k - 1
    return None


def _interior_terms(dist: IntegerDistribution) -> Tuple[float, float]:
    if boundary_cell(dist) is not None:
        raise DomainError("F(k0) = 0.5: use boundary law")
    k = k0(dist)
    return dist.cdf(k - 1), dist.pmf(k)


def sigma2_umed(dist: IntegerDistribution) -> float:
    f1, p0 = _interior_terms(dist)
    return 0.25 / p0 ** 3 * (4.0 * f1 * (f1 - 1.0 + p0) - p0 + 1.0)


def umed_covariance(dist: IntegerDistribution) -> np.ndarray:
    """n * Cov(F_n(K-1), p_n(K)) = [[a, c], [c, b]]."""
    f1, p0 = _interior_terms(dist)
    a = f1 * (1.0 - f1)
    b = p0 * (1.0 - p0)
    c = -f1 * p0
    return np.array([[a, c], [c, b]])


def umed_gradient(dist: IntegerDistribution) -> np.ndarray:
    """Gradient of (F1, p0) -> K - 0.5 + (0.5 - F1) / p0."""
    f1, p0 = _interior_terms(dist)
    return np.array([-1.0 / p0, -(0.5 - f1) / p0 ** 2])


def umed_limit_law(dist: IntegerDistribution) -> LimitLaw:
    K = boundary_cell(dist)
    if K is None:
        return LimitLaw(case=LawCase.INTERIOR, sigma2=sigma2_umed(dist))
    p_right = dist.pmf(K + 1)
    if not p_right > 0.0:
        raise DomainError(f"degenerate right tail: p({K + 1}) = 0 at a boundary distribution")
    return LimitLaw(case=LawCase.BOUNDARY, left_scale=0.5 / dist.pmf(K), right_scale=0.5 / p_right)


# ---------------------------------------------------------------------------
# Derivatives of g
# ---------------------------------------------------------------------------


def _room(family: ParametricFamily, theta: float) -> Tuple[float, float]:
    lo, hi = family.param_range
    return theta - lo, hi - theta


def g_prime(family: ParametricFamily, theta: float) -> float:
    """Central difference of g with one Richardson step; h shrinks until theta +- h share k0."""
    family = resolve_family(family)
    dist = family.at(theta)
    if boundary_cell(dist) is not None:
        raise DomainError(f"g is not differentiable at theta={theta}: use lateral derivatives")
    K = k0(dist)
    below, above = _room(family, theta)
    h = min(1e-6 * (1.0 + abs(theta)), 0.5 * below, 0.5 * above)
    for _ in range(40):
        if k0(family.at(theta - h)) == K == k0(family.at(theta + h)):
            break
        h *= 0.5

    def central(step: float) -> float:
        return (g(family, theta + step) - g(family, theta - step)) / (2.0 * step)

    value = (4.0 * central(0.5 * h) - central(h)) / 3.0
    _LOGGER.debug("g_prime theta=%.12g h=%.3g value=%.10g", theta, h, value)
    return value


def g_lateral(family: ParametricFamily, theta: float) -> Tuple[float, float]:
    """
    One-sided derivatives (g'-, g'+) at a boundary parameter, from
    differences at h = 1e-4, 1e-5, 1e-6 (scaled by 1 + |theta|)
    extrapolated twice.
    """
    family = resolve_family(family)
    dist = family.at(theta)
    K = boundary_cell(dist)
    if K is None:
        raise DomainError(f"theta={theta} is an interior point: use g_prime")
    # at the kink both branches give K + 0.5
    center = K + 0.5
    below, above = _room(family, theta)
    scale = min(1.0 + abs(theta), 0.5e4 * below, 0.5e4 * above)
    steps = [1e-4 * scale, 1e-5 * scale, 1e-6 * scale]

    def extrapolate(diffs):
        r1 = (10.0 * diffs[1] - diffs[0]) / 9.0
        r2 = (10.0 * diffs[2] - diffs[1]) / 9.0
        return (100.0 * r2 - r1) / 99.0

    left = extrapolate([(center - g(family, theta - h)) / h for h in steps])
    right = extrapolate([(g(family, theta + h) - center) / h for h in steps])
    _LOGGER.debug("g_lateral theta=%.12g K=%d left=%.10g right=%.10g", theta, K, left, right)
    return left, right


def estimator_limit_law(family: ParametricFamily, theta: float) -> LimitLaw:
    family = resolve_family(family)
    dist = family.at(theta)
    K = boundary_cell(dist)
    if K is None:
        return LimitLaw(case=LawCase.INTERIOR, sigma2=sigma2_umed(dist) / g_prime(family, theta) ** 2)
    left, right = g_lateral(family, theta)
    law = umed_limit_law(dist)
    return LimitLaw(
        case=LawCase.BOUNDARY,
        left_scale=law.left_scale / left,
        right_scale=law.right_scale / right,
    )


def asymptotic_efficiency(family: ParametricFamily, theta: float) -> float:
    """MLE asymptotic variance 1/I(theta) over sigma^2 / g'(theta)^2."""
    family = resolve_family(family)
    law = estimator_limit_law(family, theta)
    if law.case is not LawCase.INTERIOR:
        raise DomainError(f"efficiency is defined for interior parameters only; theta={theta} is a boundary point")
    return (1.0 / family.fisher_information(theta)) / law.sigma2


def efficiency_table(family: ParametricFamily, thetas: Iterable[float]) -> pd.DataFrame:
    family = resolve_family(family)
    rows = []
    for theta in thetas:
        dist = family.at(theta)
        sigma2 = sigma2_umed(dist)
        slope = g_prime(family, theta)
        rows.append({
            "theta": float(theta),
            "sigma2_umed": sigma2,
            "g_prime": slope,
            "asymptotic_variance": sigma2 / slope ** 2,
            "mle_variance": 1.0 / family.fisher_information(theta),
            "efficiency": asymptotic_efficiency(family, theta),
        })
    return pd.DataFrame(rows, columns=[
        "theta", "sigma2_umed", "g_prime", "asymptotic_variance", "mle_variance", "efficiency",
    ])
