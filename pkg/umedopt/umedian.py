"""
Uniform median of a distribution on the nonnegative integers.

umed(F) is the median of X + U with X ~ F and U ~ Uniform[-0.5, 0.5]:

    umed(F) = k0 - 0.5 + (0.5 - F(k0 - 1)) / p(k0),   k0 = min{k : F(k) >= 0.5}

umed_oracle and umed_huber compute the same value by two independent routes
and are used as cross-checks.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, InvariantError
from .families import IntegerDistribution

# |F(k0) - 0.5| below this marks the boundary case; used for reporting and
# limit-law dispatch only, never for the value itself.
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class UmedResult:
    value: float
    k0: int
    p0: float
    boundary: bool


def huber_psi(x, m: float):
    """Huber score: identity clipped to [-m, m]."""
    return np.clip(x, -m, m)


def k0(dist: IntegerDistribution) -> int:
    """Smallest k with F(k) >= 0.5 (exact comparison)."""
    guess = dist.median_guess()
    if guess is not None and dist.cdf(guess) >= 0.5:
        k = guess
        while k > 0 and dist.cdf(k - 1) >= 0.5:
            k -= 1
        return k
    hi = dist.upper_bound
    if dist.cdf(hi) < 0.5:
        if dist.mass_at_infinity >= 0.5:
            raise DomainError("half or more of the mass sits at infinity; the uniform median is infinite")
        raise InvariantError(f"cdf never reaches 0.5 within the evaluation bound {hi} of {dist!r}")
    lo = -1  # cdf(-1) = 0 < 0.5
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if dist.cdf(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    return hi


def umed(dist: IntegerDistribution) -> UmedResult:
    k = k0(dist)
    p0 = dist.pmf(k)
    if not p0 > 0.0:
        raise InvariantError(f"p(k0) = {p0} at k0 = {k} for {dist!r}")
    value = k - 0.5 + (0.5 - dist.cdf(k - 1)) / p0
    boundary = abs(dist.cdf(k) - 0.5) < BOUNDARY_TOL or (k > 0 and abs(dist.cdf(k - 1) - 0.5) < BOUNDARY_TOL)
    return UmedResult(value=float(value), k0=k, p0=float(p0), boundary=boundary)


def umed_oracle(dist: IntegerDistribution, tol: float = 1e-12) -> float:
    """
    Median of X + U by bisection on its piecewise-linear cdf
    G(t) = F(j - 1) + p(j) (t - j + 0.5), j = floor(t + 0.5).
    Returns the smallest t with G(t) >= 0.5.
    """
    def G(t: float) -> float:
        j = int(np.floor(t + 0.5))
        return dist.cdf(j - 1) + dist.pmf(j) * (t - j + 0.5)

    lo, hi = -0.5, dist.upper_bound + 0.5
    if G(hi) < 0.5:
        raise InvariantError(f"G never reaches 0.5 within the evaluation bound of {dist!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if G(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    return hi


def umed_huber(dist: IntegerDistribution, tol: float = 1e-13) -> float:
    """umed as the root mu of E psi^H_0.5(X - mu) = 0 (mass at infinity contributes +0.5)."""
    kmax = dist.upper_bound
    ks = np.arange(kmax + 1)
    probs = dist.pmf_array(kmax)
    tail = 0.5 * dist.mass_at_infinity
    if tail >= 0.25:
        raise DomainError("half or more of the mass sits at infinity; the uniform median is infinite")

    def h(mu: float) -> float:
        return float(np.dot(huber_psi(ks - mu, 0.5), probs)) + tail

    return float(optimize.bisect(h, -0.5, kmax + 0.5, xtol=tol, maxiter=200))
