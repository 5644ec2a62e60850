"""
Distributions on the nonnegative integers.

Everything the estimators consume is an IntegerDistribution: parametric
members (Poisson, Binomial), empirical distributions built from samples,
point masses, finite pmfs and point-contamination mixtures. All of them are
immutable after construction; samplers take an explicit numpy Generator.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .errors import DomainError, EstimationError

# Tail mass allowed beyond a distribution's upper evaluation bound
TAIL_TOL = 1e-12


class _AtInfinity:
    """Symbolic contamination point at +infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "AT_INFINITY"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_AtInfinity, ())


AT_INFINITY = _AtInfinity()
ContaminationPoint = Union[int, _AtInfinity]


def is_at_infinity(x0: object) -> bool:
    return x0 is AT_INFINITY


def _check_k(k: int, what: str = "k") -> int:
    if isinstance(k, (bool, np.bool_)) or not isinstance(k, (int, np.integer)):
        raise DomainError(f"{what} must be an integer, got {k!r}")
    if k < 0:
        raise DomainError(f"{what} must be nonnegative, got {k}")
    return int(k)


# ---------------------------------------------------------------------------
# Base distribution
# ---------------------------------------------------------------------------


class IntegerDistribution(ABC):
    """
    Distribution concentrated on {0, 1, 2, ...}.

    Subclasses implement pmf, cdf and upper_bound; the vectorised helpers fall
    back to scalar loops unless overridden. cdf(k) for k < 0 is 0.
    """

    @abstractmethod
    def pmf(self, k: int) -> float:
        pass

    @abstractmethod
    def cdf(self, k: int) -> float:
        pass

    @property
    @abstractmethod
    def upper_bound(self) -> int:
        """Integer beyond which the finite tail mass is below TAIL_TOL."""

    @property
    def mass_at_infinity(self) -> float:
        """Probability placed on the symbolic point AT_INFINITY (nonzero only for contamination)."""
        return 0.0

    def median_guess(self) -> Optional[int]:
        """Integer near k0, or None to make k0 bisect over [0, upper_bound]."""
        return None

    def pmf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        return np.array([self.pmf(k) for k in range(kmax + 1)], dtype=float)

    def cdf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        return np.array([self.cdf(k) for k in range(kmax + 1)], dtype=float)

    def expect(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        at_infinity: Optional[float] = None,
        kmax: Optional[int] = None,
    ) -> float:
        """
        E[func(X)] over the finite support plus mass_at_infinity * at_infinity.

        func is called once with the integer grid 0..kmax. When the
        distribution puts mass at infinity, at_infinity must give the limit
        of func there (bounded functionals only).
        """
        kmax = self.upper_bound if kmax is None else kmax
        ks = np.arange(kmax + 1)
        total = float(np.dot(func(ks), self.pmf_array(kmax)))
        if self.mass_at_infinity > 0.0:
            if at_infinity is None:
                raise DomainError("functional has no finite limit at AT_INFINITY")
            total += self.mass_at_infinity * at_infinity
        return total

    def finite_mean(self) -> float:
        """Mean of the finite part, renormalised (the full mean is infinite under AT_INFINITY)."""
        kmax = self.upper_bound
        probs = self.pmf_array(kmax)
        mass = probs.sum()
        return float(np.dot(np.arange(kmax + 1), probs) / mass)


# ---------------------------------------------------------------------------
# Concrete distributions
# ---------------------------------------------------------------------------


def poisson_pmf(k: int, lam: float) -> float:
    """e^-lam lam^k / k!, evaluated in log space."""
    k = _check_k(k)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"Poisson mean must be positive and finite, got {lam}")
    return float(np.exp(special.xlogy(k, lam) - lam - special.gammaln(k + 1)))


class PoissonDistribution(IntegerDistribution):

    def __init__(self, lam: float):
        if not (lam > 0.0 and math.isfinite(lam)):
            raise DomainError(f"Poisson mean must be positive and finite, got {lam}")
        self.lam = float(lam)

    def __repr__(self) -> str:
        return f"PoissonDistribution(lam={self.lam!r})"

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return float(np.exp(special.xlogy(k, self.lam) - self.lam - special.gammaln(k + 1)))

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return float(special.pdtr(k, self.lam))

    @cached_property
    def upper_bound(self) -> int:
        k = int(self.lam + 7.0 * math.sqrt(self.lam) + 10.0)
        target = 1.0 - TAIL_TOL
        while self.cdf(k) < target:
            k += 1
        while k > 0 and self.cdf(k - 1) >= target:
            k -= 1
        return k

    def pmf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        ks = np.arange(kmax + 1)
        return np.exp(special.xlogy(ks, self.lam) - self.lam - special.gammaln(ks + 1))

    def cdf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        return special.pdtr(np.arange(kmax + 1), self.lam)

    def median_guess(self) -> Optional[int]:
        # the Poisson median never exceeds lam + 1/3
        return int(math.floor(self.lam + 1.0 / 3.0))


class BinomialDistribution(IntegerDistribution):

    def __init__(self, size: int, prob: float):
        size = _check_k(size, "size")
        if size < 1:
            raise DomainError("binomial size must be at least 1")
        if not (0.0 < prob < 1.0):
            raise DomainError(f"binomial probability must lie in (0, 1), got {prob}")
        self.size = size
        self.prob = float(prob)

    def __repr__(self) -> str:
        return f"BinomialDistribution(size={self.size}, prob={self.prob!r})"

    def _log_pmf(self, ks: np.ndarray) -> np.ndarray:
        n, p = self.size, self.prob
        return (
            special.gammaln(n + 1) - special.gammaln(ks + 1) - special.gammaln(n - ks + 1)
            + special.xlogy(ks, p) + special.xlog1py(n - ks, -p)
        )

    def pmf(self, k: int) -> float:
        if k < 0 or k > self.size:
            return 0.0
        return float(np.exp(self._log_pmf(np.asarray(k))))

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if k >= self.size:
            return 1.0
        return float(special.bdtr(k, self.size, self.prob))

    @property
    def upper_bound(self) -> int:
        return self.size

    def median_guess(self) -> Optional[int]:
        return min(int(math.ceil(self.size * self.prob)), self.size)

    def pmf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.size if kmax is None else kmax
        ks = np.arange(kmax + 1)
        out = np.zeros(kmax + 1)
        inside = ks <= self.size
        out[inside] = np.exp(self._log_pmf(ks[inside]))
        return out

    def cdf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.size if kmax is None else kmax
        ks = np.arange(kmax + 1)
        out = np.ones(kmax + 1)
        below = ks < self.size
        out[below] = special.bdtr(ks[below], self.size, self.prob)
        return out


class EmpiricalDistribution(IntegerDistribution):
    """
    Empirical distribution F_n of a sample. counts[k] is the number of
    observations equal to k; pmf and cdf divide integer tallies by n so that
    F_n(k) hits 0.5 exactly when it should.
    """

    def __init__(self, counts: Union[Mapping[int, int], np.ndarray]):
        if isinstance(counts, np.ndarray):
            tally = np.asarray(counts, dtype=np.int64)
        else:
            if not counts:
                raise DomainError("no data")
            top = max(_check_k(k, "value") for k in counts)
            tally = np.zeros(top + 1, dtype=np.int64)
            for k, c in counts.items():
                if c < 0:
                    raise DomainError(f"negative count {c} for value {k}")
                tally[k] += int(c)
        if tally.ndim != 1 or tally.size == 0 or (tally < 0).any():
            raise DomainError("counts must be a nonempty vector of nonnegative tallies")
        nonzero = np.flatnonzero(tally)
        if nonzero.size == 0:
            raise DomainError("no data")
        tally = tally[: nonzero[-1] + 1].copy()
        tally.setflags(write=False)
        self._tally = tally
        self._cumulative = np.cumsum(tally)
        self.n = int(self._cumulative[-1])

    def __repr__(self) -> str:
        return f"EmpiricalDistribution(n={self.n}, max={self.upper_bound})"

    @property
    def counts(self) -> Dict[int, int]:
        return {int(k): int(self._tally[k]) for k in np.flatnonzero(self._tally)}

    def pmf(self, k: int) -> float:
        if k < 0 or k >= self._tally.size:
            return 0.0
        return self._tally[k] / self.n

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if k >= self._tally.size:
            return 1.0
        return self._cumulative[k] / self.n

    @property
    def upper_bound(self) -> int:
        return self._tally.size - 1

    def pmf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        out = np.zeros(kmax + 1)
        m = min(kmax + 1, self._tally.size)
        out[:m] = self._tally[:m] / self.n
        return out

    def cdf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        out = np.ones(kmax + 1)
        m = min(kmax + 1, self._tally.size)
        out[:m] = self._cumulative[:m] / self.n
        return out

    def mean(self) -> float:
        return float(np.dot(np.arange(self._tally.size), self._tally) / self.n)


class PointMass(IntegerDistribution):
    """delta_k."""

    def __init__(self, k: int):
        self.k = _check_k(k)

    def __repr__(self) -> str:
        return f"PointMass({self.k})"

    def pmf(self, k: int) -> float:
        return 1.0 if k == self.k else 0.0

    def cdf(self, k: int) -> float:
        return 1.0 if k >= self.k else 0.0

    @property
    def upper_bound(self) -> int:
        return self.k


class FiniteDistribution(IntegerDistribution):
    """Arbitrary pmf on {0..len(weights)-1}; weights are normalised to sum to one."""

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or (w < 0).any() or not np.isfinite(w).all():
            raise DomainError("weights must be a nonempty vector of nonnegative numbers")
        total = w.sum()
        if total <= 0.0:
            raise DomainError("weights sum to zero")
        probs = w / total
        last = np.flatnonzero(probs)[-1]
        probs = probs[: last + 1]
        probs.setflags(write=False)
        self._probs = probs
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        self._cdf = cdf

    def __repr__(self) -> str:
        return f"FiniteDistribution(size={self._probs.size})"

    def pmf(self, k: int) -> float:
        if k < 0 or k >= self._probs.size:
            return 0.0
        return float(self._probs[k])

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if k >= self._cdf.size:
            return 1.0
        return float(self._cdf[k])

    @property
    def upper_bound(self) -> int:
        return self._probs.size - 1


class ContaminatedDistribution(IntegerDistribution):
    """(1 - eps) * base + eps * delta_x0, with x0 possibly AT_INFINITY."""

    def __init__(self, base: IntegerDistribution, eps: float, x0: ContaminationPoint):
        if not (0.0 <= eps < 1.0):
            raise DomainError(f"contamination rate must lie in [0, 1), got {eps}")
        if not is_at_infinity(x0):
            x0 = _check_k(x0, "x0")
        self.base = base
        self.eps = float(eps)
        self.x0 = x0

    def __repr__(self) -> str:
        return f"ContaminatedDistribution({self.base!r}, eps={self.eps}, x0={self.x0!r})"

    def pmf(self, k: int) -> float:
        point = self.eps if (not is_at_infinity(self.x0) and k == self.x0) else 0.0
        return (1.0 - self.eps) * self.base.pmf(k) + point

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        point = self.eps if (not is_at_infinity(self.x0) and k >= self.x0) else 0.0
        return (1.0 - self.eps) * self.base.cdf(k) + point

    @property
    def upper_bound(self) -> int:
        if is_at_infinity(self.x0):
            return self.base.upper_bound
        return max(self.base.upper_bound, self.x0)

    @property
    def mass_at_infinity(self) -> float:
        own = self.eps if is_at_infinity(self.x0) else 0.0
        return (1.0 - self.eps) * self.base.mass_at_infinity + own

    def pmf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        out = (1.0 - self.eps) * self.base.pmf_array(kmax)
        if not is_at_infinity(self.x0) and self.x0 <= kmax:
            out[self.x0] += self.eps
        return out

    def cdf_array(self, kmax: Optional[int] = None) -> np.ndarray:
        kmax = self.upper_bound if kmax is None else kmax
        out = (1.0 - self.eps) * self.base.cdf_array(kmax)
        if not is_at_infinity(self.x0) and self.x0 <= kmax:
            out[self.x0:] += self.eps
        return out


def empirical_from_sample(sample: Sequence[int]) -> EmpiricalDistribution:
    """Tally a sample of nonnegative integers into F_n."""
    values = np.asarray(sample)
    if values.size == 0:
        raise DomainError("no data")
    if values.ndim != 1:
        raise DomainError("sample must be one-dimensional")
    if not np.issubdtype(values.dtype, np.integer):
        as_float = values.astype(float)
        bad = np.flatnonzero(~np.isfinite(as_float) | (as_float != np.floor(as_float)))
        if bad.size:
            i = int(bad[0])
            raise DomainError(f"non-integer value {values[i]!r} at index {i}")
        values = as_float.astype(np.int64)
    negative = np.flatnonzero(values < 0)
    if negative.size:
        i = int(negative[0])
        raise DomainError(f"negative value {values[i]} at index {i}")
    return EmpiricalDistribution(np.bincount(values))


def contaminate(base: IntegerDistribution, eps: float, x0: ContaminationPoint) -> ContaminatedDistribution:
    return ContaminatedDistribution(base, eps, x0)


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------


class ParametricFamily(ABC):
    """
    One-parameter family F_theta on the nonnegative integers, stochastically
    increasing in theta. Provides the score psi0(k, theta), the Fisher
    information and the bounds the root solvers search within.
    """

    name: str = ""

    @property
    @abstractmethod
    def param_range(self) -> Tuple[float, float]:
        """Open interval (theta1, theta2)."""

    @property
    def search_bounds(self) -> Tuple[float, float]:
        """Closed interval strictly inside param_range where solvers evaluate."""
        return self.param_range

    @abstractmethod
    def _make(self, theta: float) -> IntegerDistribution:
        pass

    @abstractmethod
    def score(self, k, theta: float):
        """psi0(k, theta) = d/dtheta log p(k, theta); vectorised over k."""

    @abstractmethod
    def fisher_information(self, theta: float) -> float:
        pass

    def check_theta(self, theta: float) -> float:
        lo, hi = self.param_range
        if not (lo < theta < hi):
            raise DomainError(f"theta={theta} outside the {self.name} parameter range ({lo}, {hi})")
        return float(theta)

    def at(self, theta: float) -> IntegerDistribution:
        return self._make(self.check_theta(theta))

    def mean(self, theta: float) -> float:
        return self.at(theta).finite_mean()

    def mle(self, dist: IntegerDistribution) -> Optional[float]:
        """Closed-form maximum-likelihood functional, or None when it has to be solved for."""
        return None

    def initial_guess(self, dist: IntegerDistribution) -> float:
        """Starting point for bracket expansion, clamped into search_bounds."""
        lo, hi = self.search_bounds
        return math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)

    def umed_guess(self, target: float) -> float:
        """
        Starting point for matching umed(F_theta) = target. Depends on the
        target alone, so samples that agree near k0 take identical solver paths.
        """
        lo, hi = self.search_bounds
        return math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)

    def _clamp(self, theta: float) -> float:
        lo, hi = self.search_bounds
        return min(max(theta, lo), hi)


class PoissonFamily(ParametricFamily):
    name = "poisson"

    @property
    def param_range(self) -> Tuple[float, float]:
        return (0.0, math.inf)

    @property
    def search_bounds(self) -> Tuple[float, float]:
        return (1e-8, 1e6)

    def _make(self, theta: float) -> PoissonDistribution:
        return PoissonDistribution(theta)

    def score(self, k, theta: float):
        return np.asarray(k, dtype=float) / theta - 1.0

    def fisher_information(self, theta: float) -> float:
        return 1.0 / self.check_theta(theta)

    def mean(self, theta: float) -> float:
        return self.check_theta(theta)

    def mle(self, dist: IntegerDistribution) -> Optional[float]:
        if dist.mass_at_infinity > 0.0:
            raise EstimationError("sample mean is infinite under contamination at infinity")
        if isinstance(dist, EmpiricalDistribution):
            return dist.mean()
        return dist.expect(lambda ks: ks.astype(float))

    def initial_guess(self, dist: IntegerDistribution) -> float:
        return self._clamp(dist.finite_mean())

    def umed_guess(self, target: float) -> float:
        # umed(Poisson(lam)) sits a little below lam
        return self._clamp(target + 1.0 / 6.0)

    def __repr__(self) -> str:
        return "PoissonFamily()"


class BinomialFamily(ParametricFamily):

    def __init__(self, size: int):
        self.size = _check_k(size, "size")
        if self.size < 1:
            raise DomainError("binomial size must be at least 1")
        self.name = f"binomial:{self.size}"

    @property
    def param_range(self) -> Tuple[float, float]:
        return (0.0, 1.0)

    @property
    def search_bounds(self) -> Tuple[float, float]:
        return (1e-10, 1.0 - 1e-10)

    def _make(self, theta: float) -> BinomialDistribution:
        return BinomialDistribution(self.size, theta)

    def score(self, k, theta: float):
        k = np.asarray(k, dtype=float)
        return k / theta - (self.size - k) / (1.0 - theta)

    def fisher_information(self, theta: float) -> float:
        theta = self.check_theta(theta)
        return self.size / (theta * (1.0 - theta))

    def mean(self, theta: float) -> float:
        return self.size * self.check_theta(theta)

    def mle(self, dist: IntegerDistribution) -> Optional[float]:
        if dist.mass_at_infinity > 0.0:
            raise EstimationError("sample mean is infinite under contamination at infinity")
        return dist.expect(lambda ks: ks.astype(float)) / self.size

    def initial_guess(self, dist: IntegerDistribution) -> float:
        return self._clamp(dist.finite_mean() / self.size)

    def umed_guess(self, target: float) -> float:
        return self._clamp((target + 1.0 / 6.0) / self.size)

    def __repr__(self) -> str:
        return f"BinomialFamily(size={self.size})"


_FAMILIES: Dict[str, Callable[..., ParametricFamily]] = {}


def register_family(name: str, factory: Callable[..., ParametricFamily]) -> None:
    """Register a family factory under `name`; extra ':'-separated tokens are passed as integer arguments."""
    _FAMILIES[name.strip().lower()] = factory


def resolve_family(family: Union[str, ParametricFamily]) -> ParametricFamily:
    """
    Map an identifier such as "poisson" or "binomial:20" to a family
    instance. Instances pass through unchanged.
    """
    if isinstance(family, ParametricFamily):
        return family
    name, *args = str(family).strip().lower().split(":")
    factory = _FAMILIES.get(name)
    if factory is None:
        raise DomainError(f"Unknown family: {family!r}. Supported: {sorted(_FAMILIES)}")
    try:
        return factory(*(int(a) for a in args))
    except (TypeError, ValueError) as e:
        raise DomainError(f"Bad family arguments in {family!r}: {e}") from e


register_family("poisson", PoissonFamily)
register_family("binomial", BinomialFamily)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def make_generator(seed: int, stream: Sequence[int] = ()) -> np.random.Generator:
    """PCG64 generator for (master seed, stream key); independent streams for parallel callers."""
    seq = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(seq))


def sample_distribution(dist: IntegerDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws by inversion of the cdf table; the rare uniforms beyond the table are walked sequentially."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    if dist.mass_at_infinity > 0.0:
        raise DomainError("cannot sample a distribution with mass at infinity")
    u = rng.random(n)
    table = dist.cdf_array()
    draws = np.searchsorted(table, u, side="right")
    for i in np.flatnonzero(draws >= table.size):
        k = table.size - 1
        while dist.cdf(k) <= u[i]:
            k += 1
        draws[i] = k
    return draws.astype(np.int64)


def sample_family(family: ParametricFamily, theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    return sample_distribution(family.at(theta), n, rng)


def sample_poisson(lam: float, n: int, seed: int) -> np.ndarray:
    """n i.i.d. Poisson(lam) draws; identical (lam, n, seed) give identical output."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    return sample_distribution(PoissonDistribution(lam), n, make_generator(seed))
