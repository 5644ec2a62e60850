"""
Finite-sample simulation under replacement contamination.

Each cell (estimator, n, theta, eps, x0) draws `replications` samples of
size n from F_theta, overwrites the first floor(eps * n) values with x0,
estimates, and records the MSE of theta_hat around theta.

Seeding: replication r of every cell at a given (family, theta, n) uses the
generator make_generator(master_seed, (sampling_stream(family, theta, n), r)),
so all cells of that (theta, n) see the same clean draws and a cell's
output does not depend on which process ran it or when.
"""

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .contamination_bias import contamination_grid
from .errors import ConfigError, DomainError, EstimationError, SimulationError
from .estimator import EstimatorSpec, make_estimator
from .families import ParametricFamily, empirical_from_sample, make_generator, resolve_family, sample_family
from .results import CellKey, CellRecord, SimulationResult

_LOGGER = logging.getLogger("umedopt.montecarlo")

# a cell errors out when more than this share of its replications fail
FAILURE_CAP = 0.01

_FIELDS = ("family", "lambdas", "ns", "replications", "epsilons", "x0_span", "master_seed", "estimators")


@dataclass(frozen=True)
class SimulationConfig:
    family: str = "poisson"
    lambdas: Tuple[float, ...] = (5.0, 10.0, 20.0)
    ns: Tuple[int, ...] = (20, 50)
    replications: int = 500
    epsilons: Tuple[float, ...] = (0.1, 0.2)
    # x0 runs over 0..ceil(x0_span * mean(F_theta))
    x0_span: float = 3.0
    master_seed: int = 20240607
    estimators: Tuple[str, ...] = ("optimal", "mle")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SimulationConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("<root>", f"expected a mapping of settings, got {type(data).__name__}")
        unknown = sorted(set(data) - set(_FIELDS))
        if unknown:
            raise ConfigError(str(unknown[0]), f"unknown field; expected one of {', '.join(_FIELDS)}")
        defaults = cls()
        values: Dict[str, Any] = {}

        family = data.get("family", defaults.family)
        if not isinstance(family, str):
            raise ConfigError("family", "must be a string such as 'poisson'")
        try:
            resolve_family(family)
        except DomainError as e:
            raise ConfigError("family", str(e)) from e
        values["family"] = family

        values["lambdas"] = tuple(
            _positive_number(f"lambdas[{i}]", v) for i, v in enumerate(_nonempty_list(data, "lambdas", defaults.lambdas))
        )
        values["ns"] = tuple(
            _count(f"ns[{i}]", v) for i, v in enumerate(_nonempty_list(data, "ns", defaults.ns))
        )
        values["replications"] = _count("replications", data.get("replications", defaults.replications))

        epsilons = data.get("epsilons", defaults.epsilons)
        if not isinstance(epsilons, (list, tuple)):
            raise ConfigError("epsilons", "must be a list")
        eps_values = []
        for i, v in enumerate(epsilons):
            eps = _number(f"epsilons[{i}]", v)
            if not (0.0 < eps < 1.0):
                raise ConfigError(f"epsilons[{i}]", f"must lie in (0, 1), got {v}; clean cells are always run")
            eps_values.append(eps)
        values["epsilons"] = tuple(eps_values)

        values["x0_span"] = _positive_number("x0_span", data.get("x0_span", defaults.x0_span))

        seed = data.get("master_seed", defaults.master_seed)
        if isinstance(seed, bool) or not isinstance(seed, int) or not (0 <= seed < 2 ** 64):
            raise ConfigError("master_seed", f"must be an integer in [0, 2**64), got {seed!r}")
        values["master_seed"] = seed

        labels = []
        for i, name in enumerate(_nonempty_list(data, "estimators", defaults.estimators)):
            try:
                label = make_estimator(name).label
            except DomainError as e:
                raise ConfigError(f"estimators[{i}]", str(e)) from e
            if label in labels:
                raise ConfigError(f"estimators[{i}]", f"duplicate estimator {label!r}")
            labels.append(label)
        values["estimators"] = tuple(labels)
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SimulationConfig":
        """YAML (or JSON) config file."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError("<file>", f"cannot read {path}: {e}") from e
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError("<file>", f"cannot parse {path}: {e}") from e
        if data is None:
            raise ConfigError("<root>", f"{path} is empty")
        return cls.from_mapping(data)

    def as_dict(self) -> Dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def fingerprint(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def x0_grid(self, theta: float) -> List[int]:
        return contamination_grid(self.family, theta, include_infinity=False, span=self.x0_span)

    def cells(self) -> List[CellKey]:
        keys = []
        for estimator in self.estimators:
            for n in self.ns:
                for theta in self.lambdas:
                    keys.append(CellKey(estimator, n, theta, 0.0, None))
                    for eps in self.epsilons:
                        keys.extend(CellKey(estimator, n, theta, eps, x0) for x0 in self.x0_grid(theta))
        return keys


def _nonempty_list(data: Mapping[str, Any], name: str, default: Sequence) -> Sequence:
    value = data.get(name, default)
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ConfigError(name, "must be a nonempty list")
    return value


def _number(path: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"must be a finite number, got {value!r}")
    return float(value)


def _positive_number(path: str, value: Any) -> float:
    x = _number(path, value)
    if x <= 0.0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return x


def _count(path: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(path, f"must be an integer >= 1, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


def sampling_stream(family: ParametricFamily, theta: float, n: int) -> int:
    """Stable 64-bit stream id of (family, theta, n)."""
    family = resolve_family(family)
    digest = hashlib.sha256(f"{family.name}|{float(theta)!r}|{int(n)}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def replaced_count(eps: float, n: int) -> int:
    # 1e-9 keeps e.g. 0.1 * 50 from flooring to 4
    return int(math.floor(eps * n + 1e-9))


def run_cell(
    family: Union[str, ParametricFamily],
    theta: float,
    n: int,
    eps: float,
    x0: Optional[int],
    estimator: Union[str, EstimatorSpec],
    replications: int,
    seed: int,
) -> CellRecord:
    """
    Simulate one cell: replications of size-n samples from F_theta, the first
    replaced_count(eps, n) observations overwritten by x0.

    Args:
        family: parametric family or registry name
        theta: true parameter
        n: sample size
        eps: replacement rate; ignored when x0 is None
        x0: contamination point, or None for clean data
        estimator: estimator name or EstimatorSpec
        replications: number of samples
        seed: master seed; replication r draws from stream (family, theta, n, r)

    Returns:
        CellRecord with MSE, mean bias, variance and the failure count

    Raises:
        SimulationError: if more than FAILURE_CAP of the replications fail
    """
    family = resolve_family(family)
    estimator = make_estimator(estimator) if isinstance(estimator, str) else estimator
    if replications < 1:
        raise DomainError("replications must be at least 1")
    if not (0.0 <= eps < 1.0):
        raise DomainError(f"contamination rate must lie in [0, 1), got {eps}")
    replaced = replaced_count(eps, n) if x0 is not None else 0
    stream = sampling_stream(family, theta, n)

    start = time.perf_counter()
    errors = []
    failures = 0
    for r in range(replications):
        sample = sample_family(family, theta, n, make_generator(seed, (stream, r)))
        if replaced:
            sample[:replaced] = x0
        try:
            est = estimator(empirical_from_sample(sample), family)
        except EstimationError as e:
            failures += 1
            _LOGGER.debug("replication failed family=%s theta=%g n=%d rep=%d error=%s", family.name, theta, n, r, e)
            continue
        errors.append(est.theta_hat - theta)

    if failures > FAILURE_CAP * replications:
        raise SimulationError(
            f"{failures} of {replications} replications failed in cell "
            f"estimator={estimator.label} n={n} theta={theta:g} eps={eps:g} x0={x0}"
        )
    err = np.asarray(errors)
    record = CellRecord(
        mse=float(np.mean(err ** 2)),
        mean_bias=float(np.mean(err)),
        variance=float(np.var(err)),
        replications_used=int(err.size),
        failures=failures,
    )
    _LOGGER.debug(
        "cell estimator=%s n=%d theta=%g eps=%g x0=%s mse=%.6g failures=%d duration_sec=%.3f",
        estimator.label, n, theta, eps, x0, record.mse, failures, time.perf_counter() - start,
    )
    return record


def _run_task(task: Tuple[str, CellKey, int, int]) -> Tuple[CellKey, CellRecord]:
    family, key, replications, seed = task
    record = run_cell(family, key.theta, key.n, key.eps, key.x0, key.estimator, replications, seed)
    return key, record


def run_simulation(config: SimulationConfig, workers: int = 1) -> SimulationResult:
    """Run every cell of config, in a process pool when workers > 1."""
    if workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers}")
    keys = config.cells()
    tasks = [(config.family, key, config.replications, config.master_seed) for key in keys]
    result = SimulationResult(family=config.family, fingerprint=config.fingerprint())
    start = time.perf_counter()
    _LOGGER.info(
        "simulate cells=%d replications=%d workers=%d fingerprint=%s",
        len(tasks), config.replications, workers, config.fingerprint(),
    )
    if workers == 1:
        outputs = map(_run_task, tasks)
        for key, record in outputs:
            result.write(key, record, source="montecarlo")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, record in pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))):
                result.write(key, record, source="montecarlo")
    _LOGGER.info("simulate done cells=%d duration_sec=%.2f", len(tasks), time.perf_counter() - start)
    return result


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


def finite_sample_efficiency(
    result: SimulationResult,
    n: int,
    theta: float,
    estimator: str = "optimal",
    benchmark: str = "mle",
) -> float:
    """MSE(benchmark) / MSE(estimator) on clean data."""
    keys = [CellKey(benchmark, n, float(theta), 0.0, None), CellKey(estimator, n, float(theta), 0.0, None)]
    missing = result.missing(keys)
    if missing:
        raise SimulationError("missing clean cells: " + "; ".join(k.label() for k in missing))
    return result.read(keys[0]).mse / result.read(keys[1]).mse


def max_mse_table(
    result: SimulationResult,
    n: int,
    eps: float,
    estimator: str = "optimal",
    thetas: Optional[Sequence[float]] = None,
    x0_span: float = 3.0,
) -> Dict[float, float]:
    """theta -> max over x0 in 0..ceil(x0_span * mean) of the cell MSE."""
    if thetas is None:
        thetas = sorted({k.theta for k in result.records if k.n == n and k.eps == eps and k.estimator == estimator})
    if not thetas:
        raise SimulationError(f"no cells for estimator={estimator} n={n} eps={eps:g}")
    table = {}
    for theta in thetas:
        keys = [
            CellKey(estimator, n, float(theta), float(eps), x0)
            for x0 in contamination_grid(result.family, theta, include_infinity=False, span=x0_span)
        ]
        missing = result.missing(keys)
        if missing:
            raise SimulationError("missing grid cells: " + "; ".join(k.label() for k in missing))
        table[float(theta)] = max(result.read(k).mse for k in keys)
    return table
