"""
SimulationResult - keyed store for Monte Carlo cell records.
The simulation writes one CellRecord per cell; the summaries (finite-sample
efficiency, max MSE over x0) are read back from it as DataFrames.
"""

from dataclasses import asdict, dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional

import pandas as pd


@dataclass(frozen=True)
class CellKey:
    """(estimator, n, theta, eps, x0); clean cells have eps = 0 and x0 = None."""
    estimator: str
    n: int
    theta: float
    eps: float
    x0: Optional[int] = None

    @property
    def is_clean(self) -> bool:
        return self.x0 is None

    def label(self) -> str:
        x0 = "-" if self.x0 is None else self.x0
        return f"estimator={self.estimator} n={self.n} theta={self.theta:g} eps={self.eps:g} x0={x0}"


@dataclass(frozen=True)
class CellRecord:
    mse: float
    mean_bias: float
    variance: float
    replications_used: int
    failures: int = 0


RECORD_COLUMNS = [
    "estimator", "n", "theta", "eps", "x0",
    "mse", "mean_bias", "variance", "replications_used", "failures",
]


class SimulationResult:
    """
    Records keyed by CellKey, plus a metadata block (family, config
    fingerprint, write history). Rendering order is the sorted key order,
    so the frames do not depend on the order cells finished in.
    """

    def __init__(self, family: str, fingerprint: Optional[str] = None):
        self.records: Dict[CellKey, CellRecord] = {}
        self.metadata: Dict[str, Any] = {
            "family": family,
            "fingerprint": fingerprint,
            "history": [],
        }

    @property
    def family(self) -> str:
        return self.metadata["family"]

    def write(self, key: CellKey, record: CellRecord, source: Optional[str] = None) -> None:
        self.records[key] = record
        if source:
            self.metadata["history"].append({
                "timestamp": datetime.now().isoformat(),
                "source": source,
                "action": f"wrote {key.label()}",
            })

    def read(self, key: CellKey) -> Optional[CellRecord]:
        return self.records.get(key)

    def has(self, key: CellKey) -> bool:
        return key in self.records

    def missing(self, keys: List[CellKey]) -> List[CellKey]:
        return [k for k in keys if k not in self.records]

    def get_history(self) -> list:
        return list(self.metadata["history"])

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for key in sorted(self.records, key=_sort_key):
            rec = self.records[key]
            rows.append({**asdict(key), **asdict(rec)})
        frame = pd.DataFrame(rows, columns=RECORD_COLUMNS)
        frame["x0"] = frame["x0"].astype("Int64")
        return frame

    def efficiency_frame(self, benchmark: str = "mle") -> pd.DataFrame:
        """Clean-data MSE(benchmark) / MSE(estimator) per (estimator, n, theta)."""
        frame = self.to_frame()
        clean = frame[frame["x0"].isna()]
        base = clean[clean["estimator"] == benchmark][["n", "theta", "mse"]].rename(columns={"mse": "benchmark_mse"})
        others = clean[clean["estimator"] != benchmark][["estimator", "n", "theta", "mse"]]
        out = others.merge(base, on=["n", "theta"], how="inner")
        out["efficiency"] = out["benchmark_mse"] / out["mse"]
        out = out.sort_values(["estimator", "n", "theta"]).reset_index(drop=True)
        return out[["estimator", "n", "theta", "mse", "benchmark_mse", "efficiency"]]

    def max_mse_frame(self) -> pd.DataFrame:
        """Max MSE over x0 per (estimator, n, eps, theta), with the x0 attaining it (first on ties)."""
        frame = self.to_frame()
        dirty = frame[frame["x0"].notna()]
        columns = ["estimator", "n", "eps", "theta", "max_mse", "argmax_x0", "grid_size"]
        if dirty.empty:
            return pd.DataFrame(columns=columns)
        dirty = dirty.sort_values(["estimator", "n", "eps", "theta", "x0"])
        groups = dirty.groupby(["estimator", "n", "eps", "theta"], sort=True)
        best = dirty.loc[groups["mse"].idxmax()]
        out = best[["estimator", "n", "eps", "theta", "mse", "x0"]].rename(columns={"mse": "max_mse", "x0": "argmax_x0"})
        out = out.merge(groups.size().rename("grid_size").reset_index(), on=["estimator", "n", "eps", "theta"])
        return out[columns].reset_index(drop=True)

    def summary(self) -> str:
        frame = self.to_frame()
        lines = ["=== SIMULATION RESULT ==="]
        lines.append(f"Family: {self.family}")
        if self.metadata["fingerprint"]:
            lines.append(f"Config fingerprint: {self.metadata['fingerprint']}")
        lines.append(f"Cells: {len(frame):,} ({int(frame['x0'].isna().sum())} clean)")
        if len(frame):
            lines.append(f"Estimators: {', '.join(sorted(frame['estimator'].unique()))}")
            lines.append(f"Replications used: {int(frame['replications_used'].sum()):,}")
            lines.append(f"Failed replications: {int(frame['failures'].sum()):,}")
        return "\n".join(lines)


def _sort_key(key: CellKey):
    # clean cells first within each (estimator, n, theta, eps)
    return (key.estimator, key.n, key.theta, key.eps, -1 if key.x0 is None else key.x0)
