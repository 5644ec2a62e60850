"""
SampleFileLoader - reads count data files into an EmpiricalDistribution.

Accepted layouts (autodetected by the presence of a comma):
  - one nonnegative integer per line (a raw sample);
  - `k,count` pairs (a pre-tallied sample; repeated k are summed).
Blank lines are ignored. Errors name the 1-based line number.
"""

import io
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import pandas as pd

from .families import EmpiricalDistribution


class SampleFileLoader:

    def __init__(self):
        self.name = "SampleFileLoader"

    def process(self, source: Union[str, Path]) -> Tuple[Optional[EmpiricalDistribution], Optional[str]]:
        """
        Parse a count-data file into an empirical distribution.

        Args:
            source: path to a file with one integer per line, or `k,count` pairs

        Returns:
            Tuple of (EmpiricalDistribution, error_message)
            - If successful: (EmpiricalDistribution, None)
            - If error: (None, error_message naming the offending line)
        """
        try:
            text = Path(source).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            return None, f"Error reading file: {e}"
        if not text.strip():
            return None, "no data"

        paired = "," in text
        try:
            frame = pd.read_csv(
                io.StringIO(text),
                header=None,
                names=["k", "count"] if paired else ["k"],
                dtype=str,
                skip_blank_lines=False,
                keep_default_na=False,
            )
        except Exception as e:
            return None, f"Error reading file: {e}"

        counts: Dict[int, int] = {}
        for i, row in enumerate(frame.itertuples(index=False), start=1):
            cells = ["" if pd.isna(v) else str(v).strip() for v in row]
            if not any(cells):
                continue
            k, err = _parse_nonnegative(cells[0], i, "value")
            if err:
                return None, err
            weight = 1
            if paired:
                if not cells[1]:
                    return None, f"expected 'k,count' at line {i}, got {cells[0]!r}"
                weight, err = _parse_nonnegative(cells[1], i, "count")
                if err:
                    return None, err
            counts[k] = counts.get(k, 0) + weight

        if sum(counts.values()) == 0:
            return None, "no data"
        return EmpiricalDistribution(counts), None

    def get_file_info(self, dist: EmpiricalDistribution) -> dict:
        return {
            "n": dist.n,
            "distinct_values": len(dist.counts),
            "min": min(dist.counts),
            "max": dist.upper_bound,
            "mean": dist.mean(),
        }


def _parse_nonnegative(cell: str, line: int, what: str) -> Tuple[int, Optional[str]]:
    try:
        value = int(cell)
    except ValueError:
        return 0, f"non-integer {what} {cell!r} at line {line}"
    if value < 0:
        return 0, f"negative {what} {value} at line {line}"
    return value, None
