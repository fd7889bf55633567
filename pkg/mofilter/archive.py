from __future__ import annotations
from pathlib import Path
from dataclasses import dataclass
import json
import logging
from typing import Any, Dict, List, Optional

import pandas as pd

from .driver import RunResult, trace_columns

try:
    import pyarrow  # noqa: F401
    HAS_PARQUET = True
except Exception:
    HAS_PARQUET = False

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
FILTER_COLUMNS = ["theta_j", "phi_j"]


@dataclass
class RunPaths:
    root: Path
    result_json: Path
    trace_csv: Path
    filter_csv: Path
    trace_parquet: Path
    logfile: Path

    @classmethod
    def from_root(cls, root: Path) -> "RunPaths":
        root = Path(root)
        return cls(
            root=root,
            result_json=root / "result.json",
            trace_csv=root / "trace.csv",
            filter_csv=root / "filter.csv",
            trace_parquet=root / "trace.parquet",
            logfile=root / "mofilter.log",
        )


def trace_frame(result: RunResult) -> pd.DataFrame:
    n = result.x_final.shape[0]
    return pd.DataFrame(result.trace_rows(), columns=trace_columns(n))


def filter_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame(result.filter_entries, columns=FILTER_COLUMNS)


def write_run(result: RunResult, output_dir: str | Path, parquet: bool = False) -> RunPaths:
    """Schreibt result.json, trace.csv und filter.csv (optional trace.parquet)."""
    paths = RunPaths.from_root(Path(output_dir))
    paths.root.mkdir(parents=True, exist_ok=True)

    with open(paths.result_json, "w", encoding="utf-8") as f:
        json.dump(result.to_dict(), f, ensure_ascii=False, indent=2)

    trace = trace_frame(result)
    trace.to_csv(paths.trace_csv, index=False, float_format=FLOAT_FORMAT)
    filter_frame(result).to_csv(paths.filter_csv, index=False, float_format=FLOAT_FORMAT)

    if parquet:
        if HAS_PARQUET:
            trace.to_parquet(paths.trace_parquet, index=False)
        else:
            log.warning("pyarrow not installed; skipping trace.parquet")
    log.info(f"wrote {paths.result_json.name}, {paths.trace_csv.name}, {paths.filter_csv.name} to {paths.root}")
    return paths


class RunArchive:
    """
    Gespeicherter Lauf
    ------------------
    Erwartete Struktur:
      root/
        result.json     # Pflicht
        trace.csv       # Pflicht, eine Zeile pro Iteration
        filter.csv      # Pflicht, Filterpaare am Ende
        trace.parquet   # Optional
    """

    def __init__(self, root: str | Path):
        self.paths = RunPaths.from_root(Path(root))
        for p in (self.paths.result_json, self.paths.trace_csv, self.paths.filter_csv):
            if not p.exists():
                raise FileNotFoundError(f"{p.name} not found in {p}")

        self.result: Dict[str, Any] = json.loads(self.paths.result_json.read_text(encoding="utf-8"))
        self.trace: pd.DataFrame = pd.read_csv(self.paths.trace_csv)
        self.filter: pd.DataFrame = pd.read_csv(self.paths.filter_csv)

        n = len(self.result.get("x_final", []))
        missing = set(trace_columns(n)) - set(self.trace.columns)
        if missing:
            raise ValueError(f"Missing required columns in trace.csv: {sorted(missing)}")
        missing = set(FILTER_COLUMNS) - set(self.filter.columns)
        if missing:
            raise ValueError(f"Missing required columns in filter.csv: {sorted(missing)}")

    # ------------------------------- #
    # Basics
    # ------------------------------- #
    @property
    def status(self) -> str:
        return self.result["status"]

    def iteration(self, k: int) -> Optional[Dict[str, Any]]:
        """Hole die (letzte) Logzeile von Iteration k als Dict (oder None)."""
        rows = self.trace[self.trace["k"] == k]
        return rows.iloc[-1].to_dict() if len(rows) else None

    def kinds(self) -> Dict[str, int]:
        """Anzahl der Iterationen je Klassifikation."""
        return {str(k): int(v) for k, v in self.trace["kind"].value_counts().items()}

    def trajectory(self) -> List[List[float]]:
        cols = [c for c in self.trace.columns if c.startswith("x") and c[1:].isdigit()]
        return self.trace[cols].to_numpy().tolist()
