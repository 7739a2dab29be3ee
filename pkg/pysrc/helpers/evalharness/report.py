from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from pysrc.errors import DataError

WEAK_METRICS = ("HR", "NDCG")
STRONG_METRICS = ("Recall", "NDCG")


def metric_key(name: str, cutoff: int) -> str:
    return f"{name}@{cutoff}"


@dataclass
class EvalReport:
    protocol: str
    cutoffs: List[int]
    metrics: Dict[str, float]
    n_users: int
    seed: Optional[int]
    model: str
    wall_time: float
    group: str = "test"
    config: Optional[Dict[str, Any]] = None
    config_hash: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.cutoffs = sorted(int(n) for n in self.cutoffs)
        if self.n_users <= 0:
            raise DataError("An evaluation report needs at least one user.")
        for key, value in self.metrics.items():
            if not 0.0 <= value <= 1.0 + 1e-12:
                raise DataError(f"Metric {key} = {value} is outside [0, 1].")

    @property
    def metric_names(self):
        return WEAK_METRICS if self.protocol == "weak" else STRONG_METRICS

    def columns(self) -> List[str]:
        return [metric_key(name, n) for n in self.cutoffs for name in self.metric_names]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(**data)

    @classmethod
    def read(cls, path: str) -> "EvalReport":
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_dict(json.load(f))
        except (OSError, ValueError, TypeError) as e:
            raise DataError(f"Could not read evaluation report {path}: {e}")

    def csv_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "model": self.model,
            "config_hash": self.config_hash or "",
            "protocol": self.protocol,
            "group": self.group,
            "seed": self.seed,
            "n_users": self.n_users,
        }
        for col in self.columns():
            row[col] = self.metrics[col]
        row["wall_time"] = self.wall_time
        return row

    def write(self, out_dir: str, stem: str = "report") -> Dict[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        json_path = os.path.join(out_dir, f"{stem}.json")
        csv_path = os.path.join(out_dir, f"{stem}.csv")
        with open(json_path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
        append_csv_row(csv_path, self.csv_row())
        return {"json": json_path, "csv": csv_path}


def append_csv_row(path: str, row: Dict[str, Any]) -> None:
    frame = pd.DataFrame([row])
    exists = os.path.isfile(path) and os.path.getsize(path) > 0
    frame.to_csv(path, mode="a" if exists else "w", header=not exists, index=False)
