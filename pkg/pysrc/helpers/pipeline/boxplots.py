from __future__ import annotations

import os
from typing import List, Sequence

import pandas as pd

from pysrc.errors import DataError
from pysrc.helpers.evalharness.report import EvalReport

BOX_COLUMNS = ["model", "trials", "min", "q1", "median", "q3", "max", "mean"]


def read_trials(paths: Sequence[str]) -> pd.DataFrame:
    frames: List[pd.DataFrame] = []
    for path in paths:
        if not os.path.isfile(path):
            raise DataError(f"Trials file not found: {path}")
        frame = pd.read_csv(path)
        missing = {"model", "status", "value"} - set(frame.columns)
        if missing:
            raise DataError(f"{path} is not a trials file (missing {', '.join(sorted(missing))}).")
        frames.append(frame)
    if not frames:
        raise DataError("No trials files given.")
    return pd.concat(frames, ignore_index=True)


def box_stats(trials: pd.DataFrame) -> pd.DataFrame:
    """Per-model five-number summary plus mean of the validation metric over successful trials."""
    ok = trials[trials["status"] == "ok"].copy()
    if ok.empty:
        raise DataError("No successful trials to summarize.")
    ok["value"] = pd.to_numeric(ok["value"])
    grouped = ok.groupby("model", sort=True)["value"]
    stats = grouped.describe()
    out = pd.DataFrame(
        {
            "model": stats.index,
            "trials": stats["count"].astype(int).to_numpy(),
            "min": stats["min"].to_numpy(),
            "q1": stats["25%"].to_numpy(),
            "median": stats["50%"].to_numpy(),
            "q3": stats["75%"].to_numpy(),
            "max": stats["max"].to_numpy(),
            "mean": stats["mean"].to_numpy(),
        }
    )
    return out.reset_index(drop=True)[BOX_COLUMNS]


def reports_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    if not reports:
        raise DataError("No evaluation reports given.")
    return pd.DataFrame([r.csv_row() for r in reports])
