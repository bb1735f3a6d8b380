"""Per-round run records, delay statistics and the CSV trace format."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("round", "sim_time", "eta_t", "tau_max_t", "train_loss", "grad_norm_sq", "test_acc")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    sim_time: float
    eta_t: float
    tau_max_t: int
    train_loss: float
    grad_norm_sq: float
    test_acc: float | None
    tau_list: tuple[int, ...]
    clients: tuple[int, ...]


@dataclass
class RunTrace:
    records: list[RoundRecord] = field(default_factory=list)
    # global model after each round, only when requested
    params: list[np.ndarray] | None = None
    # every per-arrival delay, in arrival order
    all_taus: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def summary(self) -> dict:
        return delay_stats(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([
                r.round,
                repr(float(r.sim_time)),
                repr(float(r.eta_t)),
                r.tau_max_t,
                repr(float(r.train_loss)),
                repr(float(r.grad_norm_sq)),
                "" if r.test_acc is None else repr(float(r.test_acc)),
            ])
        return buf.getvalue()


def delay_stats(trace: RunTrace | list[int]) -> dict:
    """``tau_max`` over all recorded delays; mean and lower median of per-round maxima.

    Accepts a trace or a plain list of per-round maxima.
    """
    if isinstance(trace, RunTrace):
        per_round = [r.tau_max_t for r in trace.records]
        everything = trace.all_taus or per_round
    else:
        per_round = list(trace)
        everything = per_round
    if not per_round:
        raise ValueError("empty trace")
    ordered = sorted(per_round)
    return {
        "tau_max": int(max(everything)),
        "tau_avg": float(sum(per_round) / len(per_round)),
        "tau_median": int(ordered[(len(ordered) - 1) // 2]),
    }


def read_csv(path) -> tuple[list[str], list[dict[str, float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            rows.append({k: (math.nan if v == "" else float(v)) for k, v in zip(header, row)})
    return header, rows
