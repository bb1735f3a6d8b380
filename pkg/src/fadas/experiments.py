"""Desk-scale experiment recipes shared by scripts/ and the acceptance tests."""

from __future__ import annotations

import math

from fadas.core import SimConfig, config_from_dict, validate_config
from fadas.sim import RunTrace

# 50 clients, concurrency 25, buffer 5; 5-class blobs split with Dir(0.3)
_HETERO_LOGISTIC = {
    "N": 50,
    "gamma": 1.0,
    "alpha": 0.3,
    "dataset": {"kind": "blobs", "n": 2000, "d_in": 10, "C": 5, "class_separation": 3.0, "n_test": 500},
    "model": {"kind": "LOGISTIC", "l2_weight_decay": 1e-4},
    "batch_size": 20,
}


def _hyper(**kw) -> dict:
    base = {"eta_l": 0.1, "eta": 0.1, "beta1": 0.9, "beta2": 0.99, "eps": 1e-8,
            "K": 5, "M": 5, "M_c": 25, "tau_c": 2, "T": 200}
    base.update(kw)
    return base


def straggler_config(algorithm: str, seed: int, T: int = 200) -> SimConfig:
    """LARGE_WORST_CASE delays, same eta for FADAS and FADAS_DA (FADAS_DA shrinks stale steps)."""
    return validate_config(config_from_dict({
        **_HETERO_LOGISTIC,
        "algorithm": algorithm,
        "delay_profile": "LARGE_WORST_CASE",
        "hyper": _hyper(T=T),
        "master_seed": seed,
    }))


def wallclock_config(algorithm: str, seed: int, T: int | None = None) -> SimConfig:
    """MILD delays; async runs 400 flushes, the synchronous baseline 60 rounds."""
    if T is None:
        T = 60 if algorithm in ("FEDAMS", "FEDAVG") else 400
    return validate_config(config_from_dict({
        **_HETERO_LOGISTIC,
        "algorithm": algorithm,
        "delay_profile": "MILD",
        "hyper": _hyper(eta=0.01, T=T),
        "master_seed": seed,
    }))


WALLCLOCK_TARGET_LOSS = 0.35


def convergence_config(seed: int = 1, T: int = 500) -> SimConfig:
    """Homogeneous quadratic, beta1 = 0, full-batch local steps."""
    return validate_config(config_from_dict({
        "N": 8,
        "algorithm": "FADAS",
        "delay_profile": "MILD",
        "hyper": {"eta_l": 0.01, "eta": 0.03, "beta1": 0.0, "beta2": 0.99, "eps": 1e-8,
                  "K": 2, "M": 4, "M_c": 8, "tau_c": 0, "T": T},
        "dataset": {"kind": "quadratic", "d_in": 10, "heterogeneity": 0.0},
        "model": {"kind": "QUADRATIC"},
        "batch_size": None,
        "master_seed": seed,
    }))


def time_to_target(trace: RunTrace, target: float, metric: str = "train_loss") -> float:
    """Simulated time of the first round whose metric is at or below ``target`` (inf if never)."""
    for rec in trace.records:
        if getattr(rec, metric) <= target:
            return rec.sim_time
    return math.inf
