"""Server optimizers: AMSGrad-style adaptive step, FedBuff, FedAsync, FedAvg.

All steps are pure: they return new arrays/state and never mutate inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from fadas.core import EtaRule, HyperParams


@dataclass(frozen=True)
class ServerOptState:
    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    vhat: np.ndarray
    t: int = 1

    @classmethod
    def initial(cls, x: np.ndarray) -> ServerOptState:
        x = np.asarray(x, dtype=np.float64).copy()
        z = np.zeros_like(x)
        return cls(x, z, z.copy(), z.copy(), 1)


@dataclass(frozen=True)
class PseudoGradient:
    delta: np.ndarray
    tau_max_t: int = 0

    def __post_init__(self):
        if self.tau_max_t < 0:
            raise ValueError("tau_max_t must be >= 0")


def delay_adaptive_lr(eta: float, tau_max_t: int, tau_c: int, rule: EtaRule = EtaRule.APPENDIX) -> float:
    """Global step size shrunk once the round's maximum delay exceeds ``tau_c``.

    MAIN_TEXT caps at ``1/tau``; APPENDIX (what experiments run) scales to ``eta/tau``.
    """
    if tau_max_t <= tau_c:
        return eta
    if EtaRule(rule) is EtaRule.MAIN_TEXT:
        return min(eta, 1.0 / tau_max_t)
    return min(eta, eta / tau_max_t)


def _as_delta(delta, d: int) -> np.ndarray:
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape != (d,):
        raise ValueError(f"delta has shape {delta.shape}, expected ({d},)")
    if not np.all(np.isfinite(delta)):
        raise ValueError("non-finite delta")
    return delta


def fadas_step(
    state: ServerOptState,
    pg: PseudoGradient,
    hyper: HyperParams,
    rule: EtaRule = EtaRule.APPENDIX,
    delay_adaptive: bool = False,
) -> tuple[ServerOptState, float]:
    delta = _as_delta(pg.delta, state.x.size)
    b1, b2 = hyper.beta1, hyper.beta2
    m = b1 * state.m + (1 - b1) * delta
    v = b2 * state.v + (1 - b2) * (delta * delta)
    vhat = np.maximum(state.vhat, v)
    eta_t = delay_adaptive_lr(hyper.eta, pg.tau_max_t, hyper.tau_c, rule) if delay_adaptive else hyper.eta
    x = state.x + eta_t * m / (np.sqrt(vhat) + hyper.eps)
    return ServerOptState(x, m, v, vhat, state.t + 1), eta_t


def fedams_sync_step(state: ServerOptState, deltas: Sequence[np.ndarray], hyper: HyperParams) -> ServerOptState:
    new, _ = fadas_step(state, PseudoGradient(mean_delta(deltas)), hyper)
    return new


def fedbuff_step(x: np.ndarray, delta_avg: np.ndarray, eta: float) -> np.ndarray:
    delta_avg = np.asarray(delta_avg, dtype=np.float64)
    if delta_avg.shape != np.shape(x):
        raise ValueError("dimension mismatch")
    return x + eta * delta_avg


def polynomial_staleness(a: float = 0.5) -> Callable[[int], float]:
    return lambda tau: (tau + 1.0) ** (-a)


def fedasync_step(
    x: np.ndarray,
    x_new: np.ndarray,
    alpha_base: float,
    tau: int,
    staleness_fn: Callable[[int], float] | None = None,
) -> tuple[np.ndarray, float]:
    """Mix in a client model with weight ``alpha_base * s(tau)``; returns ``(x', alpha_t)``."""
    if not 0 < alpha_base <= 1:
        raise ValueError("alpha_base must be in (0, 1]")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    x_new = np.asarray(x_new, dtype=np.float64)
    if x_new.shape != np.shape(x):
        raise ValueError("dimension mismatch")
    s = (staleness_fn or polynomial_staleness())(tau)
    alpha_t = alpha_base * s
    return (1 - alpha_t) * x + alpha_t * x_new, alpha_t


def mean_delta(deltas: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right running sum divided by the count (the buffer's summation order)."""
    if len(deltas) == 0:
        raise ValueError("empty delta list")
    acc = np.zeros_like(np.asarray(deltas[0], dtype=np.float64))
    for d in deltas:
        d = np.asarray(d, dtype=np.float64)
        if d.shape != acc.shape:
            raise ValueError("dimension mismatch")
        acc = acc + d
    return acc / len(deltas)


def fedavg_aggregate(x: np.ndarray, deltas: Sequence[np.ndarray]) -> np.ndarray:
    return x + mean_delta(deltas)
