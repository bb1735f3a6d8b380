"""Discrete-event engine for buffered asynchronous FL, plus the synchronous baseline.

Simulated time only advances through client runtimes; dispatch and server
compute are free. The round counter ``t`` moves only on a buffer flush and
delays are counted in flushes.

Events sharing a completion time are handled as one batch: each arrival is
accumulated (flushing whenever the buffer fills) in client-id order, and only
then are the replacement clients dispatched, all with the latest model. With
equal runtimes for every client this makes the async run reduce exactly to
the synchronous one.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from fadas.core import Algorithm, ConfigError, RngStreams, SimConfig, derive_stream, validate_config
from fadas.models import local_sgd
from fadas.optim import (
    PseudoGradient,
    ServerOptState,
    fadas_step,
    fedams_sync_step,
    fedasync_step,
    fedavg_aggregate,
    fedbuff_step,
    polynomial_staleness,
)
from fadas.sim.delays import RuntimeSampler, delay_model_from_config
from fadas.sim.problem import Problem, build_problem, global_eval
from fadas.sim.trace import RoundRecord, RunTrace


class NonFiniteError(RuntimeError):
    pass


@dataclass(frozen=True)
class InFlight:
    client_id: int
    dispatch_round: int
    dispatch_model_snapshot: np.ndarray
    dispatch_index: int


class Buffer:
    def __init__(self, d: int):
        self.d = d
        self.reset()

    def reset(self):
        self.accumulated = np.zeros(self.d)
        self.count = 0
        self.tau_list: list[int] = []
        self.clients: list[int] = []

    def add(self, delta: np.ndarray, tau: int, client_id: int):
        self.accumulated = self.accumulated + delta
        self.count += 1
        self.tau_list.append(tau)
        self.clients.append(client_id)


# observer(sim_time, n_in_flight) is called between event batches
Observer = Callable[[float, int], None]


class _Context:
    """State shared by both execution modes."""

    def __init__(self, cfg: SimConfig, problem: Problem | None, record_params: bool):
        validate_config(cfg)
        self.cfg = cfg
        self.hyper = cfg.hyper
        self.problem = problem if problem is not None else build_problem(cfg)
        self.streams = RngStreams(cfg.master_seed)
        self.runtime = RuntimeSampler(delay_model_from_config(cfg), self.streams)
        self.sampler = derive_stream(self.streams, "client_sampling")
        self.dispatch_count = [0] * cfg.N
        self.trace = RunTrace(params=[] if record_params else None)

    def train(self, client_id: int, snapshot: np.ndarray, dispatch_index: int) -> np.ndarray:
        bs = self.cfg.batch_size
        stream = derive_stream(self.streams, "minibatch", (client_id, dispatch_index)) if bs else None
        p = self.problem
        return local_sgd(p.spec, snapshot, p.train, p.shards[client_id], self.hyper, stream, bs)

    def record(self, x, sim_time, eta_t, tau_list, clients):
        ev = global_eval(self.problem, x)
        if not (np.isfinite(ev.loss) and np.isfinite(ev.grad_norm_sq)):
            raise NonFiniteError(f"non-finite loss at round {len(self.trace) + 1}")
        self.trace.records.append(RoundRecord(
            round=len(self.trace) + 1,
            sim_time=float(sim_time),
            eta_t=float(eta_t),
            tau_max_t=int(max(tau_list)),
            train_loss=ev.loss,
            grad_norm_sq=ev.grad_norm_sq,
            test_acc=ev.test_acc,
            tau_list=tuple(tau_list),
            clients=tuple(clients),
        ))
        if self.trace.params is not None:
            self.trace.params.append(np.array(x, copy=True))


def run_async(
    cfg: SimConfig,
    *,
    problem: Problem | None = None,
    observer: Observer | None = None,
    record_params: bool = False,
) -> RunTrace:
    """Simulate FADAS / FADAS_DA / FEDBUFF / FEDASYNC until ``T`` global rounds.

    FEDASYNC applies every arrival immediately and counts it as one round.
    """
    if not cfg.algorithm.is_async:
        raise ConfigError("algorithm", f"{cfg.algorithm.value} is not an asynchronous algorithm")
    ctx = _Context(cfg, problem, record_params)
    hyper, N, algo = cfg.hyper, cfg.N, cfg.algorithm
    state = ServerOptState.initial(ctx.problem.x0)
    buffer = Buffer(state.x.size)
    staleness = polynomial_staleness(cfg.fedasync.a)
    inflight: dict[int, InFlight] = {}
    queue: list[tuple[float, int]] = []
    t = 1
    now = 0.0

    def dispatch(cid: int):
        inflight[cid] = InFlight(cid, t, state.x, ctx.dispatch_count[cid])
        ctx.dispatch_count[cid] += 1
        heapq.heappush(queue, (now + ctx.runtime(cid), cid))

    if cfg.warmup_clients is not None:
        warm = list(cfg.warmup_clients)
    else:
        warm = [int(c) for c in ctx.sampler.choice(N, hyper.M_c, replace=False)]
    for cid in warm:
        dispatch(cid)

    while len(ctx.trace) < hyper.T:
        if not queue:
            raise RuntimeError("event queue drained before T rounds")
        now, first = heapq.heappop(queue)
        arrived = [first]
        while queue and queue[0][0] == now:
            arrived.append(heapq.heappop(queue)[1])

        for cid in arrived:
            info = inflight.pop(cid)
            delta = ctx.train(cid, info.dispatch_model_snapshot, info.dispatch_index)
            tau = t - info.dispatch_round
            ctx.trace.all_taus.append(tau)
            if algo is Algorithm.FEDASYNC:
                x_new = info.dispatch_model_snapshot + delta
                x, alpha_t = fedasync_step(state.x, x_new, cfg.fedasync.alpha_base, tau, staleness)
                state = replace(state, x=x, t=t + 1)
                ctx.record(state.x, now, alpha_t, [tau], [cid])
                t += 1
            else:
                buffer.add(delta, tau, cid)
                if buffer.count == hyper.M:
                    avg = buffer.accumulated / hyper.M
                    tau_max = max(buffer.tau_list)
                    if algo is Algorithm.FEDBUFF:
                        state = replace(state, x=fedbuff_step(state.x, avg, hyper.eta), t=t + 1)
                        eta_t = hyper.eta
                    else:
                        state, eta_t = fadas_step(
                            state, PseudoGradient(avg, tau_max), hyper, cfg.eta_t_rule,
                            delay_adaptive=algo is Algorithm.FADAS_DA,
                        )
                    ctx.record(state.x, now, eta_t, buffer.tau_list, buffer.clients)
                    t += 1
                    buffer.reset()
            if len(ctx.trace) >= hyper.T:
                return ctx.trace

        for cid in arrived:
            idle = [c for c in range(N) if c not in inflight]
            if cfg.exclude_last and len(idle) > 1:
                idle.remove(cid)
            dispatch(idle[int(ctx.sampler.integers(len(idle)))])
        assert len(inflight) == hyper.M_c
        if observer is not None:
            observer(now, len(inflight))
    return ctx.trace


def run_sync(
    cfg: SimConfig,
    *,
    problem: Problem | None = None,
    record_params: bool = False,
) -> RunTrace:
    """FEDAVG / FEDAMS rounds over ``M_c`` sampled clients; a round lasts as long as its slowest client.

    Deltas are summed in (runtime, client id) order, i.e. the order they would arrive.
    """
    if cfg.algorithm not in (Algorithm.FEDAVG, Algorithm.FEDAMS):
        raise ConfigError("algorithm", f"{cfg.algorithm.value} is not a synchronous algorithm")
    ctx = _Context(cfg, problem, record_params)
    hyper = cfg.hyper
    state = ServerOptState.initial(ctx.problem.x0)
    sim_time = 0.0
    for _ in range(hyper.T):
        chosen = [int(c) for c in ctx.sampler.choice(cfg.N, hyper.M_c, replace=False)]
        arrivals = sorted((ctx.runtime(cid), cid) for cid in chosen)
        deltas = []
        for _rt, cid in arrivals:
            deltas.append(ctx.train(cid, state.x, ctx.dispatch_count[cid]))
            ctx.dispatch_count[cid] += 1
        sim_time += arrivals[-1][0]
        if cfg.algorithm is Algorithm.FEDAVG:
            state = replace(state, x=fedavg_aggregate(state.x, deltas), t=state.t + 1)
            eta_t = 1.0
        else:
            state = fedams_sync_step(state, deltas, hyper)
            eta_t = hyper.eta
        clients = [cid for _rt, cid in arrivals]
        ctx.record(state.x, sim_time, eta_t, [0] * len(clients), clients)
    return ctx.trace


def run(cfg: SimConfig, **kwargs) -> RunTrace:
    if cfg.algorithm.is_async:
        return run_async(cfg, **kwargs)
    kwargs.pop("observer", None)
    return run_sync(cfg, **kwargs)
