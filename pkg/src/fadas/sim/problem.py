"""Materialize the data/model side of a config and evaluate global models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fadas.core import ModelKind, ModelSpec, RngStreams, SimConfig, derive_stream
from fadas.data import Dataset, dirichlet_partition, gen_blobs, gen_quadratic_problem, load_csv
from fadas.models import init_params, loss_and_grad, predict


@dataclass(frozen=True)
class Problem:
    spec: ModelSpec
    train: Dataset
    shards: list[np.ndarray]
    x0: np.ndarray
    test: Dataset | None = None

    @property
    def union(self) -> np.ndarray:
        return np.concatenate(self.shards)


@dataclass(frozen=True)
class GlobalEval:
    loss: float
    grad_norm_sq: float
    test_acc: float | None


def build_problem(cfg: SimConfig) -> Problem:
    streams = RngStreams(cfg.master_seed)
    ds = cfg.dataset
    test = None
    if ds.kind == "quadratic":
        quad = gen_quadratic_problem(derive_stream(streams, "dataset"), cfg.N, ds.d_in, ds.heterogeneity)
        train, shards = quad.as_dataset()
        spec = ModelSpec(ModelKind.QUADRATIC, ds.d_in, 0, 0, cfg.model.l2_weight_decay)
    else:
        if ds.kind == "blobs":
            full = gen_blobs(derive_stream(streams, "dataset"), ds.n + ds.n_test, ds.d_in, ds.C, ds.class_separation)
            train = Dataset(full.features[: ds.n], full.labels[: ds.n], full.C)
            if ds.n_test:
                test = Dataset(full.features[ds.n :], full.labels[ds.n :], full.C)
        else:
            train = load_csv(ds.csv_path)
        part = dirichlet_partition(train.labels, cfg.N, cfg.alpha, derive_stream(streams, "partition"))
        shards = part.assignment
        spec = ModelSpec(cfg.model.kind, train.d_in, train.C, cfg.model.hidden, cfg.model.l2_weight_decay)
    x0 = init_params(spec, derive_stream(streams, "init"))
    return Problem(spec, train, shards, x0, test)


def global_eval(problem: Problem, x: np.ndarray) -> GlobalEval:
    """Full-batch loss and squared gradient norm over the union of all shards."""
    ge = loss_and_grad(problem.spec, x, problem.union, problem.train)
    acc = None
    if problem.spec.kind is not ModelKind.QUADRATIC:
        ref = problem.test if problem.test is not None else problem.train
        acc = float(np.mean(predict(problem.spec, x, ref.features) == ref.labels))
    return GlobalEval(ge.loss, float(ge.grad @ ge.grad), acc)
