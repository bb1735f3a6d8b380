"""Shared types: hyper-parameters, simulation config, and seeded RNG streams.

A simulation is fully described by one JSON document (``SimConfig``). Every
source of randomness is drawn from a named stream derived from the single
``master_seed``, so changing one stream (say, runtimes) leaves the others
untouched.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class Algorithm(str, Enum):
    FADAS = "FADAS"
    FADAS_DA = "FADAS_DA"
    FEDBUFF = "FEDBUFF"
    FEDASYNC = "FEDASYNC"
    FEDAVG = "FEDAVG"
    FEDAMS = "FEDAMS"

    @property
    def is_async(self) -> bool:
        return self in (Algorithm.FADAS, Algorithm.FADAS_DA, Algorithm.FEDBUFF, Algorithm.FEDASYNC)


class DelayProfile(str, Enum):
    MILD = "MILD"
    LARGE_WORST_CASE = "LARGE_WORST_CASE"
    SCRIPTED = "SCRIPTED"


class EtaRule(str, Enum):
    MAIN_TEXT = "MAIN_TEXT"  # min(eta, 1/tau)
    APPENDIX = "APPENDIX"  # min(eta, eta/tau)


class ModelKind(str, Enum):
    QUADRATIC = "QUADRATIC"
    LOGISTIC = "LOGISTIC"
    MLP = "MLP"


@dataclass(frozen=True)
class HyperParams:
    eta_l: float = 0.01
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.99
    eps: float = 1e-8
    K: int = 1
    M: int = 1
    M_c: int = 1
    tau_c: int = 0
    T: int = 100


@dataclass(frozen=True)
class ModelSpec:
    """Model family and dimensions; ``param_dim`` is derived from these."""

    kind: ModelKind
    d_in: int
    C: int = 0
    hidden: int = 0
    l2_weight_decay: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.d_in < 1:
            raise ConfigError("model.d_in", "must be >= 1")
        if self.kind is not ModelKind.QUADRATIC and self.C < 2:
            raise ConfigError("model.C", "classification needs C >= 2")
        if self.kind is ModelKind.MLP and self.hidden < 1:
            raise ConfigError("model.hidden", "MLP needs hidden >= 1")
        if self.l2_weight_decay < 0:
            raise ConfigError("model.l2_weight_decay", "must be >= 0")

    @property
    def param_dim(self) -> int:
        if self.kind is ModelKind.QUADRATIC:
            return self.d_in
        if self.kind is ModelKind.LOGISTIC:
            return self.C * (self.d_in + 1)
        return self.hidden * (self.d_in + 1) + self.C * (self.hidden + 1)


@dataclass(frozen=True)
class DatasetConfig:
    # kind: "blobs" | "quadratic" | "csv"
    kind: str = "blobs"
    n: int = 1000
    d_in: int = 5
    C: int = 2
    class_separation: float = 4.0
    n_test: int = 500
    heterogeneity: float = 0.0
    csv_path: str | None = None


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind = ModelKind.LOGISTIC
    hidden: int = 0
    l2_weight_decay: float = 0.0


@dataclass(frozen=True)
class FedAsyncConfig:
    alpha_base: float = 0.6
    a: float = 0.5


@dataclass(frozen=True)
class SimConfig:
    N: int = 10
    hyper: HyperParams = field(default_factory=HyperParams)
    algorithm: Algorithm = Algorithm.FADAS
    delay_profile: DelayProfile = DelayProfile.MILD
    gamma: float = 1.0
    alpha: float = 0.3
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    master_seed: int = 0
    eta_t_rule: EtaRule = EtaRule.APPENDIX
    # None means full-batch local gradients
    batch_size: int | None = None
    fedasync: FedAsyncConfig = field(default_factory=FedAsyncConfig)
    # client id (as str, JSON keys) -> durations; only read under SCRIPTED
    scripted_runtimes: dict[str, list[float]] | None = None
    scripted_repeat: bool = False
    # pin every client to one delay class (e.g. "SMALL")
    delay_class_override: str | None = None
    # explicit warm-up set instead of sampling it
    warmup_clients: list[int] | None = None
    # do not re-dispatch the client that just completed (when others are idle)
    exclude_last: bool = False
    schema_version: int = SCHEMA_VERSION


_NESTED = {
    "hyper": HyperParams,
    "dataset": DatasetConfig,
    "model": ModelConfig,
    "fedasync": FedAsyncConfig,
}
_ENUMS = {
    "algorithm": Algorithm,
    "delay_profile": DelayProfile,
    "eta_t_rule": EtaRule,
}


def _build(cls, data: dict[str, Any], prefix: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{prefix}{sorted(unknown)[0]}", "unknown field")
    return cls(**data)


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    data = copy.deepcopy(data)
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")
    for name, cls in _NESTED.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ConfigError(name, "must be an object")
            sub = dict(data[name])
            if name == "model" and "kind" in sub:
                sub["kind"] = _enum(ModelKind, sub["kind"], "model.kind")
            data[name] = _build(cls, sub, name + ".")
    for name, enum in _ENUMS.items():
        if name in data:
            data[name] = _enum(enum, data[name], name)
    return _build(SimConfig, data, "")


def _enum(enum, value, name):
    try:
        return enum(value)
    except ValueError:
        raise ConfigError(name, f"invalid value {value!r}") from None


def config_to_dict(cfg: SimConfig) -> dict[str, Any]:
    def conv(obj):
        if isinstance(obj, Enum):
            return obj.value
        if dataclasses.is_dataclass(obj):
            return {f.name: conv(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, dict):
            return {str(k): conv(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [conv(v) for v in obj]
        return obj

    return conv(cfg)


def load_config(path: str | Path) -> SimConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def dump_config(cfg: SimConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def apply_overrides(cfg: SimConfig, overrides: Sequence[str]) -> SimConfig:
    """Apply ``key.path=value`` overrides; values parse as JSON, else as strings."""
    data = config_to_dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(key, "unknown override path")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(key, "unknown override path")
        node[parts[-1]] = value
    return config_from_dict(data)


def validate_config(cfg: SimConfig) -> SimConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise ``ConfigError``."""
    h = cfg.hyper

    def check(ok, name, msg):
        if not ok:
            raise ConfigError(name, msg)

    for name in ("eta_l", "eta", "beta1", "beta2", "eps"):
        value = getattr(h, name)
        check(isinstance(value, (int, float)) and np.isfinite(value), name, "must be a finite number")
    check(h.eta_l > 0, "eta_l", "eta_l > 0 violated")
    check(h.eta > 0, "eta", "eta > 0 violated")
    check(h.beta1 >= 0, "beta1", "beta1 >= 0 violated")
    check(h.beta1 < 1, "beta1", "beta1 < 1 violated")
    check(h.beta2 >= 0, "beta2", "beta2 >= 0 violated")
    check(h.beta2 < 1, "beta2", "beta2 < 1 violated")
    check(h.eps > 0, "eps", "eps > 0 violated")
    for name in ("K", "M", "M_c", "T"):
        value = getattr(h, name)
        check(isinstance(value, int) and value >= 1, name, f"{name} >= 1 violated")
    check(isinstance(h.tau_c, int) and h.tau_c >= 0, "tau_c", "tau_c >= 0 violated")
    check(isinstance(cfg.N, int) and cfg.N >= 1, "N", "N >= 1 violated")
    check(h.M <= h.M_c, "M", "M ≤ M_c violated")
    check(h.M_c <= cfg.N, "M_c", "M_c ≤ N violated")
    check(cfg.gamma > 0, "gamma", "gamma > 0 violated")
    check(cfg.alpha > 0, "alpha", "alpha > 0 violated")
    check(isinstance(cfg.master_seed, int) and 0 <= cfg.master_seed < 2**64,
          "master_seed", "must be a 64-bit non-negative integer")
    check(cfg.batch_size is None or cfg.batch_size >= 1, "batch_size", "batch_size >= 1 violated")
    check(0 < cfg.fedasync.alpha_base <= 1, "fedasync.alpha_base", "alpha_base in (0, 1] violated")
    check(cfg.fedasync.a >= 0, "fedasync.a", "a >= 0 violated")

    ds = cfg.dataset
    check(ds.kind in ("blobs", "quadratic", "csv"), "dataset.kind", f"invalid value {ds.kind!r}")
    if ds.kind == "blobs":
        check(ds.d_in >= 1, "dataset.d_in", "d_in >= 1 violated")
        check(ds.C >= 2, "dataset.C", "C >= 2 violated")
        check(ds.n >= max(ds.C, cfg.N), "dataset.n", "n >= max(C, N) violated")
        check(ds.class_separation > 0, "dataset.class_separation", "class_separation > 0 violated")
        check(ds.n_test >= 0, "dataset.n_test", "n_test >= 0 violated")
    elif ds.kind == "quadratic":
        check(ds.d_in >= 1, "dataset.d_in", "d_in >= 1 violated")
        check(ds.heterogeneity >= 0, "dataset.heterogeneity", "heterogeneity >= 0 violated")
    else:
        check(bool(ds.csv_path), "dataset.csv_path", "required for csv datasets")
    quad_data = ds.kind == "quadratic"
    check(quad_data == (cfg.model.kind is ModelKind.QUADRATIC), "model.kind",
          "QUADRATIC model requires (and is required by) a quadratic dataset")
    if cfg.model.kind is ModelKind.MLP:
        check(cfg.model.hidden >= 1, "model.hidden", "hidden >= 1 violated")
    check(cfg.model.l2_weight_decay >= 0, "model.l2_weight_decay", "l2_weight_decay >= 0 violated")

    if cfg.delay_profile is DelayProfile.SCRIPTED:
        check(cfg.scripted_runtimes is not None, "scripted_runtimes", "required for SCRIPTED profile")
        for key, seq in cfg.scripted_runtimes.items():
            check(all(float(v) > 0 for v in seq), "scripted_runtimes", f"client {key}: durations must be > 0")
    if cfg.delay_class_override is not None:
        check(cfg.delay_class_override in ("SMALL", "MEDIUM", "LARGE"), "delay_class_override",
              f"invalid value {cfg.delay_class_override!r}")
    if cfg.warmup_clients is not None:
        w = cfg.warmup_clients
        check(len(w) == h.M_c and len(set(w)) == len(w) and all(0 <= c < cfg.N for c in w),
              "warmup_clients", "must list M_c distinct client ids")
    return cfg


# ---------------------------------------------------------------- RNG streams

STREAM_LABELS = (
    "partition",
    "delay_class",
    "runtime",
    "client_sampling",
    "minibatch",
    "dataset",
    "init",
)


@dataclass(frozen=True)
class RngStreams:
    master_seed: int


def stream_key(label: str) -> int:
    return zlib.crc32(label.encode("ascii"))


def derive_stream(streams: RngStreams, label: str, index: int | Sequence[int] = 0) -> np.random.Generator:
    """Generator seeded from ``(master_seed, label, index)``.

    ``index`` may be a tuple, e.g. ``(client_id, dispatch_index)`` for minibatches.
    """
    if label not in STREAM_LABELS:
        raise KeyError(f"unknown stream label {label!r}")
    idx = (int(index),) if np.isscalar(index) else tuple(int(i) for i in index)
    seq = np.random.SeedSequence(entropy=streams.master_seed, spawn_key=(stream_key(label),) + idx)
    return np.random.Generator(np.random.PCG64(seq))
