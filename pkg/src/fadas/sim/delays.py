"""Client delay classes and simulated runtimes (units of 10 seconds)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from fadas.core import DelayProfile, RngStreams, SimConfig, derive_stream


class DelayClass(str, Enum):
    SMALL = "SMALL"
    MEDIUM = "MEDIUM"
    LARGE = "LARGE"


_CLASSES = (DelayClass.SMALL, DelayClass.MEDIUM, DelayClass.LARGE)

PROFILE_RANGES = {
    DelayProfile.LARGE_WORST_CASE: {
        DelayClass.SMALL: (1.0, 2.0),
        DelayClass.MEDIUM: (3.0, 5.0),
        DelayClass.LARGE: (50.0, 80.0),
    },
    DelayProfile.MILD: {
        DelayClass.SMALL: (1.0, 2.0),
        DelayClass.MEDIUM: (3.0, 5.0),
        DelayClass.LARGE: (5.0, 8.0),
    },
}


class ScriptExhausted(IndexError):
    pass


@dataclass(frozen=True)
class DelayModel:
    class_of: tuple[DelayClass, ...]
    ranges: dict[DelayClass, tuple[float, float]]
    gamma: float = 1.0
    scripted: dict[int, tuple[float, ...]] | None = None
    scripted_repeat: bool = False
    proportions: tuple[float, ...] = field(default=(1 / 3, 1 / 3, 1 / 3))

    def __post_init__(self):
        for lo, hi in self.ranges.values():
            if not 0 < lo <= hi:
                raise ValueError(f"bad runtime range ({lo}, {hi})")


def assign_delay_classes(N: int, gamma: float, stream: np.random.Generator):
    """Draw ``p ~ Dir(gamma 1_3)`` once, then each client's class i.i.d. from ``p``.

    Returns ``(class_of, p)``.
    """
    if N < 1 or gamma <= 0:
        raise ValueError("need N >= 1 and gamma > 0")
    p = stream.dirichlet(np.full(3, gamma))
    draws = stream.choice(3, size=N, p=p)
    return tuple(_CLASSES[k] for k in draws), tuple(float(v) for v in p)


def sample_runtime(client_id: int, model: DelayModel, stream: np.random.Generator | None, draw_index: int = 0) -> float:
    """One runtime for ``client_id``; scripted models replay entry ``draw_index``."""
    if model.scripted is not None:
        seq = model.scripted.get(client_id)
        if not seq:
            raise ScriptExhausted(f"no scripted runtimes for client {client_id}")
        if draw_index >= len(seq):
            if not model.scripted_repeat:
                raise ScriptExhausted(f"client {client_id}: scripted runtimes exhausted after {len(seq)}")
            draw_index %= len(seq)
        return float(seq[draw_index])
    lo, hi = model.ranges[model.class_of[client_id]]
    return float(stream.uniform(lo, hi))


class RuntimeSampler:
    """Per-client runtime streams with draw counters, so draws are schedule-independent."""

    def __init__(self, model: DelayModel, streams: RngStreams):
        self.model = model
        self._streams = streams
        self._gens: dict[int, np.random.Generator] = {}
        self._count: dict[int, int] = {}

    def __call__(self, client_id: int) -> float:
        k = self._count.get(client_id, 0)
        self._count[client_id] = k + 1
        if self.model.scripted is not None:
            return sample_runtime(client_id, self.model, None, k)
        gen = self._gens.get(client_id)
        if gen is None:
            gen = self._gens[client_id] = derive_stream(self._streams, "runtime", client_id)
        return sample_runtime(client_id, self.model, gen)


def load_scripted_runtimes(path: str | Path) -> dict[str, list[float]]:
    """Read a JSON map ``client_id -> [durations...]``."""
    with open(path) as fh:
        raw = json.load(fh)
    return {str(int(k)): [float(v) for v in seq] for k, seq in raw.items()}


def delay_model_from_config(cfg: SimConfig) -> DelayModel:
    streams = RngStreams(cfg.master_seed)
    if cfg.delay_class_override is not None:
        class_of = (DelayClass(cfg.delay_class_override),) * cfg.N
        props = tuple(float(c is class_of[0]) for c in _CLASSES)
    else:
        class_of, props = assign_delay_classes(cfg.N, cfg.gamma, derive_stream(streams, "delay_class"))
    profile = cfg.delay_profile
    ranges = PROFILE_RANGES.get(profile, PROFILE_RANGES[DelayProfile.MILD])
    scripted = None
    if profile is DelayProfile.SCRIPTED:
        scripted = {int(k): tuple(float(v) for v in seq) for k, seq in cfg.scripted_runtimes.items()}
    return DelayModel(class_of, ranges, cfg.gamma, scripted, cfg.scripted_repeat, props)
