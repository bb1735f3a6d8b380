"""Synthetic datasets and Dirichlet label-skew partitioning."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Features ``(n, d_in)`` plus integer labels (classification) or float targets.

    ``C`` is the class count, or 0 for regression targets.
    """

    features: np.ndarray
    labels: np.ndarray
    C: int = 0

    def __post_init__(self):
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise ValueError("features must be (n, d_in) with one label per row")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain NaN/Inf")
        if self.C and (self.labels.min(initial=0) < 0 or self.labels.max(initial=0) >= self.C):
            raise ValueError(f"labels outside [0, {self.C})")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def d_in(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class Partition:
    assignment: list[np.ndarray]
    alpha: float

    @property
    def sizes(self) -> list[int]:
        return [len(a) for a in self.assignment]


def gen_blobs(seed, n: int, d_in: int, C: int, class_separation: float) -> Dataset:
    """``n`` samples from ``C`` unit-variance Gaussians, balanced to within one.

    Means sit on a scaled simplex (for C <= d_in + 1) or on a scaled random set
    rescaled so the closest pair is exactly ``class_separation`` apart.
    """
    if n < C or d_in < 1 or C < 1 or class_separation <= 0:
        raise ValueError("need n >= C, d_in >= 1 and class_separation > 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    means = rng.standard_normal((C, d_in))
    if C > 1:
        diffs = means[:, None, :] - means[None, :, :]
        dist = np.sqrt((diffs**2).sum(-1))
        closest = dist[np.triu_indices(C, 1)].min()
        means *= class_separation / closest
    labels = np.arange(n) % C
    rng.shuffle(labels)
    features = means[labels] + rng.standard_normal((n, d_in))
    return Dataset(features, labels.astype(np.int64), C)


@dataclass(frozen=True)
class QuadraticProblem:
    """Per-client least-squares objectives ``F_i(x) = 1/2 ||A_i x - b_i||^2``."""

    A: list[np.ndarray]
    b: list[np.ndarray]
    x_star: np.ndarray
    client_minimizers: list[np.ndarray]

    @property
    def N(self) -> int:
        return len(self.A)

    def minimizer(self) -> np.ndarray:
        """Closed-form minimizer of the average objective (normal equations)."""
        lhs = sum(a.T @ a for a in self.A)
        rhs = sum(a.T @ b for a, b in zip(self.A, self.b))
        return np.linalg.solve(lhs, rhs)

    def as_dataset(self) -> tuple[Dataset, list[np.ndarray]]:
        """Stack rows of every ``A_i`` as samples; client i owns its own d rows."""
        d = self.A[0].shape[1]
        features = np.vstack(self.A)
        targets = np.concatenate(self.b)
        shards = [np.arange(i * d, (i + 1) * d) for i in range(self.N)]
        return Dataset(features, targets, 0), shards


def gen_quadratic_problem(seed, N: int, d: int, heterogeneity: float) -> QuadraticProblem:
    if N < 1 or d < 1 or heterogeneity < 0:
        raise ValueError("need N >= 1, d >= 1, heterogeneity >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x_star = rng.standard_normal(d)
    A, b, mins = [], [], []
    for _ in range(N):
        q, _r = np.linalg.qr(rng.standard_normal((d, d)))
        # singular values in [1, 10] -> cond(A) <= 10, cond(A^T A) <= 100
        s = rng.uniform(1.0, 10.0, size=d)
        a = (q * s) @ q.T
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        xi = x_star + heterogeneity * u
        A.append(a)
        b.append(a @ xi)
        mins.append(xi)
    return QuadraticProblem(A, b, x_star, mins)


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    raw = weights * total
    counts = np.floor(raw).astype(np.int64)
    short = total - counts.sum()
    if short > 0:
        # stable sort: ties go to lower client index
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def dirichlet_partition(labels, N: int, alpha: float, stream: np.random.Generator) -> Partition:
    """Label-skew split: class c is divided across clients by ``p_c ~ Dir(alpha 1_N)``.

    Counts use largest-remainder rounding. Any client left empty steals one sample
    from the currently largest client, so every client ends with >= 1 sample.
    """
    labels = np.asarray(labels)
    if N < 1 or alpha <= 0:
        raise ValueError("need N >= 1 and alpha > 0")
    if len(labels) < N:
        raise ValueError(f"{len(labels)} samples cannot cover {N} clients")
    classes = np.unique(labels)
    buckets: list[list[int]] = [[] for _ in range(N)]
    for c in classes:
        idx = np.flatnonzero(labels == c)
        stream.shuffle(idx)
        p = stream.dirichlet(np.full(N, alpha))
        counts = _largest_remainder(p, len(idx))
        start = 0
        for i, k in enumerate(counts):
            buckets[i].extend(idx[start : start + k].tolist())
            start += k
    for i in range(N):
        if not buckets[i]:
            donor = max(range(N), key=lambda j: (len(buckets[j]), -j))
            buckets[i].append(buckets[donor].pop())
    return Partition([np.sort(np.asarray(b, dtype=np.int64)) for b in buckets], alpha)


def load_csv(path: str | Path) -> Dataset:
    """Header row, float feature columns, integer label in the last column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [r for r in reader if r]
    arr = np.asarray([[float(v) for v in r[:-1]] for r in rows], dtype=np.float64)
    labels = np.asarray([int(r[-1]) for r in rows], dtype=np.int64)
    return Dataset(arr, labels, int(labels.max()) + 1)
