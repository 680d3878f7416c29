"""Uniform-weight empirical distributions and the detector's sliding window."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """``(1/N) * sum_i delta(samples[i])``; samples kept in insertion order, duplicates allowed."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("an empirical distribution needs at least one sample")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.count, 1.0 / self.count)

    def mass_at(self, point) -> float:
        point = np.asarray(point, dtype=float).reshape(-1)
        hits = np.all(self.samples == point, axis=1)
        return float(hits.sum()) / self.count

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def second_moment(self) -> np.ndarray:
        return self.samples.T @ self.samples / self.count

    def diameter(self) -> float:
        if self.dim == 1:
            return float(self.samples.max() - self.samples.min())
        from scipy.spatial.distance import pdist

        return float(pdist(self.samples).max()) if self.count > 1 else 0.0

    def __len__(self) -> int:
        return self.count


def from_samples(samples) -> EmpiricalDistribution:
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("an empirical distribution needs at least one sample")
    return EmpiricalDistribution(samples)


def mean(dist: EmpiricalDistribution) -> np.ndarray:
    return dist.mean()


def second_moment(dist: EmpiricalDistribution) -> np.ndarray:
    return dist.second_moment()


class SlidingWindow:
    """The last ``capacity`` residuals; the oldest is evicted on overflow."""

    def __init__(self, capacity: int, dim: int):
        if capacity < 1:
            raise ValueError("window capacity must be positive")
        self.capacity = capacity
        self.dim = dim
        self._buf: deque[np.ndarray] = deque(maxlen=capacity)

    def push(self, r) -> "SlidingWindow":
        r = np.asarray(r, dtype=float).reshape(-1)
        if r.shape[0] != self.dim:
            raise ValueError(f"residual has dimension {r.shape[0]}, window expects {self.dim}")
        self._buf.append(r.copy())
        return self

    @property
    def full(self) -> bool:
        return len(self._buf) == self.capacity

    def __len__(self) -> int:
        return len(self._buf)

    def samples(self) -> np.ndarray:
        if not self._buf:
            return np.empty((0, self.dim))
        return np.array(self._buf)

    def distribution(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.samples())


def push(window: SlidingWindow, r) -> SlidingWindow:
    return window.push(r)


def write_samples_csv(path, samples) -> None:
    """One row per sample, columns ``s_1..s_p``; ``repr`` round-trips every float exactly."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"s_{k + 1}" for k in range(arr.shape[1])])
        for row in arr:
            writer.writerow([repr(float(x)) for x in row])


def read_samples_csv(path) -> np.ndarray:
    """Inverse of :func:`write_samples_csv`. A leading ``t`` column, if present, is dropped."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty sample file")
    header, body = rows[0], rows[1:]
    skip = 1 if header and header[0].strip() == "t" else 0
    width = len(header) - skip
    if width < 1:
        raise ValueError(f"{path}: no sample columns in header")
    out = []
    for lineno, row in enumerate(body, start=2):
        if not row:
            continue
        if len(row) - skip != width:
            raise ValueError(f"{path}:{lineno}: expected {width} values, got {len(row) - skip}")
        try:
            out.append([float(x) for x in row[skip:]])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    if not out:
        raise ValueError(f"{path}: no samples")
    return np.array(out)
