"""Integer points of [0, N]^d: visibility, distances, ray angles and spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from hypervis.errors import UsageError

Point = Sequence[int]

DEFAULT_BINS = 256


@dataclass(frozen=True)
class LatticeParams:
    d: int
    N: int

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 1:
            raise UsageError(f"dimension d must be an integer >= 1, got {self.d!r}")
        if int(self.N) != self.N or self.N < 1:
            raise UsageError(f"side length N must be an integer >= 1, got {self.N!r}")

    @property
    def n_points(self) -> int:
        return (self.N + 1) ** self.d

    def contains(self, v: Point) -> bool:
        return len(v) == self.d and all(0 <= c <= self.N for c in v)

    def check(self, v: Point) -> None:
        if len(v) != self.d:
            raise UsageError(f"point has {len(v)} coordinates, expected {self.d}")
        if not all(0 <= c <= self.N for c in v):
            raise UsageError(f"point {tuple(v)} lies outside [0, {self.N}]^{self.d}")


def _same_dim(v: Point, w: Point) -> None:
    if len(v) != len(w):
        raise UsageError(f"dimension mismatch: {len(v)} vs {len(w)}")


def visibility_gcd(v: Point, w: Point) -> int:
    """gcd of the coordinate differences; 0 when v == w."""
    _same_dim(v, w)
    return math.gcd(*(int(a) - int(b) for a, b in zip(v, w)))


def is_visible(v: Point, w: Point) -> bool:
    return visibility_gcd(v, w) == 1


def distance_sq(v: Point, w: Point) -> int:
    _same_dim(v, w)
    return sum((int(b) - int(a)) ** 2 for a, b in zip(v, w))


def normalized_distance(params: LatticeParams, v: Point, w: Point) -> float:
    """Euclidean distance divided by the main diagonal length N*sqrt(d)."""
    params.check(v)
    params.check(w)
    return math.sqrt(distance_sq(v, w) / (params.d * params.N**2))


def sin_between(v: Point, w: Point) -> float:
    """Sine of the angle between the rays from the origin through v and w."""
    _same_dim(v, w)
    vv = sum(int(a) * int(a) for a in v)
    ww = sum(int(b) * int(b) for b in w)
    if vv == 0 or ww == 0:
        raise UsageError("rays from the origin need nonzero points")
    vw = sum(int(a) * int(b) for a, b in zip(v, w))
    cos = max(-1.0, min(1.0, vw / math.sqrt(vv * ww)))
    return math.sqrt(1.0 - cos * cos)


@dataclass
class SpectrumSummary:
    count: int
    min_sin: float | None
    max_sin: float | None
    mean_sin: float | None
    histogram: list[int]
    bin_width: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "min_sin": self.min_sin,
            "max_sin": self.max_sin,
            "mean_sin": self.mean_sin,
            "bin_width": self.bin_width,
            "histogram": list(self.histogram),
        }


@dataclass
class SpectrumAccumulator:
    """Streams (possibly weighted) sine values into a SpectrumSummary."""

    bins: int = DEFAULT_BINS
    count: int = 0
    lo: float = math.inf
    hi: float = -math.inf
    _partials: list[float] = field(default_factory=list)
    _hist: np.ndarray | None = None

    def add(self, sines: np.ndarray, weights: np.ndarray | int | None = None) -> None:
        sines = np.asarray(sines, dtype=np.float64).ravel()
        if sines.size == 0:
            return
        if weights is None:
            w = np.ones(sines.size, dtype=np.int64)
        else:
            w = np.broadcast_to(np.asarray(weights, dtype=np.int64), sines.shape)
            keep = w > 0
            sines, w = sines[keep], w[keep]
            if sines.size == 0:
                return
        if self._hist is None:
            self._hist = np.zeros(self.bins, dtype=np.int64)
        idx = np.minimum((sines * self.bins).astype(np.int64), self.bins - 1)
        self._hist += np.bincount(idx, weights=w, minlength=self.bins).astype(np.int64)
        self.count += int(w.sum())
        self.lo = min(self.lo, float(sines.min()))
        self.hi = max(self.hi, float(sines.max()))
        self._partials.append(math.fsum((sines * w).tolist()))

    def summary(self) -> SpectrumSummary:
        width = 1.0 / self.bins
        if self.count == 0:
            return SpectrumSummary(0, None, None, None, [0] * self.bins, width)
        mean = math.fsum(self._partials) / self.count
        mean = min(max(mean, self.lo), self.hi)
        return SpectrumSummary(self.count, self.lo, self.hi, mean,
                               [int(c) for c in self._hist], width)


def pairwise_sines(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of sines between rows of A and rows of B (float arithmetic)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    na = np.einsum("ij,ij->i", A, A)
    nb = np.einsum("ij,ij->i", B, B)
    cos = (A @ B.T) / np.sqrt(np.outer(na, nb))
    np.clip(cos, -1.0, 1.0, out=cos)
    return np.sqrt(1.0 - cos * cos)


def spectrum(A: Iterable[Point], B: Iterable[Point], bins: int = DEFAULT_BINS,
             block: int = 512) -> SpectrumSummary:
    """Sines over ordered pairs (a, b), a in A, b in B, a != b as points."""
    A = [tuple(int(c) for c in a) for a in A]
    B = [tuple(int(c) for c in b) for b in B]
    acc = SpectrumAccumulator(bins=bins)
    if not A or not B:
        return acc.summary()
    dims = {len(p) for p in A} | {len(p) for p in B}
    if len(dims) != 1:
        raise UsageError(f"points of mixed dimensions {sorted(dims)}")
    if any(not any(p) for p in A) or any(not any(p) for p in B):
        raise UsageError("the origin has no ray; remove it from the point sets")
    Ba = np.array(B, dtype=np.int64)
    for start in range(0, len(A), block):
        Aa = np.array(A[start:start + block], dtype=np.int64)
        s = pairwise_sines(Aa, Ba)
        distinct = (Aa[:, None, :] != Ba[None, :, :]).any(axis=2)
        acc.add(s[distinct])
    return acc.summary()
