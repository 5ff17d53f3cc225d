"""Seeded Monte Carlo experiments on visible pairs, rays and self-visible tuples.

Random numbers come from numpy's counter-based Philox generator.  Draws are
grouped in blocks of BLOCK tuples; block b is generated from the key ``seed``
with the counter started at ``b << 128``, so every block is an independent,
addressable stream.  Blocks are consumed in index order whatever the number
of worker threads, which makes reports bit-identical across thread counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterator

import numpy as np

from hypervis.errors import BudgetError, UsageError
from hypervis.lattice_core import LatticeParams

BLOCK = 1024
MAX_REJECTION = 0.99
MIN_ACCEPTANCE = 1e-3
INV_SQRT6 = 1.0 / math.sqrt(6.0)
SQRT7_4 = math.sqrt(7.0) / 4.0
DEFAULT_HALFWIDTH = 0.02

CSV_FIELDS = (
    "experiment", "seed", "samples", "d", "N", "K", "window_center", "window_halfwidth",
    "in_window", "fraction_in_window", "fraction_std_error", "mean", "std_error",
    "mean_sq", "drawn", "accepted", "rejected", "acceptance", "acceptance_std_error", "mean_distance",
)


class SamplingAborted(BudgetError):
    """Raised when rejection sampling would waste almost every draw."""


@dataclass
class SampleReport:
    experiment: str
    seed: int
    samples: int
    d: int
    N: int | None
    K: int
    window_center: float
    window_halfwidth: float
    in_window: int
    fraction_in_window: float
    fraction_std_error: float
    mean: float
    std_error: float
    mean_sq: float
    drawn: int
    accepted: int
    rejected: int
    acceptance: float
    acceptance_std_error: float
    mean_distance: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        row = self.to_dict()
        return ["" if row[k] is None else row[k] for k in CSV_FIELDS]


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("HYPERVIS_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise UsageError("threads must be >= 1")
    return threads


def _check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise UsageError("seed must be an integer in [0, 2^64)")
    return int(seed)


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_check_seed(seed), counter=block << 128))


def draw_block(d: int, N: int, K: int, seed: int, block: int) -> np.ndarray:
    """BLOCK uniform K-tuples of points of [0, N]^d, shape (BLOCK, K, d)."""
    return block_generator(seed, block).integers(0, N + 1, size=(BLOCK, K, d), dtype=np.int64)


def sample_point(d: int, N: int, seed: int, index: int) -> tuple[int, ...]:
    """Point number ``index`` of the single-point stream for (seed, d, N)."""
    if d < 1 or N < 0 or index < 0:
        raise UsageError("need d >= 1, N >= 0 and index >= 0")
    block, row = divmod(index, BLOCK)
    # integer draws are prefix-consistent, so only the first row + 1 points are needed
    pts = block_generator(seed, block).integers(0, N + 1, size=(row + 1, 1, d), dtype=np.int64)
    return tuple(int(c) for c in pts[row, 0])


def _blocks(fn: Callable[[int], tuple], threads: int) -> Iterator[tuple]:
    """fn(0), fn(1), ... in order, evaluated up to ``threads`` blocks ahead."""
    if threads == 1:
        b = 0
        while True:
            yield fn(b)
            b += 1
    with ThreadPoolExecutor(max_workers=threads) as pool:
        b = 0
        while True:
            for fut in [pool.submit(fn, b + i) for i in range(threads)]:
                yield fut.result()
            b += threads


def _pair_gcd(diff: np.ndarray) -> np.ndarray:
    return np.gcd.reduce(np.abs(diff), axis=-1)


def _summarize(experiment: str, seed: int, d: int, N: int | None, K: int,
               center: float, halfwidth: float, values: np.ndarray, drawn: int,
               accepted: int, samples: int, squares: np.ndarray | None = None) -> SampleReport:
    n = values.size
    inside = int(np.count_nonzero(np.abs(values - center) <= halfwidth)) if n else 0
    frac = inside / n if n else 0.0
    mean = math.fsum(values.tolist()) / n if n else math.nan
    if n > 1:
        var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    sq = values * values if squares is None else squares
    mean_sq = math.fsum(sq.tolist()) / n if n else math.nan
    acc = accepted / drawn if drawn else 0.0
    return SampleReport(
        experiment=experiment, seed=seed, samples=samples, d=d, N=N, K=K,
        window_center=center, window_halfwidth=halfwidth, in_window=inside,
        fraction_in_window=frac,
        fraction_std_error=math.sqrt(frac * (1 - frac) / n) if n else 0.0,
        mean=mean, std_error=se, mean_sq=mean_sq, drawn=drawn, accepted=accepted,
        rejected=drawn - accepted, acceptance=acc,
        acceptance_std_error=math.sqrt(acc * (1 - acc) / drawn) if drawn else 0.0,
    )


def _validate(d: int, N: int, samples: int, halfwidth: float) -> LatticeParams:
    params = LatticeParams(d, N)
    if samples < 1:
        raise UsageError("samples must be >= 1")
    if halfwidth < 0:
        raise UsageError("halfwidth must be >= 0")
    return params


def _collect_accepted(block_fn: Callable[[int], tuple[np.ndarray, np.ndarray, np.ndarray]],
                      samples: int, threads: int, what: str):
    """Run blocks until ``samples`` draws are accepted; keep the first ones in order."""
    vals, sqs = [], []
    drawn = accepted = 0
    for keep, v, s in _blocks(block_fn, threads):
        need = samples - accepted
        idx = np.flatnonzero(keep)
        if idx.size >= need:
            cut = idx[need - 1] + 1
            vals.append(v[idx[:need]])
            sqs.append(s[idx[:need]])
            drawn += int(cut)
            accepted += need
            break
        vals.append(v[idx])
        sqs.append(s[idx])
        drawn += keep.size
        accepted += idx.size
        if drawn - accepted > MAX_REJECTION * drawn:
            raise SamplingAborted(
                f"{what}: {drawn - accepted} of {drawn} draws rejected "
                f"(more than {MAX_REJECTION:.0%}); parameters are pathological")
    return np.concatenate(vals), np.concatenate(sqs), drawn, accepted


def pair_distance_experiment(d: int, N: int, samples: int, halfwidth: float = DEFAULT_HALFWIDTH,
                             seed: int = 0, threads: int | None = None) -> SampleReport:
    """Normalized distances of ``samples`` uniformly drawn visible ordered pairs."""
    _validate(d, N, samples, halfwidth)
    scale = float(d) * N * N

    def block(b: int):
        pts = draw_block(d, N, 2, seed, b)
        diff = pts[:, 1] - pts[:, 0]
        dsq = (diff * diff).sum(axis=1) / scale
        return _pair_gcd(diff) == 1, np.sqrt(dsq), dsq

    vals, sqs, drawn, acc = _collect_accepted(block, samples, resolve_threads(threads),
                                              "pair distance sampling")
    return _summarize("pair_distance", seed, d, N, 2, INV_SQRT6, halfwidth, vals, drawn,
                      acc, samples, sqs)


def pair_angle_experiment(d: int, N: int, samples: int, halfwidth: float = DEFAULT_HALFWIDTH,
                          seed: int = 0, threads: int | None = None) -> SampleReport:
    """Sines between rays through visible pairs; zero vectors are rejected too."""
    _validate(d, N, samples, halfwidth)

    def block(b: int):
        pts = draw_block(d, N, 2, seed, b)
        v, w = pts[:, 0], pts[:, 1]
        nv = (v * v).sum(axis=1).astype(np.float64)
        nw = (w * w).sum(axis=1).astype(np.float64)
        keep = (_pair_gcd(w - v) == 1) & (nv > 0) & (nw > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            cos = (v * w).sum(axis=1) / np.sqrt(nv * nw)
        cos = np.clip(np.nan_to_num(cos), -1.0, 1.0)
        s2 = 1.0 - cos * cos
        return keep, np.sqrt(s2), s2

    vals, sqs, drawn, acc = _collect_accepted(block, samples, resolve_threads(threads),
                                              "pair angle sampling")
    return _summarize("pair_angle", seed, d, N, 2, SQRT7_4, halfwidth, vals, drawn, acc,
                      samples, sqs)


def polytope_experiment(d: int, N: int, K: int, samples: int,
                        halfwidth: float = DEFAULT_HALFWIDTH, seed: int = 0,
                        threads: int | None = None) -> SampleReport:
    """Draw ``samples`` K-tuples and keep the self-visible ones.

    The acceptance rate estimates #Omega_K / #W^K.  For the kept tuples the
    statistic is the largest |normalized distance - 1/sqrt(6)| over all
    pairs, so the window is centred at 0.
    """
    _validate(d, N, samples, halfwidth)
    if K < 2:
        raise UsageError("K must be >= 2")
    scale = float(d) * N * N
    pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
    nblocks = -(-samples // BLOCK)

    def block(b: int):
        pts = draw_block(d, N, K, seed, b)
        keep = np.ones(BLOCK, dtype=bool)
        dev = np.zeros(BLOCK)
        for i, j in pairs:
            diff = pts[:, j] - pts[:, i]
            keep &= _pair_gcd(diff) == 1
            dist = np.sqrt((diff * diff).sum(axis=1) / scale)
            dev = np.maximum(dev, np.abs(dist - INV_SQRT6))
        return keep, dev

    vals = []
    accepted = 0
    threads = resolve_threads(threads)
    for b, (keep, dev) in enumerate(_blocks(block, threads)):
        if b == nblocks:
            break
        if b == nblocks - 1:
            keep = keep[: samples - b * BLOCK]
        vals.append(dev[: keep.size][keep])
        accepted += int(keep.sum())
    if accepted < MIN_ACCEPTANCE * samples:
        raise SamplingAborted(
            f"self-visible {K}-tuples: only {accepted} of {samples} draws accepted "
            f"(acceptance below {MIN_ACCEPTANCE:g})")
    return _summarize("polytope", seed, d, N, K, 0.0, halfwidth, np.concatenate(vals),
                      samples, accepted, samples)


def continuous_baseline(d: int, samples: int, seed: int = 0, halfwidth: float = 0.01,
                        threads: int | None = None) -> SampleReport:
    """Uniform pairs in [0,1]^d.

    ``mean`` is the average of |X-Y|^2/d (the window sits around 1/6) and
    ``mean_distance`` the average of its square root.
    """
    if d < 1 or samples < 1:
        raise UsageError("need d >= 1 and samples >= 1")
    nblocks = -(-samples // BLOCK)

    def block(b: int):
        x = block_generator(seed, b).random(size=(BLOCK, 2, d))
        diff = x[:, 1] - x[:, 0]
        return ((diff * diff).sum(axis=1) / d,)

    parts = []
    for b, (dsq,) in enumerate(_blocks(block, resolve_threads(threads))):
        if b == nblocks:
            break
        parts.append(dsq)
    vals = np.concatenate(parts)[:samples]
    rep = _summarize("continuous_baseline", seed, d, None, 2, 1.0 / 6.0, halfwidth, vals,
                     samples, samples, samples)
    rep.mean_distance = math.fsum(np.sqrt(vals).tolist()) / samples
    return rep
