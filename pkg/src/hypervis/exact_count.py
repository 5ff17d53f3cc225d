"""Exact counts and distance moments over the mutually visible pairs of [0, N]^d.

The Moebius indicator sum over b | gcd(v - w) factors coordinate-wise, so each
modulus b contributes a product of one-dimensional residue-class sums whose
closed forms only involve power sums of floor((N - r)/b).  Equal points have
gcd 0, which every b divides; that diagonal picks up the Mertens value M(N) and
is removed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from hypervis.errors import BudgetError, UsageError
from hypervis.lattice_core import LatticeParams

DEFAULT_ENUM_BUDGET = 5 * 10**7


@dataclass(frozen=True)
class MobiusTable:
    limit: int
    values: tuple[int, ...]

    def __getitem__(self, m: int) -> int:
        if not 1 <= m <= self.limit:
            raise IndexError(m)
        return self.values[m - 1]

    def mertens(self) -> int:
        return sum(self.values)


@dataclass(frozen=True)
class ExactCountReport:
    params: LatticeParams
    omega_count: int
    sum_sq: int
    sum_quartic: int
    a_vis: Fraction
    m2_vis: Fraction

    def to_dict(self) -> dict:
        return {
            "d": self.params.d,
            "N": self.params.N,
            "omega_count": str(self.omega_count),
            "sum_sq": str(self.sum_sq),
            "sum_quartic": str(self.sum_quartic),
            "a_vis": _frac_str(self.a_vis),
            "m2_vis": _frac_str(self.m2_vis),
        }


@dataclass
class BruteForceResult:
    params: LatticeParams
    K: int
    count: int
    sum_sq: int | None = None
    sum_quartic: int | None = None
    # distance^2 -> number of visible ordered pairs at that distance
    dist_sq_counts: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"d": self.params.d, "N": self.params.N, "K": self.K,
               "count": str(self.count)}
        if self.K == 2:
            out["sum_sq"] = str(self.sum_sq)
            out["sum_quartic"] = str(self.sum_quartic)
        return out


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def mobius_table(limit: int) -> MobiusTable:
    if limit < 1:
        raise UsageError("limit must be >= 1")
    mu = np.ones(limit + 1, dtype=np.int8)
    flags = np.ones(limit + 1, dtype=bool)
    for p in range(2, limit + 1):
        if flags[p]:
            flags[p::p] = False
            mu[p::p] *= -1
            mu[p * p::p * p] = 0
    return MobiusTable(limit, tuple(int(x) for x in mu[1:]))


def _power_sums(M: int) -> tuple[int, int, int, int]:
    s1 = M * (M + 1) // 2
    s2 = M * (M + 1) * (2 * M + 1) // 6
    s3 = s1 * s1
    s4 = M * (M + 1) * (2 * M + 1) * (3 * M * M + 3 * M - 1) // 30
    return s1, s2, s3, s4


def _class_moment(M: int, order: int) -> int:
    """sum over 0 <= m, n <= M of (m - n)^order."""
    c = M + 1
    s1, s2, s3, s4 = _power_sums(M)
    if order == 0:
        return c * c
    if order == 2:
        return 2 * c * s2 - 2 * s1 * s1
    return 2 * c * s4 - 8 * s1 * s3 + 6 * s2 * s2


def pair_moment_mod(N: int, b: int, order: int) -> int:
    """sum over 0 <= v, w <= N with b | v - w of (v - w)^order, order in {0, 2, 4}."""
    if order not in (0, 2, 4):
        raise UsageError(f"order must be 0, 2 or 4, got {order}")
    if not 1 <= b <= N + 1:
        raise UsageError(f"need 1 <= b <= N + 1, got b={b}, N={N}")
    q, rem = divmod(N, b)
    # residue classes r <= N mod b hold q + 1 points, the rest hold q
    long_classes = rem + 1
    short_classes = b - long_classes
    total = long_classes * _class_moment(q, order)
    if short_classes and q > 0:
        total += short_classes * _class_moment(q - 1, order)
    return b**order * total


def count_visible_exact(params: LatticeParams) -> int:
    """#Omega, the number of ordered visible pairs, by Moebius summation."""
    d, N = params.d, params.N
    mu = mobius_table(N).values
    diag = (N + 1) ** d
    total = 0
    for b in range(1, N + 1):
        if mu[b - 1]:
            total += mu[b - 1] * (pair_moment_mod(N, b, 0) ** d - diag)
    return total


def visible_distance_moments(params: LatticeParams) -> ExactCountReport:
    """#Omega with the exact sums of distance^2 and distance^4 over Omega."""
    d, N = params.d, params.N
    if d < 2:
        raise UsageError("distance moments need d >= 2")
    mu = mobius_table(N).values
    diag = (N + 1) ** d
    omega = sum_sq = sum_quartic = 0
    for b in range(1, N + 1):
        m = mu[b - 1]
        if not m:
            continue
        h = pair_moment_mod(N, b, 0)
        p2 = pair_moment_mod(N, b, 2)
        p4 = pair_moment_mod(N, b, 4)
        hd2 = h ** (d - 2)
        omega += m * (hd2 * h * h - diag)
        sum_sq += m * d * p2 * hd2 * h
        sum_quartic += m * (d * p4 * hd2 * h + d * (d - 1) * p2 * p2 * hd2)
    return _report(params, omega, sum_sq, sum_quartic)


def _report(params: LatticeParams, omega: int, sum_sq: int, sum_quartic: int) -> ExactCountReport:
    if omega == 0:
        return ExactCountReport(params, 0, 0, 0, Fraction(0), Fraction(0))
    a = Fraction(sum_sq, omega)
    return ExactCountReport(params, omega, sum_sq, sum_quartic, a,
                            Fraction(sum_quartic, omega) - a * a)


def m2_by_definition(dist_sq_counts: dict[int, int]) -> Fraction:
    """Mean of (distance^2 - A)^2 over visible pairs, straight from the histogram."""
    omega = sum(dist_sq_counts.values())
    a = Fraction(sum(s * c for s, c in dist_sq_counts.items()), omega)
    return sum((c * (s - a) ** 2 for s, c in dist_sq_counts.items()), Fraction(0)) / omega


def lattice_points(params: LatticeParams) -> np.ndarray:
    axes = [np.arange(params.N + 1, dtype=np.int64)] * params.d
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, params.d)


def gcd_rows(diff: np.ndarray) -> np.ndarray:
    g = np.abs(diff[..., 0])
    for k in range(1, diff.shape[-1]):
        g = np.gcd(g, diff[..., k])
    return g


def count_ordered_cliques(adj: np.ndarray, K: int) -> int:
    """Ordered K-tuples whose entries are pairwise adjacent (adj has zero diagonal)."""
    def walk(cands: np.ndarray, depth: int) -> int:
        if depth == 1:
            return int(cands.sum())
        return sum(walk(cands & adj[i], depth - 1) for i in np.flatnonzero(cands))

    return walk(np.ones(adj.shape[0], dtype=bool), K)


def brute_force_reference(params: LatticeParams, K: int = 2,
                          budget: int = DEFAULT_ENUM_BUDGET) -> BruteForceResult:
    """Exhaustive count of self-visible ordered K-tuples (moment sums for K = 2)."""
    if K < 2:
        raise UsageError("K must be >= 2")
    size = params.n_points ** K
    if size > budget:
        raise BudgetError(f"enumerating {params.n_points}^{K} = {size} tuples exceeds "
                          f"the enumeration budget {budget}")
    pts = lattice_points(params)
    if params.d * params.N**2 < 2**31:
        pts = pts.astype(np.int32)
    n = len(pts)
    if K > 2:
        adj = np.empty((n, n), dtype=bool)
        for i in range(n):
            adj[i] = gcd_rows(pts - pts[i]) == 1
        return BruteForceResult(params, K, count_ordered_cliques(adj, K))

    hist = np.zeros(params.d * params.N**2 + 1, dtype=np.int64)
    step = max(1, 2**22 // n)
    for start in range(0, n, step):
        diff = pts[start:start + step, None, :] - pts[None, :, :]
        vis = gcd_rows(diff) == 1
        dsq = (diff * diff).sum(axis=-1)[vis]
        hist += np.bincount(dsq, minlength=hist.size)
    counts = {int(s): int(c) for s, c in enumerate(hist) if c}
    return BruteForceResult(
        params, 2,
        count=sum(counts.values()),
        sum_sq=sum(s * c for s, c in counts.items()),
        sum_quartic=sum(s * s * c for s, c in counts.items()),
        dist_sq_counts=counts,
    )


def brute_force_moments(params: LatticeParams, budget: int = DEFAULT_ENUM_BUDGET) -> ExactCountReport:
    ref = brute_force_reference(params, 2, budget)
    return _report(params, ref.count, ref.sum_sq, ref.sum_quartic)
