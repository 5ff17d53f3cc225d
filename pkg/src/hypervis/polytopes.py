"""The circulant family C, the modular-inverse family G and the diagonal family B.

C and G are circulant: row h is row 0 rotated left by h.  Applying one
coordinate rotation to both points of a pair preserves gcds, distances and
inner products, so every pair statistic within C, within G, or between C and
G of equal size depends only on the row offset.  The reports exploit this and
fall back to plain pairwise enumeration for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from hypervis.errors import UsageError
from hypervis.euler_products import is_prime
from hypervis.exact_count import gcd_rows
from hypervis.lattice_core import DEFAULT_BINS, SpectrumAccumulator, SpectrumSummary

MAX_FAILING_PAIRS = 100
KINDS = ("C", "G", "B")


@dataclass
class PolytopeFamily:
    kind: str
    param: int
    points: np.ndarray
    normalizer: float

    @property
    def circulant(self) -> bool:
        return self.kind in ("C", "G")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class FamilyReport:
    kinds: str
    all_pairs_visible: bool | None = None
    failing_pairs: list[tuple[int, int]] = field(default_factory=list)
    failing_count: int = 0
    coincident_pairs: int = 0
    origin_visible: list[bool] = field(default_factory=list)
    distance_min: float | None = None
    distance_max: float | None = None
    distance_mean: float | None = None
    origin_distance_min: float | None = None
    origin_distance_max: float | None = None
    closed_form_ok: bool | None = None
    spectrum: SpectrumSummary | None = None

    def to_dict(self) -> dict:
        out = {"kinds": self.kinds}
        if self.all_pairs_visible is not None:
            out.update(
                all_pairs_visible=self.all_pairs_visible,
                failing_pairs=[list(p) for p in self.failing_pairs],
                failing_count=self.failing_count,
                coincident_pairs=self.coincident_pairs,
                origin_visible=self.origin_visible,
                all_origin_visible=all(self.origin_visible),
            )
        if self.distance_min is not None:
            out.update(
                distance_min=self.distance_min,
                distance_max=self.distance_max,
                distance_mean=self.distance_mean,
                origin_distance_min=self.origin_distance_min,
                origin_distance_max=self.origin_distance_max,
                closed_form_ok=self.closed_form_ok,
            )
        if self.spectrum is not None:
            out["spectrum"] = self.spectrum.to_dict()
        return out


def inverse_mod(a: int, p: int) -> int:
    """Inverse of a modulo the prime p, with 0 standing in for the inverse of 0."""
    if not is_prime(p):
        raise UsageError(f"{p} is not prime")
    if not 0 <= a < p:
        raise UsageError(f"need 0 <= a < p, got a={a}, p={p}")
    return pow(a, -1, p) if a else 0


def inverse_table(p: int) -> np.ndarray:
    """inv[x] for x in [0, p), via x^(p-2) mod p with vectorized squaring."""
    if not is_prime(p):
        raise UsageError(f"{p} is not prime")
    if p >= 3_000_000_000:
        raise UsageError("inverse_table needs p < 3e9 to stay inside int64")
    base = np.arange(p, dtype=np.int64)
    out = np.ones(p, dtype=np.int64)
    e = p - 2
    while e > 0:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    out[0] = 0
    return out


def _circulant(row0: np.ndarray) -> np.ndarray:
    n = row0.size
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return row0[idx]


def build_family(kind: str, param: int) -> PolytopeFamily:
    kind = kind.upper()
    if kind not in KINDS:
        raise UsageError(f"unknown family {kind!r}; expected one of C, G, B")
    if kind == "G":
        if not is_prime(param):
            raise UsageError(f"family G needs a prime, got {param}")
        pts = _circulant(inverse_table(param))
        return PolytopeFamily("G", param, pts, param**1.5)
    d = param
    if int(d) != d or d < 2:
        raise UsageError(f"family {kind} needs d >= 2, got {d}")
    n = d + 1
    if kind == "C":
        pts = _circulant(np.arange(n, dtype=np.int64))
    else:
        h = np.arange(n, dtype=np.int64)
        pts = np.repeat(h[:, None], n, axis=1)
        # -1 wraps to d and d + 1 wraps to 0, both as index and as value
        pts[h, (h - 1) % n] = (h - 1) % n
        pts[h, (h + 1) % n] = (h + 1) % n
    return PolytopeFamily(kind, d, pts, d**1.5)


def _same_layout(F: PolytopeFamily, G: PolytopeFamily) -> bool:
    return F.circulant and G.circulant and F.size == G.size == F.dim == G.dim


def _check_dims(F: PolytopeFamily, G: PolytopeFamily | None) -> None:
    if G is not None and F.dim != G.dim:
        raise UsageError(f"dimension mismatch: {F.kind} has {F.dim} coordinates, "
                         f"{G.kind} has {G.dim}")


@dataclass
class _Block:
    """A batch of ordered pairs: index arrays plus exact integer statistics."""

    i: np.ndarray
    j: np.ndarray
    gcd: np.ndarray | None
    dsq: np.ndarray
    inner: np.ndarray
    norm_a: np.ndarray
    norm_b: np.ndarray
    weight: np.ndarray
    # set for offset blocks: partners sit at joff + x for offset x
    joff: int | None = None


def _offset_block(A0: np.ndarray, B0: np.ndarray, ioff: int, joff: int,
                  same: bool, need_gcd: bool, chunk: int = 256) -> Iterator[_Block]:
    n = A0.size
    na, nb = int(A0 @ A0), int(B0 @ B0)
    cols = np.arange(n)
    for start in range(1 if same else 0, n, chunk):
        xs = np.arange(start, min(start + chunk, n), dtype=np.int64)
        partners = B0[(xs[:, None] + cols[None, :]) % n]
        diff = partners - A0
        m = xs.size
        yield _Block(
            i=np.full(m, ioff, dtype=np.int64), j=joff + xs,
            gcd=np.gcd.reduce(np.abs(diff), axis=1) if need_gcd else None,
            dsq=(diff * diff).sum(axis=1), inner=partners @ A0,
            norm_a=np.full(m, na, dtype=np.int64), norm_b=np.full(m, nb, dtype=np.int64),
            weight=np.full(m, n, dtype=np.int64), joff=joff,
        )


def _dense_blocks(A: np.ndarray, B: np.ndarray, ioff: int, joff: int, same: bool,
                  need_gcd: bool, rows: int = 64) -> Iterator[_Block]:
    nb = (B * B).sum(axis=1)
    for start in range(0, A.shape[0], rows):
        a = A[start:start + rows]
        diff = B[None, :, :] - a[:, None, :]
        ii, jj = np.meshgrid(np.arange(start, start + a.shape[0]), np.arange(B.shape[0]),
                             indexing="ij")
        keep = ii != jj if same else np.ones(ii.shape, dtype=bool)
        na = (a * a).sum(axis=1)
        yield _Block(
            i=ioff + ii[keep], j=joff + jj[keep],
            gcd=gcd_rows(diff)[keep] if need_gcd else None,
            dsq=(diff * diff).sum(axis=-1)[keep], inner=(a @ B.T)[keep],
            norm_a=np.broadcast_to(na[:, None], ii.shape)[keep],
            norm_b=np.broadcast_to(nb[None, :], ii.shape)[keep],
            weight=np.ones(int(keep.sum()), dtype=np.int64),
        )


def _pair_blocks(F: PolytopeFamily, G: PolytopeFamily | None, pairs: str,
                 exhaustive: bool, need_gcd: bool = False) -> Iterator[_Block]:
    """Ordered pairs requested by `pairs` ('within', 'cross' or 'union')."""
    groups = []
    if G is None or pairs in ("within", "union"):
        groups.append((F, F, 0, 0, True))
    if G is not None:
        off = F.size
        if pairs == "union":
            groups.append((G, G, off, off, True))
            groups.append((G, F, off, 0, False))
        groups.append((F, G, 0, off, False))
    for A, B, ioff, joff, same in groups:
        fast = not exhaustive and (_same_layout(A, B) if A is not B else A.circulant)
        if fast:
            yield from _offset_block(A.points[0], B.points[0], ioff, joff, same, need_gcd)
        else:
            yield from _dense_blocks(A.points, B.points, ioff, joff, same, need_gcd)


def _pair_label(F: PolytopeFamily, G: PolytopeFamily | None, pairs: str) -> str:
    if G is None:
        return F.kind
    return F.kind + ("u" if pairs == "union" else "x") + G.kind


def _family_points(F: PolytopeFamily, G: PolytopeFamily | None, pairs: str) -> np.ndarray:
    if G is None or pairs == "within":
        return F.points
    return np.vstack([F.points, G.points])


def visibility_report(F: PolytopeFamily, G: PolytopeFamily | None = None,
                      pairs: str = "union", exhaustive: bool = False) -> FamilyReport:
    """Pairwise visibility over F, or over C u G ('union') / F x G ('cross').

    Pairs of coincident points (possible across two families for tiny p) are
    counted in coincident_pairs and excluded from the visibility verdict.
    """
    _check_dims(F, G)
    rep = FamilyReport(_pair_label(F, G, pairs))
    failing: list[tuple[int, int]] = []
    total_fail = 0
    for blk in _pair_blocks(F, G, pairs, exhaustive, need_gcd=True):
        coincide = blk.gcd == 0
        rep.coincident_pairs += int(blk.weight[coincide].sum())
        bad = (blk.gcd != 1) & ~coincide
        total_fail += int(blk.weight[bad].sum())
        for k in np.flatnonzero(bad):
            room = MAX_FAILING_PAIRS - len(failing)
            if room <= 0:
                break
            if blk.joff is None:
                failing.append((int(blk.i[k]), int(blk.j[k])))
            else:
                n, i0, x = int(blk.weight[k]), int(blk.i[k]), int(blk.j[k]) - blk.joff
                failing.extend((i0 + h, blk.joff + (h + x) % n) for h in range(min(n, room)))
    rep.failing_pairs = failing[:MAX_FAILING_PAIRS]
    rep.failing_count = total_fail
    rep.all_pairs_visible = total_fail == 0
    pts = _family_points(F, G, pairs)
    rep.origin_visible = [bool(g == 1) for g in gcd_rows(pts)]
    return rep


def distance_report(F: PolytopeFamily, G: PolytopeFamily | None = None,
                    pairs: str = "cross", exhaustive: bool = False) -> FamilyReport:
    """Normalized pairwise distances (F's normalizer) over the requested pairs."""
    _check_dims(F, G)
    rep = FamilyReport(_pair_label(F, G, pairs))
    lo, hi = math.inf, -math.inf
    parts, count = [], 0
    for blk in _pair_blocks(F, G, pairs, exhaustive):
        if blk.dsq.size == 0:
            continue
        nd = np.sqrt(blk.dsq.astype(np.float64)) / F.normalizer
        lo = min(lo, float(nd.min()))
        hi = max(hi, float(nd.max()))
        parts.append(math.fsum((nd * blk.weight).tolist()))
        count += int(blk.weight.sum())
    if count:
        rep.distance_min, rep.distance_max = lo, hi
        rep.distance_mean = min(max(math.fsum(parts) / count, lo), hi)
    pts = _family_points(F, G, pairs)
    od = np.sqrt((pts * pts).sum(axis=1).astype(np.float64)) / F.normalizer
    rep.origin_distance_min, rep.origin_distance_max = float(od.min()), float(od.max())
    if F.kind == "C" and (G is None or pairs == "within"):
        rep.closed_form_ok = circulant_closed_form_ok(F.param)
    return rep


def circulant_closed_form_ok(d: int) -> bool:
    """distance^2(c_0, c_x) == (d+1) x (d+1-x) for every 0 <= x <= d, exactly."""
    row0 = np.arange(d + 1, dtype=np.int64)
    for x in range(d + 1):
        diff = np.roll(row0, -x) - row0
        if int(diff @ diff) != (d + 1) * x * (d + 1 - x):
            return False
    return True


def spectrum_report(F: PolytopeFamily, G: PolytopeFamily | None = None,
                    pairs: str = "cross", exhaustive: bool = False,
                    bins: int = DEFAULT_BINS) -> SpectrumSummary:
    """Sines between rays through distinct points over the requested pairs."""
    _check_dims(F, G)
    acc = SpectrumAccumulator(bins=bins)
    for blk in _pair_blocks(F, G, pairs, exhaustive):
        distinct = blk.dsq > 0
        cos = blk.inner[distinct] / np.sqrt(
            blk.norm_a[distinct].astype(np.float64) * blk.norm_b[distinct])
        np.clip(cos, -1.0, 1.0, out=cos)
        acc.add(np.sqrt(1.0 - cos * cos), blk.weight[distinct])
    return acc.summary()


def family_report(F: PolytopeFamily, G: PolytopeFamily | None = None,
                  pairs: str = "cross", bins: int = DEFAULT_BINS) -> FamilyReport:
    vis = visibility_report(F, G, "union" if G is not None else "within")
    rep = distance_report(F, G, pairs)
    rep.all_pairs_visible = vis.all_pairs_visible
    rep.failing_pairs, rep.failing_count = vis.failing_pairs, vis.failing_count
    rep.coincident_pairs, rep.origin_visible = vis.coincident_pairs, vis.origin_visible
    rep.spectrum = spectrum_report(F, G, pairs, bins=bins)
    return rep


def cg_distance_sums(p: int) -> tuple[int, int, int]:
    """Exact (T1, T2, T3): summed distance^2 over C x C, G x G and C x G."""
    c0 = build_family("C", p - 1).points[0]
    g0 = build_family("G", p).points[0]

    def total(a0: np.ndarray, b0: np.ndarray) -> int:
        return sum(int(w) * int(s) for blk in _offset_block(a0, b0, 0, 0, False, False)
                   for s, w in zip(blk.dsq, blk.weight))

    return total(c0, c0), total(g0, g0), total(c0, g0)


def avg_norm_distance_CG(p: int) -> float:
    """sqrt(T / 4p^2) / p^(3/2), T summing distance^2 over all ordered pairs of C u G."""
    if not is_prime(p) or p < 3:
        raise UsageError(f"need a prime p >= 3, got {p}")
    t1, t2, t3 = cg_distance_sums(p)
    mean_sq = Fraction(t1 + t2 + 2 * t3, 4 * p * p)
    return math.sqrt(mean_sq) / p**1.5


def inverse_gap_count(p: int) -> int:
    """Number of distinct |n - n^-1| over 1 <= n <= p-1."""
    inv = inverse_table(p)
    n = np.arange(1, p, dtype=np.int64)
    return int(np.unique(np.abs(n - inv[1:])).size)


def inverse_increment_sqsum(p: int, h: int) -> int:
    """sum over x not in {0, p-h} of |(x+h)^-1 - x^-1|^2, inverses in [0, p-1]."""
    if not 1 <= h <= p - 1:
        raise UsageError(f"need 1 <= h <= p - 1, got h={h}")
    inv = inverse_table(p)
    x = np.arange(1, p, dtype=np.int64)
    x = x[x != p - h]
    # each term is below p^2; keep every int64 partial sum below 2^62
    step = max(1, min(1 << 16, 2**62 // (p * p)))
    total = 0
    for start in range(0, x.size, step):
        xs = x[start:start + step]
        diff = inv[(xs + h) % p] - inv[xs]
        total += int((diff * diff).sum())
    return total


def inverse_pair_count_in_boxes(p: int, I: range, J: range) -> int:
    """#{(a, b) in I x J : ab = 1 mod p} for progressions I, J inside [1, p-1]."""
    if not is_prime(p):
        raise UsageError(f"{p} is not prime")
    for R in (I, J):
        if len(R) and (min(R) < 1 or max(R) > p - 1):
            raise UsageError(f"progression {R} leaves [1, {p - 1}]")
    return sum(1 for a in I if pow(a, -1, p) in J)
