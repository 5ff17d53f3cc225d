"""Certified Euler products over primes: zeta(d), Lambda_{d,K}, Feller-Tornier.

Every value comes with the prime cutoff M that was used and an explicit bound
on the error caused by the primes (or integers) left out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from hypervis.errors import BudgetError, UsageError

DEFAULT_TOL = 1e-6
DEFAULT_SIEVE_BUDGET = 10**8
_SEGMENT = 1 << 22
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class EulerProductValue:
    value: float
    truncation_M: int
    tail_bound: float
    d: int
    K: int | None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "truncation_M": self.truncation_M,
            "tail_bound": self.tail_bound,
            "d": self.d,
            "K": self.K,
        }


@dataclass(frozen=True)
class Primorial:
    M: int
    value: int


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers all 64-bit inputs)."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise UsageError(f"{p} is not prime")


def _small_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def iter_prime_chunks(M: int, segment: int = _SEGMENT) -> Iterator[np.ndarray]:
    """Yield the primes <= M in increasing order, one segment at a time."""
    if M < 2:
        return
    base = _small_sieve(math.isqrt(M))
    if M <= segment:
        yield _small_sieve(M)
        return
    yield base
    low = int(base[-1]) + 1 if base.size else 2
    while low <= M:
        high = min(low + segment, M + 1)
        flags = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, -(-low // p) * p)
            flags[start - low::p] = False
        yield np.flatnonzero(flags).astype(np.int64) + low
        low = high


def primes_up_to(M: int) -> list[int]:
    if M < 0:
        raise UsageError("M must be >= 0")
    return [int(p) for chunk in iter_prime_chunks(M) for p in chunk]


def primorial(M: int) -> Primorial:
    return Primorial(M, math.prod(primes_up_to(M)))


def largest_primorial_at_most(x: int) -> Primorial:
    """Largest primorial B <= x, with its prime cutoff M (M = 1, B = 1 if x < 2)."""
    value, M = 1, 1
    for p in primes_up_to(max(1000, x.bit_length() * 4)):
        if value * p > x:
            break
        value *= p
        M = p
    return Primorial(M, value)


def zeta(d: int, tol: float = 1e-12, budget: int = DEFAULT_SIEVE_BUDGET) -> float:
    return zeta_certified(d, tol, budget).value


def zeta_certified(d: int, tol: float = 1e-12,
                   budget: int = DEFAULT_SIEVE_BUDGET) -> EulerProductValue:
    """Riemann zeta at an integer d >= 2 by the direct series.

    The tail sum over m > M lies between the integrals of x^-d over
    [M+1, inf) and [M, inf); the midpoint of that bracket is added and half
    its width (at most M^-d / 2) is the reported error bound.
    """
    if int(d) != d or d < 2:
        raise UsageError(f"zeta(d) diverges for d = {d}; need integer d >= 2")
    if tol <= 0:
        raise UsageError("tol must be positive")
    M = max(2, math.ceil((1.0 / tol) ** (1.0 / d)))
    while 0.5 * M ** (-d) > tol / 2:
        M += 1
    if M > budget:
        raise BudgetError(f"zeta({d}) to tol {tol:g} needs {M} terms (budget {budget})")
    parts = []
    for start in range(1, M + 1, _SEGMENT):
        m = np.arange(start, min(start + _SEGMENT, M + 1), dtype=np.float64)
        parts.append(math.fsum((m ** (-d))[::-1].tolist()))
    tail = 0.5 * (M ** (1 - d) + (M + 1) ** (1 - d)) / (d - 1)
    bound = 0.5 * M ** (-d) + 4e-16 * d
    return EulerProductValue(math.fsum(parts) + tail, M, bound, d, None)


def h_p(p: int, d: int, K: int) -> int:
    """K-tuples of pairwise distinct residue vectors mod p: falling factorial of p^d."""
    _require_prime(p)
    if d < 1 or K < 1:
        raise UsageError("need d >= 1 and K >= 1")
    q = p**d
    return math.prod(q - k for k in range(K)) if K <= q else 0


def h_modulus(B: int, d: int, K: int) -> int:
    """H(B) for squarefree B, glued from its prime factors."""
    out = 1
    for p in primes_up_to(B):
        if B % p == 0:
            if B % (p * p) == 0:
                raise UsageError(f"{B} is not squarefree")
            out *= h_p(p, d, K)
    return out


def lambda_factor(p: int, d: int, K: int) -> Fraction:
    """Exact local factor prod_{k<K} (1 - k/p^d) at the prime p."""
    q = p**d
    return math.prod((Fraction(q - k, q) for k in range(1, K)), start=Fraction(1))


def _log_factor_sum(primes: np.ndarray, d: int, K: int) -> float:
    pd = primes.astype(np.float64) ** d
    return math.fsum(math.fsum(np.log1p(-k / pd).tolist()) for k in range(1, K))


def truncated_lambda(d: int, K: int, M: int) -> float:
    """prod over primes p <= M of prod_{k=1}^{K-1} (1 - k/p^d)."""
    if d < 2 or K < 2:
        raise UsageError("need d >= 2 and K >= 2")
    if M >= 2 and K > 2**d:
        return 0.0
    logs = [_log_factor_sum(chunk, d, K) for chunk in iter_prime_chunks(M)]
    return math.exp(math.fsum(logs))


def truncated_lambda_exact(d: int, K: int, M: int) -> Fraction:
    return math.prod((lambda_factor(p, d, K) for p in primes_up_to(M)),
                     start=Fraction(1))


def tail_exponent(d: int, K: int, M: int) -> float:
    """Bound on -log of the omitted product over p > M; needs M^d >= 2K."""
    return K * (K - 1) * M ** (1.0 - d) / (d - 1)


def lambda_dk(d: int, K: int, tol: float = DEFAULT_TOL,
              budget: int = DEFAULT_SIEVE_BUDGET) -> EulerProductValue:
    """Lambda_{d,K} with an absolute error bound <= tol.

    For p^d >= 2K each omitted term satisfies -log(1 - k/p^d) <= 2k/p^d, so
    the omitted primes multiply the truncated value by exp(-t) with
    0 <= t <= K(K-1) M^(1-d) / (d-1).
    """
    if d < 2 or K < 2:
        raise UsageError("need d >= 2 and K >= 2")
    if tol <= 0:
        raise UsageError("tol must be positive")
    if K > 2**d:
        return EulerProductValue(0.0, 2, 0.0, d, K)
    floor_M = max(2, math.ceil((2 * K) ** (1.0 / d)))
    upper = truncated_lambda(d, K, max(floor_M, 100))
    target = tol / upper
    if target >= 1.0:
        M = floor_M
    else:
        t = -math.log1p(-target)
        M = max(floor_M, math.ceil((K * (K - 1) / ((d - 1) * t)) ** (1.0 / (d - 1))))
        while upper * -math.expm1(-tail_exponent(d, K, M)) > tol:
            M += 1
    if M > budget:
        best = upper * -math.expm1(-tail_exponent(d, K, budget))
        raise BudgetError(
            f"Lambda_{{{d},{K}}} to tol {tol:g} needs primes up to {M} "
            f"(sieve budget {budget}); best achievable tol is {best:.3g}")
    value = truncated_lambda(d, K, M)
    bound = value * -math.expm1(-tail_exponent(d, K, M)) + 1e-14 * value
    return EulerProductValue(value, M, bound, d, K)


def _feller_tornier_parts(M: int) -> float:
    logs = [math.fsum(np.log1p(-1.0 / (chunk.astype(np.float64) ** 2 - 1.0)).tolist())
            for chunk in iter_prime_chunks(M)]
    return math.exp(math.fsum(logs))


def feller_tornier_truncated(M: int, zeta_tol: float = 1e-13) -> float:
    """(1/2)(1 + prod_{p<=M}(1 - 1/(p^2-1)) / zeta(2))."""
    return 0.5 * (1.0 + _feller_tornier_parts(M) / zeta(2, zeta_tol))


def feller_tornier_certified(tol: float = DEFAULT_TOL,
                             budget: int = DEFAULT_SIEVE_BUDGET) -> EulerProductValue:
    """Feller-Tornier constant; the omitted primes contribute at most 2/M to -log."""
    if tol <= 0:
        raise UsageError("tol must be positive")
    z = zeta_certified(2, min(tol, 1e-10))
    # C = (P/z + 1)/2 with P <= 1 and z > 1.6: half the tolerance for each error source
    t = -math.log1p(-min(tol * z.value / 2, 0.5))
    M = max(2, math.ceil(2.0 / t))
    if M > budget:
        raise BudgetError(f"Feller-Tornier to tol {tol:g} needs primes up to {M} "
                          f"(sieve budget {budget})")
    P = _feller_tornier_parts(M)
    value = 0.5 * (1.0 + P / z.value)
    zeta_err = P * z.tail_bound / (z.value * (z.value - z.tail_bound))
    bound = 0.5 * (P / z.value * -math.expm1(-2.0 / M) + zeta_err) + 1e-14
    return EulerProductValue(value, M, bound, 2, None)


def feller_tornier(tol: float = DEFAULT_TOL, budget: int = DEFAULT_SIEVE_BUDGET) -> float:
    return feller_tornier_certified(tol, budget).value
