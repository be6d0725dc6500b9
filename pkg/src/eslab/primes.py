"""Prime tables and base-p digit machinery.

Digit domination is the workhorse: by Kummer's theorem p does not divide
C(n, k) exactly when every base-p digit of k is at most the matching
digit of n.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from math import isqrt

import numpy as np

from eslab.errors import ResourceLimitError

SEGMENT_SIZE = 1 << 20
# Rough bytes per stored prime (int64 array plus a list-of-int view).
_BYTES_PER_PRIME = 44
MEMORY_BUDGET = 1 << 30


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending.

    ``primes`` is a plain tuple of Python ints so callers can feed
    entries straight into big-integer arithmetic without overflow.
    """

    limit: int
    primes: tuple[int, ...] = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, n: object) -> bool:
        if not isinstance(n, int) or n < 2 or n > self.limit:
            return False
        i = bisect_right(self.primes, n)
        return i > 0 and self.primes[i - 1] == n

    def up_to(self, x: int) -> tuple[int, ...]:
        """Primes <= x. x must not exceed ``limit``."""
        self.require(x)
        return self.primes[: bisect_right(self.primes, x)]

    def between(self, lo: int, hi: int) -> tuple[int, ...]:
        """Primes p with lo < p <= hi."""
        self.require(hi)
        return self.primes[bisect_right(self.primes, lo) : bisect_right(self.primes, hi)]

    def pi(self, x: int) -> int:
        self.require(x)
        return bisect_right(self.primes, x)

    def require(self, x: int) -> None:
        if x > self.limit:
            raise ValueError(f"prime table limit {self.limit} is below {x}")


def _small_sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def primes_up_to(
    limit: int,
    segment_size: int = SEGMENT_SIZE,
    memory_budget: int = MEMORY_BUDGET,
) -> PrimeTable:
    """Segmented sieve of Eratosthenes over [2, limit]."""
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    if segment_size < 2:
        raise ValueError("segment_size must be at least 2")
    # pi(x) < 1.26 x / log x for x > 1
    est = int(1.26 * limit / np.log(limit)) + 1 if limit > 2 else 2
    need = est * _BYTES_PER_PRIME + segment_size
    if need > memory_budget:
        raise ResourceLimitError(
            f"primes up to {limit} need ~{need} bytes, budget is {memory_budget}; sieve in segments"
        )
    if limit < 2:
        return PrimeTable(limit, ())

    base = _small_sieve(isqrt(limit))
    chunks = []
    lo = 2
    while lo <= limit:
        hi = min(lo + segment_size, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg) + lo)
        lo = hi
    found = np.concatenate(chunks)
    return PrimeTable(limit, tuple(found.tolist()))


@dataclass(frozen=True)
class DigitVector:
    value: int
    base: int
    digits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, i: int) -> int:
        return self.digits[i]

    def assemble(self) -> int:
        n = 0
        for d in reversed(self.digits):
            n = n * self.base + d
        return n


def digits(k: int, p: int) -> DigitVector:
    """Base-p digits of k, least significant first. ``digits(0, p)`` is ``[0]``."""
    if p < 2:
        raise ValueError(f"invalid base {p}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = []
    n = k
    while True:
        n, r = divmod(n, p)
        out.append(r)
        if not n:
            break
    return DigitVector(k, p, tuple(out))


def dominates(n: int, k: int, p: int) -> bool:
    """True iff each base-p digit of k is <= the matching digit of n."""
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    while k:
        n, dn = divmod(n, p)
        k, dk = divmod(k, p)
        if dk > dn:
            return False
    return True


def binomial_prime_free(n: int, k: int, limit: int, primes: PrimeTable) -> bool:
    """True iff C(n, k) has no prime factor <= limit."""
    if primes.limit < limit:
        raise ValueError(f"prime table limit {primes.limit} < {limit}")
    return all(dominates(n, k, p) for p in primes.up_to(limit))
