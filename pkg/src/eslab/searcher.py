"""Search for g(k), the least n > k + 1 with C(n, k) free of primes <= k.

Two methods share one result contract: a plain scan that tests every n,
and a wheel search that only visits n whose residues modulo small prime
powers already have digits dominating k.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import islice, product
from typing import Optional

from eslab.errors import NotFoundError
from eslab.estimator import EXACT_CUTOFF, ghat, ghat_log
from eslab.primes import PrimeTable, digits, dominates

METHODS = ("naive", "wheel")
DEFAULT_WHEEL_BUDGET = 1 << 62
SEGMENT_SIZE = 1 << 20
# Largest residue list kept in memory; further folded moduli become lookup masks.
LIST_CAP = 1 << 18
MASK_CAP = 1 << 16


def default_scan_bound(k: int, primes: PrimeTable) -> int:
    """10 * ceil(ĝ(k))."""
    if k <= EXACT_CUTOFF:
        est = ghat(k, primes)
        return 10 * -(-est.numerator // est.denominator)
    return 10 * math.ceil(math.exp(ghat_log(k, primes)))


@dataclass(frozen=True)
class SearchConfig:
    k: int
    scan_bound: Optional[int] = None
    method: str = "wheel"
    wheel_budget: int = DEFAULT_WHEEL_BUDGET
    workers: int = 1
    segment_size: int = SEGMENT_SIZE

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.scan_bound is not None and self.scan_bound <= self.k + 1:
            raise ValueError("scan_bound must exceed k + 1")
        if self.wheel_budget < 2:
            raise ValueError("wheel_budget must be >= 2")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.segment_size < 1:
            raise ValueError("segment_size must be positive")


@dataclass(frozen=True)
class SearchResult:
    k: int
    g: int
    candidates_tested: int
    # (p, base-p digits of k, base-p digits of g) for every prime p <= k
    certificate: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...]
    elapsed: float
    method: str = "naive"
    scan_bound: int = 0
    wheel_modulus: int = 1
    wheel_residues: int = 1

    def verify(self) -> bool:
        """Re-check every certificate entry by digit domination."""
        return self.g > self.k + 1 and all(
            dominates(self.g, self.k, p)
            and digits(self.k, p).digits == dk
            and digits(self.g, p).digits == dg
            and all(a <= b for a, b in zip(dk, dg))
            for p, dk, dg in self.certificate
        )


def allowed_residues(k: int, p: int) -> list[int]:
    """Residues mod p^(floor(log_p k) + 1) whose low digits dominate those of k."""
    ks = digits(k, p).digits
    ranges = [range(a, p) for a in ks]
    weights = [p**i for i in range(len(ks))]
    return sorted(sum(d * w for d, w in zip(choice, weights)) for choice in product(*ranges))


def _certificate(k: int, g: int, primes: PrimeTable):
    return tuple((p, digits(k, p).digits, digits(g, p).digits) for p in primes.up_to(k))


class _NaiveScan:
    def __init__(self, k: int, primes: tuple[int, ...]):
        self.k = k
        self.primes = primes

    def scan(self, lo: int, hi: int):
        k, ps = self.k, self.primes
        tested = 0
        for n in range(max(lo, k + 2), hi):
            tested += 1
            if all(dominates(n, k, p) for p in ps):
                return n, tested
        return None, tested


class _WheelScan:
    """Candidates come from a sorted residue list mod ``list_modulus``; each is
    then filtered through the remaining folded masks and finally the
    unfolded primes (most likely rejecters first)."""

    def __init__(self, k: int, primes: tuple[int, ...], budget: int):
        self.k = k
        folded = []
        W = 1
        for p in primes:
            m = p ** len(digits(k, p))
            if W * m > budget:
                break
            folded.append((p, m))
            W *= m
        self.modulus = W
        self.residue_count = 1

        residues, L = [0], 1
        masks = []
        for p, m in folded:
            allowed = allowed_residues(k, p)
            self.residue_count *= len(allowed)
            if len(residues) * len(allowed) <= LIST_CAP and not masks:
                residues = _crt_merge(residues, L, allowed, m)
                L *= m
            else:
                masks.append((m, _mask(allowed, m)))
        self.residues = residues
        self.list_modulus = L
        self.masks = masks

        done = {p for p, _ in folded}
        rest = [p for p in primes if p not in done]
        rest.sort(key=lambda p: (-(k % p) / p, -p))
        self.rest = [(p, p ** len(digits(k, p))) for p in rest]
        self.rest_masks = {
            m: _mask(allowed_residues(k, p), m) for p, m in self.rest if m <= MASK_CAP
        }

    def scan(self, lo: int, hi: int):
        k, L, res = self.k, self.list_modulus, self.residues
        masks, rest, rest_masks = self.masks, self.rest, self.rest_masks
        lo = max(lo, k + 2)
        tested = 0
        block = lo // L
        while block * L < hi:
            base = block * L
            i = bisect_left(res, lo - base) if base < lo else 0
            for r in islice(res, i, None):
                n = base + r
                if n >= hi:
                    return None, tested
                tested += 1
                if not all(mask[n % m] for m, mask in masks):
                    continue
                for p, m in rest:
                    mask = rest_masks.get(m)
                    if not (mask[n % m] if mask is not None else dominates(n, k, p)):
                        break
                else:
                    return n, tested
            block += 1
        return None, tested


def _mask(allowed: list[int], m: int) -> bytearray:
    mask = bytearray(m)
    for r in allowed:
        mask[r] = 1
    return mask


def _crt_merge(res_a: list[int], ma: int, res_b: list[int], mb: int) -> list[int]:
    inv = pow(ma, -1, mb)
    return sorted(a + ma * ((b - a) * inv % mb) for a in res_a for b in res_b)


_worker_scan = None


def _init_worker(scanner) -> None:
    global _worker_scan
    _worker_scan = scanner


def _scan_in_worker(bounds):
    return _worker_scan.scan(*bounds)


def _drive(scanner, lo: int, hi: int, segment: int, workers: int):
    """First admissible n in [lo, hi), and candidates tested up to it.

    Segments are reduced in ascending order so the answer and the count do
    not depend on the worker count.
    """
    spans = ((s, min(s + segment, hi)) for s in range(lo, hi, segment))
    tested = 0
    if workers == 1:
        for span in spans:
            found, t = scanner.scan(*span)
            tested += t
            if found is not None:
                return found, tested
        return None, tested
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(scanner,)) as ex:
        while batch := list(islice(spans, workers)):
            for found, t in ex.map(_scan_in_worker, batch):
                tested += t
                if found is not None:
                    return found, tested
    return None, tested


def _search(config: SearchConfig, primes: PrimeTable, scanner, method: str, start: float) -> SearchResult:
    k = config.k
    bound = config.scan_bound or default_scan_bound(k, primes)
    found, tested = _drive(scanner, k + 2, bound + 1, config.segment_size, config.workers)
    if found is None:
        raise NotFoundError(f"no admissible n <= {bound} for k={k}")
    return SearchResult(
        k=k,
        g=found,
        candidates_tested=tested,
        certificate=_certificate(k, found, primes),
        elapsed=time.perf_counter() - start,
        method=method,
        scan_bound=bound,
        wheel_modulus=getattr(scanner, "modulus", 1),
        wheel_residues=getattr(scanner, "residue_count", 1),
    )


def g_naive(config: SearchConfig, primes: PrimeTable) -> SearchResult:
    start = time.perf_counter()
    primes.require(config.k)
    return _search(config, primes, _NaiveScan(config.k, primes.up_to(config.k)), "naive", start)


def g_wheel(config: SearchConfig, primes: PrimeTable) -> SearchResult:
    start = time.perf_counter()
    primes.require(config.k)
    scanner = _WheelScan(config.k, primes.up_to(config.k), config.wheel_budget)
    return _search(config, primes, scanner, "wheel", start)


def search(config: SearchConfig, primes: PrimeTable) -> SearchResult:
    return (g_wheel if config.method == "wheel" else g_naive)(config, primes)
