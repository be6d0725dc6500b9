"""Exact and log-space evaluation of ĝ(k) = M_k / R_k.

M_k = prod_{p<=k} p^(e_p + 1) with e_p = floor(log_p k), and
R_k = prod_{p<=k} prod_{i=0}^{e_p} (p - a_ip) where a_ip is the i-th
base-p digit of k.  R_k counts residues mod M_k whose digits dominate k,
so ĝ(k) is the expected gap between admissible n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional

from eslab.errors import ExactCutoffError, NotPrimeError
from eslab.primes import PrimeTable, digits

EXACT_CUTOFF = 10**5


def product_tree(values) -> int:
    """Balanced product of integers; quasi-linear bit cost on big inputs."""
    xs = list(values)
    if not xs:
        return 1
    while len(xs) > 1:
        paired = [xs[i] * xs[i + 1] for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            paired.append(xs[-1])
        xs = paired
    return xs[0]


def _check_exact(k: int, primes: PrimeTable, cutoff: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > cutoff:
        raise ExactCutoffError(f"k={k} exceeds exact cutoff {cutoff}; use ghat_log/decompose")
    primes.require(k)


def compute_Mk(k: int, primes: PrimeTable, cutoff: int = EXACT_CUTOFF) -> int:
    _check_exact(k, primes, cutoff)
    return product_tree(p ** len(digits(k, p)) for p in primes.up_to(k))


def compute_Rk(k: int, primes: PrimeTable, cutoff: int = EXACT_CUTOFF) -> int:
    _check_exact(k, primes, cutoff)
    return product_tree(p - a for p in primes.up_to(k) for a in digits(k, p).digits)


def ghat(k: int, primes: PrimeTable, cutoff: int = EXACT_CUTOFF) -> Fraction:
    """ĝ(k) as a reduced fraction."""
    return Fraction(compute_Mk(k, primes, cutoff), compute_Rk(k, primes, cutoff))


def log_fraction(q: Fraction) -> float:
    """Natural log of a positive rational whose parts may exceed float range."""
    return math.log(q.numerator) - math.log(q.denominator)


def _log_terms(k: int, ps) -> list[float]:
    # ascending prime, then ascending digit position
    return [math.log(p) - math.log(p - a) for p in ps for a in digits(k, p).digits]


def ghat_log(k: int, primes: PrimeTable) -> float:
    """log ĝ(k) by correctly rounded summation of log p - log(p - a_ip)."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    primes.require(k)
    return math.fsum(_log_terms(k, primes.up_to(k)))


@dataclass(frozen=True)
class EstimateBreakdown:
    """ĝ(k) and its split at sqrt(k).

    For p > sqrt(k) the exponent floor(log_p k) is 1, so each large prime
    contributes exactly two factors: one from a_1p and one from a_0p.
    """

    k: int
    log_ghat: float
    log_F_small: float
    log_F1: float
    log_F0: float
    M: Optional[int] = None
    R: Optional[int] = None
    ghat: Optional[Fraction] = None


def decompose(k: int, primes: PrimeTable, cutoff: int = EXACT_CUTOFF) -> EstimateBreakdown:
    if k < 4:
        raise ValueError(f"decompose needs k >= 4, got {k}")
    primes.require(k)
    r = isqrt(k)
    small = _log_terms(k, primes.up_to(r))
    f1, f0 = [], []
    for p in primes.between(r, k):
        a1, a0 = divmod(k, p)
        f0.append(math.log(p) - math.log(p - a0))
        f1.append(math.log(p) - math.log(p - a1))
    M = R = g = None
    if k <= cutoff:
        M, R = compute_Mk(k, primes, cutoff), compute_Rk(k, primes, cutoff)
        g = Fraction(M, R)
    return EstimateBreakdown(
        k=k,
        log_ghat=math.fsum(small + [x for pair in zip(f0, f1) for x in pair]),
        log_F_small=math.fsum(small),
        log_F1=math.fsum(f1),
        log_F0=math.fsum(f0),
        M=M,
        R=R,
        ghat=g,
    )


def _is_prime(n: int, primes: PrimeTable) -> bool:
    if n <= primes.limit:
        return n in primes
    return n >= 2 and all(n % p for p in range(2, isqrt(n) + 1))


@dataclass(frozen=True)
class RatioCertificate:
    """Exact checks of the growth of ĝ across a prime k + 1."""

    k: int
    m_identity_ok: bool
    r_identity_ok: bool
    digit_increment_ok: bool
    ratio: Fraction
    mertens_lower_bound: Fraction
    bound_ok: bool

    @property
    def ok(self) -> bool:
        return self.m_identity_ok and self.r_identity_ok and self.digit_increment_ok and self.bound_ok


def ratio_certificate(k: int, primes: PrimeTable, cutoff: int = EXACT_CUTOFF) -> RatioCertificate:
    q = k + 1
    primes.require(q)
    if k < 2 or not _is_prime(q, primes):
        raise NotPrimeError(f"k+1={q} is not an odd prime")
    ps = primes.up_to(k)

    Mk, Mq = compute_Mk(k, primes, cutoff), compute_Mk(q, primes, cutoff)
    Rk, Rq = compute_Rk(k, primes, cutoff), compute_Rk(q, primes, cutoff)
    m_ok = Mq == q * q * Mk

    low = []
    digit_ok = True
    for p in ps:
        dk, dq = digits(k, p).digits, digits(q, p).digits
        bumped = (dk[0] + 1,) + dk[1:]
        digit_ok = digit_ok and dk[0] <= p - 2 and dq == bumped
        low.append(dk[0])

    if all(a <= p - 2 for p, a in zip(ps, low)):
        closed = Fraction(
            product_tree(p - a for p, a in zip(ps, low)),
            k * q * product_tree(p - a - 1 for p, a in zip(ps, low)),
        )
        r_ok = Fraction(Rk, Rq) == closed
    else:
        r_ok = False

    ratio = Fraction(Mq, Rq) / Fraction(Mk, Rk)
    bound = Fraction(q * product_tree(ps), k * product_tree(p - 1 for p in ps))
    return RatioCertificate(
        k=k,
        m_identity_ok=m_ok,
        r_identity_ok=r_ok,
        digit_increment_ok=digit_ok,
        ratio=ratio,
        mertens_lower_bound=bound,
        bound_ok=ratio >= bound,
    )
