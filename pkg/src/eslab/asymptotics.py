"""Asymptotic constant and prime-sum diagnostics for log ĝ(k).

log ĝ(k) ~ c * k / log k with c = sum_{a>=1} log(1 + 1/a) / (a + 1).
The dominant contribution comes from primes sqrt(k) < p <= k, grouped by
a = floor(k / p), the second base-p digit of k.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from math import isqrt

import mpmath
import numpy as np
from scipy import integrate

from eslab.errors import ToleranceUnreachableError
from eslab.estimator import decompose, ghat_log
from eslab.primes import PrimeTable, digits

EULER_GAMMA = float(mpmath.euler)
# Below this tolerance the plain telescoping tail bracket needs too many terms.
DIRECT_TOL_FLOOR = 1e-10
MAX_TERMS = 10**7
DPS = 40


@dataclass(frozen=True)
class ConstantResult:
    value: mpmath.mpf
    lower: mpmath.mpf
    upper: mpmath.mpf
    terms_used: int
    method: str

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, x) -> bool:
        return self.lower <= mpmath.mpf(x) <= self.upper


def _term(a):
    return mpmath.log1p(1 / mpmath.mpf(a)) / (a + 1)


def _partial_sum(A: int):
    return mpmath.fsum(_term(a) for a in range(1, A + 1))


def constant_c(tolerance: float, max_terms: int = MAX_TERMS) -> ConstantResult:
    """Sum log(1 + 1/a)/(a + 1) over a >= 1 with a rigorous enclosure.

    For tolerance >= 1e-10 the tail past A is enclosed by termwise bounds
    1/(a+1)^2 <= term <= 1/(a(a+1)), i.e. in [1/(A+2), 1/(A+1)].  Tighter
    tolerances use the trapezoid/midpoint enclosure of a convex tail,
    whose width shrinks like 1/(4 A^3).
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    with mpmath.workdps(DPS):
        if tolerance >= DIRECT_TOL_FLOOR:
            # 1/((A+1)(A+2)) <= tolerance
            A = max(1, math.ceil((-3 + math.sqrt(1 + 4 / tolerance)) / 2))
            if A > max_terms:
                raise ToleranceUnreachableError(f"{A} terms needed, cap is {max_terms}")
            s = _partial_sum(A)
            lower, upper = s + mpmath.mpf(1) / (A + 2), s + mpmath.mpf(1) / (A + 1)
            method = "direct"
        else:
            A = max(1, math.ceil((4 * tolerance) ** (-1 / 3)))
            while True:
                if A > max_terms:
                    raise ToleranceUnreachableError(f"{A} terms needed, cap is {max_terms}")
                lo_tail, hi_tail = _convex_tail(A)
                if hi_tail - lo_tail <= tolerance:
                    break
                A *= 2
            s = _partial_sum(A)
            lower, upper = s + lo_tail, s + hi_tail
            method = "euler-maclaurin"
        # guard for rounding at working precision
        slack = mpmath.mpf(10) ** (-DPS + 5)
        lower, upper = lower - slack, upper + slack
        if upper - lower > tolerance:
            raise ToleranceUnreachableError(f"working precision cannot reach {tolerance}")
        return ConstantResult((lower + upper) / 2, lower, upper, A, method)


def _convex_tail(A: int):
    """Enclosure of sum_{a>A} term(a) for the convex decreasing summand."""
    f = lambda x: mpmath.log1p(1 / x) / (x + 1)  # noqa: E731
    b = A + 1
    lower = mpmath.quad(f, [b, mpmath.inf]) + f(mpmath.mpf(b)) / 2
    upper = mpmath.quad(f, [b - mpmath.mpf(1) / 2, mpmath.inf])
    return lower, upper


def chebyshev_weighted_sum(x: int, primes: PrimeTable) -> float:
    """sum_{p <= x} floor(log_p x) * log p."""
    if x < 2:
        raise ValueError("x must be >= 2")
    return math.fsum((len(digits(x, p)) - 1) * math.log(p) for p in primes.up_to(x))


def mertens_product(x: int, primes: PrimeTable) -> float:
    """prod_{p <= x} p / (p - 1)."""
    if x < 2:
        raise ValueError("x must be >= 2")
    return math.exp(math.fsum(math.log(p) - math.log(p - 1) for p in primes.up_to(x)))


@dataclass(frozen=True)
class Lemma64Pieces:
    k: int
    cutoff: float
    piece_tail: float
    piece_logp: float
    piece_neg: float
    f0_direct: float

    @property
    def total(self) -> float:
        return math.fsum([self.piece_tail, self.piece_logp, self.piece_neg])


def lemma64_pieces(k: int, primes: PrimeTable) -> Lemma64Pieces:
    """Split sum_{sqrt k < p <= k} log(p / ((a+1)p - k)), a = floor(k/p).

    Terms with a >= (log k)^2 form the tail; the rest are separated into
    their log p and -log((a+1)p - k) parts.
    """
    if k < 100:
        raise ValueError("lemma64_pieces needs k >= 100")
    primes.require(k)
    cutoff = math.log(k) ** 2
    tail, logp, neg = [], [], []
    for p in primes.between(isqrt(k), k):
        a = k // p
        lp, ln = math.log(p), math.log((a + 1) * p - k)
        if a >= cutoff:
            tail.append(lp - ln)
        else:
            logp.append(lp)
            neg.append(ln)
    return Lemma64Pieces(
        k=k,
        cutoff=cutoff,
        piece_tail=math.fsum(tail),
        piece_logp=math.fsum(logp),
        piece_neg=-math.fsum(neg),
        f0_direct=decompose(k, primes, cutoff=0).log_F0,
    )


def _antiderivative(a: int, u: float) -> float:
    return (u - 1) * math.log((a + 1) * (u - 1) / u) - math.log(u)


def _integrand(a: int, u: float) -> float:
    return math.log((a + 1) * (u - 1) / u)


def antiderivative_check(a: int, u: float, h: float = 1e-6) -> float:
    """|central difference of the antiderivative at u - integrand(u)|."""
    if a < 1:
        raise ValueError("a must be >= 1")
    if not (1 + h < u <= 1 + 1 / a):
        raise ValueError(f"u must lie in (1 + h, 1 + 1/a], got {u}")
    slope = (_antiderivative(a, u + h) - _antiderivative(a, u - h)) / (2 * h)
    return abs(slope - _integrand(a, u))


def integral_identity_check(a: int) -> tuple[float, float]:
    """Quadrature of int_1^{1+1/a} log((a+1)(u-1)/u) du next to -log(1 + 1/a).

    With v = u - 1 the integrand is log(a+1) + log v - log(1+v); the log v
    singularity is integrated in closed form on [0, delta].
    """
    if a < 1:
        raise ValueError("a must be >= 1")
    top = 1 / a
    delta = top / 8
    la = math.log(a + 1)
    head_smooth, _ = integrate.quad(math.log1p, 0, delta, epsabs=1e-15, epsrel=1e-13)
    head = delta * la + (delta * math.log(delta) - delta) - head_smooth
    body, _ = integrate.quad(
        lambda v: la + math.log(v) - math.log1p(v), delta, top, epsabs=1e-15, epsrel=1e-13
    )
    return head + body, -math.log1p(1 / a)


@dataclass(frozen=True)
class ConvergenceRow:
    k: int
    log_ghat: float
    normalized: float


def _row(k: int, primes: PrimeTable) -> ConvergenceRow:
    if k < 3:
        raise ValueError("convergence rows need k >= 3")
    lg = ghat_log(k, primes)
    return ConvergenceRow(k, lg, lg * math.log(k) / k)


def convergence_table(k_values, primes: PrimeTable, workers: int = 1) -> list[ConvergenceRow]:
    """log ĝ(k) * log k / k for each k, in input order."""
    ks = list(k_values)
    if ks:
        primes.require(max(ks))
    if workers == 1 or len(ks) < 2:
        return [_row(k, primes) for k in ks]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(partial(_row, primes=primes), ks))


def log_spaced(kmin: int, kmax: int, points: int) -> list[int]:
    if not 3 <= kmin <= kmax or points < 1:
        raise ValueError("need 3 <= kmin <= kmax and points >= 1")
    if points == 1:
        return [kmin]
    raw = np.geomspace(kmin, kmax, points)
    return sorted({int(round(x)) for x in raw} | {kmin, kmax})


@dataclass(frozen=True)
class FactorDiagnostics:
    """Sizes of the two minor factors of ĝ(k) relative to their growth rates."""

    k: int
    small_over_sqrt: float
    f1_over_sqrt_loglog: float


def factor_diagnostics(k: int, primes: PrimeTable) -> FactorDiagnostics:
    b = decompose(k, primes, cutoff=0)
    r = math.sqrt(k)
    return FactorDiagnostics(k, b.log_F_small / r, b.log_F1 / (r * math.log(math.log(k))))
