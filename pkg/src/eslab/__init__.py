"""Desk-scale computations around the Erdős–Selfridge function g(k).

Exact and log-space evaluation of the heuristic ĝ(k) = M_k / R_k, a
certified search for g(k), and numeric checks of the asymptotic
constant sum_{a>=1} log(1 + 1/a) / (a + 1).
"""

__version__ = "0.1.0"

from eslab.errors import (
    ExactCutoffError,
    NotFoundError,
    NotPrimeError,
    ResourceLimitError,
    ToleranceUnreachableError,
)
from eslab.primes import (
    DigitVector,
    PrimeTable,
    binomial_prime_free,
    digits,
    dominates,
    primes_up_to,
)

__all__ = [
    "__version__",
    "DigitVector",
    "PrimeTable",
    "binomial_prime_free",
    "digits",
    "dominates",
    "primes_up_to",
    "ExactCutoffError",
    "NotFoundError",
    "NotPrimeError",
    "ResourceLimitError",
    "ToleranceUnreachableError",
]
