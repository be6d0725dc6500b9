import math

import pytest
import sympy

from eslab.errors import NotFoundError
from eslab.primes import digits, dominates, primes_up_to
from eslab.searcher import (
    SearchConfig,
    _WheelScan,
    allowed_residues,
    default_scan_bound,
    g_naive,
    g_wheel,
)


@pytest.fixture(scope="module")
def primes():
    return primes_up_to(1000)


def brute_g(k, limit=10**4):
    """Direct definition: smallest n > k + 1 with no prime <= k dividing C(n, k)."""
    small = list(sympy.primerange(2, k + 1))
    for n in range(k + 2, limit):
        c = math.comb(n, k)
        if all(c % p for p in small):
            return n
    raise AssertionError("raise limit")


@pytest.mark.parametrize("k, g", [(2, 6), (3, 7), (4, 7), (5, 23)])
def test_spot_values(primes, k, g):
    assert brute_g(k) == g
    assert g_naive(SearchConfig(k, method="naive"), primes).g == g
    assert g_wheel(SearchConfig(k), primes).g == g


@pytest.mark.parametrize("k", range(2, 13))
def test_naive_matches_factorization_oracle(primes, k):
    assert g_naive(SearchConfig(k, method="naive"), primes).g == brute_g(k)


def test_allowed_residue_examples():
    assert allowed_residues(5, 2) == [5, 7]
    assert allowed_residues(3, 3) == [3, 4, 5, 6, 7, 8]


@pytest.mark.parametrize("k", [2, 5, 10, 30, 40, 100, 316])
def test_allowed_residues_sound_and_complete(k):
    for p in sympy.primerange(2, k + 1):
        ks = digits(k, p).digits
        m = p ** len(ks)
        if m > 10**5:
            continue
        got = allowed_residues(k, p)
        assert got == sorted(got)
        want = [r for r in range(m) if all(a <= b for a, b in zip(ks, (digits(r, p).digits + (0,) * len(ks))))]
        assert got == want
        assert len(got) == math.prod(p - a for a in ks)


def test_wheel_equals_naive_small(primes):
    for k in range(2, 21):
        a = g_naive(SearchConfig(k, method="naive"), primes)
        b = g_wheel(SearchConfig(k), primes)
        assert a.g == b.g
        assert a.verify() and b.verify()


def test_minimality_exhaustive(primes):
    for k in range(2, 21):
        g = g_wheel(SearchConfig(k), primes).g
        ps = primes.up_to(k)
        for n in range(k + 2, g):
            assert any(math.comb(n, k) % p == 0 for p in ps)


def test_certificate_contents(primes):
    res = g_wheel(SearchConfig(5), primes)
    assert [c[0] for c in res.certificate] == [2, 3, 5]
    p, dk, dg = res.certificate[0]
    assert dk == (1, 0, 1) and dg == (1, 1, 1, 0, 1)
    assert res.verify()


def test_k40_wheel_tests_fewer_candidates(primes):
    a = g_naive(SearchConfig(40, method="naive"), primes)
    b = g_wheel(SearchConfig(40), primes)
    assert a.g == b.g
    assert a.candidates_tested == a.g - 41
    assert b.candidates_tested < a.candidates_tested


def test_k5_small_wheel(primes):
    # wheel of 8 * 9 only; remaining prime 5 is checked per candidate
    res = g_wheel(SearchConfig(5, wheel_budget=72), primes)
    assert res.wheel_modulus == 72
    # {5, 7} mod 8 and {5, 8} mod 9
    assert allowed_residues(5, 3) == [5, 8]
    assert res.wheel_residues == 2 * 2
    assert res.g == 23


@pytest.mark.parametrize("budget", [2, 8, 72, 10**4, 10**9])
def test_wheel_budget_does_not_change_answer(primes, budget):
    for k in (7, 13, 17):
        assert g_wheel(SearchConfig(k, wheel_budget=budget), primes).g == g_naive(
            SearchConfig(k, method="naive"), primes
        ).g


@pytest.mark.parametrize("method", ["naive", "wheel"])
def test_workers_do_not_change_results(primes, method):
    fn = g_naive if method == "naive" else g_wheel
    one = fn(SearchConfig(24, method=method, segment_size=5000), primes)
    two = fn(SearchConfig(24, method=method, segment_size=5000, workers=2), primes)
    assert (one.g, one.candidates_tested) == (two.g, two.candidates_tested)


def test_segmenting_does_not_change_results(primes):
    ref = g_wheel(SearchConfig(29), primes)
    for seg in (1, 777, 10**5):
        r = g_wheel(SearchConfig(29, segment_size=seg), primes)
        assert (r.g, r.candidates_tested) == (ref.g, ref.candidates_tested)


def test_not_found(primes):
    with pytest.raises(NotFoundError):
        g_naive(SearchConfig(13, method="naive", scan_bound=2000), primes)
    with pytest.raises(NotFoundError):
        g_wheel(SearchConfig(13, scan_bound=2000), primes)


def test_default_bound(primes):
    assert default_scan_bound(5, primes) == 230
    res = g_wheel(SearchConfig(5), primes)
    assert res.scan_bound == 230


@pytest.mark.parametrize(
    "kwargs",
    [dict(k=5, scan_bound=6), dict(k=5, wheel_budget=1), dict(k=5, method="fast"), dict(k=5, workers=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_wheel_density_matches_residue_fraction(primes):
    for k in (10, 30):
        scan = _WheelScan(k, primes.up_to(k), 1 << 62)
        L = scan.list_modulus
        listed = [p for p in primes.up_to(k) if L % p == 0]
        expected = math.prod(len(allowed_residues(k, p)) / p ** len(digits(k, p)) for p in listed)
        assert len(scan.residues) / L == pytest.approx(expected, rel=1e-12)
        # every listed residue dominates k at each listed prime
        assert all(dominates(r + L, k, p) for r in scan.residues[:500] for p in listed)
