import math

import numpy as np
from hypothesis import given, strategies as st

from markoff_lab.arith import (
    divisors,
    euler_phi,
    factorize,
    is_prime,
    legendre,
    mobius,
    primes_up_to,
    radical,
    ramanujan_sum,
    squarefull_split,
)


def _sieve_tables(n):
    mu = np.ones(n + 1, dtype=np.int64)
    phi = np.arange(n + 1, dtype=np.int64)
    rad = np.ones(n + 1, dtype=np.int64)
    is_comp = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
        rad[p::p] *= p
    return mu, phi, rad


def test_factorize_examples():
    assert factorize(1) == ()
    assert list(factorize(12)) == [(2, 2), (3, 1)]
    assert list(factorize(360)) == [(2, 3), (3, 2), (5, 1)]


def test_factorize_large_semiprime():
    p, q = 1_000_000_007, 998_244_353
    assert list(factorize(p * q)) == [(q, 1), (p, 1)]
    assert list(factorize(2**61 - 1)) == [(2**61 - 1, 1)]


def test_factorize_reconstructs_up_to_1e6():
    for n in range(1, 10**6 + 1, 997):
        f = factorize(n)
        assert math.prod(p**e for p, e in f) == n
        assert all(f[i][0] < f[i + 1][0] for i in range(len(f) - 1))
        assert all(is_prime(p) and e >= 1 for p, e in f)


@given(st.integers(min_value=1, max_value=2**62))
def test_factorize_property(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f) == n
    assert all(is_prime(p) for p, _ in f)


def test_multiplicative_functions_match_sieve():
    n = 10**5
    mu, phi, rad = _sieve_tables(n)
    for k in range(1, n + 1, 7):
        assert mobius(k) == mu[k]
        assert euler_phi(k) == phi[k]
        assert radical(k) == rad[k]


def test_small_examples():
    assert mobius(6) == 1 and mobius(4) == 0
    assert euler_phi(9) == 6
    assert radical(360) == 30
    assert divisors(12) == [1, 2, 3, 4, 6, 12]


def test_squarefull_split_examples():
    assert squarefull_split(1) == (1, 1, 1)
    assert squarefull_split(360) == (5, 9, 8)
    assert squarefull_split(8) == (1, 1, 8)


@given(st.integers(min_value=1, max_value=10**9))
def test_squarefull_split_properties(n):
    n1, n2, n3 = squarefull_split(n)
    assert n1 * n2 * n3 == n
    assert mobius(n1) != 0
    assert all(e == 2 for _, e in factorize(n2))
    assert all(e >= 3 for _, e in factorize(n3))


def test_primes_and_legendre():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    squares = {x * x % 11 for x in range(1, 11)}
    assert all(legendre(a, 11) == (1 if a in squares else -1) for a in range(1, 11))
    assert legendre(22, 11) == 0


@given(st.integers(1, 200), st.integers(-500, 500))
def test_ramanujan_sum_matches_exponential_sum(q, n):
    direct = sum(
        complex(math.cos(2 * math.pi * a * n / q), math.sin(2 * math.pi * a * n / q))
        for a in range(1, q + 1)
        if math.gcd(a, q) == 1
    )
    assert abs(direct - ramanujan_sum(q, n)) < 1e-7
