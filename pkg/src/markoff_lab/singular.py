"""Truncated singular series s_a(K), the approximate inverse t_a(K), and local factors.

Series values are exact ``Fraction`` objects. The infinite product gamma(a) is
evaluated exactly at every prime where the local sum is not trivially close to
1 (small primes and primes dividing a(a - 4)); the remaining primes contribute
a bounded multiplicative tail, reported as an error bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import factorize, is_prime, legendre, mobius, omega, primes_up_to, squarefull_split, valuation
from .expsums import T, stable_level
from .markoff import is_admissible

# GAMMA_TAIL_C bounds |gamma_p(a) - 1| <= (C / p)^2 for p >= 7 with p not dividing
# a(a - 4): there gamma_p = 1 - (T_a(p) / p^3)^2 and |T_a(p)| <= 4p^2 + p, so
# C = 4 + 1/7 (attained, see fit_gamma_tail_constant).
GAMMA_TAIL_C = 4 + 1 / 7


def s_a(a: int, K: int) -> Fraction:
    """Exact truncated singular series sum_{m <= K} m^-3 T_a(m)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return sum((Fraction(T(a, m), m**3) for m in range(1, K + 1)), Fraction(0))


def s_a_float(a: int, K: int) -> float:
    return sum(T(a, m) / m**3 for m in range(1, K + 1))


def t_a(a: int, K: int) -> Fraction:
    """Approximate inverse: sum over squarefree n <= K coprime to 30 of mu(n) n^-3 T_a(n)."""
    total = Fraction(0)
    for n in range(1, K + 1):
        if math.gcd(n, 30) != 1:
            continue
        mu = mobius(n)
        if mu:
            total += Fraction(mu * T(a, n), n**3)
    return total


def _c_local(a: int, p: int, ell: int) -> Fraction:
    if ell == 0:
        return Fraction(1)
    val = Fraction(T(a, p**ell), p ** (3 * ell))
    if p >= 7:
        val -= Fraction(T(a, p ** (ell - 1)) * T(a, p), p ** (3 * ell))
    return val


def c_a(a: int, n: int) -> Fraction:
    """Coefficient of n^-s in s_a * t_a, assembled over prime powers."""
    out = Fraction(1)
    for p, ell in factorize(n):
        out *= _c_local(a, p, ell)
        if out == 0:
            break
    return out


def c_a_convolution(a: int, n: int) -> Fraction:
    """c_a(n) straight from the Dirichlet convolution, without multiplicativity."""
    total = Fraction(0)
    for d in range(1, n + 1):
        if n % d:
            continue
        e = n // d
        if math.gcd(e, 30) == 1 and mobius(e):
            total += Fraction(T(a, d) * mobius(e) * T(a, e), n**3)
    return total


def c_sum(a: int, K: int) -> Fraction:
    return sum((c_a(a, n) for n in range(1, K + 1)), Fraction(0))


def product_remainder(a: int, K: int) -> Fraction:
    """Double sum of n1^-3 T(n1) mu(n2) n2^-3 T(n2) over n1, n2 <= K, n1 n2 > K, gcd(n2, 30) = 1."""
    total = Fraction(0)
    for n2 in range(1, K + 1):
        if math.gcd(n2, 30) != 1 or not mobius(n2):
            continue
        w2 = Fraction(mobius(n2) * T(a, n2), n2**3)
        if not w2:
            continue
        for n1 in range(K // n2 + 1, K + 1):
            total += Fraction(T(a, n1), n1**3) * w2
    return total


def bound_c_shape(a: int, n: int) -> float:
    """n1^-2 n2^-1 gcd(sqrt(n2), |a(a-4)|) n3^-1/2 with (n1, n2, n3) the square-full split."""
    n1, n2, n3 = squarefull_split(n)
    root = math.isqrt(n2)
    return n1**-2 / n2 * math.gcd(root, abs(a * (a - 4))) / math.sqrt(n3)


def fit_bound_c_constant(a_values, N: int) -> float:
    """Smallest C with |c_a(n)| <= C^omega(n) * shape(a, n) over the given range."""
    best = 1.0
    for a in a_values:
        for n in range(2, N + 1):
            c = abs(float(c_a(a, n)))
            if c == 0:
                continue
            best = max(best, (c / bound_c_shape(a, n)) ** (1 / omega(n)))
    return best


@dataclass(frozen=True)
class LocalFactor:
    p: int
    L: int
    value: Fraction
    tail: float
    converged: bool

    def __float__(self):
        return float(self.value)


def gamma_p(a: int, p: int, L: int | None = None) -> LocalFactor:
    """Local factor sum_{l >= 0} c_a(p^l), truncated at level L.

    When the Hensel stable level of a at p is finite, the series terminates and
    the default L makes the value exact; a smaller L reports the exact remainder
    as its tail. Otherwise (a = 0 or a = 4, where the
    local terms do not decay) the truncation is reported with an infinite tail.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    stable = stable_level(a, p)
    exact_from = None if stable is None else stable + 2
    if L is None:
        L = exact_from if exact_from is not None else 12
    value = sum((_c_local(a, p, ell) for ell in range(L + 1)), Fraction(0))
    if exact_from is None:
        return LocalFactor(p, L, value, math.inf, False)
    # the terms stop at exact_from, so the remainder is known exactly
    rest = sum((_c_local(a, p, ell) for ell in range(L + 1, exact_from + 1)), Fraction(0))
    tail = abs(float(rest))
    return LocalFactor(p, L, value, tail, tail < 1e-12)


def delta_p(a: int, p: int, L: int) -> Fraction:
    """Partial p-adic density 1 + sum_{1 <= l <= L} p^-3l T_a(p^l)."""
    return sum((Fraction(T(a, p**ell), p ** (3 * ell)) for ell in range(L + 1)), Fraction(0))


@dataclass
class GammaValue:
    value: float
    error: float
    converged: bool
    factors: list[LocalFactor] = field(default_factory=list)


def _residue_depth(a: int, p: int) -> int:
    return max(valuation(a, p) if a else 0, valuation(a - 4, p) if a != 4 else 0)


def _gamma_small(a: int, p: int) -> LocalFactor:
    """gamma_p(a) for p <= 5, shared across a = r mod p^(d + 5), d = max v_p(a), v_p(a - 4).

    The stable level never exceeds d + 3 (checked in the tests), and gamma_p
    only reads a mod p^(stable + 2), so every a in the class has the same factor.
    """
    mod = p ** (_residue_depth(a, p) + 5)
    return _gamma_p_cached(a % mod, p)


@lru_cache(maxsize=1 << 14)
def _gamma_p_cached(r: int, p: int) -> LocalFactor:
    return gamma_p(r, p)


def gamma_p_smooth(a: int, p: int) -> Fraction:
    """gamma_p(a) = 1 - (T_a(p) / p^3)^2 for p >= 7 not dividing a(a - 4).

    Mod p the surface is smooth, T_a(p^l) = 0 for l >= 2, and
    T_a(p) = p + p^2 chi(a - 4)(3 + chi(a)).
    """
    if p < 7 or (a * (a - 4)) % p == 0:
        raise ValueError("needs p >= 7 with p not dividing a(a - 4)")
    t = p + p * p * legendre(a - 4, p) * (3 + legendre(a, p))
    return 1 - Fraction(t, p**3) ** 2


@lru_cache(maxsize=8)
def _chi_tables(P0: int):
    """Concatenated Legendre-symbol tables for the primes 7 <= p <= P0."""
    primes = np.array([p for p in primes_up_to(P0) if p >= 7], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(primes)[:-1]])
    table = np.concatenate([[legendre(r, int(p)) for r in range(p)] for p in primes]).astype(np.int64)
    return primes, offsets, table


def _smooth_product(a: int, P0: int) -> float:
    """Product of gamma_p_smooth(a, p) over 7 <= p <= P0 with p not dividing a(a - 4), in floats."""
    primes, offsets, table = _chi_tables(P0)
    chi_a = table[offsets + a % primes]
    chi_b = table[offsets + (a - 4) % primes]
    live = (chi_a != 0) & (chi_b != 0)
    p = primes[live].astype(float)
    t = (1 + p * chi_b[live] * (3 + chi_a[live])) / p**2
    return float(np.prod(1 - t * t))


def _prime_tail(P0: int) -> float:
    """Upper bound for the sum of p^-2 over primes p > P0 >= 7 (all such p are +-1 mod 6)."""
    return 1.0 / (3 * (P0 - 6))


def gamma(a: int, P0: int = 1000) -> GammaValue:
    """Product of local factors; exact for p <= P0 and p | a(a-4), bounded tail beyond.

    ``factors`` lists the primes below 7 and those dividing a(a - 4); the other
    primes up to P0 enter through gamma_p_smooth.
    """
    if a == 0:
        raise ValueError("gamma(a) requires a != 0")
    P0 = max(P0, 13)
    if a == 4:
        # every prime divides a - 4 and no local factor converges
        special = set(primes_up_to(13))
    else:
        special = {p for p, _ in factorize(abs(a * (a - 4)))}
    hard = sorted(special | {2, 3, 5})
    factors = [_gamma_small(a, p) if p <= 5 and a != 4 else gamma_p(a, p) for p in hard]
    value = math.prod(float(f.value) for f in factors)
    if a != 4:
        value *= _smooth_product(a, P0)
    rel = sum(f.tail / max(abs(float(f.value)), 1e-300) for f in factors if f.tail)
    rel += math.expm1(GAMMA_TAIL_C**2 * _prime_tail(P0))
    converged = all(f.converged for f in factors) and a != 4
    if not is_admissible(a):
        # a local factor vanishes identically; the product is exactly 0
        converged = converged and value == 0.0
    error = math.inf if math.isinf(rel) else abs(value) * rel
    return GammaValue(value, error, converged, factors)


def fit_gamma_tail_constant(primes) -> float:
    """max over residues a mod p with p not dividing a(a-4) of p * sqrt|gamma_p(a) - 1|."""
    best = 0.0
    for p in primes:
        for a in range(p):
            if (a * (a - 4)) % p == 0:
                continue
            g = gamma_p(a, p)
            best = max(best, p * math.sqrt(abs(float(g.value) - 1)))
    return best


def small_value_set(A: int, K: int, eta: float) -> list[int]:
    """Admissible a with |a| <= A and |s_a(K)| <= eta (inclusive)."""
    eta_q = Fraction(eta)
    return [a for a in range(-A, A + 1) if is_admissible(a) and abs(s_a(a, K)) <= eta_q]


__all__ = [
    "LocalFactor",
    "GammaValue",
    "s_a",
    "s_a_float",
    "t_a",
    "c_a",
    "c_a_convolution",
    "c_sum",
    "product_remainder",
    "bound_c_shape",
    "fit_bound_c_constant",
    "gamma_p",
    "delta_p",
    "gamma",
    "gamma_p_smooth",
    "fit_gamma_tail_constant",
    "small_value_set",
]
