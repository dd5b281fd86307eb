"""Exact integer utilities: factorization and the usual multiplicative functions.

Factorization is trial division backed by a deterministic Miller-Rabin test,
with Pollard rho for the rare large composite cofactor.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

Factorization = tuple[tuple[int, int], ...]

# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TRIAL_LIMIT = 1000


class SquarefullSplit(NamedTuple):
    n1: int  # squarefree part
    n2: int  # primes with exponent exactly 2
    n3: int  # cube-full part


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 100):
        x = y = 2
        d = 1
        f = lambda v: (v * v + c) % n  # noqa: E731
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"pollard rho failed on {n}")


def _split_large(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_rho(n)
    _split_large(d, out)
    _split_large(n // d, out)


@lru_cache(maxsize=1 << 16)
def factorize(n: int) -> Factorization:
    """Prime factorization of ``n >= 1`` as ascending ``(p, e)`` pairs."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    # wheel mod 30
    p, steps, i = 7, (4, 2, 4, 2, 4, 6, 2, 6), 0
    while p <= _TRIAL_LIMIT and p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += steps[i]
        i = (i + 1) % 8
    if n > 1:
        _split_large(n, out)
    return tuple(sorted(out.items()))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r = r // p * (p - 1)
    return r


def radical(n: int) -> int:
    return math.prod(p for p, _ in factorize(n))


def omega(n: int) -> int:
    """Number of distinct prime factors."""
    return len(factorize(n))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def prime_powers(n: int) -> list[int]:
    """The coprime prime-power factors p^e of n."""
    return [p**e for p, e in factorize(n)]


def squarefull_split(n: int) -> SquarefullSplit:
    """Split n into squarefree, exponent-2 and cube-full parts (pairwise coprime)."""
    n1 = n2 = n3 = 1
    for p, e in factorize(n):
        if e >= 3:
            n3 *= p**e
        elif e == 2:
            n2 *= p**e
        else:
            n1 *= p
    return SquarefullSplit(n1, n2, n3)


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def ramanujan_sum(q: int, n: int) -> int:
    """c_q(n) = sum over units u mod q of e(un/q), as an exact integer."""
    g = math.gcd(q, n)
    return sum(d * mobius(q // d) for d in divisors(g))
