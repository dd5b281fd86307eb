"""Exact evaluation of the complete exponential sums attached to the Markoff polynomial.

All primary evaluations are integer point counts followed by Moebius inversion
(the inner sum over units is a Ramanujan sum), assembled multiplicatively over
prime powers. Floating-point root-of-unity summation is only used by the
``*_direct`` oracles.

Point counts of M(x) = a mod p^l come from one of four routes:

* full enumeration of (Z/p^l)^3 (histogram over every residue a at once),
* a closed form for odd primes, via the count of a binary quadratic form,
* a closed form for odd prime powers: a character-sum count mod p, uniform
  lifting of smooth points, and a recursion at the singular points,
* Hensel lifting with explicit treatment of singular residues, for prime
  powers too large to enumerate.
"""

from __future__ import annotations

import math
import struct
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import BudgetExceeded
from .arith import euler_phi, factorize, legendre, mobius, prime_powers, valuation

DEFAULT_BUDGET = 10**8

_budget = DEFAULT_BUDGET
_lock = threading.Lock()


def set_budget(budget: int) -> None:
    """Set the enumeration budget (number of tuples visited per modulus)."""
    global _budget
    _budget = int(budget)


def get_budget() -> int:
    return _budget


def markoff(x, y, z):
    return x * x + y * y + z * z - x * y * z


# ---------------------------------------------------------------------------
# histograms of M mod q
# ---------------------------------------------------------------------------


def _enumerate_histogram(q: int) -> np.ndarray:
    if q**3 > _budget:
        raise BudgetExceeded(f"enumerating (Z/{q})^3 exceeds budget {_budget}")
    r = np.arange(q, dtype=np.int64)
    sq = r * r % q
    y2z2 = (sq[:, None] + sq[None, :]) % q
    yz = np.outer(r, r) % q
    hist = np.zeros(q, dtype=np.int64)
    for x in range(q):
        vals = (x * x + y2z2 - x * yz) % q
        hist += np.bincount(vals.ravel(), minlength=q)
    return hist


def _squares_chi(p: int) -> np.ndarray:
    chi = -np.ones(p, dtype=np.int64)
    chi[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    chi[0] = 0
    return chi


def _prime_histogram(p: int) -> np.ndarray:
    """Counts of M = c mod an odd prime p for every c, in O(p^2).

    For fixed x, y^2 - xyz + z^2 is a binary form of discriminant x^2 - 4 whose
    value counts are classical.
    """
    chi = _squares_chi(p)
    c = np.arange(p, dtype=np.int64)
    hist = np.zeros(p, dtype=np.int64)
    for x in range(p):
        d = legendre(x * x - 4, p)
        if d != 0:
            nx = np.full(p, p - d, dtype=np.int64)
            nx[0] = p + (p - 1) * d
        else:
            nx = p * (1 + chi)
            nx[0] = p
        # hist[c] += nx[c - x^2]
        hist += nx[(c - x * x) % p]
    return hist


@lru_cache(maxsize=None)
def markoff_histogram(q: int) -> np.ndarray:
    """Array h with h[c] = #{x in (Z/q)^3 : M(x) = c mod q} for a prime power q."""
    f = factorize(q)
    if len(f) > 1:
        raise ValueError(f"{q} is not a prime power")
    if q == 1:
        return np.ones(1, dtype=np.int64)
    p, e = f[0]
    if e == 1 and p > 2 and q**3 > 10**6:
        return _prime_histogram(p)
    return _enumerate_histogram(q)


def histogram_available(q: int) -> bool:
    if q == 1:
        return True
    p, e = factorize(q)[0]
    return (e == 1 and p > 2) or q**3 <= _budget


# ---------------------------------------------------------------------------
# Hensel lifting for single residues
# ---------------------------------------------------------------------------

Poly = tuple[tuple[tuple[int, int, int], int], ...]


def _poly(d: dict) -> Poly:
    return tuple(sorted((k, v) for k, v in d.items() if v))


def _markoff_poly(a: int) -> Poly:
    return _poly({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1, (1, 1, 1): -1, (0, 0, 0): -a})


def _shift(poly: Poly, t0: Sequence[int], p: int) -> dict:
    """Coefficients of poly(t0 + p*u) as a polynomial in u."""
    out: dict = {}
    for (i, j, k), c in poly:
        ex = []
        for deg, base in ((i, t0[0]), (j, t0[1]), (k, t0[2])):
            ex.append([math.comb(deg, r) * base ** (deg - r) * p**r for r in range(deg + 1)])
        for r1, c1 in enumerate(ex[0]):
            for r2, c2 in enumerate(ex[1]):
                for r3, c3 in enumerate(ex[2]):
                    key = (r1, r2, r3)
                    out[key] = out.get(key, 0) + c * c1 * c2 * c3
    return out


def _content_valuation(coeffs: dict, p: int) -> int:
    g = 0
    for v in coeffs.values():
        g = math.gcd(g, v)
    v = 0
    while g % p == 0:
        g //= p
        v += 1
    return v


def _eval_grid(poly: Poly, p: int, dx=(0, 0, 0)) -> np.ndarray:
    """Evaluate poly (or a partial derivative, dx = derivative orders) mod p on (Z/p)^3."""
    r = np.arange(p, dtype=np.int64)
    out = np.zeros((p, p, p), dtype=np.int64)
    for (i, j, k), c in poly:
        if i < dx[0] or j < dx[1] or k < dx[2]:
            continue
        coef = c
        for deg, d in ((i, dx[0]), (j, dx[1]), (k, dx[2])):
            coef *= math.perm(deg, d)
        coef %= p
        if coef == 0:
            continue
        px = pow_mod_vec(r, i - dx[0], p)
        py = pow_mod_vec(r, j - dx[1], p)
        pz = pow_mod_vec(r, k - dx[2], p)
        out = (out + coef * (px[:, None, None] * py[None, :, None] % p) % p * pz[None, None, :]) % p
    return out


def pow_mod_vec(r: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.ones_like(r)
    for _ in range(e):
        out = out * r % p
    return out


@lru_cache(maxsize=1 << 15)
def _roots_mod_p(poly: Poly, p: int) -> tuple[int, tuple[tuple[int, int, int], ...]]:
    """(number of nonsingular roots, list of singular roots) of poly mod p."""
    if all(c % p == 0 for (key, c) in poly if key != (0, 0, 0)):
        const = dict(poly).get((0, 0, 0), 0) % p
        if const:
            return 0, ()
    if p**3 > _budget:
        raise BudgetExceeded(f"root scan mod {p} exceeds budget {_budget}")
    vals = _eval_grid(poly, p)
    roots = vals == 0
    grads = [_eval_grid(poly, p, d) for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    singular = roots & (grads[0] == 0) & (grads[1] == 0) & (grads[2] == 0)
    n_ns = int(roots.sum() - singular.sum())
    sing = tuple(tuple(int(v) for v in idx) for idx in np.argwhere(singular))
    return n_ns, sing


def _top_roots(a: int, p: int) -> tuple[int, tuple[tuple[int, int, int], ...]]:
    """Root structure of M - a mod p; odd p uses the known singular locus."""
    if p == 2 or p**3 <= 10**5:
        return _roots_mod_p(_markoff_poly(a), p)
    sing = []
    if a % p == 0:
        sing.append((0, 0, 0))
    if (a - 4) % p == 0:
        sing.extend([(2, 2, 2), (2, -2, -2), (-2, 2, -2), (-2, -2, 2)])
    rho = int(markoff_histogram(p)[a % p])
    return rho - len(sing), tuple(sing)


def _children(poly: Poly, p: int, top_a: int | None):
    n_ns, sing = _top_roots(top_a, p) if top_a is not None else _roots_mod_p(poly, p)
    kids = []
    for t0 in sing:
        g = _shift(poly, t0, p)
        e = _content_valuation(g, p)
        h = _poly({k: v // p**e for k, v in g.items()})
        kids.append((e, h))
    return n_ns, kids


@lru_cache(maxsize=1 << 16)
def _hensel_count(poly: Poly, p: int, level: int, top_a: int | None) -> int:
    if level == 0:
        return 1
    n_ns, kids = _children(poly, p, top_a)
    total = n_ns * p ** (2 * (level - 1))
    for e, h in kids:
        if e >= level:
            total += p ** (3 * (level - 1))
        else:
            total += p ** (3 * (e - 1)) * _hensel_count(h, p, level - e, None)
    return total


@lru_cache(maxsize=1 << 16)
def _stable_level(poly: Poly, p: int, top_a: int | None, depth: int = 0) -> int | None:
    if depth > 64:
        return None
    _, kids = _children(poly, p, top_a)
    lvl = 1
    for e, h in kids:
        sub = _stable_level(h, p, None, depth + e)
        if sub is None:
            return None
        lvl = max(lvl, e + sub)
    return lvl


# Singular points of M = a over an odd prime: (level a_s, determinant of the
# tangent quadric, number of points). The origin has quadric x^2 + y^2 + z^2;
# the four points (+-2, +-2, +-2) with product 8 have u^2 + v^2 + w^2 - 2(uv + vw + wu).
_SINGULAR = ((0, 1, 1), (4, -4, 4))


def _ternary_count(c: int, p: int, det: int) -> int:
    """#{y mod p : q(y) = c} for a nondegenerate ternary quadric of determinant det."""
    return p * p + (p * legendre(-c * det, p) if c % p else 0)


def _near_singular(c: int, p: int, m: int, det: int) -> int:
    """#{y mod p^(m-1) : p^2 (q(y) - p^k P(y)) = c mod p^m}, k >= 1, P cubic."""
    if m <= 2:
        return p ** (3 * (m - 1)) if c % p**m == 0 else 0
    if c % (p * p):
        return 0
    return p**3 * _quadric_lifts(c // (p * p), p, m - 2, det)


def _quadric_lifts(c: int, p: int, m: int, det: int) -> int:
    """#{y mod p^m : q(y) - p^k P(y) = c mod p^m}, k >= 1: only q mod p matters."""
    if m == 0:
        return 1
    smooth = (_ternary_count(c, p, det) - (c % p == 0)) * p ** (2 * (m - 1))
    if c % p:
        return smooth
    return smooth + _near_singular(c, p, m, det)


def rho_odd_closed(a: int, p: int, ell: int) -> int:
    """#{x mod p^ell : M(x) = a} for odd p in O(ell) operations.

    Mod p the count is p^2 + 1 + p chi(a - 4)(3 + chi(a)) (complete the square
    in z and evaluate the resulting character sums). Smooth points lift
    uniformly; lifts of each singular point reduce to its tangent quadric.
    """
    if p == 2:
        raise ValueError("closed form needs an odd prime")
    if ell == 0:
        return 1
    base = p * p + 1 + p * legendre(a - 4, p) * (3 + legendre(a, p))
    live = [s for s in _SINGULAR if (a - s[0]) % p == 0]
    out = (base - sum(n for _, _, n in live)) * p ** (2 * (ell - 1))
    for level, det, n in live:
        out += n * _near_singular(a - level, p, ell, det)
    return out


def rho_hensel(a: int, p: int, ell: int) -> int:
    """Hensel-lifting count; independent of the enumeration and closed-form routes."""
    q = p**ell
    return _hensel_count(_markoff_poly(a % q), p, ell, a % q)


def rho_prime_power(a: int, p: int, ell: int) -> int:
    """#{x mod p^ell : M(x) = a mod p^ell}."""
    if ell == 0:
        return 1
    q = p**ell
    if q**3 <= min(_budget, 10**6):
        return int(markoff_histogram(q)[a % q])
    if p > 2:
        return rho_odd_closed(a, p, ell)
    if q**3 <= _budget:
        return int(markoff_histogram(q)[a % q])
    return rho_hensel(a, p, ell)


def point_count_rho(a: int, m: int) -> int:
    """#{x in (Z/m)^3 : M(x) = a mod m}, assembled over prime powers by CRT."""
    if m < 1:
        raise ValueError("modulus must be positive")
    return math.prod(rho_prime_power(a, p, e) for p, e in factorize(m))


def stable_level(a: int, p: int) -> int | None:
    """Smallest L with rho_a(p^l) = c * p^(2l) for all l >= L, or None if unbounded.

    T_a(p^l) vanishes for every l > L.
    """
    if p == 2:
        return _stable_level(_markoff_poly(a), p, a)
    live = [lvl for lvl, _, _ in _SINGULAR if (a - lvl) % p == 0]
    if any(a == lvl for lvl in live):
        return None
    depth = max((valuation(a - lvl, p) for lvl in live), default=0) + 3
    counts = [rho_odd_closed(a, p, ell) for ell in range(depth + 1)]
    L = depth
    while L > 0 and counts[L] == p * p * counts[L - 1]:
        L -= 1
    return L


def stable_level_hensel(a: int, p: int) -> int | None:
    return _stable_level(_markoff_poly(a), p, a)


# ---------------------------------------------------------------------------
# T_a(m)
# ---------------------------------------------------------------------------


def _T_local(a: int, p: int, ell: int) -> int:
    if ell == 0:
        return 1
    return p**ell * rho_prime_power(a, p, ell) - p ** (ell + 2) * rho_prime_power(a, p, ell - 1)


@lru_cache(maxsize=None)
def T_table(q: int) -> np.ndarray:
    """T_b(q) for every residue b mod a prime power q (int64 array)."""
    if q == 1:
        return np.ones(1, dtype=np.int64)
    p, ell = factorize(q)[0]
    if ell > 1 and not histogram_available(q):
        raise BudgetExceeded(f"T table for q={q} exceeds budget")
    h = markoff_histogram(q).astype(object)
    if ell == 1:
        lower = np.ones(q, dtype=object)
    else:
        hl = markoff_histogram(q // p).astype(object)
        lower = hl[np.arange(q) % (q // p)]
    return np.array(q * h - p ** (ell + 2) * lower, dtype=np.int64)


@lru_cache(maxsize=1 << 18)
def _T_cached(a_mod: int, p: int, ell: int) -> int:
    q = p**ell
    if q**3 <= 10**6:
        return int(T_table(q)[a_mod])
    return _T_local(a_mod, p, ell)


def T(a: int, m: int) -> int:
    """Exact T_a(m) = sum over units u and x mod m of e_m(u(M(x) - a))."""
    if m < 1:
        raise ValueError("modulus must be positive")
    out = 1
    for p, ell in factorize(m):
        out *= _T_cached(a % p**ell, p, ell)
        if out == 0:
            return 0
    return out


def T_natural(a: int, n: int) -> Fraction:
    return Fraction(T(a, n), n * n)


def T_full_table(m: int) -> list[int]:
    """T_b(m) for b = 0..m-1 (composite m allowed)."""
    tabs = [(q, T_table(q)) for q in prime_powers(m)]
    out = []
    for b in range(m):
        v = 1
        for q, t in tabs:
            v *= int(t[b % q])
        out.append(v)
    return out


@lru_cache(maxsize=None)
def _direct_values(m: int) -> np.ndarray:
    r = np.arange(m, dtype=np.int64)
    x, y, z = np.meshgrid(r, r, r, indexing="ij")
    return np.bincount(((x * x + y * y + z * z - x * y * z) % m).ravel(), minlength=m)


def T_direct(a: int, m: int) -> int:
    """Oracle: floating summation of e_m(u(M(x) - a)) over units u and x mod m."""
    if m > 60:
        raise BudgetExceeded("T_direct is limited to m <= 60")
    counts = _direct_values(m)
    r = np.arange(m)
    units = np.array([u for u in range(1, m + 1) if math.gcd(u, m) == 1])
    phase = np.exp(2j * np.pi * np.outer(units, r - a) / m)
    val = complex((phase @ counts).sum())
    out = round(val.real)
    if abs(val - out) > 1e-6 * m**4:
        raise ArithmeticError(f"T_direct({a},{m}) rounding residual {abs(val - out)}")
    return out


# ---------------------------------------------------------------------------
# S_0(m) and S_0(a1, a2; m)
# ---------------------------------------------------------------------------


def _S0_local(p: int, ell: int) -> int:
    def w(q):
        h = markoff_histogram(q).astype(object)
        return int((h * h).sum())

    q = p**ell
    return q * w(q) - p ** (ell - 1) * p**6 * w(q // p)


@lru_cache(maxsize=None)
def S0(m: int) -> int:
    """S_0(m): the complete sum over units and x in (Z/m)^6 of e_m(u(M(x) - M(y)))."""
    return math.prod(_S0_local(p, e) for p, e in factorize(m))


@lru_cache(maxsize=None)
def _binary_histogram(a: int, q: int) -> np.ndarray:
    """Counts of v1^2 + v2^2 - a v1 v2 = r mod q."""
    if q * q > _budget:
        raise BudgetExceeded(f"binary form enumeration mod {q}")
    r = np.arange(q, dtype=np.int64)
    vals = (r[:, None] ** 2 + r[None, :] ** 2 - (a % q) * np.outer(r, r)) % q
    return np.bincount(vals.ravel(), minlength=q)


def _pair_count(a1: int, a2: int, q: int) -> int:
    if q == 1:
        return 1
    h1 = _binary_histogram(a1 % q, q).astype(object)
    h2 = _binary_histogram(a2 % q, q).astype(object)
    shift = (a1 * a1 - a2 * a2) % q
    return int((h1 * np.roll(h2, -shift)).sum())


def S0_fixed(a1: int, a2: int, m: int) -> int:
    """S_0(a1, a2; m) for G(v, w) = M(v1, v2, a1) - M(w1, w2, a2)."""
    out = 1
    for p, ell in factorize(m):
        q = p**ell
        out *= q * _pair_count(a1, a2, q) - p ** (ell - 1) * p**4 * _pair_count(a1, a2, q // p)
    return out


def S0_fixed_direct(a1: int, a2: int, m: int) -> int:
    """Oracle: direct root-of-unity summation over units and (Z/m)^4."""
    if m**4 > 10**7:
        raise BudgetExceeded("S0_fixed_direct limited to m^4 <= 1e7")
    r = np.arange(m, dtype=np.int64)
    v1, v2, w1, w2 = np.meshgrid(r, r, r, r, indexing="ij")
    g = (v1**2 + v2**2 - a1 * v1 * v2 - w1**2 - w2**2 + a2 * w1 * w2 + a1 * a1 - a2 * a2) % m
    counts = np.bincount(g.ravel(), minlength=m)
    units = np.array([u for u in range(1, m + 1) if math.gcd(u, m) == 1])
    val = complex((np.exp(2j * np.pi * np.outer(units, r) / m) @ counts).sum())
    return round(val.real)


def S0_direct(m: int) -> int:
    """Oracle for S_0(m): direct summation using the enumerated M-histogram mod m."""
    counts = _direct_values(m).astype(np.int64)
    r = np.arange(m)
    # number of (x, y) with M(x) - M(y) = r
    diff = np.zeros(m, dtype=np.int64)
    for s in range(m):
        diff += counts[s] * counts[(s - r) % m]
    units = np.array([u for u in range(1, m + 1) if math.gcd(u, m) == 1])
    val = complex((np.exp(2j * np.pi * np.outer(units, r) / m) @ diff).sum())
    return round(val.real)


# ---------------------------------------------------------------------------
# quaternary quadratic forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadForm4:
    """F(x) = x^t A x with A symmetric and (1 + [i != j]) a_ij integral.

    Stored as integer diagonal coefficients and integer cross coefficients
    ``cross[(i, j)] = 2 a_ij`` for i < j, so F(x) is integer-valued.
    """

    diag: tuple[int, int, int, int]
    cross: tuple[tuple[tuple[int, int], int], ...] = ()

    @classmethod
    def from_matrix(cls, A) -> "QuadForm4":
        A = [[Fraction(v).limit_denominator(2) for v in row] for row in A]
        if len(A) != 4 or any(len(r) != 4 for r in A):
            raise ValueError("A must be 4x4")
        diag, cross = [], []
        for i in range(4):
            if A[i][i].denominator != 1:
                raise ValueError("diagonal entries must be integers")
            diag.append(int(A[i][i]))
            for j in range(i + 1, 4):
                if A[i][j] != A[j][i]:
                    raise ValueError("A must be symmetric")
                c = 2 * A[i][j]
                if c.denominator != 1:
                    raise ValueError("2 a_ij must be an integer")
                if c:
                    cross.append(((i, j), int(c)))
        form = cls(tuple(diag), tuple(cross))
        if form.det() == 0:
            raise ValueError("quadratic form is singular")
        return form

    def matrix(self) -> np.ndarray:
        A = np.diag(np.array(self.diag, dtype=float))
        for (i, j), c in self.cross:
            A[i, j] = A[j, i] = c / 2
        return A

    def det(self) -> float:
        return float(np.linalg.det(self.matrix()))

    def norm(self) -> float:
        return float(np.abs(self.matrix()).max())

    def scaled(self, s: int) -> "QuadForm4":
        return QuadForm4(tuple(s * d for d in self.diag), tuple((ij, s * c) for ij, c in self.cross))

    def __call__(self, x):
        out = sum(d * x[i] * x[i] for i, d in enumerate(self.diag))
        for (i, j), c in self.cross:
            out = out + c * x[i] * x[j]
        return out

    def blocks(self) -> list[list[int]]:
        """Connected components of the variables under the cross terms."""
        parent = list(range(4))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for (i, j), _ in self.cross:
            parent[find(i)] = find(j)
        comps: dict[int, list[int]] = {}
        for i in range(4):
            comps.setdefault(find(i), []).append(i)
        return list(comps.values())


def _block_histogram(F: QuadForm4, block: list[int], q: int) -> np.ndarray:
    if q ** len(block) > _budget:
        raise BudgetExceeded(f"quadratic-form block enumeration mod {q}")
    r = np.arange(q, dtype=np.int64)
    grids = np.meshgrid(*([r] * len(block)), indexing="ij")
    xs = {v: g for v, g in zip(block, grids)}
    vals = np.zeros(grids[0].shape, dtype=np.int64)
    for v in block:
        vals = (vals + (F.diag[v] % q) * xs[v] * xs[v]) % q
    for (i, j), c in F.cross:
        if i in xs:
            vals = (vals + (c % q) * xs[i] * xs[j]) % q
    return np.bincount(vals.ravel(), minlength=q)


def _cyclic_convolve(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    q = len(h1)
    out = np.zeros(q, dtype=object)
    h2o = h2.astype(object)
    for r in np.nonzero(h1)[0]:
        out += int(h1[r]) * np.roll(h2o, int(r))
    return out


@lru_cache(maxsize=4096)
def quadform_histogram(F: QuadForm4, q: int) -> tuple[int, ...]:
    """Counts of F(x) = r mod q over (Z/q)^4, built block by block."""
    if q == 1:
        return (1,)
    hist = None
    for block in F.blocks():
        hb = _block_histogram(F, block, q)
        hist = hb.astype(object) if hist is None else _cyclic_convolve(hist, hb)
    return tuple(int(v) for v in hist)


def _Sq_local(F: QuadForm4, k: int, p: int, ell: int) -> int:
    q = p**ell
    upper = quadform_histogram(F, q)[k % q]
    lower = quadform_histogram(F, q // p)[k % (q // p)]
    return q * upper - p ** (ell - 1) * p**4 * lower


def S_q_quadform(F: QuadForm4, k: int, c: Sequence[int], q: int):
    """S_q(F, k, c) = sum over units a and x mod q of e_q(a(F(x) - k) + c.x).

    Exact ``int`` when c = 0 mod q (multiplicative assembly); for other c the sum
    lies in Z[e(1/q)] and is returned as a complex number computed from exact
    integer coefficients.
    """
    if q < 1:
        raise ValueError("modulus must be positive")
    if all(ci % q == 0 for ci in c):
        return math.prod(_Sq_local(F, k, p, e) for p, e in factorize(q))
    return _Sq_twisted(F, k, tuple(int(ci) for ci in c), q)


def _Sq_twisted(F: QuadForm4, k: int, c: tuple[int, ...], q: int) -> complex:
    if q**4 > _budget:
        raise BudgetExceeded("twisted S_q needs full enumeration")
    r = np.arange(q, dtype=np.int64)
    xs = np.meshgrid(r, r, r, r, indexing="ij")
    fv = F(xs) % q
    lin = sum(ci * xi for ci, xi in zip(c, xs)) % q
    joint = np.bincount((fv * q + lin).ravel(), minlength=q * q).reshape(q, q)
    ram = np.array([_ramanujan(q, (v - k) % q) for v in range(q)], dtype=object)
    coeff = (joint.astype(object) * ram[:, None]).sum(axis=0)  # exact integer per linear phase
    phases = np.exp(2j * np.pi * r / q)
    return complex(sum(int(coeff[s]) * phases[s] for s in range(q)))


@lru_cache(maxsize=None)
def _ramanujan(q: int, n: int) -> int:
    from .arith import ramanujan_sum

    return ramanujan_sum(q, n)


def S_q_direct(F: QuadForm4, k: int, c: Sequence[int], q: int) -> complex:
    """Oracle: full enumeration of (Z/q)^4 and the unit sum, in floating point."""
    if q**4 > 2 * 10**6:
        raise BudgetExceeded("S_q_direct limited to q^4 <= 2e6")
    r = np.arange(q, dtype=np.int64)
    xs = np.meshgrid(r, r, r, r, indexing="ij")
    fv = (F(xs) - k) % q
    lin = sum(ci * xi for ci, xi in zip(c, xs)) % q
    joint = np.bincount((fv * q + lin).ravel(), minlength=q * q).reshape(q, q)
    total = 0j
    units = [u for u in range(1, q + 1) if math.gcd(u, q) == 1]
    lin_phase = np.exp(2j * np.pi * r / q)
    for u in units:
        total += np.exp(2j * np.pi * u * r / q) @ joint @ lin_phase
    return complex(total)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def moment_T(m_vec: Iterable[int], n_vec: Iterable[int], budget: int = 10**6) -> Fraction:
    """Average over b mod prod(m)*prod(n) of |T_b^nat(m_vec) T_b^nat(n_vec)|."""
    m_vec, n_vec = list(m_vec), list(n_vec)
    for n in n_vec:
        if mobius(n) == 0:
            raise ValueError(f"{n} is not squarefree")
    mods = m_vec + n_vec
    L = math.prod(mods)
    if L > budget:
        raise BudgetExceeded(f"moment over {L} residues")
    tables = {m: T_full_table(m) for m in set(mods)}
    den = math.prod(m * m for m in mods)
    total = 0
    for b in range(L):
        total += abs(math.prod(tables[m][b % m] for m in mods))
    return Fraction(total, den * L)


def trivial_bound_ok(a: int, m: int) -> bool:
    return abs(T(a, m)) <= euler_phi(m) * m**3


# ---------------------------------------------------------------------------
# binary table dump
# ---------------------------------------------------------------------------

_MAGIC = b"MKTT"
_VERSION = 1


def dump_T_table(path, moduli: Iterable[int]) -> int:
    """Write (m, a mod m, T_a(m)) triples as little-endian int64, after a header.

    Header: 4-byte magic ``MKTT``, 1 version byte, 3 zero bytes, uint64 row count.
    """
    rows = [(m, b, t) for m in moduli for b, t in enumerate(T_full_table(m))]
    with open(path, "wb") as fh:
        fh.write(_MAGIC + bytes([_VERSION, 0, 0, 0]) + struct.pack("<Q", len(rows)))
        fh.write(np.asarray(rows, dtype="<i8").tobytes())
    return len(rows)


def load_T_table(path) -> dict[tuple[int, int], int]:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if head[:4] != _MAGIC:
            raise ValueError("not a T table file")
        if head[4] != _VERSION:
            raise ValueError(f"unsupported T table version {head[4]}")
        (n,) = struct.unpack("<Q", head[8:16])
        data = np.frombuffer(fh.read(24 * n), dtype="<i8").reshape(n, 3)
    return {(int(m), int(b)): int(t) for m, b, t in data}
