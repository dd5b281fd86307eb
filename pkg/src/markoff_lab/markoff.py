"""Integral points on x^2 + y^2 + z^2 - xyz = a.

Admissibility, Vieta moves and descent to a normal form, a bounded search for
a witness, and an exhaustive box search used as an oracle.

The bounded search looks at pairs (x, y) with 0 <= x <= y <= C sqrt(1 + |a|) and
solves the quadratic for z: z = (xy +- sqrt(D)) / 2 with D = x^2 y^2 - 4(x^2 + y^2 - a).
D only sees x^2, y^2 and (xy)^2, so restricting to x, y >= 0 loses nothing for
existence; the witness is mapped back to a normal form afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

INT64_MAX = 2**63 - 1

Triple = tuple[int, int, int]
Axis = Literal["x", "y", "z", 0, 1, 2]


def markoff(t) -> int:
    x, y, z = t
    return x * x + y * y + z * z - x * y * z


def is_admissible(a: int) -> bool:
    return a % 4 != 3 and a % 9 not in (3, 6)


def _check(t: Triple) -> Triple:
    if any(abs(v) > INT64_MAX for v in t):
        raise OverflowError(f"triple {t} leaves the signed 64-bit range")
    return t


_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


def vieta_move(t: Triple, axis: Axis) -> Triple:
    """Replace one coordinate c by (product of the other two) - c."""
    i = _AXES[axis]
    out = list(t)
    j, k = [m for m in range(3) if m != i]
    out[i] = t[j] * t[k] - t[i]
    return _check(tuple(out))


def normalize(t: Triple) -> Triple:
    """Canonical representative under permutations and paired sign changes.

    Absolute values sorted ascending; if the product is negative the single
    negative sign sits on the last (largest) entry.
    """
    x, y, z = sorted((abs(v) for v in t))
    if t[0] * t[1] * t[2] < 0:
        z = -z
    return (x, y, z)


def descend(t: Triple) -> Triple:
    """Apply norm-reducing Vieta moves until none is available, then normalize."""
    t = _check(tuple(int(v) for v in t))
    while True:
        best, best_norm = None, t[0] ** 2 + t[1] ** 2 + t[2] ** 2
        for i in range(3):
            cand = vieta_move(t, i)
            n = cand[0] ** 2 + cand[1] ** 2 + cand[2] ** 2
            if n < best_norm:
                best, best_norm = cand, n
        if best is None:
            return normalize(t)
        t = best


def has_reducing_move(t: Triple) -> bool:
    n = sum(v * v for v in t)
    return any(sum(v * v for v in vieta_move(t, i)) < n for i in range(3))


@dataclass(frozen=True)
class NotAdmissible:
    a: int
    kind: str = "not_admissible"


@dataclass(frozen=True)
class Solvable:
    a: int
    witness: Triple
    kind: str = "solvable"


@dataclass(frozen=True)
class FailureCandidate:
    """No point found with |x| <= |y| <= searched_bound; a suspect, not a certificate."""

    a: int
    searched_bound: int
    kind: str = "failure_candidate"


Classification = Union[NotAdmissible, Solvable, FailureCandidate]


def _z_roots(x: int, y: int, a: int) -> list[int]:
    d = x * x * y * y - 4 * (x * x + y * y - a)
    if d < 0:
        return []
    r = math.isqrt(d)
    if r * r != d or (x * y - r) % 2:
        return []
    return sorted({(x * y - r) // 2, (x * y + r) // 2})


def _first_pair(a: int, H: int, lower_triangle: bool = True) -> tuple[int, int] | None:
    """First (x, y) with 0 <= x <= y <= H (or 0 <= x, y <= H) admitting an integral z."""
    if H <= 0:
        return (0, 0) if _z_roots(0, 0, a) else None
    if float(H) ** 4 + 8.0 * H * H + 4.0 * abs(a) >= 2.0**62:
        for x in range(H + 1):
            for y in range(x if lower_triangle else 0, H + 1):
                if _z_roots(x, y, a):
                    return x, y
        return None
    ys = np.arange(H + 1, dtype=np.int64)
    y2 = ys * ys
    for x in range(H + 1):
        sl = slice(x, None) if lower_triangle else slice(0, None)
        yy, yy2 = ys[sl], y2[sl]
        d = x * x * yy2 - 4 * (x * x + yy2 - a)
        ok = d >= 0
        if not ok.any():
            continue
        r = np.floor(np.sqrt(np.where(ok, d, 0).astype(np.float64))).astype(np.int64)
        r = np.where(r * r > d, r - 1, r)
        r = np.where((r + 1) * (r + 1) <= d, r + 1, r)
        good = ok & (r * r == d) & (((x * yy - r) & 1) == 0)
        if good.any():
            return x, int(yy[np.argmax(good)])
    return None


def search_bound(a: int, C: float = 3.0) -> int:
    return int(math.floor(C * math.sqrt(1 + abs(a))))


def has_integral_point(a: int, C: float = 3.0) -> Classification:
    """Classify a by admissibility and a bounded search over (x, y)."""
    if abs(a) > 2**40:
        raise OverflowError("|a| must not exceed 2^40")
    if not is_admissible(a):
        return NotAdmissible(a)
    if abs(a) <= 4:
        H = max(10, search_bound(a, C))
        sols = brute_force_box(a, H)
        if not sols:
            return FailureCandidate(a, H)
        return Solvable(a, normalize(min(sols, key=lambda t: (sum(v * v for v in t), t))))
    H = search_bound(a, C)
    pair = _first_pair(a, H)
    if pair is None:
        return FailureCandidate(a, H)
    x, y = pair
    z = _z_roots(x, y, a)[0]
    witness = normalize((x, y, z))
    assert markoff(witness) == a
    return Solvable(a, witness)


def brute_force_box(a: int, H: int) -> list[Triple]:
    """All integral points with |x|, |y| <= H (z solved exactly), sorted."""
    if (2 * H + 1) ** 2 > 10**8:
        raise ValueError("box too large for exhaustive enumeration")
    out = []
    for x in range(-H, H + 1):
        for y in range(-H, H + 1):
            for z in _z_roots(x, y, a):
                out.append((x, y, z))
    return sorted(out)


def box_has_point(a: int, H: int) -> bool:
    """Existence form of the box oracle: any point with |x|, |y| <= H.

    Independent of the bounded search kernel: candidate z values come from the
    floating-point roots and are accepted only if M(x, y, z) = a holds exactly in
    integer arithmetic. Sign changes of x and y map solutions to solutions, so
    the square 0 <= x, y <= H is scanned in full.
    """
    # x y z reaches about H^4; beyond int64 fall back to the Python-integer oracle
    if float(H) ** 4 + 4.0 * abs(a) >= 2.0**62:
        return bool(brute_force_box(a, H))
    ys = np.arange(H + 1, dtype=np.int64)
    for x in range(H + 1):
        d = (x * ys).astype(np.float64) ** 2 - 4.0 * (x * x + ys * ys - a)
        ok = d >= 0
        if not ok.any():
            continue
        root = np.sqrt(np.where(ok, d, 0.0))
        for sign in (-1.0, 1.0):
            z = np.rint((x * ys + sign * root) / 2).astype(np.int64)
            for dz in (-1, 0, 1):
                zz = z + dz
                m = x * x + ys * ys + zz * zz - x * ys * zz
                if (ok & (m == a)).any():
                    return True
    return False


def orbit(t: Triple, max_height: int) -> set[Triple]:
    """Normal forms reachable from t by Vieta moves through triples of height <= max_height."""
    t = tuple(t)
    seen = {t}
    stack = [t]
    while stack:
        u = stack.pop()
        for i in range(3):
            v = vieta_move(u, i)
            if max(abs(c) for c in v) <= max_height and v not in seen:
                seen.add(v)
                stack.append(v)
            # paired sign changes and permutations
        for v in _symmetries(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return {normalize(u) for u in seen}


def _symmetries(t: Triple):
    x, y, z = t
    for s in ((x, y, z), (-x, -y, z), (-x, y, -z), (x, -y, -z)):
        a, b, c = s
        yield from ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a))
