"""Delta-method machinery for quaternary quadratic forms.

Counts of F(x) = k weighted by a smooth annulus weight w(lambda x / P) are
compared with the main term sigma_infty * S, where S is the singular series
sum_q q^-4 S_q(F, k, 0) and sigma_infty the real density of the level set.

Real densities use the substitution x = P D u with D = diag(1 / lambda):

    sigma_infty = P^2 det(D) rho(k / P^2),

where rho(t) is the density of F_lambda(u) = F(D u) = t against w(u). rho is
computed two ways: a thin slab |F_lambda - t| <= eps with Richardson
extrapolation in eps, and a coarea formula over a gradient-weighted partition
of unity.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from . import BudgetExceeded
from .arith import ramanujan_sum
from .density import bump0, bump0_mass
from .expsums import QuadForm4, S_q_quadform

E_INV = math.e  # w peaks at 1 after dividing by exp(-1)


def varrho0(x):
    return bump0(x)


def varrho(x):
    """4 (int varrho0)^-1 varrho0(4x - 3): mass one, supported on [1/2, 1]."""
    return (4.0 / bump0_mass()) * bump0(4.0 * np.asarray(x, dtype=float) - 3.0)


# ---------------------------------------------------------------------------
# the kernel h(x, y)
# ---------------------------------------------------------------------------


def h_kernel(x: float, y):
    """h(x, y) = sum_j (1/(xj)) (varrho(xj) - varrho(|y|/(xj))), summed over the finitely many live j.

    varrho(xj) > 0 only for 1/(2x) < j < 1/x; varrho(|y|/(xj)) > 0 only for
    |y|/x < j < 2|y|/x.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    y = np.abs(np.asarray(y, dtype=float))
    first = 0.0
    for j in range(max(1, math.floor(1 / (2 * x))), math.ceil(1 / x) + 1):
        first += float(varrho(x * j)) / (x * j)
    out = np.full(y.shape, first)
    jmax = int(np.ceil(2 * y.max() / x)) + 1 if y.size else 0
    jmin = max(1, int(np.floor(y.min() / x))) if y.size else 1
    for j in range(jmin, jmax + 1):
        out -= varrho(y / (x * j)) / (x * j)
    return out if out.ndim else float(out)


def h_naive(x: float, y: float, jmax: int = 10**6) -> float:
    """Oracle: the defining series summed over every j <= jmax."""
    j = np.arange(1, jmax + 1, dtype=float)
    return float(((varrho(x * j) - varrho(abs(y) / (x * j))) / (x * j)).sum())


def _plateau(y):
    """Smooth function equal to 1 on [-1, 1], tapering to 0 on 1 <= |y| <= 2."""
    y = np.abs(np.asarray(y, dtype=float))
    u = np.clip(y - 1.0, 0.0, 1.0)
    a = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1 - u, 1.0)), 0.0)
    b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    return np.where(y <= 1, 1.0, a / (a + b + 1e-300))


TEST_FUNCTIONS: dict[str, tuple[Callable, float]] = {
    # name: (f, support half-width)
    "bump": (lambda y: bump0(np.asarray(y) / 1.0) * E_INV, 1.0),
    "vanishing_at_zero": (lambda y: (np.asarray(y) ** 2) * bump0(np.asarray(y)) * E_INV, 1.0),
    "plateau": (_plateau, 2.0),
}


def taylor_check(x: float, f: str | Callable = "bump", support: float | None = None, panels_per_x: int = 8) -> float:
    """|int f(y) h(x, y) dy - f(0)| by composite Gauss-Legendre on panels of width ~ x / panels_per_x."""
    if isinstance(f, str):
        f, K = TEST_FUNCTIONS[f]
    else:
        K = support if support is not None else 1.0
    n_panels = max(16, int(math.ceil(2 * K / (x / panels_per_x))))
    edges = np.linspace(-K, K, n_panels + 1)
    xi, wi = np.polynomial.legendre.leggauss(12)
    mids, halves = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    ys = (mids[:, None] + halves[:, None] * xi[None, :]).ravel()
    ws = (halves[:, None] * wi[None, :]).ravel()
    val = float((ws * np.asarray(f(ys)) * h_kernel(x, ys)).sum())
    return abs(val - float(np.asarray(f(0.0))))


def _delta_raw(n: int, Q: float) -> float:
    y = n / Q**2
    # h(q/Q, y) = 0 once q/Q >= max(1, 2|y|): no j is left in either window
    qmax = int(math.ceil(Q * max(1.0, 2 * abs(y))))
    return sum(ramanujan_sum(q, n) * h_kernel(q / Q, y) for q in range(1, qmax + 1)) / Q**2


def delta_constant(Q: float) -> float:
    """c_Q, fixed by requiring the expansion to return exactly 1 at n = 0."""
    return 1.0 / _delta_raw(0, Q)


def delta_identity(n: int, Q: float, normalized: bool = True) -> float:
    """c_Q Q^-2 sum_q c_q(n) h(q/Q, n/Q^2), which represents the indicator of n = 0.

    With normalized=False the constant c_Q is dropped; its distance from 1 is the
    deviation reported by the tests.
    """
    raw = _delta_raw(n, Q)
    return raw * delta_constant(Q) if normalized else raw


# ---------------------------------------------------------------------------
# weight and real densities
# ---------------------------------------------------------------------------


def annulus_weight(u):
    """w(u) = varrho0(2(|u| - 3/2)) / e^-1: smooth, supported on 1 <= |u| <= 2, peak 1."""
    r = np.sqrt((np.asarray(u, dtype=float) ** 2).sum(axis=-1))
    return bump0(2.0 * (r - 1.5)) * E_INV


def _lambda_matrix(F: QuadForm4, lam: Sequence[float]) -> np.ndarray:
    D = np.diag(1.0 / np.asarray(lam, dtype=float))
    return D @ F.matrix() @ D


def _grid(n: int, lo=-2.0, hi=2.0, panels: int = 4):
    xi, wi = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(lo, hi, panels + 1)
    pts = np.concatenate([(a + b) / 2 + (b - a) / 2 * xi for a, b in zip(edges[:-1], edges[1:])])
    wts = np.concatenate([(b - a) / 2 * wi for a, b in zip(edges[:-1], edges[1:])])
    return pts, wts


def _solve_axis(A: np.ndarray, i: int, U: np.ndarray, t: float):
    """Roots u_i of u^T A u = t with the other coordinates given by U (..., 3)."""
    others = [j for j in range(4) if j != i]
    Ao = A[np.ix_(others, others)]
    a = A[i, i]
    b = 2 * U @ A[others, i]
    c = np.einsum("...i,ij,...j->...", U, Ao, U) - t
    if abs(a) < 1e-14:
        r = np.where(b != 0, -c / np.where(b != 0, b, 1), np.nan)
        return [r]
    disc = b * b - 4 * a * c
    sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
    return [(-b - sq) / (2 * a), (-b + sq) / (2 * a)]


def _assemble(U: np.ndarray, i: int, r: np.ndarray) -> np.ndarray:
    full = np.empty(U.shape[:-1] + (4,))
    others = [j for j in range(4) if j != i]
    full[..., others] = U
    full[..., i] = r
    return full


def _rho_coarea(A: np.ndarray, t: float, n: int = 24, panels: int = 4, power: int = 4) -> float:
    """Density of u^T A u = t against w via coarea and a gradient partition of unity."""
    pts, wts = _grid(n, panels=panels)
    G2 = np.stack(np.meshgrid(pts, pts, indexing="ij"), axis=-1).reshape(-1, 2)
    W2 = np.outer(wts, wts).ravel()
    total = 0.0
    for u0, w0 in zip(pts, wts):
        G = np.column_stack([np.full(len(G2), u0), G2])
        for i in range(4):
            for r in _solve_axis(A, i, G, t):
                ok = np.isfinite(r)
                if not ok.any():
                    continue
                X = _assemble(G[ok], i, r[ok])
                grad = 2 * X @ A
                denom = (grad ** (2 * power)).sum(axis=-1)
                weight = np.abs(grad[:, i]) ** (2 * power - 1) / np.where(denom > 0, denom, np.inf)
                total += w0 * float((W2[ok] * annulus_weight(X) * weight).sum())
    return total


def _partition(X: np.ndarray, A: np.ndarray, i: int, power: int = 4) -> np.ndarray:
    """omega_i = (d_i F)^2p / sum_j (d_j F)^2p; the omega_i sum to 1 off the origin."""
    g = (2 * X @ A) ** (2 * power)
    s = g.sum(axis=-1)
    return g[..., i] / np.where(s > 0, s, np.inf)


def _slab_axis_intervals(A: np.ndarray, i: int, G: np.ndarray, t: float, eps: float):
    """Pieces of {u_i : |F - t| <= eps} along axis i, as (left, right) arrays padded with NaN."""
    a = A[i, i]
    if a == 0:
        r1, r2 = _solve_axis(A, i, G, t - eps)[0], _solve_axis(A, i, G, t + eps)[0]
        return [(np.fmin(r1, r2), np.fmax(r1, r2))]
    if a < 0:
        A, t = -A, -t
    # convex in u_i: {F <= t + eps} = [hi0, hi1], and {F >= t - eps} drops (lo0, lo1)
    lo = _solve_axis(A, i, G, t - eps)
    hi = _solve_axis(A, i, G, t + eps)
    split = np.isfinite(lo[0])
    return [
        (hi[0], np.where(split, lo[0], hi[1])),
        (np.where(split, lo[1], np.nan), np.where(split, hi[1], np.nan)),
    ]


def _rho_slab(A: np.ndarray, t: float, eps: float, n: int = 24, panels: int = 4, nz: int = 8) -> float:
    """(2 eps)^-1 times the w-weighted volume of |u^T A u - t| <= eps.

    The slab is split with the same gradient partition of unity as the coarea
    route; piece i is integrated exactly along axis i, where it is transversal.
    """
    pts, wts = _grid(n, panels=panels)
    G2 = np.stack(np.meshgrid(pts, pts, indexing="ij"), axis=-1).reshape(-1, 2)
    W2 = np.outer(wts, wts).ravel()
    xi, wi = np.polynomial.legendre.leggauss(nz)
    total = 0.0
    for u0, w0 in zip(pts, wts):
        G = np.column_stack([np.full(len(G2), u0), G2])
        for i in range(4):
            for left, right in _slab_axis_intervals(A, i, G, t, eps):
                ok = np.isfinite(left) & np.isfinite(right)
                if not ok.any():
                    continue
                L, R = left[ok], right[ok]
                h = (R - L) / 2
                zz = (L + R)[:, None] / 2 + h[:, None] * xi[None, :]
                X = _assemble(np.repeat(G[ok][:, None, :], nz, axis=1), i, zz)
                vals = annulus_weight(X) * _partition(X, A, i)
                total += w0 * float((W2[ok] * (vals @ wi) * h).sum())
    return total / (2 * eps)


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    error: float
    route: str


def sigma_infty_quadform(F: QuadForm4, k: float, lam: Sequence[float] = (1, 1, 1, 1), P: float = 1.0, eps0: float = 0.02, n: int = 12, panels: int = 4) -> DensityEstimate:
    """Slab route with Richardson extrapolation over eps0 and eps0 / 2."""
    A = _lambda_matrix(F, lam)
    scale = P**2 / float(np.prod(lam))
    t = k / P**2
    r1 = _rho_slab(A, t, eps0, n, panels)
    r2 = _rho_slab(A, t, eps0 / 2, n, panels)
    rich = (4 * r2 - r1) / 3
    return DensityEstimate(scale * rich, scale * abs(rich - r2), "slab")


def sigma_infty_quadform_coarea(F: QuadForm4, k: float, lam: Sequence[float] = (1, 1, 1, 1), P: float = 1.0, n: int = 24, panels: int = 4) -> DensityEstimate:
    """Coarea route; error from refining the grid panels."""
    A = _lambda_matrix(F, lam)
    scale = P**2 / float(np.prod(lam))
    t = k / P**2
    coarse = _rho_coarea(A, t, n // 2, panels)
    fine = _rho_coarea(A, t, n, panels)
    return DensityEstimate(scale * fine, scale * abs(fine - coarse), "coarea")


def level_density(F: QuadForm4, lam: Sequence[float] = (1, 1, 1, 1), nt: int = 32, n: int = 12):
    """rho(s), the density of F_lambda = s against w, as a Chebyshev interpolant on its full range."""
    A = _lambda_matrix(F, lam)
    ev = np.linalg.eigvalsh(A)
    smin, smax = 4 * min(ev.min(), 0.0), 4 * max(ev.max(), 0.0)
    nodes = np.cos(np.pi * (np.arange(nt) + 0.5) / nt)
    ts = (smin + smax) / 2 + (smax - smin) / 2 * nodes
    vals = [_rho_coarea(A, float(t), n, 4) for t in ts]
    cheb = np.polynomial.Chebyshev.fit(ts, vals, nt - 1, domain=[smin, smax])
    return cheb, (smin, smax)


def I_q_zero(F: QuadForm4, k: float, lam: Sequence[float], P: float, q: int, density=None) -> float:
    """I_q at c = 0, reduced to one dimension by the coarea formula.

    I_q = P^4 / prod(lambda) * int rho(s) h(q/Q, (P^2 s - k)/Q^2) ds. A
    diagnostic: I_q / Q^2 tends to sigma_infty as q / Q -> 0.
    """
    Q = math.sqrt(1 + F.norm()) * P
    rho, (smin, smax) = density if density is not None else level_density(F, lam)
    x = q / Q
    n_panels = max(64, int(math.ceil((smax - smin) / (x * Q**2 / P**2 / 16))))
    edges = np.linspace(smin, smax, n_panels + 1)
    xi, wi = np.polynomial.legendre.leggauss(8)
    mids, halves = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    ss = (mids[:, None] + halves[:, None] * xi).ravel()
    ws = (halves[:, None] * wi).ravel()
    vals = np.clip(rho(ss), 0.0, None) * h_kernel(x, (P**2 * ss - k) / Q**2)
    return P**4 / float(np.prod(lam)) * float((ws * vals).sum())


# ---------------------------------------------------------------------------
# singular series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularSeries:
    value: float
    tail: float
    Kq: int
    C: float


def frak_S(F: QuadForm4, k: int, Kq: int) -> SingularSeries:
    """sum_{q <= Kq} q^-4 S_q(F, k, 0) with a partial-summation tail bound.

    With C = max_{X <= Kq} sum_{q <= X} |S_q| / X^(7/2), the tail over q > Kq is
    at most 8 C Kq^(-1/2).
    """
    total = 0.0
    running = 0
    C = 0.0
    for q in range(1, Kq + 1):
        s = S_q_quadform(F, k, (0, 0, 0, 0), q)
        total += s / q**4
        running += abs(s)
        C = max(C, running / q**3.5)
    return SingularSeries(total, 8 * C * Kq**-0.5, Kq, C)


def local_factor(F: QuadForm4, k: int, p: int, L: int) -> float:
    """1 + sum_{1 <= l <= L} p^-4l S_{p^l}(F, k, 0)."""
    return 1.0 + sum(S_q_quadform(F, k, (0, 0, 0, 0), p**l) / p ** (4 * l) for l in range(1, L + 1))


# ---------------------------------------------------------------------------
# counting and comparison
# ---------------------------------------------------------------------------


def weighted_count(
    F: QuadForm4,
    k: int,
    lam: Sequence[float] = (1, 1, 1, 1),
    P: float = 1.0,
    budget: int = 5 * 10**7,
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
    box: Sequence[tuple[int, int]] | None = None,
) -> float:
    """Sum of w(lambda_1 x_1 / P, ..., lambda_4 x_4 / P) over integral x with F(x) = k.

    A custom weight takes integer points of shape (N, 4); it must vanish outside
    ``box`` (inclusive (lo, hi) per coordinate), which then replaces the default
    box |x_i| <= 2P / lambda_i. The coordinate with the largest diagonal
    coefficient is solved from the quadratic, the other three are enumerated.
    """
    lam = np.asarray(lam, dtype=float)
    if box is None:
        H = np.floor(2 * P / lam).astype(np.int64)
        box = [(-int(h), int(h)) for h in H]
    if weight is None:
        weight = lambda X: annulus_weight(X * lam / P)  # noqa: E731
    diag = np.array(F.diag)
    i = int(np.argmax(np.abs(diag)))
    others = [j for j in range(4) if j != i]
    sizes = [box[j][1] - box[j][0] + 1 for j in others]
    if min(sizes) <= 0:
        return 0.0
    if math.prod(sizes) > budget:
        raise BudgetExceeded("enumeration box exceeds budget")
    rng = [np.arange(box[j][0], box[j][1] + 1, dtype=np.int64) for j in others]
    G = np.stack(np.meshgrid(*rng, indexing="ij"), axis=-1).reshape(-1, 3)
    cross = dict(F.cross)
    a = int(diag[i])
    # F = a x_i^2 + b x_i + c with b, c depending on the enumerated coordinates
    b = np.zeros(len(G), dtype=np.int64)
    c = np.full(len(G), -k, dtype=np.int64)
    for col, j in enumerate(others):
        c += int(diag[j]) * G[:, col] ** 2
        b += cross.get((min(i, j), max(i, j)), 0) * G[:, col]
        for col2, j2 in enumerate(others):
            if j2 > j:
                c += cross.get((j, j2), 0) * G[:, col] * G[:, col2]
    roots = []
    if a == 0:
        if np.any((b == 0) & (c == 0)):
            raise NotImplementedError("every value of the solved coordinate is a solution")
        ok = (b != 0) & (c % np.where(b != 0, b, 1) == 0)
        idx = np.nonzero(ok)[0]
        roots.append((idx, -c[idx] // b[idx]))
    else:
        disc = b * b - 4 * a * c
        okd = disc >= 0
        s = np.floor(np.sqrt(np.where(okd, disc, 0).astype(float))).astype(np.int64)
        s = np.where(s * s > disc, s - 1, s)
        s = np.where((s + 1) * (s + 1) <= disc, s + 1, s)
        square = okd & (s * s == disc)
        for sign in (-1, 1):
            num = -b + sign * s
            good = square & (num % (2 * a) == 0)
            if sign == 1:
                good &= s != 0  # a double root is counted once
            idx = np.nonzero(good)[0]
            roots.append((idx, num[idx] // (2 * a)))
    total = 0.0
    for idx, r in roots:
        inside = (r >= box[i][0]) & (r <= box[i][1])
        idx, r = idx[inside], r[inside]
        X = np.empty((len(idx), 4), dtype=np.int64)
        X[:, others] = G[idx]
        X[:, i] = r
        total += float(np.sum(weight(X)))
    return total


def error_factor(F: QuadForm4, lam: Sequence[float]) -> float:
    """E(F, lambda) at epsilon = 0."""
    nF = 1 + F.norm()
    prod = float(np.prod(lam))
    return nF**0.75 * nF**32 * prod**15 / abs(F.det()) ** 8 + nF**2.75 * max(lam) ** 4


@dataclass
class MainTermReport:
    sigma_infty: float
    frakS_truncated: float
    frakS_tail: float
    brute_count: float
    residual: float
    P: float
    normalized_residual: float
    E_factor: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MainTermReport":
        return cls(**json.loads(text))


def blackbox_compare(F: QuadForm4, k: int, lam: Sequence[float], P: float, Kq: int = 100, n: int = 24) -> MainTermReport:
    """Weighted count against sigma_infty * S; residual normalized by P^(3/2)."""
    sig = sigma_infty_quadform_coarea(F, k, lam, P, n=n).value
    S = frak_S(F, k, Kq)
    count = weighted_count(F, k, lam, P)
    resid = count - sig * S.value
    return MainTermReport(
        float(sig), float(S.value), float(S.tail), float(count), float(resid), float(P), float(resid / P**1.5), error_factor(F, lam)
    )
