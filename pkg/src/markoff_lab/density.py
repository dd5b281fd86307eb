"""The smooth weight nu_B and real (Archimedean) densities of M(x, y, z) = a.

The weight is

    nu_B(x, y, z) = int int nu(s z / Z) nu(y / Y) nu(x / X) dY/Y dZ/Z,   X = B^2 / (Y Z),

over Z in [B^(delta+eta), B^(delta+2 eta)] and Y in [B^(1-delta), B^(1-delta+eta)],
with nu a smooth bump of mass 1 on [1, 2] and s = +-1 the sign. In the log
variables (log Y, log Z) the three bump factors cut out a polygon, and the
integral is evaluated by tensor Gauss-Legendre on the exact clipped intervals.

Real densities integrate over the (x, y) chart, where |2z - xy| = sqrt(D) is
bounded below on the support. A second, independent route computes the
volume of the slab |M - a| <= eps directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# bump functions
# ---------------------------------------------------------------------------


def bump0(x):
    """exp(-1 / (1 - x^2)) on (-1, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


@lru_cache(maxsize=None)
def bump0_mass() -> float:
    val, _ = integrate.quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1, 1, epsabs=0, epsrel=1e-13, limit=200)
    return val


def bump(u):
    """Mass-one smooth bump supported on [1, 2]."""
    return (2.0 / bump0_mass()) * bump0(2.0 * np.asarray(u, dtype=float) - 3.0)


@lru_cache(maxsize=None)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


# ---------------------------------------------------------------------------
# weight
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightConfig:
    B: float
    delta: float = 0.2
    eta: float = 0.01
    sign: int = 1
    nodes: int = 24  # Gauss-Legendre nodes per log-variable in nu_B

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if not (0 < self.eta < self.delta / 10) or not self.delta < 1:
            raise ValueError("need 0 < eta < delta / 10 and delta < 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def logB(self) -> float:
        return math.log(self.B)

    def s_window(self) -> tuple[float, float]:
        L = self.logB
        return (1 - self.delta) * L, (1 - self.delta + self.eta) * L

    def t_window(self) -> tuple[float, float]:
        L = self.logB
        return (self.delta + self.eta) * L, (self.delta + 2 * self.eta) * L

    def boxes(self) -> dict[str, tuple[float, float]]:
        """Open coordinate ranges outside which nu_B vanishes (|z| for the z entry)."""
        s0, s1 = self.s_window()
        t0, t1 = self.t_window()
        B2 = self.B**2
        return {
            "x": (B2 * math.exp(-s1 - t1), 2 * B2 * math.exp(-s0 - t0)),
            "y": (math.exp(s0), 2 * math.exp(s1)),
            "z": (math.exp(t0), 2 * math.exp(t1)),
        }

    def empty(self) -> bool:
        s0, s1 = self.s_window()
        t0, t1 = self.t_window()
        return not (s1 > s0 and t1 > t0)


def nu_weight(cfg: WeightConfig, x, y, z, nodes: int | None = None, chunk: int = 2048):
    """nu_B(x, y, z) for array-like inputs (broadcast)."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    shape = x.shape
    x, y, z = x.ravel(), y.ravel(), (cfg.sign * z).ravel()
    out = np.zeros(x.size)
    if cfg.empty():
        return out.reshape(shape)
    n = nodes or cfg.nodes
    xi, wi = _gl(n)
    L = cfg.logB
    sw0, sw1 = cfg.s_window()
    tw0, tw1 = cfg.t_window()
    ok = (x > 0) & (y > 0) & (z > 0)
    idx = np.nonzero(ok)[0]
    for start in range(0, idx.size, chunk):
        sel = idx[start : start + chunk]
        lx, ly, lz = np.log(x[sel]), np.log(y[sel]), np.log(z[sel])
        cx = 2 * L - lx  # nu(x e^{s+t} / B^2) > 0  iff  s + t in (cx, cx + ln 2)
        t0 = np.maximum.reduce([np.full_like(lz, tw0), lz - LN2, cx - sw1])
        t1 = np.minimum.reduce([np.full_like(lz, tw1), lz, cx + LN2 - sw0])
        ht = np.clip(t1 - t0, 0, None) / 2
        t = (t0 + t1)[:, None] / 2 + ht[:, None] * xi[None, :]
        fz = bump(z[sel, None] * np.exp(-t))
        s0 = np.maximum.reduce([np.full_like(t, sw0), (ly - LN2)[:, None] + 0 * t, cx[:, None] - t])
        s1 = np.minimum.reduce([np.full_like(t, sw1), ly[:, None] + 0 * t, cx[:, None] + LN2 - t])
        hs = np.clip(s1 - s0, 0, None) / 2
        s = ((s0 + s1) / 2)[..., None] + hs[..., None] * xi
        fy = bump(y[sel, None, None] * np.exp(-s))
        fx = bump(x[sel, None, None] * np.exp(s + t[..., None]) / cfg.B**2)
        inner = (fy * fx) @ wi * hs
        out[sel] = (fz * inner) @ wi * ht
    return out.reshape(shape)


def nu_weight_oracle(cfg: WeightConfig, x: float, y: float, z: float, tol: float = 1e-11) -> float:
    """Adaptive nested quadrature of the defining double integral (scipy dblquad)."""
    sw0, sw1 = cfg.s_window()
    tw0, tw1 = cfg.t_window()
    B2 = cfg.B**2

    def f(s, t):
        return float(bump(cfg.sign * z * math.exp(-t)) * bump(y * math.exp(-s)) * bump(x * math.exp(s + t) / B2))

    val, _ = integrate.dblquad(f, tw0, tw1, sw0, sw1, epsabs=tol, epsrel=tol)
    return val


# ---------------------------------------------------------------------------
# real densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityValue:
    value: float
    error: float
    route: str

    def __float__(self):
        return self.value


def _outer_grid(cfg: WeightConfig, n: int):
    """Gauss-Legendre nodes in (log x, log y) over the support box, with dx dy weights."""
    bx, by = cfg.boxes()["x"], cfg.boxes()["y"]
    xi, wi = _gl(n)
    u0, u1 = math.log(bx[0]), math.log(bx[1])
    v0, v1 = math.log(by[0]), math.log(by[1])
    u = (u0 + u1) / 2 + (u1 - u0) / 2 * xi
    v = (v0 + v1) / 2 + (v1 - v0) / 2 * xi
    X, Y = np.meshgrid(np.exp(u), np.exp(v), indexing="ij")
    W = np.outer(wi * (u1 - u0) / 2, wi * (v1 - v0) / 2) * X * Y
    return X, Y, W


def _z_roots(x, y, a):
    """Both real roots of z^2 - xy z + (x^2 + y^2 - a) = 0 (NaN where D < 0), and sqrt(D)."""
    D = (x * y) ** 2 - 4 * (x * x + y * y - a)
    sq = np.sqrt(np.where(D > 0, D, np.nan))
    big = (x * y + sq) / 2
    small = 2 * (x * x + y * y - a) / (x * y + sq)
    return small, big, sq


def _surface_integrand(cfg: WeightConfig, X, Y, a):
    zs, zb, sq = _z_roots(X, Y, a)
    total = np.zeros_like(X)
    zlo, zhi = cfg.boxes()["z"]
    for z in (zs, zb):
        live = np.isfinite(z) & (cfg.sign * z > zlo) & (cfg.sign * z < zhi)
        if live.any():
            total[live] += nu_weight(cfg, X[live], Y[live], z[live]) / sq[live]
    return total


def sigma_infty(cfg: WeightConfig, a: float, n: int = 48) -> DensityValue:
    """Surface-integral route: int nu_B / |2z - xy| over M = a in the (x, y) chart.

    Error estimate: difference between n and 2n outer nodes.
    """
    if cfg.empty():
        return DensityValue(0.0, 0.0, "surface-integral")
    vals = []
    for m in (n, 2 * n):
        X, Y, W = _outer_grid(cfg, m)
        vals.append(float((W * _surface_integrand(cfg, X, Y, a)).sum()))
    return DensityValue(vals[1], abs(vals[1] - vals[0]), "surface-integral")


def sigma_infty_slab(cfg: WeightConfig, a: float, eps: float | None = None, n: int = 48, nz: int = 8) -> DensityValue:
    """Slab route: (2 eps)^-1 times the nu_B-weighted volume of |M - a| <= eps.

    For each (x, y) the slab is a union of z-intervals bounded by roots of
    M = a - eps and M = a + eps; nu_B is integrated over them directly. The error
    estimate combines the outer-grid refinement and the eps -> eps/2 change.
    """
    if cfg.empty():
        return DensityValue(0.0, 0.0, "slab-limit")
    if eps is None:
        eps = 1e-3 * cfg.B**2
    results = {}
    for m, e in ((n, eps), (2 * n, eps), (2 * n, eps / 2)):
        X, Y, W = _outer_grid(cfg, m)
        results[(m, e)] = float((W * _slab_integrand(cfg, X, Y, a, e, nz)).sum()) / (2 * e)
    best = results[(2 * n, eps / 2)]
    err = abs(results[(2 * n, eps)] - results[(n, eps)]) + abs(best - results[(2 * n, eps)])
    return DensityValue(best, err, "slab-limit")


def _slab_integrand(cfg, X, Y, a, eps, nz):
    """Integral of nu_B over {z : |M(x, y, z) - a| <= eps} for each (x, y)."""
    xi, wi = _gl(nz)
    lo_s, lo_b, _ = _z_roots(X, Y, a - eps)
    hi_s, hi_b, _ = _z_roots(X, Y, a + eps)
    # M - a is convex in z: the slab is [hi_s, lo_s] and [lo_b, hi_b], or
    # [hi_s, hi_b] when M = a - eps has no real root
    split = np.isfinite(lo_s)
    pieces = [
        (hi_s, np.where(split, lo_s, hi_b)),
        (np.where(split, lo_b, np.nan), np.where(split, hi_b, np.nan)),
    ]
    total = np.zeros_like(X)
    zlo, zhi = cfg.boxes()["z"]
    for left, right in pieces:
        a_lo = np.minimum(cfg.sign * left, cfg.sign * right)
        a_hi = np.maximum(cfg.sign * left, cfg.sign * right)
        live = np.isfinite(left) & np.isfinite(right) & (a_hi > zlo) & (a_lo < zhi)
        if not live.any():
            continue
        L, R = left[live], right[live]
        h = (R - L) / 2
        zz = (L + R)[:, None] / 2 + h[:, None] * xi[None, :]
        vals = nu_weight(cfg, np.repeat(X[live], nz), np.repeat(Y[live], nz), zz.ravel()).reshape(zz.shape)
        total[live] += (vals @ wi) * h
    return total


def a_support(cfg: WeightConfig, grid: int = 41) -> tuple[float, float]:
    """Interval containing every a = M(x, y, z) with nu_B(x, y, z) > 0."""
    bx, by, bz = cfg.boxes()["x"], cfg.boxes()["y"], cfg.boxes()["z"]
    xs = np.linspace(*bx, grid)
    ys = np.linspace(*by, grid)
    zs = cfg.sign * np.linspace(*bz, grid)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    keep = (X * Y * np.abs(Z) > 0.9 * cfg.B**2) & (X * Y * np.abs(Z) < 8.5 * cfg.B**2)
    M = X**2 + Y**2 + Z**2 - X * Y * Z
    M = M[keep]
    pad = 0.05 * (M.max() - M.min())
    return float(M.min() - pad), float(M.max() + pad)


@dataclass
class SigmaGrid:
    """sigma_infty tabulated on Gauss-Legendre nodes in a, with a PCHIP interpolant."""

    cfg: WeightConfig
    a_nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    errors: np.ndarray

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        lo, hi = self.a_nodes[0], self.a_nodes[-1]
        out = np.zeros_like(a)
        inside = (a >= lo) & (a <= hi)
        out[inside] = self._interp(a[inside])
        return out

    @property
    def _interp(self):
        ext_a = np.concatenate([[self.support[0]], self.a_nodes, [self.support[1]]])
        ext_v = np.concatenate([[0.0], self.values, [0.0]])
        return PchipInterpolator(ext_a, ext_v)

    @property
    def support(self):
        return a_support(self.cfg)


@lru_cache(maxsize=32)
def sigma_grid(cfg: WeightConfig, nodes: int = 256, n: int = 32) -> SigmaGrid:
    lo, hi = a_support(cfg)
    xi, wi = _gl(nodes)
    a = (lo + hi) / 2 + (hi - lo) / 2 * xi
    vals, errs = np.zeros(nodes), np.zeros(nodes)
    for i, ai in enumerate(a):
        d = sigma_infty(cfg, float(ai), n=n)
        vals[i], errs[i] = d.value, d.error
    return SigmaGrid(cfg, a, wi * (hi - lo) / 2, vals, errs)


def sigma_tensor2(cfg: WeightConfig, nodes: int = 256, n: int = 32) -> DensityValue:
    """int sigma_infty(a)^2 da by Gauss-Legendre over the a-support.

    Error: the same integral on half the nodes, plus propagated pointwise errors.
    """
    if cfg.empty():
        return DensityValue(0.0, 0.0, "a-integral")
    g = sigma_grid(cfg, nodes, n)
    val = float((g.weights * g.values**2).sum())
    h = sigma_grid(cfg, nodes // 2, n)
    coarse = float((h.weights * h.values**2).sum())
    prop = float((g.weights * 2 * np.abs(g.values) * g.errors).sum())
    return DensityValue(val, abs(val - coarse) + prop, "a-integral")


def lattice_points(cfg: WeightConfig):
    """Integer (x, y, z) in the support box of nu_B with x y |z| in (B^2, 8 B^2)."""
    bx, by, bz = cfg.boxes()["x"], cfg.boxes()["y"], cfg.boxes()["z"]
    zs = np.arange(math.floor(bz[0]) + 1, math.ceil(bz[1]), dtype=np.int64)
    ys = np.arange(math.floor(by[0]) + 1, math.ceil(by[1]), dtype=np.int64)
    B2 = cfg.B**2
    out = []
    for z in zs:
        for y in ys:
            lo = max(bx[0], B2 / (y * z))
            hi = min(bx[1], 8 * B2 / (y * z))
            if hi <= lo:
                continue
            xs = np.arange(math.floor(lo) + 1, math.ceil(hi), dtype=np.int64)
            if xs.size:
                out.append(np.stack([xs, np.full_like(xs, y), np.full_like(xs, cfg.sign * z)], axis=1))
    if not out:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(out)


def sigma_tensor2_lattice(cfg: WeightConfig, nodes: int = 256, n: int = 32) -> DensityValue:
    """Lattice discretization of int nu_B(x) sigma_{M(x)} dx."""
    pts = lattice_points(cfg)
    if len(pts) == 0:
        return DensityValue(0.0, 0.0, "lattice-sum")
    x, y, z = pts.T.astype(float)
    w = nu_weight(cfg, x, y, z)
    a = pts[:, 0] ** 2 + pts[:, 1] ** 2 + pts[:, 2] ** 2 - pts[:, 0] * pts[:, 1] * pts[:, 2]
    g = sigma_grid(cfg, nodes, n)
    return DensityValue(float((w * g(a.astype(float))).sum()), float("nan"), "lattice-sum")


def sigma_tensor2_volume(cfg: WeightConfig, n: int = 32, nodes: int = 256, n_sigma: int = 32) -> DensityValue:
    """Continuous form of the lattice route: int nu_B(x) sigma_{M(x)} dx by 3D Gauss-Legendre."""
    g = sigma_grid(cfg, nodes, n_sigma)
    vals = []
    for m in (n // 2, n):
        X, Y, W = _outer_grid(cfg, m)
        bz = cfg.boxes()["z"]
        xi, wi = _gl(m)
        t0, t1 = math.log(bz[0]), math.log(bz[1])
        zs = np.exp((t0 + t1) / 2 + (t1 - t0) / 2 * xi)
        wz = wi * (t1 - t0) / 2 * zs
        total = 0.0
        for z, w in zip(cfg.sign * zs, wz):
            nu = nu_weight(cfg, X, Y, np.full_like(X, z))
            live = nu > 0
            a = X[live] ** 2 + Y[live] ** 2 + z * z - X[live] * Y[live] * z
            total += w * float((W[live] * nu[live] * g(a)).sum())
        vals.append(total)
    return DensityValue(vals[1], abs(vals[1] - vals[0]), "volume-integral")


def sigma_tensor2_fixed(cfg: WeightConfig, a1: float, a2: float, n: int = 32) -> DensityValue:
    """Density of G = M(v1, v2, a1) - M(w1, w2, a2) = 0 against nu_B(v, a1) nu_B(w, a2).

    Quadrature over (v2, w1, w2), solving G = 0 for v1; Jacobian 1/|2 v1 - a1 v2|.
    """
    zlo, zhi = cfg.boxes()["z"]
    if not (zlo < cfg.sign * a1 < zhi and zlo < cfg.sign * a2 < zhi):
        return DensityValue(0.0, 0.0, "fixed-pair")
    vals = []
    for m in (n, 2 * n):
        W1, W2, Ww = _outer_grid(cfg, m)
        nuw = nu_weight(cfg, W1, W2, np.full_like(W1, a2))
        live = nuw > 0
        b = (W1**2 + W2**2 + a2 * a2 - a2 * W1 * W2)[live]
        wt = (Ww * nuw)[live]
        by = cfg.boxes()["y"]
        xi, wi = _gl(m)
        l0, l1 = math.log(by[0]), math.log(by[1])
        v2 = np.exp((l0 + l1) / 2 + (l1 - l0) / 2 * xi)
        wv = wi * (l1 - l0) / 2 * v2
        V2 = np.broadcast_to(v2[None, :], (b.size, m))
        Bb = np.broadcast_to(b[:, None], (b.size, m))
        # v1^2 - a1 v2 v1 + (v2^2 + a1^2 - b) = 0
        D = (a1 * V2) ** 2 - 4 * (V2**2 + a1 * a1 - Bb)
        sq = np.sqrt(np.where(D > 0, D, np.nan))
        total = 0.0
        for r in ((a1 * V2 + sq) / 2, (a1 * V2 - sq) / 2):
            good = np.isfinite(r) & (r > 0)
            f = np.zeros_like(V2)
            if good.any():
                f[good] = nu_weight(cfg, r[good], V2[good], np.full(good.sum(), a1)) / sq[good]
            total += float(wt @ (f @ wv))
        vals.append(total)
    return DensityValue(vals[1], abs(vals[1] - vals[0]), "fixed-pair")


@dataclass
class ProgressionReport:
    N: int
    b: int
    progression_sum: float
    full_sum: float
    tensor2: float
    relative_deviation: float


def poisson_progression_check(cfg: WeightConfig, N: int, b: int, nodes: int = 256, n: int = 32) -> ProgressionReport:
    """Compare sum over integer a = b mod N of sigma_a^2 with sigma_tensor2 / N."""
    if not 1 <= N <= 8:
        raise ValueError("N must be in 1..8")
    g = sigma_grid(cfg, nodes, n)
    lo, hi = g.support
    a = np.arange(math.ceil(lo), math.floor(hi) + 1)
    sig2 = g(a.astype(float)) ** 2
    prog = float(sig2[(a - b) % N == 0].sum())
    t2 = sigma_tensor2(cfg, nodes, n).value
    return ProgressionReport(N, b % N, prog, float(sig2.sum()), t2, abs(prog - t2 / N) / (t2 / N))


def with_nodes(cfg: WeightConfig, nodes: int) -> WeightConfig:
    return replace(cfg, nodes=nodes)
