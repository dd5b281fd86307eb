"""Weighted representation counts r_a and the approximate variance.

r_a(B) = sum of nu_B(x, y, z) over integral points with M(x, y, z) = a. The
variance compares r_a with the prediction s_a(K) * sigma_infty(a) summed over
every integer a the weight can reach:

    Var = sum_a (r_a - s_a(K) sigma_a)^2 = Sigma1 - 2 Sigma2 + Sigma3.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .density import WeightConfig, a_support, lattice_points, nu_weight, sigma_grid
from .expsums import T_full_table

MAX_PAIRS = 10**8


@dataclass
class CountProfile:
    cfg: WeightConfig
    a: np.ndarray  # sorted distinct values of M hit by the support
    r: np.ndarray  # r_a for each entry of a
    points: int  # lattice points visited
    total_weight: float

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.a, self.r)}


def _weighted_points(cfg: WeightConfig):
    by, bz = cfg.boxes()["y"], cfg.boxes()["z"]
    if (by[1] - by[0]) * (bz[1] - bz[0]) > MAX_PAIRS:
        raise RuntimeError("support windows exceed the (y, z) enumeration budget")
    pts = lattice_points(cfg)
    if len(pts) == 0:
        return pts, np.zeros(0), np.zeros(0, dtype=np.int64)
    w = nu_weight(cfg, *pts.T.astype(float))
    x, y, z = pts.T
    a = x * x + y * y + z * z - x * y * z
    return pts, w, a


def r_profile(cfg: WeightConfig) -> CountProfile:
    """Bucket nu_B over the lattice points of its support by a = M(x, y, z)."""
    pts, w, a = _weighted_points(cfg)
    if len(pts) == 0:
        return CountProfile(cfg, np.zeros(0, dtype=np.int64), np.zeros(0), 0, 0.0)
    keys, inv = np.unique(a, return_inverse=True)
    r = np.bincount(inv, weights=w)
    live = r > 0
    return CountProfile(cfg, keys[live], r[live], len(pts), float(w.sum()))


def naive_weight_sum(cfg: WeightConfig) -> tuple[float, dict[int, float]]:
    """Oracle: every integer point of the full support box, no x-range pruning."""
    bx, by, bz = cfg.boxes()["x"], cfg.boxes()["y"], cfg.boxes()["z"]
    xs = np.arange(math.floor(bx[0]), math.ceil(bx[1]) + 1)
    ys = np.arange(math.floor(by[0]), math.ceil(by[1]) + 1)
    total, buckets = 0.0, {}
    for z in range(math.floor(bz[0]), math.ceil(bz[1]) + 1):
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        zz = cfg.sign * z
        w = nu_weight(cfg, X, Y, np.full(X.shape, zz))
        total += float(w.sum())
        a = X**2 + Y**2 + zz * zz - X * Y * zz
        for k, v in zip(a[w > 0].tolist(), w[w > 0].tolist()):
            buckets[k] = buckets.get(k, 0.0) + v
    return total, buckets


def s_table(K: int) -> tuple[int, np.ndarray]:
    """s_a(K) as floats indexed by a mod lcm(1..K)."""
    L = math.lcm(*range(1, K + 1))
    out = np.zeros(L)
    idx = np.arange(L)
    for m in range(1, K + 1):
        tab = np.array(T_full_table(m), dtype=float)
        out += tab[idx % m] / m**3
    return L, out


@dataclass
class VarianceReport:
    B: float
    K: int
    var: float
    sigma1: float
    sigma2: float
    sigma3: float
    a_range: tuple[int, int]
    profile: CountProfile
    s_values: np.ndarray
    sigma_values: np.ndarray
    a_values: np.ndarray
    r_values: np.ndarray

    @property
    def decomposition_residual(self) -> float:
        return abs(self.var - (self.sigma1 - 2 * self.sigma2 + self.sigma3)) / max(abs(self.var), 1e-300)

    @property
    def normalized(self) -> float:
        """Var / (B^2 (log B)^2)."""
        return self.var / (self.B**2 * math.log(self.B) ** 2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["a", "r_a", "s_aK", "sigma", "residual"])
            for a, r, s, sg in zip(self.a_values, self.r_values, self.s_values, self.sigma_values):
                if r == 0 and sg == 0:
                    continue
                wr.writerow([int(a), repr(float(r)), repr(float(s)), repr(float(sg)), repr(float(r - s * sg))])


def variance(cfg: WeightConfig, K: int, a_range: tuple[int, int] | None = None, nodes: int = 256, n: int = 32) -> VarianceReport:
    """Approximate variance over every integer a in a_range (default: the reachable range)."""
    prof = r_profile(cfg)
    if a_range is None:
        lo, hi = a_support(cfg)
        a_range = (math.floor(lo), math.ceil(hi))
    a = np.arange(a_range[0], a_range[1] + 1, dtype=np.int64)
    r = np.zeros(a.size)
    inside = (prof.a >= a_range[0]) & (prof.a <= a_range[1])
    r[prof.a[inside] - a_range[0]] = prof.r[inside]
    L, table = s_table(K)
    s = table[a % L]
    if cfg.empty():
        sig = np.zeros(a.size)
    else:
        sig = sigma_grid(cfg, nodes, n)(a.astype(float))
    pred = s * sig
    var = float(((r - pred) ** 2).sum())
    s1 = float((r * r).sum())
    s2 = float((r * pred).sum())
    s3 = float((pred * pred).sum())
    return VarianceReport(cfg.B, K, var, s1, s2, s3, a_range, prof, s, sig, a, r)


def sigma2_grouped(cfg: WeightConfig, K: int, nodes: int = 256, n: int = 32) -> float:
    """Sigma2 regrouped by residue classes e of lattice points mod n <= K.

    sum_n n^-3 sum_{e mod n} T_{M(e)}(n) sum_{x = e mod n} nu_B(x) sigma_{M(x)}.
    """
    pts, w, a = _weighted_points(cfg)
    if len(pts) == 0:
        return 0.0
    g = sigma_grid(cfg, nodes, n)
    ws = w * g(a.astype(float))
    total = 0.0
    for m in range(1, K + 1):
        e = pts % m
        cls = (e[:, 0] * m + e[:, 1]) * m + e[:, 2]
        sums = np.bincount(cls, weights=ws, minlength=m**3)
        ex, ey, ez = np.unravel_index(np.arange(m**3), (m, m, m))
        me = (ex * ex + ey * ey + ez * ez - ex * ey * ez) % m
        tab = np.array(T_full_table(m), dtype=float)
        total += float((tab[me] * sums).sum()) / m**3
    return total


def diagonal_split(cfg: WeightConfig) -> tuple[float, float]:
    """(Sigma_{1,d}, Sigma_{1,nd}): pairs of points on the same level a with z1 = z2, resp. z1 != z2."""
    pts, w, a = _weighted_points(cfg)
    if len(pts) == 0:
        return 0.0, 0.0
    keys, inv = np.unique(a, return_inverse=True)
    zs, zinv = np.unique(pts[:, 2], return_inverse=True)
    per = np.zeros((zs.size, keys.size))
    np.add.at(per, (zinv, inv), w)
    diag = float((per * per).sum())
    off = 0.0
    for i in range(zs.size):
        for j in range(zs.size):
            if i != j:
                off += float((per[i] * per[j]).sum())
    return diag, off
