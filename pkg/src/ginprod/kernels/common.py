"""Pieces shared by every kernel family."""
from __future__ import annotations

import math

import numpy as np

from ..process import ConfigError, ProcessSpec, gauge
from ..specfun import MeijerGSpec, _meijer_cached


def phi_rs_term(spec: ProcessSpec, r: int, s: int, x: float, y: float) -> float:
    """(1/x) G^{s-r,0}_{0,s-r}(-; nu_{r+1..s} | y/x) for s > r, else 0.

    The minus sign of the kernel's first term is applied by the caller.
    """
    if s <= r:
        return 0.0
    g = MeijerGSpec.product(spec.nu[r + 1:s + 1])
    return _meijer_cached(g, float(y) / float(x), 1e-14, 1e-12) / x


def phi_final(spec: ProcessSpec, r: int, x, i: int):
    """x^{i-1} Gamma(nu_{r+1}+i) ... Gamma(nu_m+i)."""
    c = 1.0
    for k in range(r + 1, spec.m + 1):
        c *= math.gamma(spec.nu[k] + i)
    return c * np.asarray(x, dtype=float) ** (i - 1)


def gamma_products(spec: ProcessSpec, lo: int, i: int) -> float:
    """prod_{k=lo}^{m} Gamma(nu_k + i)."""
    c = 1.0
    for k in range(lo, spec.m + 1):
        c *= math.gamma(spec.nu[k] + i)
    return c


class Kernel:
    """Correlation kernel K(r, x; s, y) of a fixed process, in the explicit gauge.

    Subclasses provide ``second(r, xs, s, ys)``: the double-sum part on a grid.
    """

    spec: ProcessSpec

    def second(self, r: int, xs, s: int, ys) -> np.ndarray:
        raise NotImplementedError

    def grid(self, r: int, xs, s: int, ys) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        for v in (r, s):
            if not 1 <= v <= self.spec.m:
                raise ConfigError(f"time {v} outside 1..{self.spec.m}")
        if np.any(xs <= 0) or np.any(ys <= 0):
            raise ConfigError("coordinates must be positive")
        out = np.array(self.second(r, xs, s, ys), dtype=float)
        if s > r:
            for a, x in enumerate(xs):
                for b, y in enumerate(ys):
                    out[a, b] -= phi_rs_term(self.spec, r, s, x, y)
        return out

    def __call__(self, r: int, x: float, s: int, y: float) -> float:
        return float(self.grid(r, [x], s, [y])[0, 0])

    def matrix(self, points) -> np.ndarray:
        """[K(r_i, x_i; r_j, x_j)] for a list of (r, x) points."""
        pts = [(int(p[0]), float(p[1])) for p in points]
        k = len(pts)
        out = np.empty((k, k))
        times = sorted({p[0] for p in pts})
        for r in times:
            ia = [i for i, p in enumerate(pts) if p[0] == r]
            for s in times:
                jb = [j for j, p in enumerate(pts) if p[0] == s]
                g = self.grid(r, [pts[i][1] for i in ia], s, [pts[j][1] for j in jb])
                out[np.ix_(ia, jb)] = g
        return out

    def rho(self, points) -> float:
        """Correlation function: determinant of the kernel matrix."""
        return float(np.linalg.det(self.matrix(points)))

    def rho1(self, r: int, xs) -> np.ndarray:
        """One-point function K(r, x; r, x) at each x."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.empty(len(xs))
        dec = np.floor(np.log10(np.maximum(xs, 1e-300)))
        for d in np.unique(dec):
            idx = np.nonzero(dec == d)[0]
            out[idx] = np.diag(self.grid(r, xs[idx], r, xs[idx]))
        return out

    def rho2(self, r: int, xs, s: int, ys) -> np.ndarray:
        """Two-point function at every (x, y) pair: a (len(xs), len(ys)) grid."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        kxx = self.rho1(r, xs)
        kyy = self.rho1(s, ys)
        return np.outer(kxx, kyy) - self.grid(r, xs, s, ys) * self.grid(s, ys, r, xs).T


def gauge_multiplier(spec: ProcessSpec, r: int, x, s: int, y):
    """g_r(x)/g_s(y): converts the explicit-gauge kernel into the kernel that
    the transition-chain assembly produces."""
    return gauge(spec, r, x) / gauge(spec, s, y)
