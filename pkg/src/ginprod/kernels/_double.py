"""Double contour integrals coupled through a Cauchy factor.

Evaluates, for every pair (x_a, y_b),

    (1/(2 pi i))^2  int_U du  oint_T dt  F(u) y^(-u-1) H(t) x^t / (u - t)

with U an open path and T a closed loop or a Hankel loop.  Both paths are
discretized by the trapezoidal rule; the coupling 1/(u - t) is applied by the
compiled Cauchy kernel.  The step is halved until two levels agree.
"""
from __future__ import annotations

import numpy as np

from .. import _accel
from ..quad import ContourSpec, QuadratureError, contour_nodes

_TINY = 1e-19
_EPS = np.finfo(float).eps
FLOOR_CAP = 1e-8         # a rounding floor above this is reported as non-convergence


def _open_nodes(contour: ContourSpec, logf, h: float, Lmax: float, ref_logscale):
    """Trapezoid nodes on an open path, truncated where the integrand is negligible.

    ``ref_logscale(z)`` gives the largest log-magnitude of the point-dependent
    factor over all requested points, so the truncation is uniform in them.
    """
    k = np.arange(-int(np.floor(Lmax / h)), int(np.floor(Lmax / h)) + 1)
    z, dz = contour.path(k * h)
    with np.errstate(over="ignore", invalid="ignore"):
        lm = (logf(z).real + ref_logscale(z) + np.log(np.abs(dz)))
    lm = np.where(np.isfinite(lm), lm, -np.inf)
    peak = lm.max()
    keep = lm > peak + np.log(_TINY)
    idx = np.nonzero(keep)[0]
    lo, hi = idx.min(), idx.max()
    # keep a contiguous window (trapezoid needs all interior nodes)
    lo, hi = max(lo - 2, 0), min(hi + 2, len(k) - 1)
    if lo == 0 or hi == len(k) - 1:
        if lm[0] > peak + np.log(_TINY) * 0.5 or lm[-1] > peak + np.log(_TINY) * 0.5:
            raise QuadratureError("open contour integrand does not decay within the truncation window")
    sl = slice(lo, hi + 1)
    return z[sl], dz[sl] * h, logf(z[sl])


def _closed_nodes(contour: ContourSpec, logf, h: float):
    z, w = contour_nodes(contour, h)
    return z, w, logf(z)


class CauchyDouble:
    """Prepared double integral; call ``evaluate(xs, ys)``."""

    def __init__(self, log_u, u_contour: ContourSpec, log_t, t_contour: ContourSpec,
                 tol: float = 1e-11, rtol: float = 1e-10, h0: float = 0.2, Lmax: float = 14.0,
                 max_levels: int = 6):
        self.log_u = log_u
        self.log_t = log_t
        self.uc = u_contour
        self.tc = t_contour
        self.tol = tol
        self.rtol = rtol
        self.h0 = h0
        self.Lmax = Lmax
        self.max_levels = max_levels

    def _nodes_t(self, h, logx):
        if self.tc.closed:
            return _closed_nodes(self.tc, self.log_t, h)
        return _open_nodes(self.tc, self.log_t, h, self.Lmax,
                           lambda t: np.max(np.outer(t.real, logx), axis=1))

    def _nodes_u(self, h, logy):
        return _open_nodes(self.uc, self.log_u, h, self.Lmax,
                           lambda u: np.max(np.outer(-u.real - 1.0, logy), axis=1))

    def _level(self, h, logx, logy, floor=False):
        t, wt, lt = self._nodes_t(h, logx)
        u, wu, lu = self._nodes_u(h, logy)
        # columns: x-dependent t-vectors
        b = wt[:, None] * np.exp(lt[:, None] + np.outer(t, logx))
        a = wu[:, None] * np.exp(lu[:, None] - np.outer(u + 1.0, logy))
        cb = _accel.cauchy_matrix_apply(u, t, b)          # (Nu, Nx)
        val = -(cb.T @ a) / (4.0 * np.pi ** 2)             # (Nx, Ny)
        if not floor:
            return val
        # rounding bound: eps times the sum of absolute terms
        absum = (np.abs(b).T @ (1.0 / np.abs(u[:, None] - t[None, :])).T) @ np.abs(a)
        return val, _EPS * absum / (4.0 * np.pi ** 2)

    def evaluate(self, xs, ys):
        """(values, error estimate) on the xs x ys grid; points are grouped by
        decade so that node truncation is chosen per block of similar scale."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        gx = np.floor(np.log10(xs))
        gy = np.floor(np.log10(ys))
        out = np.empty((len(xs), len(ys)))
        worst = 0.0
        for a in np.unique(gx):
            ia = np.nonzero(gx == a)[0]
            for b in np.unique(gy):
                jb = np.nonzero(gy == b)[0]
                val, err = self._evaluate_block(xs[ia], ys[jb])
                out[np.ix_(ia, jb)] = val
                worst = max(worst, err)
        return out, worst

    def _evaluate_block(self, xs, ys):
        logx = np.log(xs)
        logy = np.log(ys)
        h = self.h0
        prev = self._level(h, logx, logy)
        for _ in range(self.max_levels):
            h *= 0.5
            cur = self._level(h, logx, logy)
            err = np.abs(cur - prev)
            tgt = np.maximum(self.tol, self.rtol * np.abs(cur))
            if np.all(err <= tgt):
                return cur.real, float(err.max())
            if np.all(err <= 10.0 * FLOOR_CAP):
                # cancellation may keep the levels from agreeing beyond rounding
                cur, floor = self._level(h, logx, logy, floor=True)
                if floor.max() <= FLOOR_CAP and np.all(err <= np.maximum(tgt, floor)):
                    return cur.real, float(err.max())
            prev = cur
        raise QuadratureError("double contour integral did not converge",
                              value=cur.real, err_estimate=float(err.max()))
