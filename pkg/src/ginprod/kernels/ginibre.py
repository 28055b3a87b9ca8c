"""Ginibre initial matrix: Hankel moment matrix, biorthogonal functions P and Q,
the sum and double-contour kernels, and the hard-edge limit."""
from __future__ import annotations

import math

import numpy as np

from ..process import ConfigError, Ginibre, ProcessSpec
from ..quad import ContourSpec, integrate
from ..specfun import MeijerGSpec, _meijer_cached, _saddle_abscissa, log_gamma, pochhammer
from ._double import CauchyDouble
from .common import Kernel, gamma_products

HANKEL_N_MAX = 12


def _require_ginibre(spec: ProcessSpec):
    if not isinstance(spec.initial, Ginibre):
        raise ConfigError("this representation needs a Ginibre initial matrix")


def ginibre_A(spec: ProcessSpec):
    """Moment matrix a_ij = Gamma(nu_1+i+j-1) prod_{k>=2} Gamma(nu_k+j) and its
    closed-form inverse (Hankel inverse for h_k = Gamma(k+nu_1+1))."""
    n = spec.n
    if n > HANKEL_N_MAX:
        raise ConfigError(f"closed-form Hankel inverse is limited to n <= {HANKEL_N_MAX}")
    nu1 = spec.nu[1]
    d = np.array([gamma_products(spec, 2, j) for j in range(1, n + 1)])
    A = np.array([[math.gamma(nu1 + i + j - 1) * d[j - 1] for j in range(1, n + 1)]
                  for i in range(1, n + 1)])
    g1 = math.gamma(nu1 + 1)
    alpha = np.zeros((n, n))
    for p in range(n):
        w = math.gamma(nu1 + p + 1) / (g1 * g1 * math.factorial(p))
        v = np.array([pochhammer(-p, k) / (pochhammer(nu1 + 1, k) * math.factorial(k))
                      for k in range(n)])
        alpha += w * np.outer(v, v)
    Ainv = alpha / d[:, None]
    return A, Ainv


def _inv_gamma_prod_real(spec, r, k):
    out = 1.0
    for j in range(1, r + 1):
        out /= math.gamma(k + spec.nu[j] + 1)
    return out


def ginibre_P(spec: ProcessSpec, r: int, p: int, x, method: str = "series"):
    """P_{r,p}(x) = (1/2 pi i) oint Gamma(t-p) x^t / prod_{j=0}^r Gamma(t+nu_j+1) dt.

    ``series`` sums the residues at t = 0..p; ``contour`` integrates over a
    loop around {0..p} with Re t > -1.
    """
    if not (0 <= p <= spec.n - 1) or not (1 <= r <= spec.m):
        raise ConfigError("need 0 <= p <= n-1 and 1 <= r <= m")
    x = np.asarray(x, dtype=float)
    if method == "series":
        out = np.zeros_like(x)
        for k in range(p + 1):
            c = (-1) ** (p - k) / (math.factorial(p - k) * math.factorial(k))
            out = out + c * _inv_gamma_prod_real(spec, r, k) * x ** k
        return out if x.ndim else float(out)
    if method != "contour":
        raise ValueError("method must be 'series' or 'contour'")
    nu = spec.nu[:r + 1]
    loop = ContourSpec("closed_integer_loop", anchor=-1.0, enclosed_max=p, margin=0.25)
    lx = np.log(np.atleast_1d(x))

    def f(t):
        lg = log_gamma(t - p) - sum(log_gamma(t + v + 1.0) for v in nu)
        return np.exp(lg[:, None] + np.outer(t, lx))

    res = integrate(f, loop, tol=1e-14, rtol=1e-13)
    val = np.real(np.atleast_1d(res.value))
    return val.reshape(x.shape) if x.ndim else float(val[0])


def _q_line(spec, s, y):
    nu = spec.nu[1:s + 1]
    g = MeijerGSpec.product((0.0,) + tuple(nu))
    c = max(_saddle_abscissa(g, y, 0.25), 0.25)
    if abs(c - round(c)) < 0.05:
        c += 0.1
    return c


def ginibre_Q(spec: ProcessSpec, s: int, p, y: float, method: str = "contour"):
    """Q_{s,p}(y) = (1/2 pi i) int_{c+iR} Gamma(u) prod_{j=1}^s Gamma(u+nu_j) / Gamma(u-p) y^{-u} du.

    ``p`` may be an int or a sequence (evaluated together on one line).
    ``gsum`` uses the equivalent finite sum of G^{s,0}_{0,s} functions.
    """
    ps = np.atleast_1d(np.asarray(p, dtype=int))
    if np.any(ps < 0) or np.any(ps > spec.n - 1) or not (1 <= s <= spec.m):
        raise ConfigError("need 0 <= p <= n-1 and 1 <= s <= m")
    nu = spec.nu[1:s + 1]
    if method == "contour":
        c = _q_line(spec, s, y)
        scale = max(1.0, 0.5 * abs(c) ** 0.5)
        line = ContourSpec("vertical_line", anchor=c, scale=scale)
        ly = math.log(y)

        def f(u):
            base = log_gamma(u) + sum(log_gamma(u + v) for v in nu) - u * ly
            return np.exp(base[:, None] - log_gamma(u[:, None] - ps[None, :]))

        res = integrate(f, line, tol=1e-15, rtol=1e-12)
        vals = np.real(np.atleast_1d(res.value))
    elif method == "gsum":
        nu1 = spec.nu[1]
        vals = []
        for pp in ps:
            acc = 0.0
            for j in range(pp + 1):
                g = MeijerGSpec.product((nu1 + j,) + tuple(nu[1:]))
                acc += ((-1) ** (pp - j) / (math.factorial(pp - j) * math.factorial(j)
                                             * math.gamma(nu1 + 1 + j)) * _meijer_cached(g, float(y), 1e-15, 1e-13))
            vals.append(math.gamma(1 + nu1 + pp) * math.factorial(pp) * acc)
        vals = np.array(vals)
    else:
        raise ValueError("method must be 'contour' or 'gsum'")
    return float(vals[0]) if np.ndim(p) == 0 else vals


class GinibreSumKernel(Kernel):
    """K = -(Meijer term) + sum_p P_{r,p}(x) Q_{s,p}(y)."""

    def __init__(self, spec: ProcessSpec, q_method: str = "contour"):
        _require_ginibre(spec)
        self.spec = spec
        self.q_method = q_method

    def second(self, r, xs, s, ys):
        n = self.spec.n
        P = np.array([ginibre_P(self.spec, r, p, xs) for p in range(n)])      # (n, Nx)
        Q = np.array([ginibre_Q(self.spec, s, list(range(n)), y, self.q_method) for y in ys]).T
        return P.T @ Q


def ginibre_kernel_sum(spec, r, x, s, y):
    return GinibreSumKernel(spec)(r, x, s, y)


# --- double contour forms ----------------------------------------------------

def log_sin_pi(z):
    """log sin(pi z), stable for large |Im z| (branch irrelevant: used inside exp)."""
    z = np.asarray(z, dtype=complex)
    up = z.imag >= 0
    w = np.where(up, z, np.conj(z))
    e = np.exp(2j * np.pi * w)
    val = -1j * np.pi * w + np.log((e - 1.0) / 2j)
    return np.where(up, val, np.conj(val))


def _log_gammas(z, params, shift=1.0):
    out = 0.0
    for v in params:
        out = out + log_gamma(z + v + shift)
    return out


def double_contour_kernel(nu_r, nu_s, log_u_extra, log_t_extra, t_contour, u_contour,
                          tol=1e-11, rtol=1e-10):
    """Second-term integrand prod_{j<=s} Gamma(u+nu_j+1) / prod_{j<=r} Gamma(t+nu_j+1)
    times user factors, coupled by 1/(u-t)."""
    def lu(u):
        return _log_gammas(u, nu_s) + log_u_extra(u)

    def lt(t):
        return -_log_gammas(t, nu_r) + log_t_extra(t)

    return CauchyDouble(lu, u_contour, lt, t_contour, tol=tol, rtol=rtol)


U_LINE = -0.5


class GinibreDoubleKernel(Kernel):
    """Double contour form: u on Re u = -1/2, t around {0..n} with Re t > -1/2.

    ``contour='loop'`` uses a closed loop around {0..n}; ``'hankel'`` uses the
    equivalent reflection form with t on a loop around [0, inf) and u bent to
    the left, which stays well scaled for large n.
    """

    def __init__(self, spec: ProcessSpec, contour: str = "auto", tol=1e-11, rtol=1e-10):
        _require_ginibre(spec)
        self.spec = spec
        if contour == "auto":
            contour = "loop" if spec.n <= 12 else "hankel"
        if contour not in ("loop", "hankel"):
            raise ValueError("contour must be 'loop', 'hankel' or 'auto'")
        self.contour = contour
        self.tol, self.rtol = tol, rtol
        self._cache = {}

    def _engine(self, r, s):
        key = (r, s)
        if key in self._cache:
            return self._cache[key]
        n = self.spec.n
        nu = self.spec.nu
        if self.contour == "loop":
            tc = ContourSpec("closed_integer_loop", anchor=U_LINE, enclosed_max=n, margin=0.25)
            uc = ContourSpec("vertical_line", anchor=U_LINE)
            eng = double_contour_kernel(
                nu[:r + 1], nu[:s + 1],
                lambda u: -log_gamma(u - n + 1.0),
                lambda t: log_gamma(t - n + 1.0), tc, uc, self.tol, self.rtol)
        else:
            tc = ContourSpec("hankel_right_loop", anchor=U_LINE, margin=0.25)
            uc = ContourSpec("vertical_line", anchor=U_LINE, bend=1.0)
            eng = double_contour_kernel(
                nu[:r + 1], nu[:s + 1],
                lambda u: log_sin_pi(u) + log_gamma(n - u),
                lambda t: -log_sin_pi(t) - log_gamma(n - t), tc, uc, self.tol, self.rtol)
        self._cache[key] = eng
        return eng

    def second(self, r, xs, s, ys):
        val, _ = self._engine(r, s).evaluate(xs, ys)
        return val


def ginibre_kernel_double(spec, r, x, s, y):
    return GinibreDoubleKernel(spec)(r, x, s, y)


class HardEdgeKernel(Kernel):
    """Limit of (1/n) K(r, x/n; s, y/n): the reflection form without the
    n-dependent Gamma ratio."""

    def __init__(self, nu, tol=1e-11, rtol=1e-10):
        nu = list(nu)
        self.spec = ProcessSpec.build(1, len(nu), nu)
        self.tol, self.rtol = tol, rtol
        self._cache = {}

    def second(self, r, xs, s, ys):
        key = (r, s)
        if key not in self._cache:
            nu = self.spec.nu
            tc = ContourSpec("hankel_right_loop", anchor=U_LINE, margin=0.25)
            uc = ContourSpec("vertical_line", anchor=U_LINE, bend=1.0)
            self._cache[key] = double_contour_kernel(
                nu[:r + 1], nu[:s + 1], log_sin_pi, lambda t: -log_sin_pi(t), tc, uc,
                self.tol, self.rtol)
        val, _ = self._cache[key].evaluate(xs, ys)
        return val


def hard_edge_kernel(nu, r, s, x, y):
    """Hard-edge limit kernel; ``nu`` lists nu_1..nu_m."""
    return HardEdgeKernel(nu)(r, x, s, y)
