"""Truncated Haar-unitary initial matrix: Beta-moment matrix and its closed-form
inverse, the biorthogonal functions P and Q, sum and double-contour kernels."""
from __future__ import annotations

import math

import numpy as np

from ..process import ConfigError, ProcessSpec, TruncatedUnitary
from ..quad import ContourSpec, integrate
from ..specfun import MeijerGSpec, _meijer_cached, _saddle_abscissa, log_gamma, pochhammer
from ._double import CauchyDouble
from .common import Kernel, gamma_products
from .ginibre import U_LINE, HardEdgeKernel, _log_gammas, log_sin_pi

CLOSED_INVERSE_N_MAX = 10


def _params(spec: ProcessSpec):
    if not isinstance(spec.initial, TruncatedUnitary):
        raise ConfigError("this representation needs a truncated-unitary initial matrix")
    l = spec.initial.l
    n, nu1 = spec.n, spec.nu[1]
    L = l - 2 * n
    return l, L, L - nu1  # l, l-2n, beta = l-2n-nu_1


def truncated_A(spec: ProcessSpec) -> np.ndarray:
    """a_ij = prod_{k>=2} Gamma(nu_k+j) B(i+j-1+nu_1, beta+1)."""
    l, L, beta = _params(spec)
    n, nu1 = spec.n, spec.nu[1]
    lg = math.lgamma
    return np.array([[gamma_products(spec, 2, j)
                      * math.exp(lg(i + j - 1 + nu1) + lg(beta + 1) - lg(i + j + L))
                      for j in range(1, n + 1)] for i in range(1, n + 1)])


def truncated_A_inverse(spec: ProcessSpec):
    """(A, A^{-1}) with the closed-form inverse of the Pochhammer-ratio
    matrix ((alpha+1)_{i+j} / (alpha+beta+2)_{i+j})."""
    l, L, beta = _params(spec)
    n, nu1 = spec.n, spec.nu[1]
    if n > CLOSED_INVERSE_N_MAX:
        raise ConfigError(f"closed-form inverse is limited to n <= {CLOSED_INVERSE_N_MAX}")
    A = truncated_A(spec)
    fact = math.factorial
    pre0 = math.exp(math.lgamma(L + 2) - math.lgamma(nu1 + 1) - math.lgamma(beta + 1))
    inv = np.zeros((n, n))
    for i in range(1, n + 1):
        di = gamma_products(spec, 2, i)
        for j in range(1, n + 1):
            pre = pre0 / di * (-1) ** (i + j) * pochhammer(L + 1, i - 1) * pochhammer(L + 1, j - 1) / (
                pochhammer(nu1 + 1, i - 1) * pochhammer(nu1 + 1, j - 1) * (L + 1))
            acc = 0.0
            for p in range(max(i, j) - 1, n):
                acc += ((2 * p + L + 1) * pochhammer(nu1 + 1, p)
                        / (pochhammer(L + 1, p) * pochhammer(beta + 1, p))
                        * fact(p) * pochhammer(L + i, p) * pochhammer(L + j, p)
                        / (fact(p - i + 1) * fact(i - 1) * fact(p - j + 1) * fact(j - 1)))
            inv[i - 1, j - 1] = pre * acc
    return A, inv


def truncated_phi0(spec: ProcessSpec, s: int, j: int, y: float) -> float:
    """phi_{0,s}(j, y) = Gamma(beta+1) G^{s,0}_{1,s}(l-2n+j; nu_1+j-1, nu_2..nu_s | y)."""
    l, L, beta = _params(spec)
    nu = spec.nu
    if s == 1:
        if y >= 1.0:
            return 0.0
        return y ** (nu[1] + j - 1) * (1.0 - y) ** beta
    g = MeijerGSpec(s, 0, 1, s, (L + j,), (nu[1] + j - 1,) + tuple(nu[2:s + 1]))
    return math.gamma(beta + 1) * _meijer_cached(g, float(y), 1e-15, 1e-12)


def truncated_P(spec: ProcessSpec, r: int, p: int, x, method: str = "series"):
    """P_{r,p}(x) = (1/2 pi i) oint Gamma(t-p) Gamma(t+l-2n+1+p) x^t / prod_{j=0}^r Gamma(t+nu_j+1) dt."""
    l, L, beta = _params(spec)
    if not (0 <= p <= spec.n - 1) or not (1 <= r <= spec.m):
        raise ConfigError("need 0 <= p <= n-1 and 1 <= r <= m")
    x = np.asarray(x, dtype=float)
    nu = spec.nu
    if method == "series":
        out = np.zeros_like(x)
        for k in range(p + 1):
            lc = math.lgamma(k + L + 1 + p) - math.lgamma(p - k + 1) - math.lgamma(k + 1)
            lc -= sum(math.lgamma(k + nu[j] + 1) for j in range(1, r + 1))
            out = out + (-1) ** (p - k) * math.exp(lc) * x ** k
        return out if x.ndim else float(out)
    if method != "contour":
        raise ValueError("method must be 'series' or 'contour'")
    loop = ContourSpec("closed_integer_loop", anchor=-1.0, enclosed_max=p, margin=0.25)
    lx = np.log(np.atleast_1d(x))

    def f(t):
        lg = log_gamma(t - p) + log_gamma(t + L + 1.0 + p) - _log_gammas(t, nu[:r + 1])
        return np.exp(lg[:, None] + np.outer(t, lx))

    res = integrate(f, loop, tol=1e-14, rtol=1e-13)
    val = np.real(np.atleast_1d(res.value))
    return val.reshape(x.shape) if x.ndim else float(val[0])


def _line(spec, s, y, extra_lo=0.25):
    nu = spec.nu[1:s + 1]
    if s == 1:
        return ContourSpec("vertical_line", anchor=0.5, bend=1.0)
    g = MeijerGSpec.product((0.0,) + tuple(nu))
    c = max(_saddle_abscissa(g, y, extra_lo), extra_lo)
    if abs(c - round(c)) < 0.05:
        c += 0.1
    return ContourSpec("vertical_line", anchor=c, scale=max(1.0, 0.5 * abs(c) ** 0.5))


def _check_weight(spec, p):
    """(c_p, Pcheck/P, sum weight) with Q = c_p * Qcheck."""
    l, L, beta = _params(spec)
    nu1 = spec.nu[1]
    w = (math.exp(math.lgamma(L + 1) - math.lgamma(nu1 + 1) - math.lgamma(beta + 1))
         * math.factorial(p) * pochhammer(nu1 + 1, p) * (2 * p + L + 1)
         / (pochhammer(L + 1, p) * pochhammer(beta + 1, p)))
    p_conv = math.gamma(nu1 + 1) / math.gamma(L + 1)       # Pcheck = p_conv * P
    return w * p_conv / (2 * p + L + 1), p_conv, w


def truncated_Q(spec: ProcessSpec, s: int, p, y: float, method: str = "contour"):
    """Q_{s,p}(y) = (1/2 pi i) int prod_{j=0}^s Gamma(u+nu_j) / (Gamma(u-p) Gamma(u+l-2n+1+p)) y^{-u} du.

    ``gsum``: finite sum of G^{s,0}_{1,s} functions; ``saalschutz``: the
    single-line form after summing that finite sum in closed form.  Both are
    converted to the same normalization.
    """
    l, L, beta = _params(spec)
    ps = np.atleast_1d(np.asarray(p, dtype=int))
    if np.any(ps < 0) or np.any(ps > spec.n - 1) or not (1 <= s <= spec.m):
        raise ConfigError("need 0 <= p <= n-1 and 1 <= s <= m")
    nu = spec.nu
    if s == 1 and y >= 1.0:
        vals = np.zeros(len(ps))
    elif method == "contour":
        line = _line(spec, s, y)
        ly = math.log(y)

        def f(u):
            base = _log_gammas(u, nu[:s + 1], shift=0.0) - u * ly
            return np.exp(base[:, None] - log_gamma(u[:, None] - ps[None, :])
                          - log_gamma(u[:, None] + L + 1.0 + ps[None, :]))

        vals = np.real(np.atleast_1d(integrate(f, line, tol=1e-15, rtol=1e-12).value))
    elif method == "gsum":
        nu1 = nu[1]
        vals = []
        for pp in ps:
            acc = 0.0
            for j in range(pp + 1):
                g = MeijerGSpec(s, 0, 1, s, (L + j + 1,), (nu1 + j,) + tuple(nu[2:s + 1]))
                lc = (math.lgamma(L + j + 1 + pp) - math.lgamma(pp - j + 1) - math.lgamma(j + 1)
                      - math.lgamma(nu1 + 1 + j))
                acc += (-1) ** (pp - j) * math.exp(lc) * _meijer_cached(g, float(y), 1e-15, 1e-13)
            qcheck = math.gamma(beta + 1) * math.gamma(nu1 + 1) / math.gamma(L + 1) * acc
            vals.append(qcheck * _check_weight(spec, int(pp))[0])
        vals = np.array(vals)
    elif method == "saalschutz":
        nu1 = nu[1]
        line = _line(spec, s, y)
        ly = math.log(y)
        vals = []
        for pp in ps:
            pre = ((-1) ** pp * math.gamma(beta + 1) / math.gamma(L + 1) * math.gamma(L + 1 + pp)
                   * pochhammer(nu1 - L - pp, pp) / (math.factorial(pp) * pochhammer(1 + nu1, pp)))

            def f(u, pp=pp):
                lg = _log_gammas(u, nu[1:s + 1], shift=0.0) - log_gamma(L + 1.0 + u) - u * ly
                # (u-p)_p / (u+L+1)_p as Gamma ratios
                lg = lg + log_gamma(u) - log_gamma(u - pp) - log_gamma(u + L + 1.0 + pp) + log_gamma(u + L + 1.0)
                return np.exp(lg)

            qcheck = pre * integrate(f, line, tol=1e-15, rtol=1e-12).value.real
            vals.append(qcheck * _check_weight(spec, int(pp))[0])
        vals = np.array(vals)
    else:
        raise ValueError("method must be 'contour', 'gsum' or 'saalschutz'")
    return float(vals[0]) if np.ndim(p) == 0 else vals


def truncated_P_check(spec, r, p, x, method="series"):
    """The intermediate normalization Pcheck = Gamma(nu_1+1)/Gamma(l-2n+1) * P."""
    l, L, _ = _params(spec)
    return math.gamma(spec.nu[1] + 1) / math.gamma(L + 1) * truncated_P(spec, r, p, x, method)


class TruncatedSumKernel(Kernel):
    """K = -(Meijer term) + sum_p (l-2n+2p+1) P_{r,p}(x) Q_{s,p}(y)."""

    def __init__(self, spec: ProcessSpec, q_method: str = "contour"):
        _params(spec)
        self.spec = spec
        self.q_method = q_method

    def second(self, r, xs, s, ys):
        n = self.spec.n
        _, L, _ = _params(self.spec)
        w = np.array([L + 2 * p + 1 for p in range(n)], dtype=float)
        P = np.array([truncated_P(self.spec, r, p, xs) for p in range(n)])
        Q = np.array([truncated_Q(self.spec, s, list(range(n)), y, self.q_method) for y in ys]).T
        return P.T @ (w[:, None] * Q)


def truncated_kernel_sum(spec, r, x, s, y):
    return TruncatedSumKernel(spec)(r, x, s, y)


class TruncatedDoubleKernel(Kernel):
    """Double contour form with the Gamma(t+1-n)Gamma(t+l-n+1) ratio.

    The u path is bent to the left through -1/2 (on a straight line the
    s = 1 integrand decays only algebraically).  At s = 1 the second term
    vanishes identically for y >= 1.
    """

    def __init__(self, spec: ProcessSpec, contour: str = "auto", tol=1e-11, rtol=1e-10):
        _params(spec)
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
        n, nu = self.spec.n, self.spec.nu
        l = self.spec.initial.l
        uc = ContourSpec("vertical_line", anchor=U_LINE, bend=1.0)
        if self.contour == "loop":
            tc = ContourSpec("closed_integer_loop", anchor=U_LINE, enclosed_max=n, margin=0.25)

            def lu(u):
                return _log_gammas(u, nu[:s + 1]) - log_gamma(u + 1.0 - n) - log_gamma(u + l - n + 1.0)

            def lt(t):
                return -_log_gammas(t, nu[:r + 1]) + log_gamma(t + 1.0 - n) + log_gamma(t + l - n + 1.0)
        else:
            tc = ContourSpec("hankel_right_loop", anchor=U_LINE, margin=0.25)

            def lu(u):
                return (_log_gammas(u, nu[:s + 1]) + log_sin_pi(u) + log_gamma(n - u)
                        - log_gamma(u + l - n + 1.0))

            def lt(t):
                return (-_log_gammas(t, nu[:r + 1]) - log_sin_pi(t) - log_gamma(n - t)
                        + log_gamma(t + l - n + 1.0))
        eng = CauchyDouble(lu, uc, lt, tc, tol=self.tol, rtol=self.rtol)
        self._cache[key] = eng
        return eng

    def second(self, r, xs, s, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        out = np.zeros((len(xs), len(ys)))
        live = ys < 1.0 if s == 1 else np.ones(len(ys), dtype=bool)
        if np.any(live):
            val, _ = self._engine(r, s).evaluate(xs, ys[live])
            out[:, live] = val
        return out


def truncated_kernel_double(spec, r, x, s, y):
    return TruncatedDoubleKernel(spec)(r, x, s, y)


def hard_edge_scale(n: int, l: int) -> float:
    """Scale (l-n) n under which the truncated kernel has the hard-edge limit."""
    return float((l - n) * n)


class TruncatedHardEdgeKernel(HardEdgeKernel):
    """Limit of K/S at (x/S, y/S), S = (l-n)n: the same kernel as the Ginibre
    hard edge."""


def truncated_hard_edge(nu, l_growth, r, s, x, y):
    """Hard-edge limit for a truncated start; ``l_growth`` is only recorded
    (the limit does not depend on how fast l grows beyond 2n)."""
    return TruncatedHardEdgeKernel(nu)(r, x, s, y)
