"""Ginibre-with-source initial matrix: the auxiliary functions theta, Psi_r and
Phi_s, the Laguerre moment matrix, and the (u, v) integral kernel."""
from __future__ import annotations

import math

import numpy as np
import scipy.special as sc

from .. import _accel
from ..process import ConfigError, GinibreSource, ProcessSpec
from ..quad import ContourSpec, QuadratureError, contour_nodes, integrate, real_integral
from ..specfun import MeijerGSpec, _saddle_abscissa, log_gamma
from .common import Kernel, gamma_products

U_CAP = 200.0


def _source(spec: ProcessSpec):
    if not isinstance(spec.initial, GinibreSource):
        raise ConfigError("this representation needs a Ginibre-with-source initial matrix")
    return np.asarray(spec.initial.q, dtype=float)


def hyp1f1_series(a, b: float, w, max_terms: int = 2000):
    """1F1(a; b; w) for complex a and w (broadcast), by its power series."""
    a, w = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(w, dtype=complex))
    term = np.ones(a.shape, dtype=complex)
    total = term.copy()
    big = np.abs(total)
    for k in range(max_terms):
        term = term * (a + k) * w / ((b + k) * (k + 1))
        total = total + term
        mag = np.abs(term)
        big = np.maximum(big, mag)
        if k > 4 and np.all(mag <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            return total
    raise QuadratureError("1F1 series did not converge")


def source_vartheta(spec: ProcessSpec, q, z, method: str = "series"):
    """theta(q; z) = (1/Gamma(nu_1+1)) int_0^inf t^{nu_1+z-1} e^{-t} 0F1(nu_1+1; -q t) dt.

    ``series``: Gamma(nu_1+z) 1F1(nu_1+z; nu_1+1; -q) / Gamma(nu_1+1) (q may be
    complex); ``quad``: the defining integral, real q only.
    """
    nu1 = spec.nu[1]
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= -nu1):
        raise ConfigError("theta needs Re z > -nu_1")
    if method == "series":
        qa = np.asarray(q, dtype=complex)
        a = nu1 + z
        # Kummer's transformation keeps the terms positive for real q > 0
        flip = np.broadcast_to(qa.real > 0, np.broadcast(a, qa).shape)
        h = np.where(flip, np.exp(-qa) * hyp1f1_series(1.0 - z, nu1 + 1.0, qa),
                     hyp1f1_series(a, nu1 + 1.0, -qa))
        out = np.exp(log_gamma(a) - math.lgamma(nu1 + 1)) * h
        return complex(out) if out.ndim == 0 else out
    if method != "quad":
        raise ValueError("method must be 'series' or 'quad'")
    q = float(q)
    zz = complex(z)
    g1 = math.gamma(nu1 + 1)
    res = real_integral(lambda t: t ** (nu1 + zz - 1) * np.exp(-t) * sc.hyp0f1(nu1 + 1, -q * t) / g1,
                        (0.0, np.inf), tol=1e-13)
    return complex(res.value)


def _psi_params(spec: ProcessSpec, r: int, form: str):
    """nu's of the loop variables: nu_2..nu_r (one loop per Ginibre factor
    applied after the initial matrix), or nu_1..nu_r in the ``literal`` form."""
    if form == "corrected":
        return list(spec.nu[2:r + 1])
    if form == "literal":
        return list(spec.nu[1:r + 1])
    raise ValueError("form must be 'corrected' or 'literal'")


def psi_series(spec: ProcessSpec, r: int, u, x, form: str = "corrected"):
    """Psi_r(u; x) = sum_N x^N L_N^{nu_1}(u) / (Gamma(nu_1+1+N) prod_loops Gamma(nu_l+1+N)).

    Returns an array of shape (len(u), len(x)).
    """
    nu1 = spec.nu[1]
    loops = _psi_params(spec, r, form)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lx = np.log(x)
    coef = []
    N = 0
    lmax = -np.inf
    while True:
        lc = -math.lgamma(nu1 + 1 + N) - sum(math.lgamma(v + 1 + N) for v in loops)
        coef.append(lc)
        # |L_N(u)| <= (nu+1)_N/N! e^{u/2}
        lb = lc + N * lx.max() + math.lgamma(nu1 + 1 + N) - math.lgamma(nu1 + 1) - math.lgamma(N + 1)
        lmax = max(lmax, lb)
        if N > 5 and lb < lmax - 45.0:
            break
        N += 1
        if N > 4000:
            raise QuadratureError("Psi series did not converge")
    coef = np.array(coef)
    NN = len(coef)
    C = np.exp(coef[:, None] + np.arange(NN)[:, None] * lx[None, :])   # (NN, Nx)
    Lg = np.empty((len(u), NN))
    Lg[:, 0] = 1.0
    if NN > 1:
        Lg[:, 1] = 1.0 + nu1 - u
    for k in range(1, NN - 1):
        Lg[:, k + 1] = ((2 * k + 1 + nu1 - u) * Lg[:, k] - (k + nu1) * Lg[:, k - 1]) / (k + 1)
    return Lg @ C


def source_Psi(spec: ProcessSpec, r: int, u: float, x: float, method: str = "contour",
               form: str = "corrected", tol: float = 1e-12) -> float:
    """Psi_r(u; x) = (1/Gamma(nu_1+1)) prod_l (1/2 pi i) int_{gamma_l} w_l^{-nu_l-1} e^{w_l} dw_l
    e^{x/W} 0F1(nu_1+1; -x u / W),  W = prod_l w_l,

    each gamma_l a loop from -inf around the origin.  The loops run over
    l = 2..r (``form='corrected'``, used by the kernel) or l = 1..r
    (``form='literal'``).  ``method='series'`` uses the Laguerre expansion.
    """
    if not 1 <= r <= spec.m:
        raise ConfigError("need 1 <= r <= m")
    if method == "series":
        return float(psi_series(spec, r, [u], [x], form)[0, 0])
    if method != "contour":
        raise ValueError("method must be 'contour' or 'series'")
    nu1 = spec.nu[1]
    loops = _psi_params(spec, r, form)
    k = len(loops)
    g1 = math.gamma(nu1 + 1)
    if k == 0:
        return float(math.exp(x) * sc.hyp0f1(nu1 + 1, -x * u) / g1)
    if k > 3:
        raise ConfigError("contour evaluation of Psi is limited to 3 loops; use the series")
    # each loop passes near the saddle of e^{w} e^{x/W}
    omega = max(1.0, (x * (1.0 + u)) ** (1.0 / (k + 1)))
    loop = ContourSpec("neg_axis_loop", anchor=omega, scale=omega)
    if k == 1:
        a0 = loops[0]

        def f(w):
            a = x / w
            return w ** (-a0 - 1.0) * np.exp(w + a) * sc.hyp0f1(nu1 + 1, -u * a) / g1

        return float(integrate(f, loop, tol=tol, rtol=tol).value.real)
    # tensor-product trapezoid, refined until two levels agree
    h = 1.0 / 16
    prev = None
    for _ in range(4):
        w, dw = contour_nodes(loop, h, L=5.0)
        wgt = dw / (2j * np.pi)
        grids = np.meshgrid(*([w] * k), indexing="ij")
        wts = np.meshgrid(*([wgt] * k), indexing="ij")
        W = np.ones_like(grids[0])
        val = np.ones_like(grids[0])
        for l in range(k):
            W = W * grids[l]
            val = val * grids[l] ** (-loops[l] - 1.0) * np.exp(grids[l]) * wts[l]
        a = x / W
        cur = (val * np.exp(a) * sc.hyp0f1(nu1 + 1, -u * a) / g1).sum().real
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return float(cur)
        prev = cur
        h *= 0.5
    raise QuadratureError("nested Psi integral did not converge", value=cur)


def _phi_line(spec, s, y):
    nu = spec.nu[1:s + 1]
    g = MeijerGSpec.product(nu)
    lo = -min(nu)
    c = max(_saddle_abscissa(g, y, lo + 0.25), lo + 0.25)
    return ContourSpec("vertical_line", anchor=c, scale=max(1.0, 0.5 * abs(c) ** 0.5))


def source_Phi_grid(spec: ProcessSpec, s: int, q_arg, ys, tol: float = 1e-14) -> np.ndarray:
    """Phi_s(q; y) for a complex array q and many y, shape (len(q), len(ys)).

    The y values are grouped by decade; each group shares one line placed at
    the saddle for the group's geometric centre, so theta is evaluated once
    per node set instead of once per y.
    """
    if not 1 <= s <= spec.m:
        raise ConfigError("need 1 <= s <= m")
    nu = spec.nu
    qa = np.atleast_1d(np.asarray(q_arg, dtype=complex))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    out = np.empty((len(qa), len(ys)), dtype=complex)
    dec = np.floor(np.log10(ys))
    for d in np.unique(dec):
        idx = np.nonzero(dec == d)[0]
        ly = np.log(ys[idx])
        line = _phi_line(spec, s, float(np.exp(ly.mean())))

        def f(z):
            th = source_vartheta(spec, qa[None, :], z[:, None])
            g = -z[:, None] * ly[None, :]
            for j in range(2, s + 1):
                g = g + log_gamma(z + nu[j])[:, None]
            return th[:, :, None] * np.exp(g)[:, None, :]

        out[:, idx] = integrate(f, line, tol=tol, rtol=1e-12).value
    return out


def source_Phi(spec: ProcessSpec, s: int, q_arg, y: float, tol: float = 1e-14):
    """Phi_s(q; y) = (1/2 pi i) int y^{-z} theta(q; z) Gamma(nu_2+z)...Gamma(nu_s+z) dz.

    ``q_arg`` may be a complex array; all values share one line.
    """
    if not 1 <= s <= spec.m:
        raise ConfigError("need 1 <= s <= m")
    nu = spec.nu
    qa = np.atleast_1d(np.asarray(q_arg, dtype=complex))
    line = _phi_line(spec, s, y)
    ly = math.log(y)

    def f(z):
        th = source_vartheta(spec, qa[None, :], z[:, None])
        g = -z * ly
        for j in range(2, s + 1):
            g = g + log_gamma(z + nu[j])
        return th * np.exp(g)[:, None]

    val = np.atleast_1d(integrate(f, line, tol=tol, rtol=1e-12).value)
    if np.ndim(q_arg) == 0:
        return complex(val[0]) if np.iscomplexobj(q_arg) else float(val[0].real)
    return val


def source_A_laguerre(spec: ProcessSpec) -> np.ndarray:
    """a_ij = prod_{k != 1} Gamma(nu_k+j) L_{j-1}^{nu_1}(-q_i) e^{q_i}."""
    q = _source(spec)
    n, nu1 = spec.n, spec.nu[1]
    if len(set(q.tolist())) < n:
        raise ConfigError("repeated q values: use the contour kernel, which allows multiplicities")
    A = np.empty((n, n))
    for j in range(1, n + 1):
        c = math.gamma(j) * gamma_products(spec, 2, j)
        A[:, j - 1] = c * sc.eval_genlaguerre(j - 1, nu1, -q) * np.exp(q)
    return A


def laguerre_characterization_residual(spec: ProcessSpec, us, Ainv=None) -> float:
    """Max deviation of sum_j c_j L_{j-1}(u) gamma_{jk} from
    e^{-q_k} prod_{l != k} (-u-q_l)/(q_k-q_l), over the given u."""
    q = _source(spec)
    n, nu1 = spec.n, spec.nu[1]
    if Ainv is None:
        Ainv = np.linalg.inv(source_A_laguerre(spec))
    c = np.array([math.gamma(j) * gamma_products(spec, 2, j) for j in range(1, n + 1)])
    worst = 0.0
    for u in np.atleast_1d(us):
        lhs = (c * sc.eval_genlaguerre(np.arange(n), nu1, u)) @ Ainv
        rhs = np.array([math.exp(-q[k]) * np.prod([(-u - q[l]) / (q[k] - q[l]) for l in range(n) if l != k])
                        for k in range(n)])
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs)))))
    return worst


class SourceKernel(Kernel):
    """K = -(Meijer term) + (1/2 pi i) int_0^inf du oint_C dv
    u^{nu_1} e^{-u+v} Psi_r(u;x) Phi_s(v;y) / (u-v) prod_l (u+q_l)/(v+q_l).

    C is a circle around -q_1..-q_n that stays in Re v < 0, so repeated q are
    allowed.  Psi_r uses its Laguerre series (``psi='series'``) or the loop
    integral (``psi='contour'``, slow).

    Psi_1 carries a factor e^x that the u-integral cancels, and Psi_r grows
    like exp(r x^(1/r)), so rounding limits this form to moderate x (about
    x < 25 at time 1 and x < 100 at time 2); the moment-matrix kernel has no
    such limit.
    """

    def __init__(self, spec: ProcessSpec, psi: str = "series", tol: float = 1e-9):
        q = _source(spec)
        self.spec = spec
        self.psi = psi
        self.tol = tol
        qmin, qmax = float(q.min()), float(q.max())
        self.center = -(qmin + qmax) / 2
        self.radius = (qmax - qmin) / 2 + min(qmin / 2, 0.5 * max(qmax - qmin, 1.0))
        self.q = q

    def _psi(self, r, u, xs):
        if self.psi == "series":
            return psi_series(self.spec, r, u, xs)
        return np.array([[source_Psi(self.spec, r, uu, x) for x in xs] for uu in u])

    def _u_nodes(self, h):
        k = np.arange(-int(4.5 / h), int(4.5 / h) + 1)
        tau = k * h
        t = np.exp(0.5 * np.pi * np.sinh(tau))
        w = h * t * 0.5 * np.pi * np.cosh(tau)
        keep = (t < U_CAP) & (t > 1e-300)
        return t[keep], w[keep]

    def _level(self, r, xs, s, ys, h, nv):
        nu1 = self.spec.nu[1]
        theta = 2 * np.pi * np.arange(nv) / nv
        v = self.center + self.radius * np.exp(1j * theta)
        dv = 1j * self.radius * np.exp(1j * theta) * (2 * np.pi / nv)
        phi = source_Phi_grid(self.spec, s, v, ys)                             # (Nv, Ny)
        qv = np.prod(v[:, None] + self.q[None, :], axis=1)
        B = (dv * np.exp(v) / qv)[:, None] * phi / (2j * np.pi)
        u, wu = self._u_nodes(h)
        inner = _accel.cauchy_matrix_apply(u.astype(complex), v, B)           # (Nu, Ny)
        qu = np.prod(u[:, None] + self.q[None, :], axis=1)
        wt = wu * u ** nu1 * np.exp(-u) * qu
        psi = self._psi(r, u, xs)                                              # (Nu, Nx)
        return (psi * wt[:, None]).T @ inner

    def second(self, r, xs, s, ys):
        h, nv = 0.125, 32
        prev = self._level(r, xs, s, ys, h, nv)
        for _ in range(5):
            h, nv = h / 2, nv * 2
            cur = self._level(r, xs, s, ys, h, nv)
            err = np.abs(cur - prev)
            if np.all(err <= np.maximum(self.tol, 1e-8 * np.abs(cur))):
                return cur.real
            prev = cur
        raise QuadratureError("source kernel integral did not converge (for large x use the "
                              "'general' representation)",
                              value=cur.real, err_estimate=float(err.max()))


def source_kernel(spec, r, x, s, y):
    return SourceKernel(spec)(r, x, s, y)
