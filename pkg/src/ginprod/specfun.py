"""Complex special functions: log-gamma, Pochhammer, 0F1, Bessel K and the
Meijer G-function classes that appear in the product-matrix kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
import scipy.special as sc

from . import _accel
from .quad import ContourSpec, QuadratureError, integrate


class GammaPoleError(ValueError):
    """Argument of Gamma sits on (or numerically at) a pole."""


class ContourPlacementError(ValueError):
    pass


def _near_pole(z, atol=1e-13):
    z = np.asarray(z, dtype=complex)
    r = np.round(z.real)
    return (r <= 0) & (np.abs(z.real - r) < atol) & (np.abs(z.imag) < atol)


def log_gamma(z):
    """Principal branch of log Gamma(z) (scalar or array)."""
    arr = np.asarray(z, dtype=complex)
    if np.any(_near_pole(arr)):
        raise GammaPoleError(f"Gamma has a pole at {z!r}")
    out = _accel.loggamma(arr)
    return complex(out) if np.ndim(z) == 0 else out


def gamma(z):
    return np.exp(log_gamma(z))


def pochhammer(a, l: int) -> float:
    """Rising factorial (a)_l = a (a+1) ... (a+l-1); (a)_0 = 1."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    out = 1.0
    for k in range(l):
        out *= a + k
    return out


def hyp0f1(b, z):
    """0F1(; b; z).  Backed by scipy (Bessel I/J forms); accepts complex z."""
    if np.any(np.asarray(b) <= 0) and np.any(np.asarray(b) == np.round(b)):
        raise GammaPoleError("0F1 parameter b is a nonpositive integer")
    return sc.hyp0f1(b, z)


def hyp0f1_series(b: float, z: float, terms: int = 400) -> float:
    """Plain power series of 0F1, summed in extended precision (test oracle)."""
    with mpmath.workdps(40):
        s = mpmath.mpf(0)
        term = mpmath.mpf(1)
        for k in range(terms):
            s += term
            term *= mpmath.mpf(z) / ((b + k) * (k + 1))
            if abs(term) < mpmath.mpf(10) ** -35 * abs(s) and k > 5:
                break
        return float(s)


def bessel_k(order: float, x: float) -> float:
    if x <= 0:
        raise ValueError("x must be positive")
    return float(sc.kv(order, x))


# --- Meijer G ----------------------------------------------------------------

@dataclass(frozen=True)
class MeijerGSpec:
    """G^{m,n}_{p,q}(a; b | z) with real parameters.

    Accepted classes: (m,0;0,m), (s,0;1,s), (1,0;0,q) and (q-1,0;0,q).
    """

    m_order: int
    n_order: int
    p_order: int
    q_order: int
    a_params: tuple = ()
    b_params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(a) for a in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(b) for b in self.b_params))
        if len(self.a_params) != self.p_order or len(self.b_params) != self.q_order:
            raise ValueError("parameter list lengths must match p and q")
        if not (0 <= self.m_order <= self.q_order and 0 <= self.n_order <= self.p_order):
            raise ValueError("need 0 <= m <= q and 0 <= n <= p")
        if self.klass is None:
            raise ValueError(f"unsupported Meijer-G class {self.orders}")

    @property
    def orders(self):
        return (self.m_order, self.n_order, self.p_order, self.q_order)

    @property
    def klass(self):
        m, n, p, q = self.orders
        if n != 0:
            return None
        if p == 0 and m == q and m >= 1:
            return "m0_0m"
        if p == 1 and m == q and m >= 1:
            return "s0_1s"
        if p == 0 and m == 1 and q >= 2:
            return "10_0q"
        if p == 0 and m == q - 1 and m >= 1:
            return "q10_0q"
        return None

    @classmethod
    def product(cls, b):
        """G^{m,0}_{0,m}(-; b_1..b_m | z)."""
        b = tuple(b)
        return cls(len(b), 0, 0, len(b), (), b)

    def log_mellin(self, u):
        """log of prod Gamma(b_j+u) / (prod_{j>m} Gamma(1-b_j-u) prod_{j>n} Gamma(a_j+u))."""
        m = self.m_order
        out = 0.0
        for b in self.b_params[:m]:
            out = out + log_gamma(b + u)
        for b in self.b_params[m:]:
            out = out - log_gamma(1.0 - b - u)
        for a in self.a_params:
            out = out - log_gamma(a + u)
        return out


def _saddle_abscissa(spec: MeijerGSpec, z: float, lo: float) -> float:
    # real u minimising |integrand| on the axis; keeps the line well conditioned
    logz = math.log(z)

    def phi(u):
        return spec.log_mellin(complex(u)).real - u * logz

    a, c = lo, max(lo + 1.0, 2.0 * z ** (1.0 / max(spec.m_order, 1)) + 2.0)
    # golden section on a convex function
    gr = 0.5 * (math.sqrt(5.0) - 1.0)
    x1, x2 = c - gr * (c - a), a + gr * (c - a)
    for _ in range(60):
        if phi(x1) < phi(x2):
            c = x2
        else:
            a = x1
        x1, x2 = c - gr * (c - a), a + gr * (c - a)
    return 0.5 * (a + c)


def meijer_g(spec: MeijerGSpec, z: float, tol: float = 1e-12, rtol: float = 1e-11,
             abscissa: float | None = None, bend: float | None = None) -> float:
    """Evaluate a G-function of the supported classes by contour quadrature.

    The integral is written in u = -s:  (1/2 pi i) int Mellin(u) z^(-u) du along
    a line Re u = c to the right of every pole of Gamma(b_j + u), j <= m.
    The (m,0;0,m) class uses a straight line through the saddle point; the
    other classes only decay towards the left, so the line is bent there.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    k = spec.klass
    bm = spec.b_params[:spec.m_order]
    lo = -min(bm)
    if k == "s0_1s" and spec.m_order == 1 and z >= 1.0:
        # closing to the right: no poles, integrand decays since a > b
        if z == 1.0:
            raise ContourPlacementError("G^{1,0}_{1,1} is singular at z = 1")
        return 0.0
    # a straight line decays whenever the Mellin factor has net Gamma order >= 2
    straight = k == "m0_0m" or (k == "s0_1s" and spec.m_order >= 2 and z > 1.0)
    if abscissa is None:
        if straight:
            abscissa = max(_saddle_abscissa(spec, z, lo + 0.25), lo + 0.25)
        else:
            abscissa = lo + 0.5
    elif abscissa <= lo:
        raise ContourPlacementError(
            f"abscissa {abscissa} leaves Gamma poles (rightmost at {-lo}) on the wrong side")
    if bend is None:
        bend = 0.0 if straight else 1.0
    logz = math.log(z)
    # scale the line so the decay region spans a few units of the parameter
    scale = max(1.0, 0.5 * abs(abscissa) ** 0.5) if straight else 1.0
    contour = ContourSpec("vertical_line", anchor=abscissa, bend=bend, scale=scale)

    def f(u):
        return np.exp(spec.log_mellin(u) - u * logz)

    try:
        res = integrate(f, contour, tol=tol, rtol=rtol)
    except QuadratureError as exc:
        raise QuadratureError(f"Meijer-G quadrature did not converge for {spec.orders} at z={z}: {exc}",
                              value=exc.value, err_estimate=exc.err_estimate) from exc
    return res.value.real


def meijer_g_vec(spec: MeijerGSpec, z, tol: float = 1e-13, rtol: float = 1e-11):
    """Vectorized meijer_g over an array of z (same contour per point)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    flat = out.ravel()
    for i, zi in enumerate(z.ravel()):
        flat[i] = _meijer_cached(spec, float(zi), tol, rtol)
    return flat.reshape(z.shape)


SMALL_Z_SERIES = 0.05


@lru_cache(maxsize=200_000)
def _meijer_cached(spec, z, tol, rtol):
    if spec.orders == (1, 0, 0, 1):
        # single Gamma: the contour integral is z^b e^{-z}; skip quadrature
        b = spec.b_params[0]
        return z ** b * math.exp(-z) if z < 745.0 else 0.0
    if spec.klass == "m0_0m" and z > 0 and math.log(z) / spec.m_order > 9.0:
        # far tail: value ~ exp(-m z^(1/m)) underflows relative to any use here
        zz = spec.m_order * z ** (1.0 / spec.m_order)
        if zz > 700.0:
            return 0.0
    if spec.klass in ("q10_0q", "10_0q") and z < SMALL_Z_SERIES:
        # the line integral cancels catastrophically here; the residue series does not
        b = spec.b_params
        m = spec.m_order
        return float(mpmath.meijerg([[], []], [list(b[:m]), list(b[m:])], z))
    return meijer_g(spec, z, tol=tol, rtol=rtol)


def meijer_g_residue(b, z, dps: int | None = None) -> float:
    """G^{m,0}_{0,m}(-; b | z) from its residue series (pairwise non-congruent b).

    Summed in extended precision with mpmath, because the series cancels
    heavily for large z.  Independent of the contour path; used as an oracle.
    """
    m = len(b)
    if dps is None:
        # terms peak near exp(m z^(1/m)); carry enough digits to absorb that
        dps = 30 + int(m * float(z) ** (1.0 / m) / 2.3)
    b = [mpmath.mpf(x) for x in b]
    for i in range(m):
        for j in range(i + 1, m):
            d = b[i] - b[j]
            if abs(d - mpmath.nint(d)) < mpmath.mpf(10) ** -12:
                raise ValueError("residue series needs pairwise non-congruent parameters")
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        for j in range(m):
            # residues at u = -b_j - k
            k = 0
            term_scale = None
            while True:
                prod = mpmath.mpf(1)
                for i in range(m):
                    if i != j:
                        prod *= mpmath.gamma(b[i] - b[j] - k)
                term = (-1) ** k / mpmath.factorial(k) * prod * zz ** (b[j] + k)
                total += term
                mag = abs(term)
                term_scale = mag if term_scale is None else max(term_scale, mag)
                if k > 10 and mag < mpmath.mpf(10) ** (-dps + 5) * term_scale:
                    break
                k += 1
                if k > 5000:
                    break
        return float(total)


def bessel_hard_edge_series(nu: float, x: float, y: float, terms: int = 120) -> float:
    """int_0^1 J_nu(2 sqrt(ux)) J_nu(2 sqrt(uy)) du by termwise integration."""
    with mpmath.workdps(40):
        x = mpmath.mpf(x)
        y = mpmath.mpf(y)
        total = mpmath.mpf(0)
        ax = [(-1) ** k * x ** (k + mpmath.mpf(nu) / 2) / (mpmath.factorial(k) * mpmath.gamma(k + nu + 1))
              for k in range(terms)]
        ay = [(-1) ** k * y ** (k + mpmath.mpf(nu) / 2) / (mpmath.factorial(k) * mpmath.gamma(k + nu + 1))
              for k in range(terms)]
        for k in range(terms):
            for l in range(terms):
                total += ax[k] * ay[l] / (k + l + nu + 1)
        return float(total)
