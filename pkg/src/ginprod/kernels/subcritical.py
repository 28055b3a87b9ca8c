"""Hard-edge limit of the source family in the subcritical regime (sources
stay bounded), in its contour and Meijer-G product forms."""
from __future__ import annotations

import math

import numpy as np

from ..process import ConfigError, ProcessSpec
from ..quad import real_integral
from ..specfun import MeijerGSpec, meijer_g_vec
from .common import phi_rs_term
from .ginibre import HardEdgeKernel


def _g_entire(nu_r, z):
    """G^{1,0}_{0,r+1}(-; 0, -nu_1..-nu_r | z) = sum_k (-z)^k / (k! prod Gamma(1+nu_i+k))."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    term = np.full_like(z, 1.0 / math.prod(math.gamma(1 + v) for v in nu_r))
    k = 0
    while True:
        out = out + term
        k += 1
        term = term * (-z) / (k * math.prod(v + k for v in nu_r))
        if k > 10 and np.all(np.abs(term) < 1e-18 * np.maximum(1.0, np.abs(out))):
            return out
        if k > 2000:
            raise ConfigError("argument too large for the entire-series G evaluation")


class SubcriticalProduct:
    """Second term as int_0^1 G^{1,0}_{0,r+1}(xw) G^{s,0}_{0,s+1}(-; nu_1..nu_s, 0 | yw) dw."""

    def __init__(self, nu):
        self.nu = [float(v) for v in nu]

    def __call__(self, r, x, s, y):
        nu = self.nu
        g2 = MeijerGSpec(s, 0, 0, s + 1, (), tuple(nu[:s]) + (0.0,))

        def f(w):
            out = np.zeros_like(w)
            pos = w > 1e-250
            out[pos] = _g_entire(nu[:r], x * w[pos]) * meijer_g_vec(g2, y * w[pos])
            return out

        val = real_integral(f, (0.0, 1.0), tol=1e-13, rtol=1e-11).value
        spec = ProcessSpec.build(1, len(nu), nu)
        return float(val) - phi_rs_term(spec, r, s, x, y)


def subcritical_hard_edge(nu, r, s, x, y, form: str = "contour") -> float:
    """Hard-edge kernel for fixed sources; ``nu`` lists nu_1..nu_m."""
    nu = list(nu)
    if not (1 <= r <= len(nu) and 1 <= s <= len(nu)):
        raise ConfigError("need 1 <= r, s <= m")
    if form == "contour":
        return HardEdgeKernel(nu)(r, x, s, y)
    if form == "g_product":
        return SubcriticalProduct(nu)(r, x, s, y)
    raise ValueError("form must be 'contour' or 'g_product'")
