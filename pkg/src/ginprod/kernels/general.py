"""Kernel for an arbitrary polynomial-ensemble initial condition, assembled
from the moment matrix and the propagated initial functions by real-axis
quadrature.  Slow but family-agnostic."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..process import ProcessSpec, TruncatedUnitary, f_family
from ..quad import real_integral
from ..specfun import MeijerGSpec, bessel_k, meijer_g_vec
from .common import Kernel, gamma_products, phi_final

COND_WARN = 1e10


class IllConditionedWarning(RuntimeWarning):
    pass


def _domain(spec):
    return (0.0, 1.0) if isinstance(spec.initial, TruncatedUnitary) else (0.0, np.inf)


def _g_kernel(params):
    """z -> G^{k,0}_{0,k}(-; params | z), vectorized, closed form for k <= 2."""
    params = tuple(float(p) for p in params)
    if len(params) == 1:
        a = params[0]
        return lambda z: z ** a * np.exp(-z)
    if len(params) == 2:
        a, b = params

        def g2(z):
            z = np.asarray(z, dtype=float)
            return 2.0 * z ** ((a + b) / 2) * np.vectorize(bessel_k)(a - b, 2.0 * np.sqrt(z))

        return g2
    spec = MeijerGSpec.product(params)
    return lambda z: meijer_g_vec(spec, z)


def _damped(spec, f):
    """t -> f_i(t) e^{-t}; user-supplied f are damped directly."""
    if f is None:
        return f_family(spec, damped=True)
    return lambda i, t: f(i, t) * np.exp(-np.asarray(t, dtype=float))


def general_A(spec: ProcessSpec, f=None, tol: float = 1e-13) -> np.ndarray:
    """a_ij = prod_{k>=2} Gamma(nu_k+j) int f_i(t) e^{-t} t^{nu_1+j-1} dt."""
    fd = _damped(spec, f)
    n, nu1 = spec.n, spec.nu[1]

    def integrand(t):
        fi = np.stack([fd(i, t) for i in range(1, n + 1)], axis=1)           # (N, n)
        pw = np.stack([t ** (nu1 + j - 1) for j in range(1, n + 1)], axis=1)
        return (fi[:, :, None] * pw[:, None, :]).reshape(len(t), -1)

    raw = np.asarray(real_integral(integrand, _domain(spec), tol=tol, rtol=1e-13).value).reshape(n, n)
    d = np.array([gamma_products(spec, 2, j) for j in range(1, n + 1)])
    return raw * d[None, :]


def general_phi0(spec: ProcessSpec, s: int, y: float, f=None, tol: float = 1e-13) -> np.ndarray:
    """phi_{0,s}(j, y) for j = 1..n: the initial functions propagated to time s."""
    fd = _damped(spec, f)
    n, nu = spec.n, spec.nu
    if s == 1:
        return np.array([float(fd(j, np.array([y]))[0]) for j in range(1, n + 1)]) * y ** nu[1]
    g = _g_kernel(nu[2:s + 1])

    def integrand(t):
        fi = np.stack([fd(j, t) for j in range(1, n + 1)], axis=1)
        return fi * (t ** (nu[1] - 1.0) * g(y / t))[:, None]

    scale = max(y, 1e-3) ** (1.0 / s)
    return np.asarray(real_integral(integrand, _domain(spec), tol=tol, rtol=1e-12, scale=scale).value)


class GeneralKernel(Kernel):
    """K = -(Meijer term) + sum_{i,j} phi_{r,m+1}(x,i) (A^{-1})_{ij} phi_{0,s}(j,y)."""

    def __init__(self, spec: ProcessSpec, f=None, tol: float = 1e-13):
        self.spec = spec
        self.f = f
        self.tol = tol
        self.A = general_A(spec, self.f, tol)
        cond = np.linalg.cond(self.A)
        if cond > COND_WARN:
            warnings.warn(f"moment matrix condition number {cond:.2e}", IllConditionedWarning)
        self.Ainv = np.linalg.inv(self.A)

    def second(self, r, xs, s, ys):
        n = self.spec.n
        left = np.stack([phi_final(self.spec, r, xs, i) for i in range(1, n + 1)], axis=1)
        right = np.stack([general_phi0(self.spec, s, y, self.f, self.tol) for y in ys], axis=1)
        return left @ self.Ainv @ right


def general_kernel(spec, r, x, s, y, f_family=None, tol=1e-13):
    return GeneralKernel(spec, f_family, tol)(r, x, s, y)
