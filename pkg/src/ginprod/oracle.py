"""Independent kernel oracle: the generic determinantal assembly from the chain
of transition functions, evaluated purely by real-axis quadrature, plus a
direct integrator of the joint density for tiny instances.

Continuous intermediate variables are tabulated on a uniform grid in log t;
the trapezoid rule there converges geometrically because every transition
decays double-exponentially at one end of the log axis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .process import ConfigError, NumericalError, ProcessSpec, TruncatedUnitary, f_family
from .quad import real_integral

COND_WARN = 1e12
TAU_LO, TAU_HI = -40.0, 14.0


class OracleConditionWarning(RuntimeWarning):
    pass


def _mid_transition(nu, m, r, damp=True):
    """phi_{r,r+1}(x, y) of the Ginibre chain, vectorized by broadcasting.

    ``damp=False`` drops the e^{-x} of the first step (see EMOracle._first_stage).
    """
    a = nu[r] - nu[r + 1] - 1.0
    first, last = r == 1 and damp, r == m - 1
    yexp = nu[m] if last else 0.0

    def phi(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            e = -y / x - (x if first else 0.0)
            out = np.exp(a * np.log(x) + yexp * np.log(y) + e)
        return np.where(np.isfinite(out), out, 0.0)

    return phi


@dataclass
class TransitionSystem:
    """phi01(i, t), phi_mid[r-1](x, y) for r = 1..m-1, phi_final(x, i) = x^{i-1}.

    ``domain`` is the support of phi01 in t: (0, inf) or (0, 1).  When f_i
    overflows, ``split`` = (f_i(t) e^{-t}, phi_{1,2}(t, y) e^{t}) lets the first
    convolution be formed without overflow.
    """

    n: int
    m: int
    phi01: Callable
    phi_mid: list
    phi_final: Callable = field(default=lambda x, i: np.asarray(x, dtype=float) ** (i - 1))
    domain: tuple = (0.0, np.inf)
    split: tuple | None = None

    @classmethod
    def from_spec(cls, spec: ProcessSpec) -> "TransitionSystem":
        nu, m = spec.nu, spec.m
        f = f_family(spec)
        dom = (0.0, 1.0) if isinstance(spec.initial, TruncatedUnitary) else (0.0, np.inf)
        if m == 1:
            # no Ginibre step carries the weight x^{nu_1} e^{-x}: fold it into phi01
            fd = f_family(spec, damped=True)
            phi01 = lambda i, t: fd(i, t) * np.asarray(t, dtype=float) ** nu[1]
            split = None
        else:
            phi01 = f
            split = (f_family(spec, damped=True), _mid_transition(nu, m, 1, damp=False))
        return cls(spec.n, m, phi01, [_mid_transition(nu, m, r) for r in range(1, m)], domain=dom,
                   split=split)


def convolve(phi: Callable, psi: Callable, tol: float = 1e-12, domain=(0.0, np.inf)) -> Callable:
    """(phi * psi)(x, y) = int phi(x, t) psi(t, y) dt, evaluated pointwise."""
    def out(x, y):
        return float(real_integral(lambda t: phi(x, t) * psi(t, y), domain, tol=tol, rtol=tol).value)
    return out


class _Grid:
    def __init__(self, h):
        tau = np.arange(TAU_LO, TAU_HI + h / 2, h)
        self.t = np.exp(tau)
        self.w = h * self.t


class EMOracle:
    """Kernel assembled from the transition chain (the kernel the chain itself
    produces, i.e. in the g_r(x)/g_s(y) gauge relative to the explicit one)."""

    def __init__(self, system: TransitionSystem, h: float = 0.125, tol: float = 1e-13):
        self.sys = system
        self.tol = tol
        self.grid = _Grid(h)
        self._rows = self._tabulate_rows()         # rows[s][j, k] = phi_{0,s}(j, t_k), s = 1..m
        self._cols = self._tabulate_cols()         # cols[r][k, i] = phi_{r,m+1}(t_k, i), r = 1..m
        self.A = self._build_A()
        self.cond = float(np.linalg.cond(self.A))
        if self.cond > COND_WARN:
            warnings.warn(f"chain Gram matrix condition number {self.cond:.2e}", OracleConditionWarning)
        self.Ainv = _refined_inverse(self.A)

    # --- tabulation ---------------------------------------------------------
    def _first_stage(self, ys):
        """phi_{0,2}(j, y) for all j and y by adaptive quadrature over phi01's support."""
        s = self.sys
        n = s.n
        ys = np.asarray(ys, dtype=float)

        f0, t12 = s.split or (s.phi01, s.phi_mid[0])

        def f(t):
            fi = np.stack([f0(i, t) for i in range(1, n + 1)], axis=1)                  # (N, n)
            tr = t12(t[:, None], ys[None, :])                                           # (N, Ny)
            return (fi[:, :, None] * tr[:, None, :]).reshape(len(t), -1)

        val = real_integral(f, s.domain, tol=self.tol, rtol=1e-13).value
        return np.asarray(val).reshape(n, len(ys))

    def _tabulate_rows(self):
        s, t, w = self.sys, self.grid.t, self.grid.w
        rows = {}
        if s.m >= 2:
            rows[2] = self._first_stage(t)
        for r in range(2, s.m):
            T = s.phi_mid[r - 1](t[:, None], t[None, :])
            rows[r + 1] = (rows[r] * w) @ T
        return rows

    def _tabulate_cols(self):
        s, t, w = self.sys, self.grid.t, self.grid.w
        cols = {s.m: np.stack([s.phi_final(t, i) for i in range(1, s.n + 1)], axis=1)}
        for r in range(s.m - 1, 0, -1):
            T = s.phi_mid[r - 1](t[:, None], t[None, :])
            cols[r] = T @ (w[:, None] * cols[r + 1])
        return cols

    def _build_A(self):
        s = self.sys
        n = s.n
        if s.m == 1:
            def f(t):
                fi = np.stack([s.phi01(i, t) for i in range(1, n + 1)], axis=1)
                fj = np.stack([s.phi_final(t, j) for j in range(1, n + 1)], axis=1)
                return (fi[:, :, None] * fj[:, None, :]).reshape(len(t), -1)

            return np.asarray(real_integral(f, s.domain, tol=self.tol, rtol=1e-13).value).reshape(n, n)
        return (self._rows[s.m] * self.grid.w) @ self._cols[s.m]

    # --- pointwise pieces -----------------------------------------------------
    def phi_0s(self, s: int, ys) -> np.ndarray:
        """phi_{0,s}(j, y): array (n, len(ys))."""
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        sy = self.sys
        if s == 1:
            return np.stack([sy.phi01(i, ys) for i in range(1, sy.n + 1)])
        if s == 2:
            return self._first_stage(ys)
        T = sy.phi_mid[s - 2](self.grid.t[:, None], ys[None, :])
        return (self._rows[s - 1] * self.grid.w) @ T

    def phi_rm1(self, r: int, xs) -> np.ndarray:
        """phi_{r,m+1}(x, i): array (len(xs), n)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        sy = self.sys
        if r == sy.m:
            return np.stack([sy.phi_final(xs, i) for i in range(1, sy.n + 1)], axis=1)
        T = sy.phi_mid[r - 1](xs[:, None], self.grid.t[None, :])
        return T @ (self.grid.w[:, None] * self._cols[r + 1])

    def phi_rs(self, r: int, s: int, x: float, y: float) -> float:
        """phi_{r,s}(x, y) = (phi_{r,r+1} * ... * phi_{s-1,s})(x, y); 0 for r >= s."""
        if r >= s:
            return 0.0
        sy, t, w = self.sys, self.grid.t, self.grid.w
        if s == r + 1:
            return float(sy.phi_mid[r - 1](x, y))
        v = sy.phi_mid[r - 1](x, t)
        for k in range(r + 1, s - 1):
            v = (v * w) @ sy.phi_mid[k - 1](t[:, None], t[None, :])
        return float((v * w) @ sy.phi_mid[s - 2](t, y))

    def grid_values(self, r: int, xs, s: int, ys) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out = self.phi_rm1(r, xs) @ self.Ainv @ self.phi_0s(s, ys)
        if r < s:
            out = out - np.array([[self.phi_rs(r, s, x, y) for y in ys] for x in xs])
        return out

    def __call__(self, r, x, s, y) -> float:
        return float(self.grid_values(r, [x], s, [y])[0, 0])

    def matrix(self, points) -> np.ndarray:
        pts = [(int(p[0]), float(p[1])) for p in points]
        return np.array([[self(r, x, s, y) for (s, y) in pts] for (r, x) in pts])

    def rho(self, points) -> float:
        return float(np.linalg.det(self.matrix(points)))


def _refined_inverse(A):
    """Pivoted-LU inverse with one step of iterative refinement."""
    n = A.shape[0]
    X = np.linalg.solve(A, np.eye(n))
    R = np.eye(n) - A @ X
    return X + np.linalg.solve(A, R)


def build_A(system: TransitionSystem, tol: float = 1e-13) -> np.ndarray:
    return EMOracle(system, tol=tol).A


def assemble_kernel(system: TransitionSystem, r: int, x: float, s: int, y: float, tol: float = 1e-13) -> float:
    return EMOracle(system, tol=tol)(r, x, s, y)


# --- direct integration of the joint density -----------------------------------

def _nodes(domain, h):
    if domain[1] == np.inf:
        tau = np.arange(-30.0, 8.0 + h / 2, h)
        t = np.exp(tau)
        return t, h * t
    tau = np.arange(-30.0, 30.0 + h / 2, h)
    t = 1.0 / (1.0 + np.exp(-tau))
    return t, h * t * (1.0 - t)


def _joint_density_unnormalized(system: TransitionSystem, levels):
    """levels[r] is an array (N, n) of level-r coordinates; returns (N,) values."""
    s = system
    n, m = s.n, s.m
    x1 = levels[1]
    out = np.linalg.det(np.stack([[s.phi01(i, x1[:, j]) for j in range(n)] for i in range(1, n + 1)]).transpose(2, 0, 1))
    for r in range(1, m):
        xa, xb = levels[r], levels[r + 1]
        M = s.phi_mid[r - 1](xa[:, :, None], xb[:, None, :])
        out = out * np.linalg.det(M)
    xm = levels[m]
    F = np.stack([s.phi_final(xm, i) for i in range(1, n + 1)], axis=2)       # (N, n_points, n)
    return out * np.linalg.det(F)


def brute_force_rho(spec: ProcessSpec, points, tol: float = 1e-8, h: float = 0.2,
                    system: TransitionSystem | None = None) -> float:
    """Correlation function at ``points`` [(r, x), ...] by integrating the
    normalized joint density over every unfixed coordinate (n*m <= 4)."""
    n, m = spec.n, spec.m
    if n * m > 4:
        raise ConfigError("direct integration is limited to n*m <= 4")
    system = system or TransitionSystem.from_spec(spec)
    fixed = {r: [] for r in range(1, m + 1)}
    for r, x in points:
        if not 1 <= r <= m:
            raise ConfigError(f"time {r} outside 1..{m}")
        fixed[int(r)].append(float(x))
    if any(len(v) > n for v in fixed.values()):
        return 0.0
    Z = math.factorial(n) ** m * np.linalg.det(EMOracle(system).A)

    def integrate_at(hh):
        free = []
        for r in range(1, m + 1):
            dom = system.domain if r == 1 else (0.0, np.inf)
            free += [(r, dom)] * (n - len(fixed[r]))
        node_sets = [_nodes(d, hh) for _, d in free]
        if free:
            grids = np.meshgrid(*[ns[0] for ns in node_sets], indexing="ij")
            wts = np.meshgrid(*[ns[1] for ns in node_sets], indexing="ij")
            coords = [g.ravel() for g in grids]
            weight = np.prod([w.ravel() for w in wts], axis=0)
        else:
            coords, weight = [], np.ones(1)
        N = len(weight)
        levels, c = {}, 0
        for r in range(1, m + 1):
            cols = [np.full(N, v) for v in fixed[r]]
            for _ in range(n - len(fixed[r])):
                cols.append(coords[c])
                c += 1
            levels[r] = np.stack(cols, axis=1)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = _joint_density_unnormalized(system, levels)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return float(np.sum(vals * weight))

    v1 = integrate_at(h)
    v2 = integrate_at(h / 2)
    if abs(v1 - v2) > max(tol, 1e-6 * abs(v2)):
        raise NumericalError(f"joint-density quadrature not converged ({v1} vs {v2})")
    sym = 1.0
    for r in range(1, m + 1):
        sym *= math.factorial(n) / math.factorial(n - len(fixed[r]))
    return sym * v2 / Z
