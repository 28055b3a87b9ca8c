"""Multi-time gap probabilities as Fredholm determinants of the kernel."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .process import ConfigError, NumericalError, worker_count

TAIL_MASS = 1e-8
LOG_FLOOR = 1e-9         # (0, b * LOG_FLOOR) is dropped from windows starting at 0


@dataclass(frozen=True)
class GapQuery:
    """Windows (time, (a, b)); b may be inf.  ``orders`` are the two Nystrom
    orders whose agreement is required."""

    windows: tuple = ()
    orders: tuple = (40, 60)
    tol: float = 1e-6

    @classmethod
    def from_dict(cls, d: dict) -> "GapQuery":
        wins = []
        for w in d.get("windows", []):
            if isinstance(w, dict):
                wins.append((int(w["time"]), (float(w["interval"][0]), float(w["interval"][1]))))
            else:
                wins.append((int(w[0]), (float(w[1][0]), float(w[1][1]))))
        if "orders" in d:
            orders = tuple(int(o) for o in d["orders"])
        elif "quadrature_order" in d:
            lo = int(d["quadrature_order"])
            orders = (lo, (3 * lo + 1) // 2)
        else:
            orders = (40, 60)
        return cls(tuple(wins), orders, float(d.get("tol", 1e-6)))

    def validate(self, m: int) -> None:
        by_time: dict = {}
        for t, (a, b) in self.windows:
            if not 1 <= t <= m:
                raise ConfigError(f"window time {t} outside 1..{m}")
            if not (0 <= a < b) or math.isnan(a) or math.isnan(b):
                raise ConfigError(f"window ({a}, {b}) must satisfy 0 <= a < b")
            by_time.setdefault(t, []).append((a, b))
        for t, ivs in by_time.items():
            ivs.sort()
            for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
                if a2 < b1:
                    raise ConfigError(f"overlapping windows at time {t}")
        if len(self.orders) != 2 or min(self.orders) < 2:
            raise ConfigError("need two Nystrom orders >= 2")


def tail_mass(kernel, r: int, S: float, h: float = 0.05) -> float:
    """int_S^inf rho_1(r, x) dx by the trapezoid rule in log x, stopped once a
    whole chunk of rho_1 values sits at the kernels' absolute accuracy floor."""
    total = 0.0
    for chunk in range(80):
        k = np.arange(chunk * 32, (chunk + 1) * 32)
        x = S * np.exp(h * k)
        rho = kernel.rho1(r, x)
        v = x * rho
        if chunk == 0:
            v[0] *= 0.5
        total += h * float(v.sum())
        if np.max(np.abs(rho)) < 1e-14:
            return total
    raise NumericalError("one-point function tail does not decay")


def tail_cutoff(kernel, r: int, a: float) -> float:
    """S such that the one-point mass of time r beyond S is below TAIL_MASS."""
    S = max(2.0 * a, 1.0)
    for _ in range(60):
        if abs(tail_mass(kernel, r, S)) < TAIL_MASS:
            return S
        S *= 1.5
    raise NumericalError("could not find a cutoff for the unbounded window")


def _nodes(a, b, order):
    """Gauss-Legendre nodes in log x when the window reaches (or nearly reaches)
    the origin, where the kernel varies on every scale; plain otherwise."""
    u, w = np.polynomial.legendre.leggauss(order)
    if a > 0 and b / a < 2.0:
        half = 0.5 * (b - a)
        return a + half * (u + 1.0), half * w
    lo = math.log(a) if a > 0 else math.log(b * LOG_FLOOR)
    half = 0.5 * (math.log(b) - lo)
    x = np.exp(lo + half * (u + 1.0))
    return x, half * w * x


def nystrom_matrix(kernel, windows, order: int) -> np.ndarray:
    """Blocks sqrt(w_a w_b) K(l_i, x_a; l_j, x_b), assembled on a thread pool."""
    pts = [_nodes(a, b, order) for _, (a, b) in windows]
    k = len(windows)

    def block(ij):
        i, j = ij
        (xi, wi), (xj, wj) = pts[i], pts[j]
        K = kernel.grid(windows[i][0], xi, windows[j][0], xj)
        return np.sqrt(wi)[:, None] * K * np.sqrt(wj)[None, :]

    pairs = [(i, j) for i in range(k) for j in range(k)]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        done = dict(zip(pairs, pool.map(block, pairs)))
    return np.block([[done[i, j] for j in range(k)] for i in range(k)])


@dataclass
class GapResult:
    value: float
    delta: float
    orders: tuple
    windows: tuple
    dropped_mass: float = 0.0     # estimated one-point mass cut off near the origin

    def to_dict(self) -> dict:
        return {"value": self.value, "order_delta": self.delta, "orders": list(self.orders),
                "dropped_mass": self.dropped_mass,
                "windows": [{"time": t, "interval": [a, b]} for t, (a, b) in self.windows]}


def dropped_mass(kernel, windows) -> float:
    """Rough int_0^eps rho_1 for each window whose log nodes stop at eps = b * LOG_FLOOR.

    Removing these pieces raises the gap probability by at most this much.
    """
    total = 0.0
    for t, (a, b) in windows:
        if a == 0.0:
            eps = b * LOG_FLOOR
            total += eps * abs(float(kernel.rho1(t, [eps])[0]))
    return total


def fredholm_det(kernel, query: GapQuery) -> GapResult:
    """det(I - K) over the window set, Nystrom with Gauss-Legendre nodes at two
    orders; the higher order is reported, their difference is the error estimate."""
    spec = kernel.spec
    query.validate(spec.m)
    if not query.windows:
        return GapResult(1.0, 0.0, query.orders, ())
    wins = []
    for t, (a, b) in query.windows:
        if math.isinf(b):
            b = tail_cutoff(kernel, t, a)
        wins.append((t, (a, b)))
    vals = []
    for order in query.orders:
        M = nystrom_matrix(kernel, wins, order)
        vals.append(float(np.linalg.det(np.eye(M.shape[0]) - M)))
    delta = abs(vals[1] - vals[0])
    if delta > query.tol:
        raise NumericalError(f"Nystrom orders {query.orders} disagree by {delta:.2e}")
    return GapResult(vals[1], delta, query.orders, tuple(wins), dropped_mass(kernel, wins))


def gap_frequency(batch, windows) -> tuple[float, float]:
    """Fraction of trajectories with no point in any window, with its binomial sigma."""
    batch = np.asarray(batch, dtype=float)
    hit = np.zeros(batch.shape[0], dtype=bool)
    for t, (a, b) in windows:
        x = batch[:, t - 1, :]
        hit |= np.any((x > a) & (x < b), axis=1)
    p = 1.0 - hit.mean()
    return float(p), float(math.sqrt(max(p * (1 - p), 1e-300) / batch.shape[0]))
