"""Experiment description shared by every module: particle count, time horizon,
dimension offsets and the law of the initial matrix."""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sc


def worker_count() -> int:
    """Thread cap from GINPROD_THREADS (default: all cores)."""
    raw = os.environ.get("GINPROD_THREADS", "")
    if not raw:
        return os.cpu_count() or 1
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"GINPROD_THREADS must be a positive integer, got {raw!r}") from None
    if v < 1:
        raise ConfigError("GINPROD_THREADS must be a positive integer")
    return v


class ConfigError(ValueError):
    """Invalid process or run configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure that should not be papered over (CLI exit code 3)."""


@dataclass(frozen=True)
class Ginibre:
    kind: str = field(default="ginibre", init=False)


@dataclass(frozen=True)
class TruncatedUnitary:
    l: int
    kind: str = field(default="truncated", init=False)


@dataclass(frozen=True)
class GinibreSource:
    q: tuple
    kind: str = field(default="source", init=False)

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))


Initial = Ginibre | TruncatedUnitary | GinibreSource


@dataclass(frozen=True)
class ProcessSpec:
    """n particles observed at times 1..m.

    ``nu`` holds nu_0..nu_m with nu_0 = 0; the matrix G_k is N_k x N_{k-1}
    with N_k = n + nu_k.
    """

    n: int
    m: int
    nu: tuple
    initial: Initial = field(default_factory=Ginibre)

    def __post_init__(self):
        nu = tuple(int(v) for v in self.nu)
        if any(float(a) != b for a, b in zip(self.nu, nu)):
            raise ConfigError("dimension offsets nu must be integers")
        object.__setattr__(self, "nu", nu)
        if self.n < 1 or self.m < 1:
            raise ConfigError("need n >= 1 and m >= 1")
        if len(nu) != self.m + 1:
            raise ConfigError(f"nu must list nu_0..nu_m ({self.m + 1} entries), got {len(nu)}")
        if nu[0] != 0:
            raise ConfigError("nu_0 must be 0")
        if any(v < 0 for v in nu):
            raise ConfigError("dimension offsets must be nonnegative")
        init = self.initial
        if isinstance(init, TruncatedUnitary):
            if init.l < 2 * self.n + nu[1]:
                raise ConfigError(f"truncated unitary needs l >= 2n + nu_1 = {2 * self.n + nu[1]}")
        elif isinstance(init, GinibreSource):
            if len(init.q) != self.n:
                raise ConfigError("source needs exactly n values q")
            if any(not (v > 0) for v in init.q):
                raise ConfigError("source values q must be strictly positive")
        elif not isinstance(init, Ginibre):
            raise ConfigError(f"unknown initial condition {init!r}")

    @classmethod
    def build(cls, n: int, m: int, nu, initial: Initial | None = None) -> "ProcessSpec":
        """Accept nu as nu_0..nu_m or as nu_1..nu_m (nu_0 = 0 is then prepended)."""
        nu = list(nu)
        if len(nu) == m:
            nu = [0] + nu
        return cls(n, m, tuple(nu), initial or Ginibre())

    @property
    def family(self) -> str:
        return self.initial.kind

    @property
    def dims(self):
        """N_0..N_m."""
        return tuple(self.n + v for v in self.nu)

    def to_dict(self) -> dict:
        d = {"n": self.n, "m": self.m, "nu": list(self.nu), "family": self.family}
        if isinstance(self.initial, TruncatedUnitary):
            d["l"] = self.initial.l
        elif isinstance(self.initial, GinibreSource):
            d["q"] = list(self.initial.q)
        return d

    def digest(self) -> bytes:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).digest()

    def check_point(self, r: int, x: float):
        if not (1 <= r <= self.m):
            raise ConfigError(f"time {r} outside 1..{self.m}")
        if not (x > 0):
            raise ConfigError("coordinates must be positive")


@dataclass(frozen=True)
class KernelPoint:
    r: int
    x: float

    def __post_init__(self):
        if self.r < 1 or not (self.x > 0):
            raise ConfigError("kernel points need r >= 1 and x > 0")


def _hyp0f1_times_exp(b: float, z, shift):
    """0F1(b; z) e^{shift} for z >= 0, through the scaled Bessel function."""
    z = np.asarray(z, dtype=float)
    zs = np.clip(z, 1e-300, 1e300)
    small = z < 1e-6
    zn = np.where(small, z, 0.0)
    rt = 2.0 * np.sqrt(zs)
    # outside this range the scaled Bessel value is irrelevant: e^{rt+shift} is 0 or inf
    rt_c = np.minimum(rt, 1e8)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        big = np.exp(math.lgamma(b) + 0.5 * (1.0 - b) * np.log(zs) + np.log(sc.ive(b - 1.0, rt_c))
                     + rt + shift)
        near = (1.0 + zn / b + zn * zn / (2 * b * (b + 1))) * np.exp(shift)
    return np.where(small, near, big)


def f_family(spec: ProcessSpec, damped: bool = False):
    """The functions f_1..f_n of the initial polynomial ensemble.

    Returns f(i, t) for 1-based i, vectorized in t.  With ``damped`` the
    function returned is f_i(t) e^{-t}, computed without overflow.
    """
    init = spec.initial
    nu1 = spec.nu[1]
    if isinstance(init, Ginibre):
        if damped:
            return lambda i, t: np.asarray(t, dtype=float) ** (i - 1) * np.exp(-np.asarray(t, dtype=float))
        return lambda i, t: np.asarray(t, dtype=float) ** (i - 1)
    if isinstance(init, TruncatedUnitary):
        beta = init.l - 2 * spec.n - nu1

        def f(i, t):
            t = np.asarray(t, dtype=float)
            inside = (t > 0) & (t < 1)
            tc = np.where(inside, t, 0.5)
            ex = 1.0 if damped else np.exp(tc)
            return np.where(inside, ex * tc ** (i - 1) * (1.0 - tc) ** beta, 0.0)

        return f
    q = init.q
    g1 = math.gamma(nu1 + 1)

    def fs(i, t):
        t = np.asarray(t, dtype=float)
        return _hyp0f1_times_exp(nu1 + 1.0, q[i - 1] * t, -t if damped else 0.0) / g1

    return fs


def gauge(spec: ProcessSpec, r: int, x):
    """g_r(x): the factor relating the chain-of-transitions kernel to the
    explicit-gauge one, K_chain(r,x;s,y) = g_r(x)/g_s(y) K(r,x;s,y)."""
    x = np.asarray(x, dtype=float)
    m = spec.m
    if r == m:
        return np.ones_like(x) if x.ndim else 1.0
    nu = spec.nu
    if r == 1:
        out = np.exp(-x) * x ** nu[1]
    else:
        out = x ** nu[r]
    return out if x.ndim else float(out)
