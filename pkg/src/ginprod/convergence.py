"""Finite-n kernels against their hard-edge limit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels.ginibre import GinibreDoubleKernel, HardEdgeKernel
from .kernels.truncated import TruncatedDoubleKernel, hard_edge_scale
from .process import ConfigError, ProcessSpec, TruncatedUnitary


@dataclass
class SweepRow:
    n: int
    scale: float
    sup_error: float
    per_pair: dict


@dataclass
class SweepResult:
    rows: list
    monotone: bool

    def table(self):
        return [(r.n, r.scale, r.sup_error) for r in self.rows]


def scaled_kernel_grid(spec: ProcessSpec, scale: float, r, xs, s, ys) -> np.ndarray:
    """(1/c) K(r, x/c; s, y/c) on a grid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    K = TruncatedDoubleKernel(spec) if spec.family == "truncated" else GinibreDoubleKernel(spec)
    return K.grid(r, xs / scale, s, ys / scale) / scale


def hard_edge_sweep(family: str, nu, ns, pairs, xs, ys=None, l_factor: int = 3) -> SweepResult:
    """Sup-grid distance to the limit kernel for each n; ``nu`` lists nu_1..nu_m.

    Ginibre uses the scale n, truncated unitary l = l_factor * n and (l - n) n.
    """
    ns = [int(v) for v in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n values must be strictly ascending")
    if family not in ("ginibre", "truncated"):
        raise ConfigError("hard-edge sweeps cover the ginibre and truncated families")
    nu = list(nu)
    m = len(nu)
    ys = xs if ys is None else ys
    limit = HardEdgeKernel(nu)
    lim = {(r, s): limit.grid(r, xs, s, ys) for r, s in pairs}
    rows = []
    for n in ns:
        if family == "ginibre":
            spec = ProcessSpec.build(n, m, nu)
            c = float(n)
        else:
            l = l_factor * n
            spec = ProcessSpec.build(n, m, nu, TruncatedUnitary(l))
            c = hard_edge_scale(n, l)
        errs = {}
        for r, s in pairs:
            errs[(r, s)] = float(np.max(np.abs(scaled_kernel_grid(spec, c, r, xs, s, ys) - lim[(r, s)])))
        rows.append(SweepRow(n, c, max(errs.values()), errs))
    sups = [row.sup_error for row in rows]
    return SweepResult(rows, all(b < a for a, b in zip(sups, sups[1:])))
