"""Correlation kernels of the product process, selectable by representation."""
from __future__ import annotations

import numpy as np

from ..process import ConfigError, ProcessSpec, gauge
from .common import Kernel, gauge_multiplier
from .general import GeneralKernel
from .ginibre import GinibreDoubleKernel, GinibreSumKernel, HardEdgeKernel
from .source import SourceKernel
from .truncated import TruncatedDoubleKernel, TruncatedSumKernel

REPRESENTATIONS = ("sum", "double", "general", "oracle")


class OracleKernel(Kernel):
    """The transition-chain assembly brought back to the explicit gauge."""

    def __init__(self, spec: ProcessSpec, h: float = 0.125):
        from ..oracle import EMOracle, TransitionSystem

        self.spec = spec
        self.oracle = EMOracle(TransitionSystem.from_spec(spec), h=h)

    def grid(self, r, xs, s, ys):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        for v in (r, s):
            if not 1 <= v <= self.spec.m:
                raise ConfigError(f"time {v} outside 1..{self.spec.m}")
        if np.any(xs <= 0) or np.any(ys <= 0):
            raise ConfigError("coordinates must be positive")
        raw = self.oracle.grid_values(r, xs, s, ys)
        return raw * (gauge(self.spec, s, ys)[None, :] / gauge(self.spec, r, xs)[:, None])


def make_kernel(spec: ProcessSpec, representation: str = "double") -> Kernel:
    """Kernel object for ``spec`` in the requested representation.

    ``sum`` and ``double`` are the family-specific closed forms (the source
    family has only the double-integral form, used for both), ``general`` the
    moment-matrix form, ``oracle`` the transition-chain assembly.
    """
    fam = spec.family
    if representation == "general":
        return GeneralKernel(spec)
    if representation == "oracle":
        return OracleKernel(spec)
    if representation not in ("sum", "double"):
        raise ConfigError(f"unknown representation {representation!r}; choose from {REPRESENTATIONS}")
    if fam == "ginibre":
        return GinibreSumKernel(spec) if representation == "sum" else GinibreDoubleKernel(spec)
    if fam == "truncated":
        return TruncatedSumKernel(spec) if representation == "sum" else TruncatedDoubleKernel(spec)
    return SourceKernel(spec)


__all__ = ["Kernel", "GeneralKernel", "GinibreSumKernel", "GinibreDoubleKernel", "HardEdgeKernel",
           "TruncatedSumKernel", "TruncatedDoubleKernel", "SourceKernel", "OracleKernel",
           "REPRESENTATIONS", "gauge_multiplier", "make_kernel"]
