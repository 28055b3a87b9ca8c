"""Histogram estimates of one- and two-point correlation functions from
trajectory batches, and their comparison with kernel predictions."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .process import ConfigError


@dataclass
class BinnedEstimate:
    edges: tuple                      # one or two arrays of bin edges
    counts: np.ndarray
    density: np.ndarray
    std_err: np.ndarray
    trajectories: int
    outside: int = 0                  # samples (or pairs) falling outside the edges

    @property
    def dim(self) -> int:
        return len(self.edges)

    def bin_measure(self) -> np.ndarray:
        w = [np.diff(e) for e in self.edges]
        return w[0] if self.dim == 1 else np.outer(w[0], w[1])


def default_edges(values, bins: int = 40, coverage: float = 0.99) -> np.ndarray:
    """Log-spaced bins over the central ``coverage`` fraction of the sample."""
    v = np.asarray(values, dtype=float).ravel()
    v = v[v > 0]
    if v.size == 0:
        raise ConfigError("no positive samples to bin")
    lo, hi = np.quantile(v, [(1 - coverage) / 2, (1 + coverage) / 2])
    return np.geomspace(lo, hi, bins + 1)


def _check_batch(batch):
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 3 or batch.shape[0] == 0:
        raise ConfigError("empty or malformed trajectory batch")
    return batch


def estimate_rho1(batch, r: int, edges=None) -> BinnedEstimate:
    """Histogram of every x_j^r, scaled to estimate rho_1(r, .) (total mass n)."""
    batch = _check_batch(batch)
    T = batch.shape[0]
    vals = batch[:, r - 1, :].ravel()
    edges = default_edges(vals) if edges is None else np.asarray(edges, dtype=float)
    counts, _ = np.histogram(vals, bins=edges)
    w = np.diff(edges)
    dens = counts / (T * w)
    return BinnedEstimate((edges,), counts, dens, np.sqrt(counts) / (T * w), T,
                          int(vals.size - counts.sum()))


def _pairs(batch, r, s):
    a = batch[:, r - 1, :]
    b = batch[:, s - 1, :]
    n = a.shape[1]
    if r == s:
        idx = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        idx = [(i, j) for i in range(n) for j in range(n)]
    if not idx:
        raise ConfigError("no pairs: equal times need at least two particles")
    xi = np.concatenate([a[:, i] for i, _ in idx])
    yj = np.concatenate([b[:, j] for _, j in idx])
    return xi, yj


def estimate_rho2(batch, r: int, s: int, edges_x=None, edges_y=None) -> BinnedEstimate:
    """2-d histogram of ordered pairs (x_i^r, x_j^s), i != j when r = s."""
    batch = _check_batch(batch)
    T = batch.shape[0]
    xi, yj = _pairs(batch, r, s)
    ex = default_edges(batch[:, r - 1, :]) if edges_x is None else np.asarray(edges_x, dtype=float)
    ey = default_edges(batch[:, s - 1, :]) if edges_y is None else np.asarray(edges_y, dtype=float)
    counts, _, _ = np.histogram2d(xi, yj, bins=[ex, ey])
    counts = counts.astype(np.int64)
    meas = np.outer(np.diff(ex), np.diff(ey))
    dens = counts / (T * meas)
    return BinnedEstimate((ex, ey), counts, dens, np.sqrt(counts) / (T * meas), T,
                          int(xi.size - counts.sum()))


# --- comparison ----------------------------------------------------------------

def _gl(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _bin_mass_1d(pred, edges, order):
    t, w = _gl(order)
    a, b = edges[:-1], edges[1:]
    pts = a[:, None] + (b - a)[:, None] * t[None, :]
    vals = np.asarray(pred(pts.ravel()), dtype=float).reshape(pts.shape)
    return (vals * w[None, :]).sum(axis=1) * (b - a)


def _bin_mass_2d(pred, ex, ey, order):
    """``pred(xs, ys)`` returns the (len(xs), len(ys)) grid of rho_2 values."""
    t, w = _gl(order)
    ax, bx = ex[:-1], ex[1:]
    ay, by = ey[:-1], ey[1:]
    px = (ax[:, None] + (bx - ax)[:, None] * t[None, :]).ravel()
    py = (ay[:, None] + (by - ay)[:, None] * t[None, :]).ravel()
    vals = np.asarray(pred(px, py), dtype=float).reshape(len(ax), order, len(ay), order)
    mass = np.einsum("iajb,a,b->ij", vals, w, w)
    return mass * np.outer(bx - ax, by - ay)


@dataclass
class ComparisonReport:
    expected: np.ndarray
    z: np.ndarray
    used: np.ndarray
    chi2: float
    dof: int
    frac_over: float
    passed: bool
    thresholds: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"chi2": self.chi2, "dof": self.dof,
                "chi2_per_dof": self.chi2 / self.dof if self.dof else float("nan"),
                "frac_abs_z_over": self.frac_over, "max_abs_z": float(np.max(np.abs(self.z[self.used])))
                if self.dof else 0.0, "passed": self.passed, **self.thresholds}


def compare(est: BinnedEstimate, prediction, min_expected: float = 100.0, z_max: float = 3.0,
            max_frac: float = 0.01, chi2_sigmas: float = 4.0, order: int = 4) -> ComparisonReport:
    """Per-bin z-scores of the counts against the predicted expected counts.

    Bin masses use Gauss-Legendre of the given order, redone at three times
    the order for bins whose |z| exceeds ``z_max``.  Only bins expecting at
    least ``min_expected`` counts enter the statistics.
    """
    def masses(order_):
        if est.dim == 1:
            return _bin_mass_1d(prediction, est.edges[0], order_)
        return _bin_mass_2d(prediction, est.edges[0], est.edges[1], order_)

    expected = masses(order) * est.trajectories
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(expected > 0, (est.counts - expected) / np.sqrt(np.abs(expected)), 0.0)
    if np.any(np.abs(z) > z_max):
        fine = masses(3 * order) * est.trajectories
        redo = np.abs(z) > z_max
        expected = np.where(redo, fine, expected)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(expected > 0, (est.counts - expected) / np.sqrt(np.abs(expected)), 0.0)
    used = expected >= min_expected
    dof = int(used.sum())
    chi2 = float(np.sum(z[used] ** 2))
    frac = float(np.mean(np.abs(z[used]) > z_max)) if dof else 0.0
    chi_ok = dof > 0 and abs(chi2 / dof - 1.0) <= chi2_sigmas * np.sqrt(2.0 / dof)
    passed = bool(dof > 0 and frac <= max_frac and chi_ok)
    return ComparisonReport(expected, z, used, chi2, dof, frac, passed,
                            {"min_expected": min_expected, "z_max": z_max, "max_frac": max_frac,
                             "chi2_sigmas": chi2_sigmas})


def pooled_fraction(reports) -> tuple[float, int]:
    """Fraction of used bins with |z| above each report's threshold, over all reports."""
    over = sum(int(np.sum(np.abs(r.z[r.used]) > r.thresholds.get("z_max", 3.0))) for r in reports)
    used = sum(r.dof for r in reports)
    return (over / used if used else 0.0), used


def export_csv(path, est: BinnedEstimate, report: ComparisonReport | None = None,
               comment: str | None = None) -> None:
    """Rows of bin edges, density, std_err, prediction (density units) and z,
    optionally preceded by one ``# comment`` line."""
    meas = est.bin_measure()
    pred = report.expected / (est.trajectories * meas) if report is not None else None
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        wr = csv.writer(fh)
        if est.dim == 1:
            wr.writerow(["x_lo", "x_hi", "count", "density", "std_err", "prediction", "z"])
            e = est.edges[0]
            for i in range(len(e) - 1):
                wr.writerow([_f(e[i]), _f(e[i + 1]), int(est.counts[i]), _f(est.density[i]), _f(est.std_err[i]),
                             _f(pred[i]) if pred is not None else "", _f(report.z[i]) if report else ""])
        else:
            wr.writerow(["x_lo", "x_hi", "y_lo", "y_hi", "count", "density", "std_err", "prediction", "z"])
            ex, ey = est.edges
            for i in range(len(ex) - 1):
                for j in range(len(ey) - 1):
                    wr.writerow([_f(ex[i]), _f(ex[i + 1]), _f(ey[j]), _f(ey[j + 1]), int(est.counts[i, j]),
                                 _f(est.density[i, j]), _f(est.std_err[i, j]),
                                 _f(pred[i, j]) if pred is not None else "",
                                 _f(report.z[i, j]) if report else ""])


def export_json(path, report: ComparisonReport, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump({**report.summary(), **(extra or {})}, fh, indent=2, sort_keys=True)


def _f(v) -> str:
    return format(float(v), ".17g")


@dataclass
class SumRuleCheck:
    time: int
    mean: float
    sigma: float
    expected: float

    @property
    def z(self) -> float:
        return (self.mean - self.expected) / self.sigma

    def passed(self, z_max: float = 3.0) -> bool:
        return abs(self.z) <= z_max


def sum_rule(batch, spec) -> list:
    """E sum_j x_j^k against prod_{j=0}^k N_j (Ginibre start: E tr G*MG = rows(G) tr M)."""
    if spec.family != "ginibre":
        raise ConfigError("the trace sum rule holds for the Ginibre family")
    batch = _check_batch(batch)
    T = batch.shape[0]
    out = []
    for k in range(1, spec.m + 1):
        tr = batch[:, k - 1, :].sum(axis=1)
        out.append(SumRuleCheck(k, float(tr.mean()), float(tr.std(ddof=1) / np.sqrt(T)),
                                float(np.prod(spec.dims[:k + 1]))))
    return out
