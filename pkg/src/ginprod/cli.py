"""Command-line interface: kernel grids, Monte Carlo campaigns, hard-edge sweeps,
gap probabilities and a quick self-test.

Exit codes: 0 success, 1 a verification report failed, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .process import (ConfigError, Ginibre, GinibreSource, NumericalError, ProcessSpec,
                      TruncatedUnitary, worker_count)
from .specfun import ContourPlacementError, GammaPoleError

EXIT_OK, EXIT_REPORT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
Representation = Literal["sum", "double", "general", "oracle"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpecModel(_Strict):
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    nu: list[int]
    family: Literal["ginibre", "truncated", "source"] = "ginibre"
    l: Optional[int] = None
    q: Optional[list[float]] = None

    @model_validator(mode="after")
    def _family_fields(self):
        if self.family == "truncated" and self.l is None:
            raise ValueError("truncated family needs l")
        if self.family == "source" and self.q is None:
            raise ValueError("source family needs q")
        if self.family != "truncated" and self.l is not None:
            raise ValueError("l is only meaningful for the truncated family")
        if self.family != "source" and self.q is not None:
            raise ValueError("q is only meaningful for the source family")
        return self

    def build(self) -> ProcessSpec:
        init = {"ginibre": lambda: Ginibre(), "truncated": lambda: TruncatedUnitary(self.l),
                "source": lambda: GinibreSource(tuple(self.q))}[self.family]()
        return ProcessSpec.build(self.n, self.m, self.nu, init)


class KernelConfig(_Strict):
    spec: SpecModel
    xs: list[float]
    ys: Optional[list[float]] = None
    pairs: Optional[list[tuple[int, int]]] = None
    diagonal: bool = False
    representation: Representation = "double"
    reference: Optional[Representation] = None
    tol: Optional[float] = None


class Thresholds(_Strict):
    min_expected: float = 100.0
    z_max: float = 3.0
    max_frac: float = 0.01
    chi2_sigmas: float = 4.0


class MCConfig(_Strict):
    spec: SpecModel
    trajectories: int = Field(ge=1000)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    times: Optional[list[int]] = None
    pairs: Optional[list[tuple[int, int]]] = None
    bins: int = Field(default=40, ge=2)
    representation: Representation = "double"
    perturb_prediction: float = 1.0
    thresholds: Thresholds = Thresholds()
    write_batch: bool = True


class HardEdgeConfig(_Strict):
    family: Literal["ginibre", "truncated"] = "ginibre"
    nu: list[int]
    ns: list[int]
    pairs: list[tuple[int, int]] = [(1, 1), (1, 2)]
    xs: list[float] = [0.5, 1.0, 2.0, 4.0]
    ys: Optional[list[float]] = None
    l_factor: int = Field(default=3, ge=2)


class WindowModel(_Strict):
    time: int
    interval: tuple[float, float]


class GapConfig(_Strict):
    spec: SpecModel
    windows: list[WindowModel] = []
    quadrature_order: Optional[int] = None
    orders: Optional[tuple[int, int]] = None
    tol: float = 1e-6
    representation: Representation = "double"
    mc_trajectories: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


COMMANDS = {"kernel": KernelConfig, "mc": MCConfig, "hard-edge": HardEdgeConfig, "gap": GapConfig}


# --- helpers -----------------------------------------------------------------------

def _f(v) -> str:
    return format(float(v), ".17g")


def _resolve(cmd: str, args) -> BaseModel:
    if args.config is None:
        raise ConfigError(f"'{cmd}' needs --config <json>")
    try:
        raw = json.loads(Path(args.config).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    model = COMMANDS[cmd]
    fields = model.model_fields
    if args.seed is not None and "seed" in fields:
        raw["seed"] = args.seed
    if args.tol is not None and "tol" in fields:
        raw["tol"] = args.tol
    if args.repr is not None and "representation" in fields:
        raw["representation"] = args.repr
    if getattr(args, "perturb_prediction", None) is not None and "perturb_prediction" in fields:
        raw["perturb_prediction"] = args.perturb_prediction
    return model.model_validate(raw)


def _config_hash(cfg: BaseModel) -> tuple[str, str]:
    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return blob, hashlib.sha256(blob.encode()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _prepare_out(args, cfg) -> tuple[Path, str]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    blob, digest = _config_hash(cfg)
    _write_json(out / "config.resolved.json", {"config": json.loads(blob), "config_sha256": digest})
    return out, digest


def _alternate(spec: ProcessSpec, rep: str) -> str:
    """Second representation used for the per-value error estimate."""
    if rep == "sum":
        return "double"
    if rep == "double":
        return "general" if spec.family == "source" else "sum"
    return "double"


# --- commands ------------------------------------------------------------------------

def cmd_kernel(cfg: KernelConfig, out: Path, digest: str) -> int:
    from .kernels import make_kernel

    spec = cfg.spec.build()
    pairs = cfg.pairs or [(r, s) for r in range(1, spec.m + 1) for s in range(1, spec.m + 1)]
    xs = np.asarray(cfg.xs, dtype=float)
    ys = xs if (cfg.ys is None or cfg.diagonal) else np.asarray(cfg.ys, dtype=float)
    main = make_kernel(spec, cfg.representation)
    ref = make_kernel(spec, cfg.reference or _alternate(spec, cfg.representation))
    rows = []
    worst = 0.0
    for r, s in pairs:
        spec.check_point(r, 1.0)
        spec.check_point(s, 1.0)
        v = main.grid(r, xs, s, ys)
        e = np.abs(v - ref.grid(r, xs, s, ys))
        for a, x in enumerate(xs):
            for b, y in enumerate(ys):
                if cfg.diagonal and a != b:
                    continue
                rows.append((r, s, x, y, v[a, b], e[a, b]))
                worst = max(worst, float(e[a, b]))
    if cfg.tol is not None and worst > cfg.tol:
        raise NumericalError(f"representations disagree by {worst:.3e} > tol {cfg.tol:.1e}")
    with open(out / "kernel.csv", "w", newline="") as fh:
        fh.write(f"# config_sha256={digest}\n")
        wr = csv.writer(fh)
        wr.writerow(["r", "s", "x", "y", "value", "err_estimate"])
        for r, s, x, y, v, e in rows:
            wr.writerow([r, s, _f(x), _f(y), _f(v), _f(e)])
    print(f"kernel: {len(rows)} values, max err_estimate {worst:.3e} -> {out / 'kernel.csv'}")
    return EXIT_OK


def cmd_mc(cfg: MCConfig, out: Path, digest: str) -> int:
    from .ensembles import sample_campaign, write_batch
    from .kernels import make_kernel
    from .stats import compare, estimate_rho1, estimate_rho2, export_csv, pooled_fraction, sum_rule

    spec = cfg.spec.build()
    times = cfg.times or list(range(1, spec.m + 1))
    pairs = cfg.pairs if cfg.pairs is not None else ([(1, 2)] if spec.m >= 2 else [])
    for t in times + [v for p in pairs for v in p]:
        spec.check_point(t, 1.0)
    batch = sample_campaign(spec, cfg.trajectories, cfg.seed, workers=worker_count())
    if cfg.write_batch:
        write_batch(out / "trajectories.bin", spec, cfg.seed, batch)
    K = make_kernel(spec, cfg.representation)
    c = cfg.perturb_prediction
    th = cfg.thresholds.model_dump()
    reports = []
    summary: dict = {"config_sha256": digest, "comparisons": []}
    for r in times:
        est = estimate_rho1(batch, r, _edges(batch, r, cfg.bins))
        rep = compare(est, lambda x, r=r: c * K.rho1(r, x), **th)
        export_csv(out / f"rho1_t{r}.csv", est, rep, comment=f"config_sha256={digest}")
        reports.append(rep)
        summary["comparisons"].append({"kind": "rho1", "time": r, **rep.summary()})
    for r, s in pairs:
        est = estimate_rho2(batch, r, s, _edges(batch, r, cfg.bins), _edges(batch, s, cfg.bins))
        rep = compare(est, lambda x, y, r=r, s=s: c * K.rho2(r, x, s, y), **th)
        export_csv(out / f"rho2_{r}_{s}.csv", est, rep, comment=f"config_sha256={digest}")
        reports.append(rep)
        summary["comparisons"].append({"kind": "rho2", "times": [r, s], **rep.summary()})
    frac, used = pooled_fraction(reports)
    chi_ok = all(abs(rp.chi2 / rp.dof - 1) <= th["chi2_sigmas"] * math.sqrt(2 / rp.dof)
                 for rp in reports if rp.dof)
    passed = bool(used > 0 and frac <= th["max_frac"] and chi_ok)
    summary.update({"pooled_frac_abs_z_over": frac, "pooled_bins": used, "chi2_all_ok": chi_ok})
    if spec.family == "ginibre":
        rules = sum_rule(batch, spec)
        summary["sum_rule"] = [{"time": q.time, "mean": q.mean, "sigma": q.sigma, "expected": q.expected,
                                "z": q.z} for q in rules]
        passed = passed and all(q.passed() for q in rules)
    summary["passed"] = passed
    _write_json(out / "report.json", summary)
    print(f"mc: pooled |z|>{th['z_max']:g} fraction {frac:.4f} over {used} bins; "
          f"{'PASS' if passed else 'FAIL'} -> {out / 'report.json'}")
    return EXIT_OK if passed else EXIT_REPORT


def _edges(batch, r, bins):
    from .stats import default_edges
    return default_edges(batch[:, r - 1, :], bins=bins)


def cmd_hard_edge(cfg: HardEdgeConfig, out: Path, digest: str) -> int:
    from .convergence import hard_edge_sweep

    res = hard_edge_sweep(cfg.family, cfg.nu, cfg.ns, [tuple(p) for p in cfg.pairs], cfg.xs, cfg.ys,
                          cfg.l_factor)
    with open(out / "hard_edge.csv", "w", newline="") as fh:
        fh.write(f"# config_sha256={digest}\n")
        wr = csv.writer(fh)
        wr.writerow(["n", "scale", "sup_error", "monotone"])
        for row in res.rows:
            wr.writerow([row.n, _f(row.scale), _f(row.sup_error), int(res.monotone)])
    print(f"hard-edge: errors {[f'{r.sup_error:.3e}' for r in res.rows]}, "
          f"{'decreasing' if res.monotone else 'NOT decreasing'} -> {out / 'hard_edge.csv'}")
    return EXIT_OK


def cmd_gap(cfg: GapConfig, out: Path, digest: str) -> int:
    from .ensembles import sample_campaign
    from .gap import GapQuery, fredholm_det, gap_frequency
    from .kernels import make_kernel

    spec = cfg.spec.build()
    d = {"windows": [w.model_dump() for w in cfg.windows], "tol": cfg.tol}
    if cfg.orders is not None:
        d["orders"] = list(cfg.orders)
    elif cfg.quadrature_order is not None:
        d["quadrature_order"] = cfg.quadrature_order
    query = GapQuery.from_dict(d)
    query.validate(spec.m)
    res = fredholm_det(make_kernel(spec, cfg.representation), query)
    result = {"config_sha256": digest, **res.to_dict()}
    if cfg.mc_trajectories:
        batch = sample_campaign(spec, cfg.mc_trajectories, cfg.seed, workers=worker_count())
        p, sig = gap_frequency(batch, res.windows)
        result["mc"] = {"frequency": p, "sigma": sig, "trajectories": cfg.mc_trajectories,
                        "z": (p - res.value) / sig if sig > 0 else 0.0}
    _write_json(out / "gap.json", result)
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Fast exact checks touching every module."""
    from .gap import GapQuery, fredholm_det
    from .kernels import make_kernel
    from .kernels.ginibre import ginibre_A

    checks = []
    spec = ProcessSpec.build(1, 1, [0])
    for rep in ("sum", "double", "general", "oracle"):
        K = make_kernel(spec, rep)
        err = max(abs(K(1, x, 1, x) - math.exp(-x)) for x in (0.1, 1.0, 5.0))
        checks.append((f"n=1 diagonal e^-x [{rep}]", err, 1e-6))
    g = fredholm_det(make_kernel(spec, "sum"), GapQuery(((1, (0.0, 1.0)),)))
    checks.append(("rank-1 gap e^-1", abs(g.value - math.exp(-1)), 1e-8))
    A, Ainv = ginibre_A(ProcessSpec.build(4, 2, [1, 2]))
    checks.append(("Hankel inverse", float(np.max(np.abs(A @ Ainv - np.eye(4)))), 1e-8))
    spec2 = ProcessSpec.build(1, 2, [0, 0])
    K2 = make_kernel(spec2, "double")
    x, y = 0.7, 1.3
    pred = math.exp(-x) / x * math.exp(-y / x)
    checks.append(("two-time density n=1 m=2", abs(K2.rho([(1, x), (2, y)]) - pred), 1e-6))
    ok = True
    for name, err, tol in checks:
        good = err <= tol
        ok &= good
        print(f"{'PASS' if good else 'FAIL'}  {name}: error {err:.2e} (tol {tol:.0e})")
    return EXIT_OK if ok else EXIT_REPORT


# --- entry point ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ginprod", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("kernel", "mc", "hard-edge", "gap", "selftest"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="u64 seed (overrides the config)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--tol", type=float, help="tolerance (overrides the config)")
        sp.add_argument("--repr", choices=["sum", "double", "general", "oracle"],
                        help="kernel representation (overrides the config)")
        if name == "mc":
            sp.add_argument("--perturb-prediction", nargs="?", type=float, const=1.1, default=None,
                            help="negative control: multiply predictions by this factor (default 1.1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        worker_count()
        if args.command == "selftest":
            return cmd_selftest(args)
        cfg = _resolve(args.command, args)
        out, digest = _prepare_out(args, cfg)
        run = {"kernel": cmd_kernel, "mc": cmd_mc, "hard-edge": cmd_hard_edge, "gap": cmd_gap}
        return run[args.command](cfg, out, digest)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError, RuntimeError,
            GammaPoleError, ContourPlacementError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
