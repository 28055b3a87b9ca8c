import math
import warnings

import numpy as np
import pytest

from ginprod.kernels import OracleKernel, gauge_multiplier, make_kernel
from ginprod.oracle import EMOracle, TransitionSystem, assemble_kernel, brute_force_rho
from ginprod.process import ConfigError, ProcessSpec

PTS = {"ginibre": [(1, 0.7), (2, 1.3)], "truncated": [(1, 0.4), (2, 0.3)], "source": [(1, 0.7), (2, 1.3)]}


def test_rank_one_oracle():
    K = OracleKernel(ProcessSpec.build(1, 1, [0]))
    xs = np.array([0.1, 1.0, 5.0])
    assert np.max(np.abs(K.rho1(1, xs) - np.exp(-xs))) < 1e-4


def test_oracle_kernel_is_gauge_transform(specs22):
    spec = specs22["ginibre"]
    raw = EMOracle(TransitionSystem.from_spec(spec))
    D = make_kernel(spec, "double")
    xs, ys = np.array([0.4, 1.5]), np.array([0.8, 2.2])
    for r in (1, 2):
        for s in (1, 2):
            g = gauge_multiplier(spec, r, xs[:, None], s, ys[None, :])
            assert np.max(np.abs(raw.grid_values(r, xs, s, ys) - g * D.grid(r, xs, s, ys))) < 1e-6


@pytest.mark.parametrize("family", ["ginibre", "truncated", "source"])
def test_oracle_determinants_match_closed_forms(family, specs22):
    spec = specs22[family]
    pts = PTS[family] + [(2, 0.5)]
    ref = make_kernel(spec, "double")
    orc = OracleKernel(spec)
    for sub in (pts[:1], pts[:2], pts):
        assert orc.rho(sub) == pytest.approx(ref.rho(sub), abs=1e-4)


def test_adaptive_assembly_agrees(specs22):
    spec = specs22["ginibre"]
    system = TransitionSystem.from_spec(spec)
    grid = EMOracle(system)
    v = assemble_kernel(system, 1, 0.7, 2, 1.3)
    assert v == pytest.approx(grid.grid_values(1, [0.7], 2, [1.3])[0, 0], abs=1e-6)


def test_brute_force_joint_density():
    spec = ProcessSpec.build(1, 2, [0, 0])
    for x, y in ((0.5, 0.3), (1.0, 2.0)):
        assert brute_force_rho(spec, [(1, x), (2, y)]) == pytest.approx(math.exp(-x - y / x) / x, abs=1e-6)
    # one fixed point: the time-2 marginal density 2 K_0(2 sqrt y)
    from scipy.special import k0
    assert brute_force_rho(spec, [(2, 0.8)]) == pytest.approx(2 * k0(2 * math.sqrt(0.8)), abs=1e-6)
    with pytest.raises(ConfigError):
        brute_force_rho(ProcessSpec.build(2, 3, [0, 0, 0]), [(1, 1.0)])
    assert brute_force_rho(spec, [(1, 0.5), (1, 0.7)]) == 0.0


def test_brute_force_two_by_two(specs22):
    spec = specs22["ginibre"]
    pts = PTS["ginibre"]
    assert brute_force_rho(spec, pts) == pytest.approx(make_kernel(spec, "sum").rho(pts), abs=1e-6)
