import numpy as np
import pytest

from ginprod.convergence import hard_edge_sweep, scaled_kernel_grid
from ginprod.kernels.ginibre import HardEdgeKernel
from ginprod.process import ConfigError, ProcessSpec


def test_ginibre_sweep_decreases():
    res = hard_edge_sweep("ginibre", [0, 0], [10, 20, 40], [(1, 1), (1, 2)], [0.5, 1.0, 2.0])
    assert res.monotone
    errs = [row.sup_error for row in res.rows]
    # leading correction is O(1/n)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.15)
    assert res.table()[0][:2] == (10, 10.0)


def test_truncated_sweep_decreases():
    res = hard_edge_sweep("truncated", [0, 0], [5, 10, 20], [(1, 1), (1, 2)], [0.5, 1.0, 2.0])
    assert res.monotone and res.rows[0].scale == (15 - 5) * 5


def test_scaled_grid_near_limit():
    spec = ProcessSpec.build(60, 2, [0, 0])
    xs = np.array([0.5, 2.0])
    diff = scaled_kernel_grid(spec, 60.0, 1, xs, 2, xs) - HardEdgeKernel([0, 0]).grid(1, xs, 2, xs)
    assert np.max(np.abs(diff)) < 0.01


def test_sweep_validation():
    with pytest.raises(ConfigError):
        hard_edge_sweep("ginibre", [0], [20, 10], [(1, 1)], [1.0])
    with pytest.raises(ConfigError):
        hard_edge_sweep("source", [0], [10, 20], [(1, 1)], [1.0])
