import math

import numpy as np
import pytest

from ginprod.process import (ConfigError, Ginibre, GinibreSource, KernelPoint, ProcessSpec, TruncatedUnitary,
                             f_family, gauge, worker_count)


def test_build_prepends_nu0():
    assert ProcessSpec.build(2, 3, [0, 1, 0]).nu == (0, 0, 1, 0)
    assert ProcessSpec.build(2, 2, [0, 1, 0]).nu == (0, 1, 0)
    assert ProcessSpec.build(3, 2, [1, 2]).dims == (3, 4, 5)


@pytest.mark.parametrize("kwargs", [
    dict(n=1, m=1, nu=(1, 0)),                 # nu_0 != 0
    dict(n=0, m=1, nu=(0, 0)),
    dict(n=1, m=2, nu=(0, 0)),                 # wrong length
    dict(n=1, m=1, nu=(0, -1)),
    dict(n=1, m=1, nu=(0, 0.5)),
    dict(n=2, m=1, nu=(0, 0), initial=TruncatedUnitary(3)),
    dict(n=2, m=1, nu=(0, 0), initial=GinibreSource((1.0,))),
    dict(n=1, m=1, nu=(0, 0), initial=GinibreSource((0.0,))),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        ProcessSpec(**kwargs)


def test_digest_and_dict():
    a = ProcessSpec.build(2, 2, [0, 1], TruncatedUnitary(7))
    b = ProcessSpec.build(2, 2, [0, 1], TruncatedUnitary(8))
    assert a.digest() != b.digest() and len(a.digest()) == 32
    assert a.to_dict() == {"n": 2, "m": 2, "nu": [0, 0, 1], "family": "truncated", "l": 7}
    assert ProcessSpec.build(1, 1, [0], GinibreSource((2.0,))).family == "source"


def test_points():
    with pytest.raises(ConfigError):
        KernelPoint(0, 1.0)
    with pytest.raises(ConfigError):
        ProcessSpec.build(1, 2, [0, 0]).check_point(3, 1.0)


def test_f_family_shapes_and_damping():
    t = np.array([0.1, 0.5, 2.0])
    g = ProcessSpec.build(2, 1, [0])
    assert np.allclose(f_family(g)(2, t), t)
    assert np.allclose(f_family(g, damped=True)(2, t), t * np.exp(-t))
    tr = ProcessSpec.build(2, 1, [1], TruncatedUnitary(6))       # beta = 6 - 4 - 1 = 1
    v = f_family(tr, damped=True)(1, t)
    assert np.allclose(v[:2], (1 - t[:2])) and v[2] == 0.0
    s = ProcessSpec.build(1, 1, [0], GinibreSource((0.7,)))
    # f_1(t) = 0F1(1; q t) for nu_1 = 0; damped version multiplies by e^{-t}
    import scipy.special as sc
    assert np.allclose(f_family(s, damped=True)(1, t), sc.hyp0f1(1, 0.7 * t) * np.exp(-t), rtol=1e-12)
    big = f_family(s, damped=True)(1, np.array([1e4]))
    assert np.isfinite(big).all()


def test_gauge_factors():
    spec = ProcessSpec.build(1, 3, [1, 2, 0])
    assert gauge(spec, 1, 2.0) == pytest.approx(math.exp(-2.0) * 2.0)
    assert gauge(spec, 2, 2.0) == pytest.approx(4.0)
    assert gauge(spec, 3, 2.0) == 1.0


def test_worker_count(monkeypatch):
    monkeypatch.setenv("GINPROD_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("GINPROD_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.delenv("GINPROD_THREADS")
    assert worker_count() >= 1
