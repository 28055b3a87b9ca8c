import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from ginprod.specfun import (ContourPlacementError, GammaPoleError, MeijerGSpec, bessel_hard_edge_series,
                             hyp0f1, hyp0f1_series, log_gamma, meijer_g, meijer_g_residue, meijer_g_vec,
                             pochhammer)

finite = st.floats(min_value=-60, max_value=60, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_log_gamma_matches_scipy_principal_branch(re, im):
    z = complex(re, im)
    if abs(im) < 1e-3 and round(re) <= 0 and abs(re - round(re)) < 1e-3:
        return
    ours = log_gamma(z)
    ref = complex(sc.loggamma(z))
    assert abs(ours - ref) <= 1e-11 * max(1.0, abs(ref))


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.1, max_value=30), st.floats(min_value=-20, max_value=20))
def test_log_gamma_recurrence(re, im):
    z = complex(re, im)
    assert abs(log_gamma(z + 1) - log_gamma(z) - np.log(z)) < 1e-11 * max(1.0, abs(log_gamma(z)))


def test_log_gamma_vectorised_and_poles():
    z = np.array([0.5, 1.0, 3.0 + 2j, -7.5 + 0.1j])
    assert np.allclose(log_gamma(z), sc.loggamma(z), rtol=1e-12, atol=1e-12)
    for bad in (0.0, -1.0, -5.0):
        with pytest.raises(GammaPoleError):
            log_gamma(bad)


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(1.0, 5) == 120.0
    assert pochhammer(-3.0, 4) == 0.0
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


def test_hyp0f1_against_series():
    for b, z in [(1.0, 0.3), (2.5, -4.0), (1.0, 10.0)]:
        assert hyp0f1(b, z) == pytest.approx(hyp0f1_series(b, z), rel=1e-12)
    with pytest.raises(GammaPoleError):
        hyp0f1(-2.0, 1.0)


@pytest.mark.parametrize("z", [0.01, 0.3, 1.0, 4.0, 25.0])
def test_meijer_single_and_bessel_k(z):
    assert meijer_g(MeijerGSpec.product([0.0]), z) == pytest.approx(math.exp(-z), rel=1e-10)
    # G^{2,0}_{0,2}(-; 0, 0 | z) = 2 K_0(2 sqrt z)
    assert meijer_g(MeijerGSpec.product([0.0, 0.0]), z) == pytest.approx(2 * sc.kv(0, 2 * math.sqrt(z)), rel=1e-9)


@pytest.mark.parametrize("b", [(0.0, 0.5), (0.25, 1.5, 2.75), (0.0, 1.0, 2.0)])
@pytest.mark.parametrize("z", [0.2, 1.7, 9.0])
def test_meijer_product_class_against_mpmath(b, z):
    ref = float(mpmath.meijerg([[], []], [list(b), []], z))
    assert meijer_g(MeijerGSpec.product(b), z) == pytest.approx(ref, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("z", [0.3, 2.0, 6.0])
def test_meijer_against_residue_series(z):
    b = (0.1, 0.6, 1.3)
    assert meijer_g(MeijerGSpec.product(b), z) == pytest.approx(meijer_g_residue(b, z), rel=1e-9)


@pytest.mark.parametrize("z", [0.1, 0.5, 0.9])
def test_meijer_one_upper_parameter(z):
    # G^{1,0}_{1,1}(a; b | z) = z^b (1-z)^{a-b-1} / Gamma(a-b) on (0, 1)
    a, b = 3.5, 1.0
    g = MeijerGSpec(1, 0, 1, 1, (a,), (b,))
    assert meijer_g(g, z) == pytest.approx(z ** b * (1 - z) ** (a - b - 1) / math.gamma(a - b), rel=1e-9)
    assert meijer_g(g, 1.5) == 0.0
    with pytest.raises(ContourPlacementError):
        meijer_g(g, 1.0)


@pytest.mark.parametrize("z", [0.01, 0.5, 3.0])
def test_meijer_two_over_one_upper(z):
    g = MeijerGSpec(2, 0, 1, 2, (4.0,), (1.0, 0.5))
    ref = float(mpmath.meijerg([[], [4.0]], [[1.0, 0.5], []], z))
    assert meijer_g(g, z) == pytest.approx(ref, rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("z", [1e-4, 0.02, 0.7, 3.0])
def test_meijer_entire_class_small_and_moderate(z):
    g = MeijerGSpec(1, 0, 0, 3, (), (0.0, -1.0, -2.0))
    ref = float(mpmath.meijerg([[], []], [[0.0], [-1.0, -2.0]], z))
    assert meijer_g_vec(g, np.array([z]))[0] == pytest.approx(ref, rel=1e-8, abs=1e-14)


def test_meijer_contour_guard():
    with pytest.raises(ContourPlacementError):
        meijer_g(MeijerGSpec.product([1.0]), 0.5, abscissa=-2.0)
    with pytest.raises(ValueError):
        MeijerGSpec(1, 1, 1, 1, (0.0,), (0.0,))


@pytest.mark.parametrize("nu,x,y", [(0, 0.5, 1.2), (1, 2.0, 0.7), (2, 3.0, 3.0)])
def test_bessel_hard_edge_series_against_quadrature(nu, x, y):
    from scipy.integrate import quad
    ref = quad(lambda u: sc.jv(nu, 2 * math.sqrt(u * x)) * sc.jv(nu, 2 * math.sqrt(u * y)), 0, 1,
               epsabs=1e-14, epsrel=1e-13)[0]
    assert bessel_hard_edge_series(nu, x, y) == pytest.approx(ref, rel=1e-10, abs=1e-14)
