"""Backend parity: the compiled kernels must agree with the NumPy fallback."""

import importlib

import numpy as np
import pytest

from cardiosep import kernels
from cardiosep.kernels import fallback

try:
    accel = importlib.import_module("cardiosep.kernels._accel")
except ImportError:
    accel = None

needs_accel = pytest.mark.skipif(accel is None, reason="compiled kernels not built")

FLOOR = 1e-12


def _random_pair(seed, shape=(3, 40)):
    rng = np.random.default_rng(seed)
    return (
        rng.uniform(0.05, 3.0, shape),
        rng.uniform(0.05, 3.0, shape),
    )


def test_backend_is_named():
    assert kernels.BACKEND in ("cython", "numpy")


def test_ratio_pow_floors_denominator():
    y = np.array([[1.0, 2.0]])
    yhat = np.array([[0.0, 4.0]])
    out = kernels.ratio_pow(y, yhat, 1.0, 0.5)
    np.testing.assert_allclose(out, [[2.0, 0.5]])


def test_mul_pow_floors_output():
    base = np.array([[1e-30, 2.0]])
    q = np.array([[1.0, 4.0]])
    out = kernels.mul_pow(base, q, 0.5, FLOOR)
    np.testing.assert_allclose(out, [[FLOOR, 4.0]])


def test_acf_endpoints():
    x = np.array([1.0, 1.0, 1.0, 1.0])
    r = kernels.acf_all_lags(x)
    assert r.size == 5
    np.testing.assert_allclose(r, [1.0, 0.75, 0.5, 0.25, 0.0])


@needs_accel
@pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.5, 0.7, 1.0, 2.0, 10.0])
def test_elementwise_parity(alpha):
    y, yhat = _random_pair(1)
    a = accel.ratio_pow(y, yhat, alpha, FLOOR)
    b = fallback.ratio_pow(y, yhat, alpha, FLOOR)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    a = accel.mul_pow(y, yhat, 1.0 / alpha, FLOOR)
    b = fallback.mul_pow(y, yhat, 1.0 / alpha, FLOOR)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_accel
@pytest.mark.parametrize("alpha", [-1.0, 0.5, 2.0, 3.3])
def test_divergence_sum_parity(alpha):
    y, yhat = _random_pair(2, shape=(4, 500))
    a = accel.alpha_div_sum(y, yhat, alpha, FLOOR)
    b = fallback.alpha_div_sum(y, yhat, alpha, FLOOR)
    assert a == pytest.approx(b, rel=1e-10)


@needs_accel
def test_acf_parity():
    rng = np.random.default_rng(3)
    x = rng.normal(size=700)
    a = accel.acf_all_lags(x)
    b = fallback.acf_all_lags(x)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)
