import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from lvhopf import DelayKernel
from lvhopf.errors import DiracNotDiscretizable
from lvhopf.kernels import (
    cosine_moment,
    quadrature_weights,
    sine_moment,
    support_bound,
    transform,
    transform_dE,
    transform_dLambda,
)

kernels = st.builds(
    DelayKernel,
    st.sampled_from(["dirac", "erlang", "uniform"]),
    st.floats(0.05, 5.0),
    st.integers(1, 5),
)
lams = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False).filter(lambda z: z.real > -0.2)


def numeric_transform(kernel, lam):
    hi = support_bound(kernel, 1e-14)
    f = kernel.density
    re = integrate.quad(lambda t: f(t) * math.exp(-lam.real * t) * math.cos(lam.imag * t), 0, hi, limit=400)[0]
    im = integrate.quad(lambda t: -f(t) * math.exp(-lam.real * t) * math.sin(lam.imag * t), 0, hi, limit=400)[0]
    return complex(re, im)


@pytest.mark.parametrize("kernel", [DelayKernel.erlang(1, 1.3), DelayKernel.erlang(3, 0.7), DelayKernel.uniform(1.1)])
@pytest.mark.parametrize("lam", [0.4j, 0.2 + 1.5j, -0.1 + 0.3j, 0.0])
def test_transform_matches_quadrature(kernel, lam):
    assert abs(transform(kernel, lam) - numeric_transform(kernel, lam)) < 1e-9


def test_dirac_transform_is_exponential():
    k = DelayKernel.dirac(1.7)
    assert transform(k, 0.3 + 2j) == pytest.approx(np.exp(-(0.3 + 2j) * 1.7))


@given(kernels, lams)
def test_derivatives_match_finite_differences(kernel, lam):
    h = 1e-6
    d_lam = (transform(kernel, lam + h) - transform(kernel, lam - h)) / (2 * h)
    E = kernel.expectation
    d_E = (transform(kernel.with_expectation(E + h), lam) - transform(kernel.with_expectation(E - h), lam)) / (2 * h)
    assert abs(transform_dLambda(kernel, lam) - d_lam) < 1e-6
    assert abs(transform_dE(kernel, lam) - d_E) < 1e-6


@given(kernels, st.floats(0.0, 20.0))
def test_moments_bounded(kernel, omega):
    C, S = cosine_moment(kernel, omega), sine_moment(kernel, omega)
    assert C * C + S * S <= 1 + 1e-12


@pytest.mark.parametrize("family", ["dirac", "erlang", "uniform"])
def test_zero_expectation_is_identity(family):
    k = DelayKernel(family, 0.0, 2)
    assert transform(k, 0.5 + 1j) == 1
    assert transform_dLambda(k, 0.5 + 1j) == 0
    assert transform_dE(k, 0.5 + 1j) == pytest.approx(-(0.5 + 1j))


def _g_reference(x, terms=25):
    # (1 - e^-x)/x = sum_n (-x)^n / (n+1)!
    return sum((-x) ** n / math.factorial(n + 1) for n in range(terms))


def test_uniform_transform_accurate_on_both_sides_of_series_cutoff():
    k = DelayKernel.uniform(1.0)
    for arg in (0.005, 0.005j, 0.0035 + 0.0035j, -0.005):
        for lam in (arg * (1 - 1e-9), arg * (1 + 1e-9), 0.5 * arg, 3 * arg):
            assert abs(transform(k, lam) - _g_reference(2 * lam)) < 1e-15


@pytest.mark.parametrize("kernel", [DelayKernel.erlang(2, 1.3), DelayKernel.uniform(0.8), DelayKernel.erlang(1, 0.4)])
def test_quadrature_weights_moments(kernel):
    dt = 1e-3
    w = quadrature_weights(kernel, dt)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    mean = np.sum(w * dt * np.arange(w.size))
    assert mean == pytest.approx(kernel.expectation, rel=1e-5)


def test_dirac_weights_refused():
    with pytest.raises(DiracNotDiscretizable):
        quadrature_weights(DelayKernel.dirac(1.0), 1e-3)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_erlang_support_bound_tail(k):
    E, eps = 1.3, 1e-10
    T = support_bound(DelayKernel.erlang(k, E), eps)
    assert stats.gamma.sf(T, k, scale=E / k) == pytest.approx(eps, rel=1e-6)


def test_density_means():
    for kernel in (DelayKernel.erlang(3, 1.2), DelayKernel.uniform(1.2)):
        mean = integrate.quad(lambda t: t * kernel.density(t), 0, support_bound(kernel, 1e-14), limit=200)[0]
        assert mean == pytest.approx(1.2, rel=1e-8)


@pytest.mark.parametrize(
    "args", [("gamma", 1.0, 1), ("dirac", -1.0, 1), ("erlang", 1.0, 0), ("erlang", 1.0, 1.5)]
)
def test_kernel_validation(args):
    with pytest.raises(ValueError):
        DelayKernel(*args)
