import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lvhopf import DelayKernel, ModelParams, NoCrossingFound, compute_equilibrium, linear_coeffs
from lvhopf import spectral as sp
from lvhopf.contour import Rectangle
from lvhopf.kernels import cosine_moment
from lvhopf.validation import erlang_polynomial, omega0_bisection, rightmost_of


@pytest.fixture(scope="module")
def hopf(coeffs):
    return {
        key: sp.critical_expectation(coeffs, *key)
        for key in [("dirac", 1), ("erlang", 1), ("erlang", 2), ("erlang", 3), ("uniform", 1)]
    }


def test_tangency_constant():
    c = sp.tangency_constant()
    assert c == pytest.approx(2.2764337, abs=1e-7)
    assert sp.C_CONSTANT <= c


@given(st.floats(0.0, 50.0))
def test_cosine_bound_with_tangency_constant(x):
    c = sp.tangency_constant()
    assert math.cos(x) >= 1 - c * x / math.pi - 1e-12


def test_rounded_constant_slightly_violates_bound_near_tangency():
    x = 2.33112
    gap = math.cos(x) - (1 - sp.C_CONSTANT * x / math.pi)
    assert -1e-4 < gap < 0


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_real_cubic_roots_against_numpy(b, c, d):
    got = sorted(sp.real_cubic_roots(b, c, d))
    ref = np.roots([1.0, b, c, d])
    ref = sorted(r.real for r in ref if abs(r.imag) < 1e-7 * max(1.0, abs(r)))
    if len(ref) == len(got):
        np.testing.assert_allclose(got, ref, atol=1e-6)
    for z in got:
        assert abs(((z + b) * z + c) * z + d) < 1e-9 * max(1.0, abs(z) ** 3)


def test_omega0_closed_form_vs_bisection(coeffs):
    assert sp.omega0(coeffs) == pytest.approx(omega0_bisection(coeffs), abs=1e-12)
    assert sp.omega0(coeffs) == pytest.approx(0.4411462870, abs=1e-9)


def test_dirac_omega1_equals_omega0(coeffs):
    assert sp.omega1(coeffs, DelayKernel.dirac(0.7)) == pytest.approx(sp.omega0(coeffs), abs=1e-12)


@pytest.mark.parametrize("kernel", [DelayKernel.erlang(2, 1.0), DelayKernel.uniform(1.3)])
def test_omega1_solves_F_equals_G(coeffs, kernel):
    w1 = sp.omega1(coeffs, kernel)
    assert 0 < w1 <= sp.omega0(coeffs)
    G = sp.G_of_omega(coeffs, w1)
    assert abs(sp.F_of_omega(coeffs, kernel, w1) - G) < 1e-10 * G


def test_crossing_moments_back_substitute(coeffs):
    w = 0.37
    C, S = sp.crossing_moments(coeffs, w)
    K = complex(C, -S)
    lam = 1j * w
    c = coeffs
    residual = lam**3 + c.a1 * lam**2 + c.a2 * lam + c.a5 + (c.a3 + c.a4 * lam) * K
    assert abs(residual) < 1e-14


def test_dirac_critical_expectation_closed_form(coeffs, hopf):
    # for a point delay the crossing is at omega0 with e^{-i omega0 E} = C - iS
    w0 = sp.omega0(coeffs)
    C, S = sp.crossing_moments(coeffs, w0)
    E_analytic = math.atan2(S, C) % (2 * math.pi) / w0
    hp = hopf[("dirac", 1)]
    assert hp.E_crit == pytest.approx(E_analytic, abs=1e-8)
    assert hp.omega_crit == pytest.approx(w0, abs=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_erlang_crossing_is_polynomial_root(coeffs, hopf, k):
    hp = hopf[("erlang", k)]
    poly = erlang_polynomial(coeffs, k, hp.E_crit)
    assert abs(poly(1j * hp.omega_crit)) < 1e-10
    assert max(poly.roots.real) == pytest.approx(0.0, abs=1e-8)


def test_known_critical_values(hopf):
    assert hopf[("dirac", 1)].E_crit == pytest.approx(1.1974588786, abs=1e-8)
    assert hopf[("erlang", 1)].E_crit == pytest.approx(1.4699318860, abs=1e-8)
    assert hopf[("erlang", 2)].E_crit == pytest.approx(1.2944929449, abs=1e-8)
    assert hopf[("erlang", 3)].E_crit == pytest.approx(1.2548976286, abs=1e-8)
    assert hopf[("uniform", 1)].E_crit == pytest.approx(1.2421345, abs=1e-6)


def test_critical_expectation_exceeds_lower_bound(coeffs, hopf):
    for (family, k), hp in hopf.items():
        kernel = DelayKernel(family, hp.E_crit, k)
        w1 = sp.omega1(coeffs, kernel)
        assert w1 == pytest.approx(hp.omega_crit, abs=1e-7)
        assert hp.E_crit >= sp.E1_lower_bound(coeffs, w1)
        assert hp.transversal_ok and hp.transversal_slope > 0


def test_transversality_vs_secant(coeffs, hopf):
    hp = hopf[("erlang", 2)]
    base = DelayKernel.erlang(2, hp.E_crit)
    h = 1e-5
    mu = [sp.rightmost_root(coeffs, base.with_expectation(hp.E_crit + s * h)).lam.real for s in (-1, 1)]
    assert (mu[1] - mu[0]) / (2 * h) == pytest.approx(hp.transversal_slope, rel=1e-5)


def test_transversality_reciprocal(coeffs):
    kernel = DelayKernel.uniform(1.1)
    lam = 0.05 + 0.4j
    assert sp.transversality(coeffs, kernel, lam) * sp.dE_dlambda(coeffs, kernel, lam) == pytest.approx(1.0)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("E", [0.3, 1.7, 6.0])
def test_rightmost_root_vs_polynomial(coeffs, k, E):
    roots = erlang_polynomial(coeffs, k, E).roots
    lam = sp.rightmost_root(coeffs, DelayKernel.erlang(k, E)).lam
    assert abs(lam - rightmost_of(roots)) < 1e-9


@pytest.mark.parametrize("k", [1, 3])
def test_counts_with_pole_inside(coeffs, k):
    E = 2.0
    kernel = DelayKernel.erlang(k, E)
    rect = Rectangle(-k / E - 0.001, 0.3, -0.6, 0.6)
    roots = erlang_polynomial(coeffs, k, E).roots
    assert sp.count_roots_in_rectangle(coeffs, kernel, rect) == sum(rect.strictly_contains(complex(r)) for r in roots)


def test_dirac_rightmost_root_is_a_root(coeffs):
    kernel = DelayKernel.dirac(2.0)
    root = sp.rightmost_root(coeffs, kernel)
    assert abs(sp.char_eval(coeffs, kernel, root.lam)) < 1e-12
    # no root to the right of it in a generous box
    rect = Rectangle(root.lam.real + 1e-6, 5.0, -0.05, 5.0)
    assert sp.count_roots_in_rectangle(coeffs, kernel, rect) == 0


def test_zero_delay_rightmost_root_is_eigenvalue(params, eq, coeffs):
    from lvhopf.model import jacobian_no_delay

    eig = rightmost_of(np.linalg.eigvals(jacobian_no_delay(params, eq)))
    assert abs(sp.rightmost_root(coeffs, DelayKernel.uniform(0.0)).lam - eig) < 1e-10


def test_no_crossing_reports_ceiling(coeffs):
    with pytest.raises(NoCrossingFound) as info:
        sp.critical_expectation(coeffs, "dirac", E_max=0.5)
    assert info.value.E_max == 0.5


def test_unstable_at_zero_rejected():
    # feasible, but a1 (a2+a4) < a3+a5
    p = ModelParams(6.0, 0.0)
    c = linear_coeffs(p, compute_equilibrium(p))
    with pytest.raises(ValueError):
        sp.critical_expectation(c, "dirac")


def test_envelope_dominates_F(coeffs):
    w = np.linspace(0, 3, 301)
    for kernel in (DelayKernel.erlang(2, 1.0), DelayKernel.uniform(2.0)):
        assert np.all(sp.F_of_omega(coeffs, kernel, w) <= sp.envelope(coeffs, w) * (1 + 1e-12))
    assert np.all(np.abs(cosine_moment(DelayKernel.dirac(1.0), w)) <= 1)
