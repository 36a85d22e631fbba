"""Quadratic forms on radial test functions."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardykernels.forms import (
    FormValue,
    TestFunction,
    dirichlet_form,
    dirichlet_form_spectral,
    gsr_residual,
    hardy_form,
    hardy_functional,
    integral_regimes,
    potential_term,
    regime_prediction,
    semigroup_form,
    sharpness_witness,
    standard_suite,
)
from hardykernels.specfun import CouplingParams, DomainError, kappa_crit

BUMP = TestFunction.smooth_bump(1.0, 1.0)
FREE = CouplingParams(1.0, 1.0, 0.0)


# Test functions


def test_standard_suite():
    suite = standard_suite()
    assert len(suite) == 5
    assert all(u.support[0] > 0 for u in suite)


def test_test_function_values_and_derivative():
    assert BUMP(1.0) == 1.0
    assert BUMP(0.5) == 0.0 and BUMP(1.5) == 0.0 and BUMP(3.0) == 0.0
    r = np.linspace(0.55, 1.45, 41)
    h = 1e-6
    fd = (BUMP(r + h) - BUMP(r - h)) / (2 * h)
    assert np.allclose(BUMP.derivative(r), fd, rtol=1e-6, atol=1e-8)
    g = TestFunction.ground_state_bump(0.5, 0.5, 2.0)
    fd = (g(r + h) - g(r - h)) / (2 * h)
    assert np.allclose(g.derivative(r), fd, rtol=1e-6, atol=1e-8)
    hat = TestFunction.hat(1.0, 1.0, 2.0)
    assert hat(1.0) == 2.0 and hat(0.75) == 1.0
    assert hat.derivative(0.75) == 4.0 and hat.derivative(1.25) == -4.0


def test_test_function_validation():
    with pytest.raises(DomainError):
        TestFunction.smooth_bump(0.3, 1.0)
    with pytest.raises(DomainError):
        TestFunction("wavelet", (1.0, 2.0))
    with pytest.raises(DomainError):
        TestFunction.tabulated([(1.0, 0.0), (1.5, 1.0), (2.0, 0.5)])
    with pytest.raises(DomainError):
        TestFunction.tabulated([(1.0, 0.0), (1.5, 1.0), (2.0, 0.0)], rule="quintic")


@pytest.mark.parametrize(
    "u",
    [
        BUMP,
        TestFunction.hat(2.0, 1.0, 0.5),
        TestFunction.ground_state_bump(-0.3, 0.2, 5.0),
        TestFunction.tabulated([(1.0, 0.0), (1.4, 1.0), (1.7, 0.3), (2.0, 0.0)], rule="linear"),
    ],
    ids=lambda u: u.kind,
)
def test_test_function_json_roundtrip(u):
    import json

    v = TestFunction.from_json(json.dumps(u.to_dict()))
    r = np.linspace(0.1, 6, 101)
    assert np.array_equal(v(r), u(r))


# Dirichlet form


def test_dirichlet_form_zero_function():
    assert dirichlet_form(1.0, 1.0, BUMP.scaled(0.0)).value == 0.0


def test_dirichlet_form_spectral_check():
    e = dirichlet_form(1.0, 1.0, BUMP)
    assert isinstance(e, FormValue) and e.value > 0
    assert e.value == pytest.approx(dirichlet_form_spectral(1.0, 1.0, BUMP), rel=1e-4)
    assert sum(e.decomposition) == pytest.approx(e.value, rel=1e-14)


def test_dirichlet_form_homogeneity():
    e1 = dirichlet_form(1.0, 1.0, BUMP).value
    e3 = dirichlet_form(1.0, 1.0, BUMP.scaled(3.0)).value
    assert e3 == pytest.approx(9 * e1, rel=1e-12)


def test_dirichlet_form_spectral_other_parameters():
    u = TestFunction.smooth_bump(2.0, 1.0)
    e = dirichlet_form(0.5, 1.5, u).value
    assert e == pytest.approx(dirichlet_form_spectral(0.5, 1.5, u), rel=1e-4)


def test_dirichlet_form_hat_spectral():
    # the hat has a kink, so the spectral integral converges slowly; compare loosely
    hat = TestFunction.hat(1.0, 1.0)
    assert dirichlet_form(1.0, 1.0, hat).value == pytest.approx(
        dirichlet_form_spectral(1.0, 1.0, hat, kmax=1500), rel=1e-3
    )


def test_dirichlet_form_rejects_alpha2():
    with pytest.raises(DomainError):
        dirichlet_form(1.0, 2.0, BUMP)


# Hardy form and ground-state representation


def test_hardy_form_eta_zero_is_dirichlet():
    assert hardy_form(FREE, BUMP).value == pytest.approx(dirichlet_form(1.0, 1.0, BUMP).value, rel=1e-10)
    assert gsr_residual(FREE, BUMP) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("eta", [0.5, -0.5])
def test_gsr_residual(eta):
    u = TestFunction.smooth_bump(1.5, 1.0)
    e = dirichlet_form(1.0, 1.0, u).value
    assert abs(gsr_residual(CouplingParams(1.0, 1.0, eta), u)) <= 1e-4 * e


def test_hardy_form_nonnegative_random():
    rng = np.random.Generator(np.random.Philox(3))
    p = CouplingParams(1.0, 1.0, 1.0)
    for _ in range(10):
        a = float(rng.uniform(0.2, 2.0))
        b = a + float(rng.uniform(0.3, 2.0))
        r = np.linspace(a, b, 7)
        vals = np.concatenate([[0.0], rng.uniform(-1, 1, 5), [0.0]])
        u = TestFunction.tabulated(list(zip(r, vals)))
        f = hardy_form(p, u)
        assert f.value >= -f.err_est


def test_hardy_form_ground_state_flattening():
    # u = r^(-eta) phi(log r / L): I[u] relative to the potential term shrinks as L grows
    p = CouplingParams(1.0, 1.0, 1.0)
    ratios = []
    for L in (1.0, 2.0, 4.0):
        u = TestFunction.ground_state_bump(1.0, math.exp(-L), math.exp(L))
        ratios.append(hardy_form(p, u).value / potential_term(1.0, 1.0, u))
    assert ratios[0] > ratios[1] > ratios[2] > 0


# Sharpness


def test_hardy_nonnegative_at_critical_coupling():
    kc = kappa_crit(3, 1.0)
    for u in standard_suite():
        e = dirichlet_form(1.0, 1.0, u).value
        assert hardy_functional(1.0, 1.0, kc, u) >= -1e-6 * e


def test_sharpness_witness():
    found = sharpness_witness(1.0, 1.0)
    assert found is not None
    u, value = found
    assert value < 0
    assert hardy_functional(1.0, 1.0, kappa_crit(3, 1.0), u) >= 0


# Semigroup form


def test_semigroup_form_zero():
    assert semigroup_form(FREE, 0.5, BUMP.scaled(0.0)).value == 0.0


@pytest.mark.parametrize("eta", [0.0, 0.5])
def test_semigroup_form_monotone_in_t(eta):
    p = CouplingParams(1.0, 1.0, eta)
    vals = [semigroup_form(p, t, BUMP).value for t in (0.125, 0.25, 0.5)]
    assert vals[0] >= vals[1] >= vals[2] > 0


def test_semigroup_form_limit():
    ts = (0.004, 0.002, 0.001)
    v = [semigroup_form(FREE, t, BUMP).value for t in ts]
    # the leading error is linear in t; two Richardson steps
    r1 = [2 * v[1] - v[0], 2 * v[2] - v[1]]
    extrap = (4 * r1[1] - r1[0]) / 3
    e = dirichlet_form(1.0, 1.0, BUMP).value
    assert abs(extrap - e) <= 1e-3 * e
    assert v[2] < e


def test_semigroup_form_rejects_nonpositive_t():
    with pytest.raises(DomainError):
        semigroup_form(FREE, 0.0, BUMP)


# Integral regimes


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_integral_regimes_window(delta):
    r = 2.0 ** np.arange(-5, 5.5, 1.0)
    ratio = np.array([integral_regimes(1.0, 1.0, delta, 1.0, x) / regime_prediction(1.0, delta, 1.0, x) for x in r])
    assert ratio.min() > 0.1 and ratio.max() < 10


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=20, deadline=None)
def test_integral_regimes_scaling(lt, lr):
    t, r = math.exp(lt), math.exp(lr)
    delta = 0.7
    lhs = integral_regimes(1.0, 1.0, delta, t, r)
    rhs = t ** (1 - delta) * integral_regimes(1.0, 1.0, delta, 1.0, r / t)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_integral_regimes_domain():
    with pytest.raises(DomainError):
        integral_regimes(1.0, 1.0, 3.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        integral_regimes(1.0, 1.0, 0.5, -1.0, 1.0)
