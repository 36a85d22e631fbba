"""Free kernels, Levy kernel and free comparison functions."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from hardykernels.kernels import (
    EvalPoint,
    EvalResult,
    Envelope,
    bessel_heat_2,
    cauchy,
    cauchy_heat_closed,
    free_comparison,
    free_envelope,
    heat2,
    levy,
    levy_kernel,
    spectral_heat,
    subordinated,
    subordinated_heat,
)
from hardykernels.specfun import CouplingParams, DomainError

# Hankel-transform integrals and the direct Levy formula by mpmath (frozen).
SPECTRAL_ORACLE = {
    (0.75, 1.0, 1.0, 0.7, 1.3): 0.221640050280906,
    (2.0, 1.0, 1.0, 0.5, 2.0): 0.0141489081538964,
    (1.0, 1.5, 1.0, 1.0, 2.0): 0.0852643679957576,
    (0.5, 1.5, 2.0, 0.3, 0.9): 0.204142339164293,
}
LEVY_ORACLE = {
    (1.0, 0.5, 1.0, 2.0): 0.08054145068528398,
    (0.5, 1.5, 0.3, 0.4): 276.9250331983263,
    (2.0, 1.0, 1.0, 1.1): 25.63815395442963,
    (0.0, 1.0, 1.0, 2.0): 0.353677651315323,
}


def P(t, r, s):
    return EvalPoint(t, r, s)


def mass(f, r, zeta, t=1.0):
    """int_0^inf f(s) s^(2 zeta) ds over log-spaced panels."""
    g = lambda u: float(f(math.exp(u))) * math.exp((2 * zeta + 1) * u)
    pts = sorted({math.log(r), math.log(r) - 1, math.log(r) + 1, 0.0})
    return integrate.quad(g, -40, 40, points=pts, limit=500, epsabs=0, epsrel=1e-11)[0]


def test_eval_point_validation():
    with pytest.raises(DomainError):
        EvalPoint(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        EvalPoint(1.0, math.inf, 1.0)
    q = EvalPoint(16.0, 2.0, 3.0).scaled(1.0)
    assert (q.t, q.r, q.s) == (1.0, 0.125, 0.1875)
    with pytest.raises(ValueError):
        EvalResult(1.0, 0.0, "guess")


# Bessel heat kernel


def test_bessel_heat_2_reflected_gaussian():
    res = bessel_heat_2(0.0, P(1, 1, 1))
    assert res.method == "closed_alpha2"
    assert res.value == pytest.approx((1 + math.exp(-1)) / math.sqrt(4 * math.pi), rel=1e-13)


def test_heat2_against_scipy_formula():
    rng = np.random.Generator(np.random.Philox(1))
    for zeta in (-0.25, 0.0, 0.75, 1.0, 2.5):
        t, r, s = np.exp(rng.uniform(-2, 2, (3, 50)))
        nu = zeta - 0.5
        ref = (r * s) ** (0.5 - zeta) / (2 * t) * np.exp(-((r - s) ** 2) / (4 * t)) * special.ive(nu, r * s / (2 * t))
        assert np.allclose(heat2(zeta, t, r, s), ref, rtol=1e-12, atol=0)


def test_heat2_extreme_arguments_finite():
    v = heat2(1.0, [1e-6, 1.0, 1e6], [1e3, 1e-8, 1.0], [1e3 + 1e-4, 1e-8, 2.0])
    assert np.all(np.isfinite(v)) and np.all(v > 0)


def test_heat2_symmetry():
    rng = np.random.Generator(np.random.Philox(2))
    t, r, s = np.exp(rng.uniform(-3, 3, (3, 50)))
    assert np.array_equal(heat2(0.75, t, r, s), heat2(0.75, t, s, r))


@pytest.mark.parametrize("zeta", [0.0, 0.75, 1.0, 2.5])
def test_heat2_normalization(zeta):
    assert mass(lambda s: heat2(zeta, 1.0, 1.0, s), 1.0, zeta) == pytest.approx(1.0, abs=1e-8)


# alpha = 1 closed form


def test_cauchy_closed_values():
    assert cauchy_heat_closed(0.0, P(1, 1, 1)).value == pytest.approx(6 / (5 * math.pi), rel=1e-14)
    assert cauchy_heat_closed(1.0, P(1, 1, 1)).value == pytest.approx(4 / (5 * math.pi), rel=1e-14)
    assert cauchy_heat_closed(1.0, P(1, 1, 1)).method == "closed_alpha1"


@pytest.mark.parametrize("zeta", [0.0, 1.0])
def test_cauchy_general_formula_matches_fast_path(zeta):
    rng = np.random.Generator(np.random.Philox(3))
    t, r, s = np.exp(rng.uniform(-3, 3, (3, 100)))
    t, r, s = np.append(t, 2.0), np.append(r, 1.0), np.append(s, 3.0)
    assert np.allclose(cauchy(zeta, t, r, s, fast=False), cauchy(zeta, t, r, s), rtol=1e-10, atol=0)


def test_cauchy_hypergeometric_form():
    # the untransformed closed form with parameters ((zeta+1)/2, (zeta+2)/2; zeta+1/2),
    # evaluated directly away from the diagonal
    rng = np.random.Generator(np.random.Philox(4))
    for zeta in (0.25, 0.75, 2.0):
        t, r, s = np.exp(rng.uniform(-1, 1, (3, 30)))
        S = r * r + s * s + t * t
        z = 4 * r * r * s * s / S ** 2
        ref = 2 * special.gamma(zeta + 1) / math.sqrt(math.pi) * t / S ** (zeta + 1) * special.hyp2f1(
            (zeta + 1) / 2, (zeta + 2) / 2, zeta + 0.5, z
        ) / special.gamma(zeta + 0.5)
        ok = z < 0.9
        assert np.allclose(cauchy(zeta, t, r, s)[ok], ref[ok], rtol=1e-9, atol=0)


@pytest.mark.parametrize("key", [k for k in SPECTRAL_ORACLE if k[1] == 1.0])
def test_cauchy_against_hankel_oracle(key):
    zeta, _, t, r, s = key
    assert float(cauchy(zeta, t, r, s)) == pytest.approx(SPECTRAL_ORACLE[key], rel=1e-9)


def test_cauchy_diagonal_small_time():
    # p(t, r, r) ~ c t^(-1) as t -> 0 for every zeta; no cancellation blow-up
    v = cauchy(0.75, np.geomspace(1e-8, 1e-2, 7), 1.0, 1.0)
    assert np.all(np.isfinite(v))
    assert np.allclose(v * np.geomspace(1e-8, 1e-2, 7), 1 / math.pi, rtol=2e-2)


# Subordination


@pytest.mark.parametrize("key", [k for k in SPECTRAL_ORACLE if k[1] != 1.0])
def test_subordination_against_hankel_oracle(key):
    zeta, alpha, t, r, s = key
    res = subordinated_heat(CouplingParams(zeta, alpha), P(t, r, s))
    assert res.method == "subordination"
    assert res.value == pytest.approx(SPECTRAL_ORACLE[key], rel=1e-8)


def test_subordination_matches_cauchy_at_unit_point():
    res = subordinated_heat(CouplingParams(1.0, 1.0), P(1, 1, 1))
    assert res.value == pytest.approx(4 / (5 * math.pi), rel=1e-8)
    assert res.err_est <= 1e-8 * res.value


@pytest.mark.parametrize("zeta", [0.0, 0.75, 2.0])
def test_subordination_matches_cauchy_on_grid(zeta):
    rng = np.random.Generator(np.random.Philox(5))
    t, r, s = np.exp(rng.uniform(-4, 4, (3, 60)))
    v, e = subordinated(zeta, 1.0, t, r, s)
    assert np.max(np.abs(v / cauchy(zeta, t, r, s) - 1)) <= 1e-6
    assert np.all(e <= 1e-6 * v)


@pytest.mark.parametrize("zeta", [1.0, -0.25])
@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_subordination_scaling(zeta, alpha):
    lhs = subordinated(zeta, alpha, 16.0, 2.0, 3.0)[0]
    c = 16.0 ** (-1 / alpha)
    rhs = 16.0 ** (-(2 * zeta + 1) / alpha) * subordinated(zeta, alpha, 1.0, 2 * c, 3 * c)[0]
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize("zeta,alpha", [(0.0, 0.5), (1.0, 1.5), (2.5, 1.0), (-0.25, 1.5)])
@pytest.mark.parametrize("r", [0.1, 1.0, 7.0])
def test_subordination_normalization(zeta, alpha, r):
    # for small alpha the diagonal peak is narrow, so break the quadrature near s = r
    g = lambda u: float(subordinated(zeta, alpha, 1.0, r, math.exp(u))[0]) * math.exp((2 * zeta + 1) * u)
    lr = math.log(r)
    cuts = [-60.0] + [lr + d for d in (-2, -0.3, -0.03, 0, 0.03, 0.3, 2)] + [lr + 60.0 / alpha]
    m = sum(
        integrate.quad(g, a, b, limit=400, epsabs=0, epsrel=1e-10)[0] for a, b in zip(cuts[:-1], cuts[1:])
    )
    assert abs(m - 1) <= 1e-6


def test_subordination_chapman_kolmogorov():
    zeta, alpha, r, s = 1.0, 1.5, 0.5, 2.0
    g = lambda u: float(
        subordinated(zeta, alpha, 1.0, r, math.exp(u))[0] * subordinated(zeta, alpha, 1.0, math.exp(u), s)[0]
    ) * math.exp((2 * zeta + 1) * u)
    val = integrate.quad(g, -30, 30, points=[math.log(r), math.log(s), 0.0], limit=400, epsrel=1e-10)[0]
    assert val == pytest.approx(float(subordinated(zeta, alpha, 2.0, r, s)[0]), rel=1e-6)


def test_subordinated_heat_rejects_alpha2():
    with pytest.raises(DomainError):
        subordinated_heat(CouplingParams(1.0, 2.0), P(1, 1, 1))


# Spectral oracle


def test_spectral_alpha2_matches_closed_form():
    ref = float(heat2(1.0, 1.0, 0.7, 1.3))
    assert spectral_heat(1.0, 2.0, P(1, 0.7, 1.3)).value == pytest.approx(ref, rel=1e-8)
    assert spectral_heat(0.0, 2.0, P(1, 1, 1)).value == pytest.approx(float(heat2(0.0, 1, 1, 1)), rel=1e-8)


def test_spectral_alpha1_matches_closed_form():
    res = spectral_heat(0.0, 1.0, P(1, 1, 1))
    assert res.method == "spectral"
    assert res.value == pytest.approx(6 / (5 * math.pi), rel=1e-6)


def test_spectral_rejects_negative_zeta():
    with pytest.raises(DomainError):
        spectral_heat(-0.25, 1.0, P(1, 1, 1))


# Levy kernel


@pytest.mark.parametrize("key", list(LEVY_ORACLE))
def test_levy_against_direct_formula(key):
    assert levy_kernel(*key) == pytest.approx(LEVY_ORACLE[key], rel=1e-10)


def test_levy_zeta0_alpha1():
    assert levy_kernel(0.0, 1.0, 1.0, 2.0) == pytest.approx((1 + 1 / 9) / math.pi, rel=1e-13)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_levy_symmetry(a, b):
    r, s = math.exp(a), math.exp(b)
    if r == s:
        return
    assert levy_kernel(1.3, 0.7, r, s) == levy_kernel(1.3, 0.7, s, r)


@pytest.mark.parametrize("zeta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_levy_comparability(zeta, alpha):
    g = np.geomspace(1e-3, 1e3, 20)
    r, s = np.meshgrid(g, g * 1.0001)
    ratio = levy(zeta, alpha, r, s) * (r + s) ** (2 * zeta) * np.abs(r - s) ** (1 + alpha)
    assert np.all(np.isfinite(ratio)) and ratio.min() > 0
    assert ratio.max() / ratio.min() < 1e3


def test_levy_near_diagonal_stable():
    # nu(r, s) |r - s|^(1 + alpha) -> c_(1, alpha) r^(-2 zeta), with c_(1,1) = 1/pi
    s = 1.0 + np.geomspace(1e-12, 1e-6, 7)
    v = levy(1.0, 1.0, 1.0, s) * (s - 1.0) ** 2
    assert np.all(np.isfinite(v))
    assert np.allclose(v, 1 / math.pi, rtol=1e-5)


def test_levy_domain():
    with pytest.raises(DomainError):
        levy_kernel(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        levy_kernel(1.0, 2.0, 1.0, 2.0)


# Comparison functions


def test_free_envelope_alpha_lt_2():
    env = free_envelope(1.0, 1.0, P(1, 1, 2))
    assert isinstance(env, Envelope) and env.lower == env.upper > 0
    assert env == free_envelope(1.0, 1.0, P(1, 2, 1))


def test_free_envelope_alpha2_ordered():
    env = free_envelope(1.0, 2.0, P(1, 1, 3), c_lower=4, c_upper=8)
    assert 0 < env.lower <= env.upper
    assert (env.exp_const_lower, env.exp_const_upper) == (4, 8)


@given(st.sampled_from([0.5, 1.0, 1.5, 2.0]), st.floats(-2, 2), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=80, deadline=None)
def test_free_comparison_scaling(alpha, lt, lr, ls):
    zeta = 1.25
    t, r, s = math.exp(lt), math.exp(lr), math.exp(ls)
    c = t ** (-1 / alpha)
    lhs = float(free_comparison(zeta, alpha, t, r, s))
    rhs = t ** (-(2 * zeta + 1) / alpha) * float(free_comparison(zeta, alpha, 1.0, r * c, s * c))
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("zeta", [0.0, 1.0])
def test_cauchy_over_comparison_bounded(zeta):
    g = 2.0 ** np.arange(-6, 6.5, 0.5)
    r, s = np.meshgrid(g, g)
    ratio = cauchy(zeta, 1.0, r, s) / free_comparison(zeta, 1.0, 1.0, r, s)
    assert ratio.min() > 0.05 and ratio.max() < 20
