"""Free radial heat kernels, the Levy kernel and the free comparison functions.

The kernels act on L^2((0, inf), r^(2 zeta) dr).  For alpha = 2 the kernel is
the Bessel heat kernel; for alpha < 2 it is obtained by subordination with the
alpha/2-stable subordinator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from ._quad import log_panel_rule, panel_rule
from .specfun import (
    AccuracyBudget,
    CouplingParams,
    DomainError,
    _sigma1,
    hyp2f1_regularized,
)


@dataclass(frozen=True)
class EvalPoint:
    """Space-time point (t, r, s)."""

    t: float
    r: float
    s: float

    def __post_init__(self):
        for name in ("t", "r", "s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")

    def scaled(self, alpha: float) -> "EvalPoint":
        """The point (1, r / t^(1/alpha), s / t^(1/alpha))."""
        c = self.t ** (-1 / alpha)
        return EvalPoint(1.0, self.r * c, self.s * c)


METHODS = ("closed_alpha2", "closed_alpha1", "subordination", "spectral", "series", "picard")


@dataclass(frozen=True)
class EvalResult:
    value: float
    err_est: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method}")


@dataclass(frozen=True)
class Envelope:
    """Comparison functions bounding a kernel from below and above up to constants."""

    lower: float
    upper: float
    exp_const_lower: float | None = None
    exp_const_upper: float | None = None


class QuadratureError(RuntimeError):
    """Quadrature did not reach its target; carries the partial result."""

    def __init__(self, msg, value=None, err_est=None):
        super().__init__(msg)
        self.value = value
        self.err_est = err_est


def _check_zeta(zeta):
    if not zeta > -0.5:
        raise DomainError(f"zeta must exceed -1/2, got {zeta}")


def _check_alpha(zeta, alpha, allow_two=True):
    _check_zeta(zeta)
    if not (0 < alpha < 2 or (allow_two and alpha == 2)):
        raise DomainError(f"alpha must lie in (0, {'2]' if allow_two else '2)'}, got {alpha}")


# Bessel heat kernel, alpha = 2.


def _ive_ratio(nu, z):
    """z^(-nu) e^(-z) I_nu(z), finite at z = 0, for nu > -1."""
    z = np.asarray(z, float)
    out = np.empty(z.shape)
    small = z < 1e-3
    big = z > 1e7
    mid = ~(small | big)
    zs = z[small]
    q = zs * zs / 4
    series = 1 + q / (nu + 1) * (1 + q / (2 * (nu + 2)) * (1 + q / (3 * (nu + 3))))
    out[small] = np.exp(-zs) * series / (2.0 ** nu * special.gamma(nu + 1))
    zm = z[mid]
    out[mid] = special.ive(nu, zm) * zm ** (-nu)
    zb = z[big]
    mu = 4.0 * nu * nu
    term = np.ones_like(zb)
    acc = np.ones_like(zb)
    for k in range(1, 8):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * zb)
        acc = acc + term
    out[big] = acc / np.sqrt(2 * np.pi * zb) * zb ** (-nu)
    return out


def heat2(zeta, t, r, s):
    """Vectorized Bessel heat kernel p_zeta^(2)(t, r, s)."""
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    nu = zeta - 0.5
    z = r * s / (2 * t)
    return (2 * t) ** (-zeta - 0.5) * np.exp(-((r - s) ** 2) / (4 * t)) * _ive_ratio(nu, z)


def log_heat2(zeta, t, r, s):
    """Logarithm of heat2, finite where heat2 underflows."""
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    z = r * s / (2 * t)
    return (-zeta - 0.5) * np.log(2 * t) - (r - s) ** 2 / (4 * t) + np.log(_ive_ratio(zeta - 0.5, z))


def log_free_comparison2(zeta, t, r, s, c):
    """Logarithm of the alpha = 2 comparison function with Gaussian constant c."""
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    return -0.5 * np.log(t) - (r - s) ** 2 / (c * t) - zeta * np.log(r * s + t)


def bessel_heat_2(zeta: float, point: EvalPoint) -> EvalResult:
    """Bessel heat kernel p_zeta^(2)(t, r, s) in closed form."""
    _check_zeta(zeta)
    v = float(heat2(zeta, point.t, point.r, point.s))
    return EvalResult(v, 1e-14 * v, "closed_alpha2")


# Subordination, alpha < 2.


def _u_lo(beta):
    # Below exp(u_lo) the stable density sigma_1 is smaller than about e^-45.
    return -((1 - beta) / beta) * math.log(45 / ((1 - beta) * beta ** (beta / (1 - beta))))


@lru_cache(maxsize=64)
def _sigma_lattice(beta: float, h: float, k_lo: int, k_hi: int):
    k = np.arange(k_lo, k_hi + 1)
    tau = np.exp(k * h)
    w = _sigma1(tau, beta) * tau
    for a in (tau, w, k):
        a.flags.writeable = False
    return k, tau, w


def _lattice(beta, h, u_hi):
    k_lo = int(math.floor(_u_lo(beta) / h))
    k_hi = int(math.ceil(u_hi / h))
    k_hi = k_lo + 64 * int(math.ceil((k_hi - k_lo) / 64))
    return _sigma_lattice(beta, h, k_lo, k_hi)


def subordinate(g, beta, u_hi, h=0.1, chunk=2_000_000):
    """Trapezoid rule in u = log(tau) for integral of g(tau) sigma_1(tau) dtau.

    ``g`` maps tau (shape (K,)) to an array (N, K).  Returns the rule with step
    h and the difference to the rule with step 2h.
    """
    k, tau, w = _lattice(beta, h, u_hi)
    vals = g(tau) * w
    full = vals.sum(-1) * h
    even = (k % 2 == 0)
    coarse = vals[..., even].sum(-1) * 2 * h
    return full, np.abs(full - coarse)


def _sub_u_hi(zeta, beta, x, y):
    return np.log(np.maximum.reduce([x * y, (x - y) ** 2, np.ones_like(x)])) + 40 / (
        zeta + 0.5 + beta
    )


def subordinated(zeta, alpha, t, r, s, h=0.1):
    """Vectorized subordinated kernel p_zeta^(alpha)(t, r, s) and error estimates."""
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    shape = t.shape
    beta = alpha / 2
    c = t.ravel() ** (-1 / alpha)
    x, y = r.ravel() * c, s.ravel() * c
    uh = _sub_u_hi(zeta, beta, x, y)
    val = np.empty(x.shape)
    err = np.empty(x.shape)
    # Group points by their upper cutoff to keep the tau lattice short.
    order = np.argsort(uh, kind="stable")
    n_tau = int((uh.max() - _u_lo(beta)) / h) + 64 if len(uh) else 0
    step = max(1, 2_000_000 // max(n_tau, 1))
    for i in range(0, len(order), step):
        idx = order[i : i + step]
        f = lambda tau: heat2(zeta, tau[None, :], x[idx, None], y[idx, None])
        v, e = subordinate(f, beta, uh[idx].max(), h)
        val[idx], err[idx] = v, e
    scale = c ** (2 * zeta + 1)
    return (val * scale).reshape(shape), (err * scale).reshape(shape)


def subordinated_heat(params: CouplingParams, point: EvalPoint, budget: AccuracyBudget | None = None):
    """p_zeta^(alpha)(t, r, s) for alpha < 2 by subordination of p_zeta^(2)."""
    budget = budget or AccuracyBudget()
    zeta, alpha = params.zeta, params.alpha
    _check_alpha(zeta, alpha, allow_two=False)
    h = 0.2
    for _ in range(max(1, min(budget.max_subdivisions, 6))):
        v, e = subordinated(zeta, alpha, point.t, point.r, point.s, h)
        v, e = float(v), float(e)
        if e <= budget.rel_tol * v + budget.abs_tol:
            return EvalResult(v, e, "subordination")
        h /= 2
    raise QuadratureError("subordination did not reach the requested accuracy", v, e)


# alpha = 1 closed forms.


def cauchy(zeta, t, r, s, fast=True):
    """Vectorized kernel p_zeta^(1)(t, r, s).

    Uses a quadratic and an Euler transformation of the hypergeometric closed
    form so that every factor is evaluated without cancellation, including on
    the diagonal r = s as t -> 0.
    """
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    r2, s2, t2 = r * r, s * s, t * t
    q2 = (r2 - s2) ** 2 + t2 * (t2 + 2 * r2 + 2 * s2)
    if fast and zeta == 1:
        return 4 / np.pi * t / q2
    S = r2 + s2 + t2
    if fast and zeta == 0:
        return 2 / np.pi * t * S / q2
    sq = S + np.sqrt(q2)
    y = 4 * r2 * s2 / (sq * sq)
    pref = 2 * special.gamma(zeta + 1) / math.sqrt(math.pi) * 2.0 ** (zeta - 1)
    f = hyp2f1_regularized(-0.5, zeta - 1, zeta + 0.5, np.minimum(y, 1 - 1e-16))
    return pref * t * sq ** (1 - zeta) / q2 * f


def cauchy_heat_closed(zeta: float, point: EvalPoint) -> EvalResult:
    """Closed form of p_zeta^(1)(t, r, s)."""
    _check_zeta(zeta)
    _check_alpha(zeta, 1.0)
    v = float(cauchy(zeta, point.t, point.r, point.s))
    return EvalResult(v, 1e-12 * v, "closed_alpha1")


def free_kernel(zeta, alpha, t, r, s, h=0.1):
    """Free kernel by the fastest accurate route: closed forms or subordination."""
    if alpha == 2:
        return heat2(zeta, t, r, s)
    if alpha == 1:
        return cauchy(zeta, t, r, s)
    return subordinated(zeta, alpha, t, r, s, h)[0]


# Spectral (Hankel transform) oracle.


def spectral_heat(zeta: float, alpha: float, point: EvalPoint, budget: AccuracyBudget | None = None):
    """Kernel from its Hankel diagonalization, an independent oracle.

    p(t, r, s) = (rs)^(1/2 - zeta) int_0^inf exp(-t k^alpha) J(kr) J(ks) k dk
    with J = J_(zeta - 1/2), integrated over panels of a quarter period.
    """
    budget = budget or AccuracyBudget(rel_tol=1e-6)
    if zeta < 0:
        raise DomainError("spectral_heat requires zeta >= 0")
    _check_alpha(zeta, alpha)
    t, r, s = point.t, point.r, point.s
    nu = zeta - 0.5
    kmax = (46.0 / t) ** (1 / alpha)
    width = 0.5 * math.pi / max(r, s)
    npan = int(math.ceil(kmax / width))
    if npan > 2_000_000:
        raise QuadratureError("spectral integral needs too many panels", None, None)
    edges = np.linspace(0.0, npan * width, npan + 1)
    # exp(-t k^alpha) is not smooth at k = 0; grade the first panel towards it
    edges = np.concatenate([[0.0], width * 0.5 ** np.arange(40, 0, -1), edges[1:]])

    def rule(n):
        k, w = panel_rule(edges, n)
        f = np.exp(-t * k ** alpha) * special.jv(nu, k * r) * special.jv(nu, k * s) * k
        return float(f @ w)

    hi, lo = rule(16), rule(12)
    v = (r * s) ** (0.5 - zeta) * hi
    e = (r * s) ** (0.5 - zeta) * abs(hi - lo)
    if not (v > 0) or e > max(budget.rel_tol * abs(v), budget.abs_tol, 1e-300) * 1e3:
        raise QuadratureError("spectral quadrature is unreliable at this point", v, e)
    return EvalResult(v, e, "spectral")


# Levy kernel.


def levy(zeta, alpha, r, s):
    """Vectorized Levy kernel nu_zeta(r, s) for r != s."""
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    A = zeta + alpha / 2 + 0.5
    C = (
        2.0 ** (1 + alpha)
        * special.gamma(alpha / 2 + 1)
        * math.sin(math.pi * alpha / 2)
        / math.pi
        * special.gamma(A)
    )
    big = np.maximum(r, s)
    small = np.minimum(r, s)
    m2 = (small / big) ** 2
    f = hyp2f1_regularized(-alpha / 2, zeta - (alpha + 1) / 2, zeta + 0.5, m2)
    return C * big ** (1 + alpha - 2 * zeta) * (np.abs(r - s) * (r + s)) ** (-1 - alpha) * f


def levy_kernel(zeta: float, alpha: float, r: float, s: float) -> float:
    """Levy kernel nu_zeta(r, s), the small-time limit of p_zeta^(alpha)(t, r, s) / t."""
    _check_zeta(zeta)
    _check_alpha(zeta, alpha, allow_two=False)
    if not (r > 0 and s > 0):
        raise DomainError("levy_kernel requires r, s > 0")
    if r == s:
        raise DomainError("levy_kernel diverges on the diagonal r = s")
    return float(levy(zeta, alpha, r, s))


# Comparison functions.


def free_comparison(zeta, alpha, t, r, s, c=4.0):
    """Comparison function of the free kernel; c is the Gaussian constant for alpha = 2."""
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    if alpha == 2:
        return t ** -0.5 * np.exp(-((r - s) ** 2) / (c * t)) / (r * s + t) ** zeta
    a = np.abs(r - s) ** (1 + alpha) * (r + s) ** (2 * zeta)
    b = t ** ((1 + alpha) / alpha) * (t ** (1 / alpha) + r + s) ** (2 * zeta)
    return t / (a + b)


def free_envelope(zeta: float, alpha: float, point: EvalPoint, c_lower: float = 4.0, c_upper: float = 8.0):
    """Two-sided comparison function for p_zeta^(alpha)(t, r, s)."""
    _check_zeta(zeta)
    _check_alpha(zeta, alpha)
    t, r, s = point.t, point.r, point.s
    if alpha == 2:
        lo = float(free_comparison(zeta, 2, t, r, s, c_lower))
        hi = float(free_comparison(zeta, 2, t, r, s, c_upper))
        return Envelope(lo, hi, c_lower, c_upper)
    v = float(free_comparison(zeta, alpha, t, r, s))
    return Envelope(v, v)


# Radial moments int_0^inf p(t, r, s) s^(2 zeta - delta) ds.


def moment2(zeta, delta, tau, r):
    """Moment of the Bessel heat kernel against s^(2 zeta - delta), delta < 2 zeta + 1."""
    tau, r = np.broadcast_arrays(np.asarray(tau, float), np.asarray(r, float))
    c = math.exp(special.gammaln(zeta + 0.5 - delta / 2) - special.gammaln(zeta + 0.5))
    return (4 * tau) ** (-delta / 2) * c * special.hyp1f1(delta / 2, zeta + 0.5, -r * r / (4 * tau))


def moment(zeta, alpha, delta, t, r, h=0.1):
    """Vectorized moment of p_zeta^(alpha)(t, r, .) against s^(2 zeta - delta)."""
    if not delta < 2 * zeta + 1:
        raise DomainError("moment requires delta < 2*zeta+1")
    if alpha == 2:
        return moment2(zeta, delta, t, r)
    if not delta > -alpha:
        raise DomainError("moment requires delta > -alpha for alpha < 2")
    t, r = np.broadcast_arrays(np.asarray(t, float), np.asarray(r, float))
    beta = alpha / 2
    c = t.ravel() ** (-1 / alpha)
    x = r.ravel() * c
    decay = beta + delta / 2
    uh = float(np.log(max(np.max(x * x), 1.0)) + 40 / decay) if x.size else 0.0
    f = lambda tau: moment2(zeta, delta, tau[None, :], x[:, None])
    v, _ = subordinate(f, beta, uh, h)
    return (v * c ** delta).reshape(t.shape)


def integrated_moment(zeta, alpha, delta, t, r, n=8):
    """int_0^t d tau int_0^inf p_zeta^(alpha)(tau, r, s) s^(2 zeta - delta) ds."""
    tau, w = log_panel_rule(t * math.exp(-46.0), t, 1.0, n)
    vals = moment(zeta, alpha, delta, tau, np.full_like(tau, r))
    return float(vals @ w)
