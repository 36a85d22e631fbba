"""Nonlocal quadratic forms on radial test functions.

All forms are of the type

    (1/2) int int |g(r) - g(s)|^2 W(r, s) dr ds

with g supported in an interval [a, b].  For every outer node r in [a, b]
the inner integral over s in (0, inf) runs over panels graded geometrically
around s = r, the support ends and the origin.  When W has the singularity
|r - s|^(-1-alpha) of the Levy kernel, a strip |s - r| < delta is removed
and added back from the leading behaviour g'(r)^2 (s - r)^2 W(r, s).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, special

from ._quad import gauss_legendre, panel_rule, power_end
from .kernels import integrated_moment, levy
from .perturbation import SeriesControl, perturbed
from .specfun import CouplingParams, DomainError, eta_critical, kappa_crit

KINDS = ("smooth_bump", "piecewise_linear_hat", "tabulated", "ground_state_bump")


def _bump(x):
    # exp(1 - 1/(1 - x^2)) on |x| < 1, equal to 1 at x = 0
    x = np.asarray(x, float)
    out = np.zeros(x.shape)
    m = np.abs(x) < 1
    out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
    return out


def _bump_d(x):
    x = np.asarray(x, float)
    out = np.zeros(x.shape)
    m = np.abs(x) < 1
    xm = x[m]
    out[m] = np.exp(1 - 1 / (1 - xm ** 2)) * (-2 * xm / (1 - xm ** 2) ** 2)
    return out


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported radial test function.

    smooth_bump and piecewise_linear_hat use (center, width, amplitude);
    ground_state_bump is r^(-eta) times a bump in log r on ``support``;
    tabulated interpolates ``samples`` (pairs (r, u)) by a clamped cubic
    spline or linearly, according to ``rule``.
    """

    __test__ = False  # not a pytest class

    kind: str
    support: tuple
    center: float = 0.0
    width: float = 0.0
    amplitude: float = 1.0
    eta: float = 0.0
    samples: tuple = ()
    rule: str = "cubic"
    _spline: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown test function kind {self.kind}")
        a, b = map(float, self.support)
        if not (0 < a < b < math.inf):
            raise DomainError("support must be an interval [a, b] in (0, inf)")
        object.__setattr__(self, "support", (a, b))
        if self.kind == "tabulated":
            r = np.array([p[0] for p in self.samples], float)
            u = np.array([p[1] for p in self.samples], float)
            if len(r) < 3 or np.any(np.diff(r) <= 0) or r[0] != a or r[-1] != b:
                raise DomainError("tabulated samples must increase and span the support")
            if u[0] != 0 or u[-1] != 0:
                raise DomainError("tabulated samples must vanish at the support ends")
            if self.rule == "cubic":
                sp = interpolate.CubicSpline(r, u, bc_type="clamped")
            elif self.rule == "linear":
                sp = None
            else:
                raise DomainError("rule must be 'cubic' or 'linear'")
            object.__setattr__(self, "_spline", sp)

    # constructors

    @classmethod
    def smooth_bump(cls, center, width, amplitude=1.0):
        return cls("smooth_bump", (center - width / 2, center + width / 2), center, width, amplitude)

    @classmethod
    def hat(cls, center, width, amplitude=1.0):
        return cls(
            "piecewise_linear_hat", (center - width / 2, center + width / 2), center, width, amplitude
        )

    @classmethod
    def ground_state_bump(cls, eta, lo, hi, amplitude=1.0):
        return cls("ground_state_bump", (lo, hi), amplitude=amplitude, eta=eta)

    @classmethod
    def tabulated(cls, samples, rule="cubic"):
        samples = tuple((float(r), float(u)) for r, u in samples)
        return cls("tabulated", (samples[0][0], samples[-1][0]), samples=samples, rule=rule)

    def scaled(self, c: float) -> "TestFunction":
        """The function c * u."""
        if self.kind == "tabulated":
            return TestFunction.tabulated([(r, c * u) for r, u in self.samples], self.rule)
        return TestFunction(self.kind, self.support, self.center, self.width, c * self.amplitude, self.eta)

    # evaluation

    def _x(self, r):
        if self.kind == "ground_state_bump":
            la, lb = np.log(self.support[0]), np.log(self.support[1])
            return (np.log(r) - (la + lb) / 2) / ((lb - la) / 2), 2 / (lb - la) / r
        return (r - self.center) / (self.width / 2), 2 / self.width

    def __call__(self, r):
        r = np.asarray(r, float)
        a, b = self.support
        if self.kind == "tabulated":
            inside = (r >= a) & (r <= b)
            out = np.zeros(r.shape)
            rr, uu = np.array(self.samples).T
            if self._spline is None:
                out[inside] = np.interp(r[inside], rr, uu)
            else:
                out[inside] = self._spline(r[inside])
            return out
        x, _ = self._x(np.where(r > 0, r, 1.0))
        if self.kind == "piecewise_linear_hat":
            return self.amplitude * np.maximum(0.0, 1 - np.abs(x))
        out = self.amplitude * _bump(x)
        if self.kind == "ground_state_bump":
            out = out * np.where(r > 0, r, 1.0) ** (-self.eta)
        return out

    def derivative(self, r):
        r = np.asarray(r, float)
        a, b = self.support
        if self.kind == "tabulated":
            inside = (r >= a) & (r <= b)
            out = np.zeros(r.shape)
            rr, uu = np.array(self.samples).T
            if self._spline is None:
                i = np.clip(np.searchsorted(rr, r[inside]) - 1, 0, len(rr) - 2)
                out[inside] = (uu[i + 1] - uu[i]) / (rr[i + 1] - rr[i])
            else:
                out[inside] = self._spline(r[inside], 1)
            return out
        x, dx = self._x(np.where(r > 0, r, 1.0))
        if self.kind == "piecewise_linear_hat":
            return self.amplitude * np.where(np.abs(x) < 1, -np.sign(x) * dx, 0.0)
        if self.kind == "ground_state_bump":
            rr = np.where(r > 0, r, 1.0)
            return self.amplitude * (
                _bump_d(x) * dx * rr ** (-self.eta) - self.eta * _bump(x) * rr ** (-self.eta - 1)
            )
        return self.amplitude * _bump_d(x) * dx

    def breakpoints(self):
        """Panel edges on the support for the outer integral."""
        a, b = self.support
        if self.kind == "ground_state_bump":
            base = np.geomspace(a, b, 65)
        elif self.kind == "piecewise_linear_hat":
            base = np.concatenate([np.linspace(a, self.center, 9), np.linspace(self.center, b, 9)])
        elif self.kind == "tabulated":
            base = np.unique(np.concatenate([np.linspace(a, b, 17), [p[0] for p in self.samples]]))
        else:
            base = np.linspace(a, b, 17)
        # grading towards the support ends
        k = 2.0 ** -np.arange(5, 40)
        span = base[1] - base[0], base[-1] - base[-2]
        extra = np.concatenate([a + span[0] * k, b - span[1] * k])
        return np.unique(np.concatenate([base, extra]))

    # serialization

    def to_dict(self):
        d = {"kind": self.kind, "support": list(self.support)}
        if self.kind in ("smooth_bump", "piecewise_linear_hat"):
            d.update(center=self.center, width=self.width, amplitude=self.amplitude)
        elif self.kind == "ground_state_bump":
            d.update(eta=self.eta, amplitude=self.amplitude)
        else:
            d.update(samples=[list(p) for p in self.samples], rule=self.rule)
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == "smooth_bump":
            return cls.smooth_bump(d["center"], d["width"], d.get("amplitude", 1.0))
        if kind == "piecewise_linear_hat":
            return cls.hat(d["center"], d["width"], d.get("amplitude", 1.0))
        if kind == "ground_state_bump":
            lo, hi = d["support"]
            return cls.ground_state_bump(d["eta"], lo, hi, d.get("amplitude", 1.0))
        if kind == "tabulated":
            return cls.tabulated(d["samples"], d.get("rule", "cubic"))
        raise DomainError(f"unknown test function kind {kind}")

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


def standard_suite():
    """The five canonical bumps: centers 0.5, 1, 2 and widths 0.5, 1 inside (0, inf)."""
    out = []
    for c in (0.5, 1.0, 2.0):
        for w in (0.5, 1.0):
            if c - w / 2 > 0:
                out.append(TestFunction.smooth_bump(c, w))
    return out


@dataclass(frozen=True)
class FormValue:
    value: float
    err_est: float
    decomposition: tuple | None = None


# Quadrature engine.


def _inner_edges(r, a, b, delta, lo_rel=1e-14, hi_rel=1e12):
    lo = lo_rel * min(a, r)
    hi = hi_rel * b
    k = delta * 2.0 ** np.arange(0, 200)
    left = r - k[k < r - lo]
    right = r + k[k < hi - r]
    pts = np.concatenate(
        [
            np.geomspace(lo, min(a, r), 64),
            left,
            right,
            [a, b, hi],
            np.geomspace(b, hi, 64),
        ]
    )
    pts = np.unique(pts)
    return pts[(pts >= lo) & (pts <= hi)]


def _form(g, gprime, support, W, edges_outer, singular_order=None, n=8, delta_rel=1e-6):
    """(1/2) int int |g(r) - g(s)|^2 W(r, s) dr ds with g supported in [a, b].

    ``singular_order`` is alpha when W ~ |r - s|^(-1-alpha) near the diagonal.
    Returns (value, strip contribution).
    """
    a, b = support
    r_nodes, r_w = panel_rule(edges_outer, n)
    total = 0.0
    strip_total = 0.0
    for r, wr in zip(r_nodes, r_w):
        gr = float(g(r))
        delta = delta_rel * r if singular_order is not None else 0.0
        edges = _inner_edges(r, a, b, max(delta, 1e-9 * r))
        left, right = edges[:-1], edges[1:]
        if singular_order is not None:
            keep = ~((left >= r - delta * (1 + 1e-12)) & (right <= r + delta * (1 + 1e-12)))
        else:
            keep = np.ones(len(left), bool)
        x, w = gauss_legendre(n)
        lft, rgt = left[keep], right[keep]
        half = 0.5 * (rgt - lft)
        s = (half[:, None] * x + (0.5 * (lft + rgt))[:, None]).ravel()
        ws = (half[:, None] * w).ravel()
        fac = np.where((s >= a) & (s <= b), 0.5, 1.0)
        f = (gr - g(s)) ** 2 * fac * W(r, s)
        val = f @ ws
        # ends of the half line: the integrand is a power law there
        lo, hi = edges[0], edges[-1]
        ends = np.array([lo, 1.5 * lo, hi / 1.5, hi])
        fe = (gr - g(ends)) ** 2 * W(r, ends)
        val += power_end(ends[0], fe[0], ends[1], fe[1], "head")
        val += power_end(ends[2], fe[2], ends[3], fe[3], "tail")
        if singular_order is not None and a < r < b:
            al = singular_order
            c = 0.5 * (W(r, np.array([r + delta]))[0] + W(r, np.array([r - delta]))[0]) * delta ** (1 + al)
            strip = float(gprime(r)) ** 2 * c * delta ** (2 - al) / (2 - al)
            val += strip
            strip_total += wr * strip
        total += wr * float(val)
    return total, strip_total



def _check_form_params(zeta, alpha):
    if not zeta > -0.5:
        raise DomainError("zeta must exceed -1/2")
    if alpha == 2:
        raise DomainError("the alpha = 2 form is local and not supported")
    if not 0 < alpha < 2:
        raise DomainError("alpha must lie in (0, 2)")


def _levy_weight(zeta, alpha, eta=0.0):
    def W(r, s):
        s = np.asarray(s, float)
        return levy(zeta, alpha, r, s) * (r * s) ** (2 * zeta - eta)

    return W


def dirichlet_form(zeta: float, alpha: float, u: TestFunction) -> FormValue:
    """E_zeta[u] = (1/2) int int |u(r) - u(s)|^2 nu_zeta(r, s) (rs)^(2 zeta) dr ds."""
    _check_form_params(zeta, alpha)
    if u.amplitude == 0 and u.kind != "tabulated":
        return FormValue(0.0, 0.0, (0.0, 0.0))
    v, strip = _form(u, u.derivative, u.support, _levy_weight(zeta, alpha), u.breakpoints(), alpha)
    return FormValue(float(v), float(abs(strip) * 1e-3 + 1e-12 * abs(v)), (float(v - strip), float(strip)))


def hardy_form(params: CouplingParams, u: TestFunction) -> FormValue:
    """I_{zeta,eta}[u] with ground state h(r) = r^(-eta)."""
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    _check_form_params(zeta, alpha)
    g = lambda r: u(r) * np.asarray(r, float) ** eta
    gp = lambda r: u.derivative(r) * r ** eta + eta * u(r) * r ** (eta - 1)
    v, strip = _form(g, gp, u.support, _levy_weight(zeta, alpha, eta), u.breakpoints(), alpha)
    return FormValue(float(v), float(abs(strip) * 1e-3 + 1e-12 * abs(v)), (float(v - strip), float(strip)))


def potential_term(zeta: float, alpha: float, u: TestFunction) -> float:
    """int |u(r)|^2 r^(2 zeta - alpha) dr."""
    r, w = panel_rule(u.breakpoints(), 8)
    return float((u(r) ** 2 * r ** (2 * zeta - alpha)) @ w)


def gsr_residual(params: CouplingParams, u: TestFunction) -> float:
    """E_zeta[u] - I_{zeta,eta}[u] - kappa int |u|^2 r^(2 zeta - alpha) dr."""
    e = dirichlet_form(params.zeta, params.alpha, u).value
    i = hardy_form(params, u).value
    return e - i - params.kappa * potential_term(params.zeta, params.alpha, u)


def semigroup_form(params: CouplingParams, t: float, u: TestFunction, control: SeriesControl | None = None) -> FormValue:
    """E_{zeta,eta}(t)[u] = (1/t) <u, (1 - P_t) u> in L^2(r^(2 zeta) dr).

    Evaluated as (1/(2t)) int int p(t,r,s) (rs)^(2 zeta) h(r) h(s) |u/h(r) - u/h(s)|^2,
    which equals the definition because P_t h = h.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    zeta, eta = params.zeta, params.eta

    def W(r, s):
        s = np.asarray(s, float)
        return perturbed(params, t, r, s, control) * (r * s) ** (2 * zeta - eta) / t

    g = lambda r: u(r) * np.asarray(r, float) ** eta
    v, _ = _form(g, None, u.support, W, u.breakpoints(), None)
    return FormValue(float(v), 1e-8 * abs(float(v)))


def dirichlet_form_spectral(zeta: float, alpha: float, u: TestFunction, kmax: float | None = None) -> float:
    """E_zeta[u] = int_0^inf k^alpha |U(k)|^2 dk with the Hankel transform
    U(k) = k^(1/2) int u(r) r^(zeta + 1/2) J_(zeta - 1/2)(kr) dr."""
    a, b = u.support
    kmax = kmax or 400.0 / (b - a)
    r, wr = panel_rule(np.linspace(a, b, int(np.ceil(kmax * (b - a) / 4)) + 17), 8)
    ur = u(r) * r ** (zeta + 0.5) * wr
    kedges = np.linspace(0.0, kmax, int(np.ceil(kmax * b / 2)) + 2)
    k, wk = panel_rule(kedges, 8)
    total = 0.0
    for i in range(0, len(k), 2000):
        kk = k[i : i + 2000]
        U = np.sqrt(kk) * (special.jv(zeta - 0.5, kk[:, None] * r[None, :]) @ ur)
        total += float((kk ** alpha * U * U) @ wk[i : i + 2000])
    return total


def integral_regimes(zeta: float, alpha: float, delta: float, t: float, r: float) -> float:
    """int_0^t dtau int_0^inf p_zeta^(alpha)(tau, r, s) s^(2 zeta - delta) ds."""
    if not 0 < delta < 2 * zeta + 1:
        raise DomainError("delta must lie in (0, 2 zeta + 1)")
    if not (t > 0 and r > 0):
        raise DomainError("t and r must be positive")
    return integrated_moment(zeta, alpha, delta, t, r)


def regime_prediction(alpha: float, delta: float, t: float, r: float) -> float:
    """Predicted size of integral_regimes in the three regimes of delta vs alpha."""
    if delta < alpha:
        return t * max(r ** alpha, t) ** (-delta / alpha)
    if delta == alpha:
        return math.log(1 + t / r ** alpha)
    return r ** (-delta) * min(t, r ** alpha)


def hardy_functional(zeta: float, alpha: float, kappa: float, u: TestFunction) -> float:
    """E_zeta[u] - kappa int |u|^2 r^(2 zeta - alpha) dr."""
    return dirichlet_form(zeta, alpha, u).value - kappa * potential_term(zeta, alpha, u)


def sharpness_witness(zeta: float, alpha: float, factor: float = 1.05, half_widths=(1, 2, 3, 4, 6, 8)):
    """Search for u with E[u] < factor * kappa_c * int |u|^2 r^(2 zeta - alpha).

    Candidates are ground-state bumps r^(-eta_c) phi(log r / L) of growing
    log-width L.  Returns (u, value) for the first witness or None.
    """
    kc = kappa_crit(2 * zeta + 1, alpha)
    ec = eta_critical(zeta, alpha)
    for L in half_widths:
        u = TestFunction.ground_state_bump(ec, math.exp(-L), math.exp(L))
        v = hardy_functional(zeta, alpha, factor * kc, u)
        if v < 0:
            return u, v
    return None
