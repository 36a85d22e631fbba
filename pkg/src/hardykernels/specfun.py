"""Special functions and coupling constants.

Gamma and Bessel functions, the regularized Gauss hypergeometric function,
the one-sided stable density and the maps between the coupling constant
kappa of the Hardy potential and the ground-state exponent eta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special


class DomainError(ValueError):
    """Raised when an argument lies outside the admissible range."""


@dataclass(frozen=True)
class AccuracyBudget:
    """Error targets shared by the quadrature and series routines."""

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 200
    series_terms_max: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not (self.abs_tol >= 0):
            raise DomainError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.max_subdivisions < 1 or self.series_terms_max < 1:
            raise DomainError("max_subdivisions and series_terms_max must be >= 1")


@dataclass(frozen=True)
class ChannelParams:
    """Angular momentum channel ell of the d-dimensional problem."""

    d: int
    ell: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a nonnegative integer, got {self.ell}")
        if self.d == 1 and self.ell > 1:
            raise DomainError("for d=1 only ell in {0, 1} is admissible")

    @property
    def d_ell(self) -> int:
        return self.d + 2 * self.ell

    @property
    def zeta(self) -> float:
        return (self.d_ell - 1) / 2


def eta_critical(zeta: float, alpha: float) -> float:
    """Largest admissible exponent (2 zeta + 1 - alpha) / 2."""
    return (2 * zeta + 1 - alpha) / 2


@dataclass(frozen=True)
class CouplingParams:
    """Bessel index zeta, stability order alpha and ground-state exponent eta.

    ``kappa`` is derived from the other three fields.
    """

    zeta: float
    alpha: float
    eta: float = 0.0
    kappa: float = field(init=False)

    def __post_init__(self):
        zeta, alpha, eta = float(self.zeta), float(self.alpha), float(self.eta)
        if not (math.isfinite(zeta) and zeta > -0.5):
            raise DomainError(f"zeta must exceed -1/2, got {zeta}")
        if not (0 < alpha <= 2):
            raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
        if eta == 0:
            # Free kernel: no potential, so alpha < 2 zeta + 1 is not needed.
            for name, v in (("zeta", zeta), ("alpha", alpha), ("eta", 0.0), ("kappa", 0.0)):
                object.__setattr__(self, name, v)
            return
        if not alpha < 2 * zeta + 1:
            raise DomainError(f"alpha must be < 2*zeta+1 = {2 * zeta + 1}, got {alpha}")
        ec = eta_critical(zeta, alpha)
        lower = -alpha if alpha < 2 else -math.inf
        if not (lower < eta <= ec * (1 + 1e-15) + 1e-15):
            raise DomainError(f"eta must lie in ({lower}, {ec}], got {eta}")
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "eta", min(eta, ec))
        object.__setattr__(self, "kappa", coupling_psi(zeta, alpha, min(eta, ec)))

    @property
    def eta_crit(self) -> float:
        return eta_critical(self.zeta, self.alpha)

    @classmethod
    def from_kappa(cls, zeta: float, alpha: float, kappa: float) -> "CouplingParams":
        return cls(zeta, alpha, eta_from_kappa(zeta, alpha, kappa))

    @classmethod
    def from_channel(cls, channel: ChannelParams, alpha: float, kappa: float) -> "CouplingParams":
        return cls.from_kappa(channel.zeta, alpha, kappa)


def _as_array(x):
    return np.asarray(x, dtype=float)


def _ret(out, *args):
    # Return a Python float when every input was scalar.
    if all(np.ndim(a) == 0 for a in args):
        return float(out)
    return out


def log_gamma(x):
    """Natural logarithm of Gamma(x) for x > 0."""
    xa = _as_array(x)
    if not np.all(np.isfinite(xa)) or np.any(xa <= 0):
        raise DomainError("log_gamma requires finite x > 0")
    return _ret(special.gammaln(xa), x)


def _hankel_ive(nu, x, nterms=8):
    # e^{-x} I_nu(x) from the large-argument expansion; used for x > 1e7
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, nterms):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        acc = acc + term
    return acc / np.sqrt(2 * np.pi * x)


_HANKEL_SWITCH = 1e7


def bessel_i_scaled(nu, x):
    """Exponentially scaled modified Bessel function e^{-x} I_nu(x), nu >= -1/2."""
    nu_a, xa = _as_array(nu), _as_array(x)
    if np.any(nu_a < -0.5):
        raise DomainError("bessel_i_scaled requires nu >= -1/2")
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise DomainError("bessel_i_scaled requires finite x >= 0")
    nu_b, xb = np.broadcast_arrays(nu_a, xa)
    out = np.empty(xb.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        half_p = nu_b == 0.5
        half_m = nu_b == -0.5
        x_hp = xb[half_p]
        out[half_p] = np.where(x_hp > 0, -np.expm1(-2 * x_hp) / np.sqrt(2 * np.pi * x_hp), 0.0)
        x_hm = xb[half_m]
        out[half_m] = (1 + np.exp(-2 * x_hm)) / np.sqrt(2 * np.pi * x_hm)
        rest = ~(half_p | half_m)
        big = rest & (xb > _HANKEL_SWITCH)
        mid = rest & ~big
        out[mid] = special.ive(nu_b[mid], xb[mid])
        out[big] = _hankel_ive(nu_b[big], xb[big])
    return _ret(out, nu, x)


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x), nu >= -1/2, x >= 0."""
    nu_a, xa = _as_array(nu), _as_array(x)
    if np.any(nu_a < -0.5):
        raise DomainError("bessel_j requires nu >= -1/2")
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise DomainError("bessel_j requires finite x >= 0")
    nu_b, xb = np.broadcast_arrays(nu_a, xa)
    out = np.empty(xb.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        half_p = nu_b == 0.5
        half_m = nu_b == -0.5
        x_hp = xb[half_p]
        out[half_p] = np.where(x_hp > 0, np.sqrt(2 / (np.pi * x_hp)) * np.sin(x_hp), 0.0)
        x_hm = xb[half_m]
        out[half_m] = np.sqrt(2 / (np.pi * x_hm)) * np.cos(x_hm)
        rest = ~(half_p | half_m)
        out[rest] = special.jv(nu_b[rest], xb[rest])
    return _ret(out, nu, x)


def _near_int(x, tol):
    return abs(x - round(x)) < tol


def _hyp2f1_reg(a, b, c, z):
    # Regularized 2F1 for array z in [0, 1); c is not a nonpositive integer here.
    s = c - a - b
    out = np.empty_like(z)
    near = z > 0.75
    if s > 0 and not _near_int(s, 0.05) and np.any(near):
        w = 1.0 - z[near]
        t1 = special.gamma(s) * special.rgamma(c - a) * special.rgamma(c - b)
        t2 = special.gamma(-s) * special.rgamma(a) * special.rgamma(b)
        out[near] = t1 * special.hyp2f1(a, b, 1 - s, w) + t2 * w ** s * special.hyp2f1(
            c - a, c - b, 1 + s, w
        )
        far = ~near
    else:
        far = np.ones(z.shape, bool)
    out[far] = special.hyp2f1(a, b, c, z[far]) * special.rgamma(c)
    return out


def hyp2f1_regularized(a: float, b: float, c: float, z):
    """Regularized Gauss hypergeometric function 2F1(a, b; c; z) / Gamma(c).

    Defined for 0 <= z < 1 and every real c, including the poles of Gamma(c).
    """
    za = _as_array(z)
    if np.any(za < 0) or np.any(za >= 1) or not np.all(np.isfinite(za)):
        raise DomainError("hyp2f1_regularized requires 0 <= z < 1")
    a, b, c = float(a), float(b), float(c)
    zf = np.atleast_1d(za).astype(float)
    if c <= 0 and _near_int(c, 1e-14):
        # Limit at a pole of Gamma(c): shift to c = n + 2 (n = -c).
        n = int(round(-c))
        pref = special.poch(a, n + 1) * special.poch(b, n + 1)
        out = pref * zf ** (n + 1) * _hyp2f1_reg(a + n + 1, b + n + 1, n + 2.0, zf)
    else:
        out = _hyp2f1_reg(a, b, c, zf)
    out = out.reshape(za.shape)
    return _ret(out, z)


# Stable density via the Kanter / Zolotarev integral representation.


@lru_cache(maxsize=None)
def _kanter_nodes(npts: int = 32, depth: int = 30):
    # Panels on (0, pi) graded geometrically towards both endpoints.
    x, w = np.polynomial.legendre.leggauss(npts)
    half = np.pi / 2
    left = half * 0.5 ** np.arange(depth)[::-1]
    edges = np.concatenate([[0.0], left, np.pi - left[::-1][1:], [np.pi]])
    a, b = edges[:-1], edges[1:]
    phi = (0.5 * (b - a)[:, None] * x + 0.5 * (a + b)[:, None]).ravel()
    wt = (0.5 * (b - a)[:, None] * w).ravel()
    return phi, wt


def _kanter_a(phi, beta):
    num = np.sin(beta * phi) ** beta * np.sin((1 - beta) * phi) ** (1 - beta)
    return (num / np.sin(phi)) ** (1 / (1 - beta))


def _sigma1_kanter(tau, beta):
    phi, wt = _kanter_nodes()
    a = _kanter_a(phi, beta)
    k = tau[:, None] ** (-beta / (1 - beta))
    val = (a[None, :] * np.exp(-k * a[None, :])) @ wt
    return beta / (1 - beta) / np.pi * tau ** (-1 / (1 - beta)) * val


def _sigma1_series(tau, beta, nterms=80):
    k = np.arange(1, nterms + 1)
    coef = (
        (-1.0) ** (k + 1)
        * np.exp(special.gammaln(k * beta + 1) - special.gammaln(k + 1))
        * np.sin(np.pi * k * beta)
        / np.pi
    )
    return (coef[None, :] * tau[:, None] ** (-k[None, :] * beta - 1)).sum(1)


def _sigma1(tau, beta):
    tau = np.atleast_1d(np.asarray(tau, float))
    out = np.empty_like(tau)
    # The large-tau series converges fast once tau^-beta is small.
    ser = tau ** (-beta) < 0.05
    out[ser] = _sigma1_series(tau[ser], beta)
    out[~ser] = _sigma1_kanter(tau[~ser], beta)
    return np.maximum(out, 0.0)


def stable_density(beta: float, t: float, tau):
    """Density sigma_t(tau) of the beta-stable subordinator at time t.

    Its Laplace transform is exp(-t lambda^beta).
    """
    if not (0 < beta < 1):
        raise DomainError(f"stable_density requires beta in (0, 1), got {beta}")
    if not (t > 0):
        raise DomainError("stable_density requires t > 0")
    ta = _as_array(tau)
    if np.any(ta <= 0):
        raise DomainError("stable_density requires tau > 0")
    scale = t ** (-1 / beta)
    out = scale * _sigma1(np.atleast_1d(ta) * scale, beta).reshape(ta.shape)
    return _ret(out, tau)


# Coupling constants.


def _check_coupling(zeta, alpha):
    if not zeta > -0.5:
        raise DomainError(f"zeta must exceed -1/2, got {zeta}")
    if not (0 < alpha <= 2 and alpha < 2 * zeta + 1):
        raise DomainError(f"alpha must lie in (0, 2] and below 2*zeta+1, got {alpha}")


def coupling_psi(zeta: float, alpha: float, eta: float) -> float:
    """Coupling constant kappa = Psi_zeta(eta) of the potential kappa / r^alpha."""
    _check_coupling(zeta, alpha)
    if alpha == 2:
        return eta * (2 * zeta - 1 - eta)
    if not (-alpha < eta < 2 * zeta + 1):
        raise DomainError(f"eta must lie in ({-alpha}, {2 * zeta + 1}), got {eta}")
    # Gamma((2zeta+1-eta)/2) and Gamma((alpha+eta)/2) have positive arguments;
    # the two denominator Gammas enter through rgamma, which is zero at poles.
    lg = special.gammaln((2 * zeta + 1 - eta) / 2) + special.gammaln((alpha + eta) / 2)
    return float(
        2.0 ** alpha
        * np.exp(lg)
        * special.rgamma(eta / 2)
        * special.rgamma((2 * zeta + 1 - eta - alpha) / 2)
    )


def coupling_phi(d_ell: float, alpha: float, eta: float) -> float:
    """Coupling constant Phi_{d_ell}(eta) parameterized by the effective dimension."""
    if not (d_ell > 0 and 0 < alpha <= 2 and alpha < d_ell):
        raise DomainError("coupling_phi requires alpha in (0, 2] and alpha < d_ell")
    if alpha == 2:
        return eta * (d_ell - eta - 2)
    if not (-alpha < eta < d_ell):
        raise DomainError(f"eta must lie in ({-alpha}, {d_ell}), got {eta}")
    num = special.gamma((d_ell - eta) / 2) * special.gamma((alpha + eta) / 2)
    if eta == 0 or (d_ell - eta - alpha <= 0 and _near_int((d_ell - eta - alpha) / 2, 1e-15)):
        return 0.0
    den = special.gamma(eta / 2) * special.gamma((d_ell - eta - alpha) / 2)
    return float(2.0 ** alpha * num / den)


def kappa_crit(d_ell: float, alpha: float) -> float:
    """Critical coupling constant, the maximum of Phi_{d_ell} over eta."""
    if not (d_ell > 0 and 0 < alpha <= 2 and alpha < d_ell):
        raise DomainError("kappa_crit requires alpha in (0, 2] and alpha < d_ell")
    if alpha == 2:
        return (d_ell - 2) ** 2 / 4
    lg = special.gammaln((d_ell + alpha) / 4) - special.gammaln((d_ell - alpha) / 4)
    return float(2.0 ** alpha * np.exp(2 * lg))


def eta_from_kappa(zeta: float, alpha: float, kappa: float) -> float:
    """The unique eta <= (2 zeta + 1 - alpha) / 2 with Psi_zeta(eta) = kappa."""
    _check_coupling(zeta, alpha)
    kc = kappa_crit(2 * zeta + 1, alpha)
    ec = eta_critical(zeta, alpha)
    if kappa > kc * (1 + 1e-13) + 1e-15:
        raise DomainError(
            f"kappa={kappa} exceeds the critical coupling {kc}; the form is unbounded below"
        )
    if kappa >= kc:
        return ec
    if kappa == 0:
        return 0.0
    if alpha == 2:
        m = 2 * zeta - 1
        disc = m * m - 4 * kappa
        # Stable root of eta^2 - m eta + kappa = 0 on the lower branch.
        return 2 * kappa / (m + math.sqrt(disc)) if m + math.sqrt(disc) != 0 else m / 2
    f = lambda e: coupling_psi(zeta, alpha, e) - kappa
    if kappa > 0:
        lo, hi = 0.0, ec
        if f(hi) <= 0:
            # kappa agrees with Psi(eta_c) to rounding
            return ec
    else:
        hi = 0.0
        gap = alpha / 2
        lo = -alpha + gap
        while f(lo) > 0:
            gap /= 2
            lo = -alpha + gap
            if gap < 1e-300:
                raise DomainError(f"no eta found for kappa={kappa}")
    eta = optimize.brentq(f, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=500)
    return float(eta)
