"""Hardy-perturbed kernels p_{zeta,eta}^(alpha) and their envelopes.

The perturbed kernel solves the Duhamel equation

    p_eta(t, r, s) = p(t, r, s)
        + int_0^t dtau int_0^inf dz z^(2 zeta) p(tau, r, z) q(z) p_eta(t - tau, z, s)

with q(z) = kappa z^(-alpha).  Both sides scale the same way under
(t, r, s) -> (c^alpha t, c r, c s), so it suffices to solve at t = 1 for
F(x, y) = p_eta(1, x, y).  We write F = P * omega(x) * omega(y) * G with
P = p(1, x, y) and the smooth weight omega(x) = (1 + 1/x)^eta, which carries
the x^(-eta) behaviour at the origin.  G is then bounded and smooth in
log x, log y; it is represented by cubic interpolation on a symmetric grid
and the Duhamel equation becomes the linear system (I - kappa M) G = b.

For alpha = 2 the perturbed kernel is known in closed form,
p_eta(t, r, s) = (rs)^(-eta) p_(zeta - eta)(t, r, s).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._quad import gauss_jacobi, graded_edges, log_panel_rule, panel_rule, power_end
from .kernels import (
    Envelope,
    EvalPoint,
    EvalResult,
    QuadratureError,
    free_comparison,
    free_kernel,
    heat2,
    integrated_moment,
    moment,
)
from .specfun import CouplingParams, DomainError, coupling_psi

TABLE_FORMAT = 3


@dataclass(frozen=True)
class SeriesControl:
    """Controls of the Duhamel solver.

    ``time_grid`` is the number of Gauss nodes per dyadic panel in tau; the
    ``grid_*`` fields describe the log2 grid of the scaled variables.
    """

    max_terms: int = 400
    tail_tol: float = 1e-4
    picard_tol: float = 1e-10
    time_grid: int = 4
    grid_lo: float = -14.0
    grid_hi: float = 12.0
    grid_step: float = 0.5
    z_order: int = 6
    tau_eps: float = 1e-5

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if not (self.tail_tol > 0 and self.picard_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.time_grid < 1 or self.z_order < 2:
            raise DomainError("time_grid must be >= 1 and z_order >= 2")
        if not (self.grid_hi - self.grid_lo >= 3 * self.grid_step > 0):
            raise DomainError("the grid needs at least four nodes")


@dataclass(frozen=True)
class GroundState:
    """Generalized ground state h(r) = r^(-eta)."""

    eta: float

    def h(self, r):
        return np.asarray(r, float) ** (-self.eta)

    @staticmethod
    def h_beta(r, beta):
        return np.asarray(r, float) ** (-beta)


def hardy_potential(params: CouplingParams, z):
    """Potential q(z) = kappa z^(-alpha)."""
    za = np.asarray(z, float)
    if np.any(za <= 0):
        raise DomainError("hardy_potential requires z > 0")
    out = params.kappa * za ** (-params.alpha)
    return float(out) if np.ndim(z) == 0 else out


def _check_perturbed(params: CouplingParams):
    if params.alpha == 2 and not params.zeta - params.eta > -0.5:
        raise DomainError("alpha = 2 requires zeta - eta > -1/2")


# Quadrature nodes of one Duhamel layer.


def _tau_nodes(lo_left, lo_right, n):
    """Nodes on (0, 1) in dyadic log panels towards both endpoints."""

    def side(lo):
        k = max(1, int(math.ceil(math.log2(0.5 / lo))))
        e = 0.5 * 2.0 ** (-np.arange(k + 1))
        u, w = panel_rule(np.log(e[::-1]), n)
        return np.exp(u), w * np.exp(u)

    t1, w1 = side(lo_left)
    t2, w2 = side(lo_right)
    return np.concatenate([t1, 1 - t2]), np.concatenate([w1, w2])


def _z_nodes(x, y, sa, sb, weight_exp, head_exp, n, lo_fac=1e-7, hi_fac=1e2):
    """Nodes for int_0^inf dz z^weight_exp f(z) with features at x and y.

    f varies on the scale sa near x and sb near y.  On the first panel [0, lo]
    the integrand behaves like z^head_exp and a Gauss-Jacobi rule is used.
    """
    lo = lo_fac * min(x, y)
    hi = hi_fac * max(x, y, sa, sb)
    pts = [np.exp(np.arange(math.log(lo), math.log(hi), math.log(2.0))), [hi]]
    for c, sc in ((x, sa), (y, sb)):
        k = sc * 2.0 ** np.arange(-3, 60)
        k = k[k < 4 * c + 4 * sc]
        pts += [c - k[k < c * 0.75], c + k, [c]]
    pts = np.unique(np.concatenate(pts))
    pts = pts[(pts >= lo) & (pts <= hi)]
    z, w = panel_rule(pts, n)
    jx, jw = gauss_jacobi(n, float(head_exp))
    z0 = lo * (jx + 1) / 2
    w0 = jw * (lo / 2) ** (head_exp + 1) * z0 ** (weight_exp - head_exp)
    return np.concatenate([z0, z]), np.concatenate([w0, w * z ** weight_exp])


# The discretized Duhamel operator.


class DuhamelTable:
    """Discretized Duhamel operator for fixed (zeta, alpha, eta) at t = 1."""

    def __init__(self, zeta: float, alpha: float, eta: float, control: SeriesControl):
        self.zeta, self.alpha, self.eta = float(zeta), float(alpha), float(eta)
        self.control = control
        c = control
        self.u = np.arange(c.grid_lo, c.grid_hi + 1e-9, c.grid_step) * math.log(2)
        self.h = c.grid_step * math.log(2)
        n = len(self.u)
        self.n = n
        iu, ju = np.triu_indices(n)
        self.iu, self.ju = iu, ju
        idx = np.zeros((n, n), int)
        idx[iu, ju] = np.arange(len(iu))
        idx[ju, iu] = np.arange(len(iu))
        self.idx = idx
        self.M = None
        self.rhs = None

    # basis functions

    def omega(self, x):
        return (1.0 + 1.0 / np.asarray(x, float)) ** self.eta

    def _weights1d(self, u):
        u = np.clip(u, self.u[0], self.u[-1])
        f = (u - self.u[0]) / self.h
        i = np.clip(np.floor(f).astype(int) - 1, 0, self.n - 4)
        s = f - i
        w = np.ones((len(u), 4))
        for a in range(4):
            for b in range(4):
                if a != b:
                    w[:, a] *= (s - b) / (a - b)
        return i[:, None] + np.arange(4)[None, :], w

    def interpolate(self, coef, x, y):
        """Tensor cubic interpolant of grid values ``coef`` at scaled points (x, y)."""
        x = np.atleast_1d(np.asarray(x, float))
        y = np.atleast_1d(np.asarray(y, float))
        ia, wa = self._weights1d(np.log(x))
        ib, wb = self._weights1d(np.log(y))
        cidx = self.idx[ia[:, :, None], ib[:, None, :]]
        return (coef[cidx] * wa[:, :, None] * wb[:, None, :]).sum((1, 2))

    def free(self, t, x, y):
        return free_kernel(self.zeta, self.alpha, t, x, y, h=0.2)

    # assembly

    def _row(self, x, y):
        a, zeta, c = self.alpha, self.zeta, self.control
        lo_l = min(x, y, 1.0) ** a * c.tau_eps
        lo_r = min(y, 1.0) ** a * c.tau_eps
        taus, wt = _tau_nodes(lo_l, lo_r, c.time_grid)
        gam = 2 * zeta - a
        head = gam - max(self.eta, 0.0)
        zs, ws, ts = [], [], []
        for tau, wtau in zip(taus, wt):
            z, wz = _z_nodes(x, y, tau ** (1 / a), (1 - tau) ** (1 / a), gam, head, c.z_order)
            zs.append(z)
            ws.append(wz * wtau)
            ts.append(np.full(len(z), tau))
        z = np.concatenate(zs)
        tau = np.concatenate(ts)
        w = np.concatenate(ws)
        th = 1 - tau
        sc = th ** (-1 / a)
        weight = (
            w
            * self.free(tau, x, z)
            * self.free(th, z, y)
            * self.omega(z * sc)
            * self.omega(y * sc)
        )
        diag = float(self.free(1.0, x, y)) * float(self.omega(x) * self.omega(y))
        ia, wa = self._weights1d(np.log(z * sc))
        ib, wb = self._weights1d(np.log(y * sc))
        cidx = self.idx[ia[:, :, None], ib[:, None, :]]
        vals = weight[:, None, None] * wa[:, :, None] * wb[:, None, :]
        return np.bincount(cidx.ravel(), vals.ravel(), minlength=len(self.iu)) / diag

    def assemble(self):
        x = np.exp(self.u)
        m = len(self.iu)
        M = np.zeros((m, m))
        for row, (i, j) in enumerate(zip(self.iu, self.ju)):
            M[row] = self._row(x[i], x[j])
        self.M = M
        self.rhs = 1.0 / (self.omega(x[self.iu]) * self.omega(x[self.ju]))
        return self

    # solvers

    def solve(self, kappa):
        m = len(self.rhs)
        return np.linalg.solve(np.eye(m) - kappa * self.M, self.rhs)

    def terms(self, kappa, n):
        """Grid values of the first n + 1 Duhamel terms (kappa M)^k b."""
        out = [self.rhs.copy()]
        for _ in range(n):
            out.append(kappa * (self.M @ out[-1]))
        return out

    def series(self, kappa, control: SeriesControl):
        """Sum of the Duhamel series with the geometric tail rule.

        Returns (G, n_terms, tail_bound, certified).  If the term ratios do not
        certify a tail below tail_tol within max_terms (this happens close to
        the critical coupling), the sum is completed by solving the linear
        system, whose solution is the limit of the discretized series.
        """
        term = self.rhs.copy()
        total = term.copy()
        prev = np.max(np.abs(term))
        good = 0
        for n in range(1, control.max_terms + 1):
            term = kappa * (self.M @ term)
            total += term
            size = np.max(np.abs(term))
            rho = size / prev if prev > 0 else 0.0
            prev = size
            good = good + 1 if rho < 0.9 else 0
            tail = size * rho / (1 - rho) if rho < 1 else math.inf
            if good >= 2 and tail <= control.tail_tol * np.max(np.abs(total)):
                return total, n, tail, True
        G = self.solve(kappa)
        return G, control.max_terms, float(np.max(np.abs(G - total))), False

    def picard(self, kappa, control: SeriesControl):
        """Fixed-point iteration G <- b + kappa M G.

        Returns (G, iterations, residual, contracted).  When the iteration is
        not a contraction the fixed point is obtained by a direct solve.
        """
        G = self.rhs.copy()
        res_prev = math.inf
        for k in range(1, control.max_terms + 1):
            G_new = self.rhs + kappa * (self.M @ G)
            res = float(np.max(np.abs(G_new - G)))
            G = G_new
            if res <= control.picard_tol * np.max(np.abs(G)):
                return G, k, res, True
            if k > 3 and res > 0.95 * res_prev:
                break
            res_prev = res
        G = self.solve(kappa)
        res = float(np.max(np.abs(self.rhs + kappa * (self.M @ G) - G)))
        return G, k, res, False

    # persistence

    def key(self):
        c = self.control
        d = dict(
            fmt=TABLE_FORMAT,
            zeta=self.zeta,
            alpha=self.alpha,
            eta=self.eta,
            grid=[c.grid_lo, c.grid_hi, c.grid_step],
            time_grid=c.time_grid,
            z_order=c.z_order,
            tau_eps=c.tau_eps,
        )
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:24]


def table_dir() -> Path:
    env = os.environ.get("HARDYKERNELS_TABLE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "hardykernels" / "tables"


_TABLES: dict = {}
_LOCK = threading.Lock()


def get_table(zeta, alpha, eta, control: SeriesControl) -> DuhamelTable:
    """Assembled Duhamel table, memoized in memory and on disk."""
    tab = DuhamelTable(zeta, alpha, eta, control)
    key = tab.key()
    with _LOCK:
        if key in _TABLES:
            return _TABLES[key]
    path = table_dir() / f"{key}.npz"
    if path.exists():
        try:
            with np.load(path) as data:
                tab.M = data["M"]
                tab.rhs = data["rhs"]
        except (OSError, ValueError, KeyError):
            tab.M = None
    if tab.M is None:
        tab.assemble()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, M=tab.M, rhs=tab.rhs)
            os.replace(tmp, path)
        except OSError:
            pass
    with _LOCK:
        _TABLES.setdefault(key, tab)
        return _TABLES[key]


# Perturbed kernel.


@dataclass
class _Solution:
    table: DuhamelTable
    G: np.ndarray
    method: str
    n_terms: int
    tail: float
    converged: bool


_SOLUTIONS: dict = {}


def _solution(params: CouplingParams, control: SeriesControl) -> _Solution:
    key = (params.zeta, params.alpha, params.eta, control)
    with _LOCK:
        if key in _SOLUTIONS:
            return _SOLUTIONS[key]
    tab = get_table(params.zeta, params.alpha, params.eta, control)
    if params.eta > 0:
        G, n, tail, ok = tab.series(params.kappa, control)
        sol = _Solution(tab, G, "series", n, tail, ok)
    else:
        G, n, tail, ok = tab.picard(params.kappa, control)
        sol = _Solution(tab, G, "picard", n, tail, ok)
    with _LOCK:
        _SOLUTIONS.setdefault(key, sol)
        return _SOLUTIONS[key]


def _scaled(alpha, t, r, s):
    t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
    c = t ** (-1 / alpha)
    return t, r * c, s * c


def perturbed_ratio(params: CouplingParams, t, r, s, control: SeriesControl | None = None):
    """Ratio p_eta / p of the perturbed to the free kernel (vectorized)."""
    control = control or SeriesControl()
    _check_perturbed(params)
    t, x, y = _scaled(params.alpha, t, r, s)
    if params.eta == 0:
        return np.ones(t.shape)
    if params.alpha == 2:
        return heat2(params.zeta - params.eta, t, r, s) * (np.asarray(r) * np.asarray(s)) ** (
            -params.eta
        ) / heat2(params.zeta, t, r, s)
    sol = _solution(params, control)
    tab = sol.table
    g = tab.interpolate(sol.G, x.ravel(), y.ravel()).reshape(t.shape)
    return tab.omega(x) * tab.omega(y) * g


def perturbed(params: CouplingParams, t, r, s, control: SeriesControl | None = None):
    """Vectorized perturbed kernel p_{zeta,eta}^(alpha)(t, r, s)."""
    _check_perturbed(params)
    if params.alpha == 2:
        t, r, s = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, r, s)))
        return (r * s) ** (-params.eta) * heat2(params.zeta - params.eta, t, r, s)
    free = free_kernel(params.zeta, params.alpha, t, r, s)
    if params.eta == 0:
        return free
    return free * perturbed_ratio(params, t, r, s, control)


def perturbed_heat(
    params: CouplingParams,
    point: EvalPoint,
    control: SeriesControl | None = None,
    method: str = "auto",
) -> EvalResult:
    """Perturbed kernel p_{zeta,eta}^(alpha)(t, r, s).

    ``method`` may force the Duhamel solver ('series') instead of the closed
    form for alpha = 2.
    """
    control = control or SeriesControl()
    _check_perturbed(params)
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    t, r, s = point.t, point.r, point.s
    if eta == 0:
        if alpha == 2:
            v = float(heat2(zeta, t, r, s))
            return EvalResult(v, 1e-14 * v, "closed_alpha2")
        if alpha == 1:
            v = float(free_kernel(zeta, 1.0, t, r, s))
            return EvalResult(v, 1e-12 * v, "closed_alpha1")
        from .kernels import subordinated

        v, e = subordinated(zeta, alpha, t, r, s)
        return EvalResult(float(v), float(e), "subordination")
    if alpha == 2 and method in ("auto", "closed"):
        v = float(perturbed(params, t, r, s))
        return EvalResult(v, 1e-13 * v, "closed_alpha2")
    sol = _solution(params, control)
    if eta > 0 and not sol.converged and sol.n_terms >= control.max_terms and method == "series-strict":
        raise QuadratureError("Duhamel series did not certify its tail within max_terms")
    free = float(free_kernel(zeta, alpha, t, r, s))
    ratio = float(perturbed_ratio(params, t, r, s, control))
    v = free * ratio
    err = float(abs(v) * (control.tail_tol + (sol.tail if sol.converged else 0.0)))
    return EvalResult(v, err, sol.method)


def duhamel_term(n: int, params: CouplingParams, point: EvalPoint, control: SeriesControl | None = None) -> float:
    """The n-th term p_t^(n,D)(r, s) of the Duhamel perturbation series."""
    control = control or SeriesControl()
    if n < 0 or n > control.max_terms:
        raise DomainError(f"n must lie in [0, {control.max_terms}]")
    zeta, alpha = params.zeta, params.alpha
    free = float(free_kernel(zeta, alpha, point.t, point.r, point.s))
    if n == 0:
        return free
    if params.eta == 0:
        return 0.0
    tab = get_table(zeta, alpha, params.eta, control)
    coef = tab.terms(params.kappa, n)[-1]
    _, x, y = _scaled(alpha, point.t, point.r, point.s)
    g = tab.interpolate(coef, x.ravel(), y.ravel())[0]
    return float(free * tab.omega(x) * tab.omega(y) * g)


def perturbed_envelope(params: CouplingParams, point: EvalPoint, c_lower=4.0, c_upper=8.0) -> Envelope:
    """Comparison function of the perturbed kernel.

    (1 ^ r/t^(1/alpha))^(-eta) (1 ^ s/t^(1/alpha))^(-eta) times the free kernel,
    or times the two Gaussian comparison functions for alpha = 2.
    """
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    t, r, s = point.t, point.r, point.s
    c = t ** (-1 / alpha)
    w = min(1.0, r * c) ** (-eta) * min(1.0, s * c) ** (-eta)
    if alpha == 2:
        lo = float(free_comparison(zeta, 2, t, r, s, c_lower))
        hi = float(free_comparison(zeta, 2, t, r, s, c_upper))
        return Envelope(w * lo, w * hi, c_lower, c_upper)
    v = w * float(free_kernel(zeta, alpha, t, r, s))
    return Envelope(v, v)


def perturbed_weight(alpha, eta, t, r, s):
    """Vectorized factor (1 ^ r/t^(1/alpha))^(-eta) (1 ^ s/t^(1/alpha))^(-eta)."""
    t, x, y = _scaled(alpha, t, r, s)
    return np.minimum(1.0, x) ** (-eta) * np.minimum(1.0, y) ** (-eta)


def monotonicity_gap(params: CouplingParams, point: EvalPoint, control: SeriesControl | None = None) -> float:
    """sign(eta) (p_eta - p) at the point, computed without cancellation."""
    if params.eta == 0:
        raise DomainError("monotonicity_gap requires eta != 0")
    free = float(free_kernel(params.zeta, params.alpha, point.t, point.r, point.s))
    ratio = float(perturbed_ratio(params, point.t, point.r, point.s, control))
    return math.copysign(1.0, params.eta) * free * (ratio - 1.0)


# Identities and auxiliary integrals.


def compensation_residual(zeta: float, alpha: float, eta: float, t: float, r: float) -> float:
    """Residual of the compensation identity for eta < 0:

    int p(t,r,s) s^(2 zeta - eta) ds - r^(-eta)
        + kappa int_0^t dtau int p(tau,r,s) s^(2 zeta - eta - alpha) ds.
    """
    if not (-alpha < eta < 0):
        raise DomainError("compensation_residual requires eta in (-alpha, 0)")
    kappa = coupling_psi(zeta, alpha, eta)
    first = float(moment(zeta, alpha, eta, t, r))
    second = integrated_moment(zeta, alpha, eta + alpha, t, r)
    return first - r ** (-eta) + kappa * second


def _time_panels(t, n=8, depth=46.0):
    return log_panel_rule(t * math.exp(-depth), t, 1.0, n)


def g_integrals(zeta: float, alpha: float, eta: float, t: float, r: float, s: float):
    """The auxiliary integrals (G_eta(t, r, s), G_tilde(t, r, s))."""
    if not (-alpha < eta < 2 * zeta + 1 - alpha):
        raise DomainError("g_integrals requires eta in (-alpha, 2 zeta + 1 - alpha)")
    taus, wt = _time_panels(t)
    g_eta = 0.0
    g_tilde = 0.0
    e1 = 2 * zeta - alpha - eta
    for tau, w in zip(taus, wt):
        sc = tau ** (1 / alpha)

        def f1(z):
            return z ** e1 * ((r + s + z) / (s + z)) ** (2 * zeta) * free_kernel(zeta, alpha, tau, r, z)

        edges = graded_edges(1e-12 * min(r, s, sc), 1e10 * max(r, s, sc), [r], [sc])
        z, wz = panel_rule(edges, 8)
        fz = f1(z)
        body = fz @ wz
        head = power_end(edges[0], f1(edges[0]), edges[0] * 1.5, f1(edges[0] * 1.5), "head")
        tail = power_end(edges[-1] / 1.5, f1(edges[-1] / 1.5), edges[-1], f1(edges[-1]), "tail")
        g_eta += w * float(body + head + tail)

        num = (t ** (1 / alpha) + r + s)
        den_t = (t - tau) ** (1 / alpha)

        def f2(z):
            return (
                z ** (2 * zeta - alpha)
                * (num / (den_t + z + s)) ** (2 * zeta)
                * free_kernel(zeta, alpha, tau, r, z)
            )

        edges = graded_edges(1e-12 * min(s, sc), s, [r], [sc])
        z, wz = panel_rule(edges, 8)
        head = power_end(edges[0], f2(edges[0]), edges[0] * 1.5, f2(edges[0] * 1.5), "head")
        g_tilde += w * float(f2(z) @ wz + head)
    return g_eta, g_tilde


def _radial_nodes(centers, scales, lo, hi, n=8):
    edges = graded_edges(lo, hi, centers, scales)
    return edges, panel_rule(edges, n)


def radial_quad(fun, centers, scales, lo, hi, n=8):
    """Integral over (0, inf) of a vectorized fun on graded panels with power-law ends."""
    edges, (z, w) = _radial_nodes(centers, scales, lo, hi, n)
    ends = np.array([edges[0], 1.5 * edges[0], edges[-1] / 1.5, edges[-1]])
    f = fun(np.concatenate([z, ends]))
    fe = f[len(z):]
    return float(
        f[: len(z)] @ w
        + power_end(ends[0], fe[0], ends[1], fe[1], "head")
        + power_end(ends[2], fe[2], ends[3], fe[3], "tail")
    )


def invariance_residual(params: CouplingParams, t: float, r: float, control: SeriesControl | None = None) -> float:
    """Relative defect of int p_eta(t, r, s) s^(2 zeta - eta) ds = r^(-eta)."""
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    sc = t ** (1 / alpha)
    f = lambda s: perturbed(params, t, r, s, control) * s ** (2 * zeta - eta)
    v = radial_quad(f, [r], [sc], 1e-12 * min(r, sc), 1e12 * max(r, sc))
    return v * r ** eta - 1.0


def chapman_kolmogorov_residual(params: CouplingParams, t1, t2, r, s, control=None) -> float:
    """Relative defect of int p(t1, r, z) p(t2, z, s) z^(2 zeta) dz = p(t1 + t2, r, s)."""
    zeta, alpha = params.zeta, params.alpha
    f = lambda z: perturbed(params, t1, r, z, control) * perturbed(params, t2, z, s, control) * z ** (2 * zeta)
    sa, sb = t1 ** (1 / alpha), t2 ** (1 / alpha)
    lo = 1e-12 * min(r, s, sa, sb)
    hi = 1e12 * max(r, s, sa, sb)
    v = radial_quad(f, [r, s], [sa, sb], lo, hi)
    ref = float(perturbed(params, t1 + t2, r, s, control))
    return v / ref - 1.0


def duhamel_residuals(params: CouplingParams, point: EvalPoint, control: SeriesControl | None = None, n=8):
    """Relative defects of the two Duhamel formulae for the assembled kernel.

    forward:  p_eta = p + int int p(tau) q p_eta(t - tau)
    backward: p_eta = p + int int p_eta(tau) q p(t - tau)
    """
    control = control or SeriesControl()
    zeta, alpha, eta, kappa = params.zeta, params.alpha, params.eta, params.kappa
    t, r, s = point.t, point.r, point.s
    free = lambda tt, a, b: free_kernel(zeta, alpha, tt, a, b)
    pert = lambda tt, a, b: perturbed(params, tt, a, b, control)
    tail = lambda a: min(a, t) ** alpha * 1e-6 / t
    taus, wt = _tau_nodes(tail(min(r, s)), tail(s), n)
    taus, wt = taus * t, wt * t
    gam = 2 * zeta - alpha
    head = gam - max(eta, 0.0)
    Z, W, T = [], [], []
    for tau, w in zip(taus, wt):
        z, wz = _z_nodes(r, s, tau ** (1 / alpha), (t - tau) ** (1 / alpha), gam, head, n)
        Z.append(z)
        W.append(wz * w)
        T.append(np.full(len(z), tau))
    z, w, tau = np.concatenate(Z), np.concatenate(W), np.concatenate(T)
    th = t - tau
    target = float(pert(t, r, s))
    base = float(free(t, r, s))
    fwd = base + kappa * float(w @ (free(tau, r, z) * pert(th, z, s)))
    bwd = base + kappa * float(w @ (pert(tau, r, z) * free(th, z, s)))
    return fwd / target - 1.0, bwd / target - 1.0
