"""Check suites: grid sweeps, fitted comparability constants and identity residuals.

Every check is a deterministic function of its GridSpec and budget.  Random
tuples come from a counter-based generator (Philox) keyed by the seed, and
results are reduced with order-independent operations (min, max, sorting).
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ._version import __version__
from .forms import (
    TestFunction,
    dirichlet_form,
    gsr_residual,
    hardy_form,
    hardy_functional,
    integral_regimes,
    regime_prediction,
    semigroup_form,
    sharpness_witness,
    standard_suite,
)
from .kernels import (
    EvalPoint,
    EvalResult,
    bessel_heat_2,
    cauchy_heat_closed,
    free_comparison,
    free_kernel,
    levy,
    log_free_comparison2,
    log_heat2,
    spectral_heat,
    subordinated_heat,
)
from .perturbation import (
    SeriesControl,
    chapman_kolmogorov_residual,
    compensation_residual,
    duhamel_residuals,
    invariance_residual,
    perturbed,
    perturbed_heat,
    perturbed_weight,
)
from .specfun import AccuracyBudget, CouplingParams, DomainError, eta_critical, kappa_crit

STATUSES = ("pass", "fail", "warn")


def geometric(lo_exp: float, hi_exp: float, step: float):
    """2^k for k = lo_exp, lo_exp + step, ..., hi_exp."""
    n = int(round((hi_exp - lo_exp) / step))
    return tuple(float(2.0 ** (lo_exp + i * step)) for i in range(n + 1))


@dataclass(frozen=True)
class GridSpec:
    """Parameter grid of a check.

    ``eta_fracs`` encode eta relative to its range: f > 0 means
    eta = f (2 zeta + 1 - alpha) / 2, f < 0 means eta = f alpha, 0 is the free
    kernel.  ``rs_values`` is the geometric grid used for both r and s.
    """

    zeta_values: tuple = (1.0,)
    alpha_values: tuple = (1.0,)
    eta_fracs: tuple = (0.0,)
    t_values: tuple = (1.0,)
    rs_values: tuple = field(default_factory=lambda: geometric(-6, 6, 0.25))
    seed: int = 0
    n_samples: int = 200

    def __post_init__(self):
        for name in ("zeta_values", "alpha_values", "eta_fracs", "t_values", "rs_values"):
            v = tuple(float(x) for x in getattr(self, name))
            if not v:
                raise DomainError(f"{name} must be nonempty")
            object.__setattr__(self, name, v)
        for name in ("t_values", "rs_values"):
            v = np.array(getattr(self, name))
            if np.any(v <= 0) or np.any(np.diff(v) <= 0):
                raise DomainError(f"{name} must be positive and strictly increasing")
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        for zeta, alpha, eta in self.combos():
            CouplingParams(zeta, alpha, eta)

    @staticmethod
    def eta_of(frac: float, zeta: float, alpha: float) -> float:
        if frac > 0:
            return frac * eta_critical(zeta, alpha)
        return frac * alpha

    def combos(self):
        """All (zeta, alpha, eta) of the grid in lexicographic order."""
        for zeta, alpha, f in itertools.product(self.zeta_values, self.alpha_values, self.eta_fracs):
            yield zeta, alpha, self.eta_of(f, zeta, alpha)

    def refined(self) -> "GridSpec":
        """The rs grid with geometric midpoints inserted and twice the samples."""
        v = np.array(self.rs_values)
        mid = np.sqrt(v[:-1] * v[1:])
        rs = tuple(float(x) for x in np.sort(np.concatenate([v, mid])))
        d = self.to_dict()
        d.update(rs_values=rs, n_samples=2 * self.n_samples)
        return GridSpec.from_dict(d)

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise DomainError(f"unknown grid fields {sorted(unknown)}")
        return cls(**known)


@dataclass(frozen=True)
class ConstantEstimate:
    c_lower: float
    c_upper: float
    n_points: int
    refinement_drift: float | None = None

    def stable(self, tol: float = 0.05) -> bool:
        return (
            0 < self.c_lower <= self.c_upper < math.inf
            and self.refinement_drift is not None
            and self.refinement_drift <= tol
        )


def fit_constants(values, refined=None) -> ConstantEstimate:
    """Inf and sup of a ratio table and their drift under refinement.

    Without a refined table the drift is 0 for a constant table and None
    otherwise.
    """
    v = np.asarray(values, float).ravel()
    if v.size == 0:
        raise DomainError("empty ratio table")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise DomainError("ratios must be finite and positive")
    lo, hi = float(v.min()), float(v.max())
    if refined is None:
        drift = 0.0 if lo == hi else None
    else:
        f = fit_constants(refined)
        drift = max(abs(f.c_lower - lo) / lo, abs(f.c_upper - hi) / hi)
    return ConstantEstimate(lo, hi, int(v.size), drift)


def _merge(estimates):
    """Envelope of several estimates: smallest lower, largest upper, worst drift."""
    drifts = [e.refinement_drift for e in estimates]
    return ConstantEstimate(
        min(e.c_lower for e in estimates),
        max(e.c_upper for e in estimates),
        sum(e.n_points for e in estimates),
        None if any(d is None for d in drifts) else max(drifts),
    )


@dataclass
class CheckReport:
    check_name: str
    params: dict
    grid: dict
    status: str
    constants: ConstantEstimate | None = None
    residual_stats: tuple | None = None
    runtime_seconds: float | None = None
    details: list = field(default_factory=list)

    def to_dict(self, timings: bool = False):
        c = self.constants
        return {
            "check_name": self.check_name,
            "params": self.params,
            "grid": self.grid,
            "status": self.status,
            "constants": None
            if c is None
            else {"c_lower": c.c_lower, "c_upper": c.c_upper, "drift": c.refinement_drift, "n_points": c.n_points},
            "residuals": None
            if self.residual_stats is None
            else {"max": self.residual_stats[0], "median": self.residual_stats[1]},
            "runtime_seconds": self.runtime_seconds if timings else None,
            "details": self.details,
            "version": __version__,
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(_clean(self.to_dict(timings)), sort_keys=True, indent=2)


def _clean(x):
    # Plain Python scalars so that JSON output is canonical.
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


class _Collector:
    """Accumulates sub-check records of one report."""

    def __init__(self):
        self.items = []
        self.errors = []

    def add(self, name, value, threshold, ok, **params):
        self.items.append(
            {"name": name, "params": params, "value": value, "threshold": threshold, "pass": bool(ok)}
        )

    def error(self, name, exc, **params):
        self.errors.append({"name": name, "params": params, "error": f"{type(exc).__name__}: {exc}"})

    def status(self, extra_ok=True):
        if not extra_ok or any(not i["pass"] for i in self.items):
            return "fail"
        if self.errors:
            return "warn"
        return "pass"

    def residuals(self):
        vals = [abs(i["value"]) for i in self.items if isinstance(i["value"], (int, float))]
        if not vals:
            return None
        return (float(max(vals)), float(np.median(vals)))

    def details(self):
        return _clean(self.items + self.errors)


def _report(name, params, grid, col, t0, constants=None, extra_ok=True):
    return CheckReport(
        name,
        _clean(params),
        grid.to_dict(),
        col.status(extra_ok),
        constants,
        col.residuals(),
        time.perf_counter() - t0,
        col.details(),
    )


def _rs_mesh(values):
    v = np.array(values)
    R, S = np.meshgrid(v, v, indexing="ij")
    return R.ravel(), S.ravel()


# Point evaluation shared by the CLI.


def evaluate(params: CouplingParams, point: EvalPoint, method: str = "auto", budget=None, control=None) -> EvalResult:
    """Kernel value at a point by the requested route.

    ``auto`` prefers closed forms (alpha = 2, and alpha = 1 for the free
    kernel), then subordination or the Duhamel solver.
    """
    budget = budget or AccuracyBudget()
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    if method not in ("auto", "closed", "subordination", "spectral", "series"):
        raise DomainError(f"unknown method {method}")
    if eta != 0:
        if method in ("subordination", "spectral"):
            raise DomainError(f"method {method} only applies to the free kernel (eta = 0)")
        if method == "closed" and alpha != 2:
            raise DomainError("closed form of the perturbed kernel requires alpha = 2")
        return perturbed_heat(params, point, control, "series" if method == "series" else "auto")
    if method == "series":
        raise DomainError("method series requires eta != 0")
    if method == "spectral":
        return spectral_heat(zeta, alpha, point, budget)
    if method == "subordination":
        if alpha == 2:
            raise DomainError("subordination requires alpha < 2")
        return subordinated_heat(params, point, budget)
    if alpha == 2:
        return bessel_heat_2(zeta, point)
    if alpha == 1:
        return cauchy_heat_closed(zeta, point)
    if method == "closed":
        raise DomainError("closed forms exist only for alpha in {1, 2}")
    return subordinated_heat(params, point, budget)


def envelope_values(params: CouplingParams, t, r, s):
    """Comparison function used by the sandwich checks (vectorized)."""
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    if eta == 0:
        return free_comparison(zeta, alpha, t, r, s)
    w = perturbed_weight(alpha, eta, t, r, s)
    if alpha == 2:
        return w * free_comparison(zeta, 2, t, r, s, 4.0)
    return w * free_comparison(zeta, alpha, t, r, s)


# Checks.


def check_normalization(grid: GridSpec, control: SeriesControl | None = None) -> CheckReport:
    """Mass int p(t, r, s) s^(2 zeta) ds: 1 for the free kernel, >= 1 for
    eta > 0 and <= 1 for eta < 0."""
    from .perturbation import radial_quad

    t0 = time.perf_counter()
    col = _Collector()
    for zeta, alpha, eta in grid.combos():
        params = CouplingParams(zeta, alpha, eta)
        for t in grid.t_values:
            sc = t ** (1 / alpha)
            for r in grid.rs_values:
                try:
                    f = lambda s: perturbed(params, t, r, s, control) * s ** (2 * zeta)
                    m = radial_quad(f, [r], [sc], 1e-12 * min(r, sc), 1e12 * max(r, sc))
                except (DomainError, ArithmeticError, RuntimeError) as exc:
                    col.error("mass", exc, zeta=zeta, alpha=alpha, eta=eta, t=t, r=r)
                    continue
                p = dict(zeta=zeta, alpha=alpha, eta=eta, t=t, r=r)
                if eta == 0:
                    col.add("mass", m - 1, 1e-6, abs(m - 1) <= 1e-6, **p)
                elif eta > 0:
                    col.add("mass_excess", m - 1, 0.0, m >= 1 - 1e-6, **p)
                else:
                    col.add("mass_deficit", 1 - m, 0.0, m <= 1 + 1e-6, **p)
    return _report("normalization", {}, grid, col, t0)


def _sandwich_ratios(params, grid):
    zeta, alpha, eta = params.zeta, params.alpha, params.eta
    R, S = _rs_mesh(grid.rs_values)
    t = np.ones_like(R)
    if alpha == 2 and eta != 0:
        # Two Gaussian constants: p >= c w G_3 and p <= C w G_6, in log space.
        lp = -eta * np.log(R * S) + log_heat2(zeta - eta, t, R, S)
        lw = np.log(perturbed_weight(alpha, eta, t, R, S))
        lower = np.exp(lp - lw - log_free_comparison2(zeta, t, R, S, 3.0))
        upper = np.exp(lp - lw - log_free_comparison2(zeta, t, R, S, 6.0))
        return lower, upper
    if alpha == 2:
        q = np.exp(log_heat2(zeta, t, R, S) - log_free_comparison2(zeta, t, R, S, 4.0))
        return q, q
    p = free_kernel(zeta, alpha, t, R, S) if eta == 0 else perturbed(params, t, R, S)
    q = p / envelope_values(params, t, R, S)
    return q, q


def check_sandwich(kind: str, grid: GridSpec, control: SeriesControl | None = None) -> CheckReport:
    """Ratio of the kernel to its comparison function over the (r, s) grid at t = 1.

    Passes when the fitted constants are positive and finite and move by at
    most 5% under one refinement of the grid.  A scaling sub-check confirms
    that fixing t = 1 loses nothing.
    """
    if kind not in ("free", "perturbed"):
        raise DomainError("kind must be 'free' or 'perturbed'")
    t0 = time.perf_counter()
    col = _Collector()
    fine = grid.refined()
    per = []
    for zeta, alpha, eta in grid.combos():
        if (kind == "free") != (eta == 0):
            continue
        params = CouplingParams(zeta, alpha, eta)
        try:
            lo_c, hi_c = _sandwich_ratios(params, grid)
            lo_f, hi_f = _sandwich_ratios(params, fine)
            est_lo = fit_constants(lo_c, lo_f)
            est_hi = fit_constants(hi_c, hi_f)
        except (DomainError, ArithmeticError, RuntimeError) as exc:
            col.error("constants", exc, zeta=zeta, alpha=alpha, eta=eta)
            continue
        drift = max(
            abs(est_lo.c_lower - fit_constants(lo_f).c_lower) / est_lo.c_lower,
            abs(est_hi.c_upper - fit_constants(hi_f).c_upper) / est_hi.c_upper,
        )
        est = ConstantEstimate(est_lo.c_lower, est_hi.c_upper, est_lo.n_points, drift)
        per.append(est)
        col.add(
            "constants",
            drift,
            0.05,
            est.stable(),
            zeta=zeta,
            alpha=alpha,
            eta=eta,
            c_lower=est.c_lower,
            c_upper=est.c_upper,
        )
        # scaling: the ratio at (t, r, s) equals the ratio at (1, r/t^(1/alpha), s/t^(1/alpha))
        if alpha < 2:
            for t, r, s in ((0.01, 0.3, 0.7), (7.0, 2.0, 5.0)):
                c = t ** (-1 / alpha)
                p = lambda tt, a, b: free_kernel(zeta, alpha, tt, a, b) if eta == 0 else perturbed(params, tt, a, b, control)
                q1 = float(p(t, r, s) / envelope_values(params, t, r, s))
                q2 = float(p(1.0, r * c, s * c) / envelope_values(params, 1.0, r * c, s * c))
                col.add("scaling", q1 / q2 - 1, 1e-8, abs(q1 / q2 - 1) <= 1e-8, zeta=zeta, alpha=alpha, eta=eta, t=t, r=r, s=s)
    est = _merge(per) if per else None
    return _report(f"sandwich_{kind}", {"kind": kind}, grid, col, t0, est, extra_ok=bool(per))


def threeg_samples(grid: GridSpec, n: int):
    """Tuples (t, tau, r, s, z): n Philox samples with log2 coordinates uniform
    over the rs range, followed by the 32 corners of the box."""
    lo, hi = math.log2(grid.rs_values[0]), math.log2(grid.rs_values[-1])
    gen = np.random.Generator(np.random.Philox(grid.seed))
    u = gen.uniform(lo, hi, (n, 5))
    corners = np.array(list(itertools.product([lo, hi], repeat=5)))
    return 2.0 ** np.vstack([u, corners])


def threeg_ratios(zeta, alpha, T, form):
    """LHS / RHS of the 3G inequality of the given form (1 or 2) at the tuples T."""
    t, tau, r, s, z = T.T
    p = lambda tt, a, b: free_kernel(zeta, alpha, tt, a, b)
    lhs = p(t, r, z) * p(tau, z, s)
    P = p(t + tau, r, s)
    if form == 1:
        if zeta < 0:
            raise DomainError("the first 3G form requires zeta >= 0")
        rhs = P * (((r + s + z) / (s + z)) ** (2 * zeta) * p(t, r, z) + ((r + s + z) / (r + z)) ** (2 * zeta) * p(tau, z, s))
    else:
        a = 1 / alpha
        rhs = P * ((t + tau) ** a + r + s) ** (2 * zeta) * (
            p(t, r, z) / (tau ** a + z + s) ** (2 * zeta) + p(tau, z, s) / (t ** a + r + z) ** (2 * zeta)
        )
    return lhs / rhs


def check_threeg(grid: GridSpec) -> CheckReport:
    """Fitted constants of the 3G inequalities (first form for zeta >= 0, second for all zeta)."""
    t0 = time.perf_counter()
    col = _Collector()
    per = []
    n = grid.n_samples
    T_all = threeg_samples(grid, 2 * n)
    nc = 32
    T_coarse = np.vstack([T_all[:n], T_all[-nc:]])
    for zeta, alpha in itertools.product(grid.zeta_values, grid.alpha_values):
        if alpha == 2:
            continue
        for form in (1, 2) if zeta >= 0 else (2,):
            q_all = threeg_ratios(zeta, alpha, T_all, form)
            q_c = np.concatenate([q_all[:n], q_all[-nc:]])
            c_c, c_a = fit_constants(q_c), fit_constants(q_all)
            # only the upper constant C is meaningful here
            est = ConstantEstimate(c_c.c_lower, c_c.c_upper, c_c.n_points, abs(c_a.c_upper / c_c.c_upper - 1))
            per.append(est)
            col.add("threeg", est.refinement_drift, 0.05, est.stable(), zeta=zeta, alpha=alpha, form=form, C=est.c_upper)
            # degenerate z = r stays below the fitted constant
            Tz = T_coarse.copy()
            Tz[:, 4] = Tz[:, 2]
            qz = float(threeg_ratios(zeta, alpha, Tz, form).max())
            col.add("threeg_z_eq_r", qz, est.c_upper, qz <= est.c_upper * (1 + 1e-12), zeta=zeta, alpha=alpha, form=form)
    est = _merge(per) if per else None
    return _report("threeg", {}, grid, col, t0, est, extra_ok=bool(per))


def levy_limit_errors(params: CouplingParams, r: float, s: float, ts=(1e-1, 1e-2, 1e-3), control=None):
    """|p(t, r, s)/t - nu(r, s)| / nu(r, s) at the given times and the log-log slope."""
    ts = np.asarray(ts, float)
    nu = levy(params.zeta, params.alpha, r, s)
    p = perturbed(params, ts, np.full_like(ts, r), np.full_like(ts, s), control)
    e = np.abs(p / ts - nu) / nu
    slope = float(np.polyfit(np.log(ts), np.log(e), 1)[0])
    return e, slope


def check_identities(grid: GridSpec, control: SeriesControl | None = None, compensation_etas=None) -> CheckReport:
    """Chapman-Kolmogorov, scaling, invariance, Duhamel, compensation,
    monotonicity and small-time Levy limit."""
    control = control or SeriesControl()
    t0 = time.perf_counter()
    col = _Collector()
    tol_series = control.tail_tol
    gen = np.random.Generator(np.random.Philox(grid.seed))
    for zeta, alpha, eta in grid.combos():
        params = CouplingParams(zeta, alpha, eta)
        p = dict(zeta=zeta, alpha=alpha, eta=eta)
        try:
            if eta == 0:
                for t1, t2, r, s in ((0.5, 0.5, 1.0, 2.0), (0.25, 1.0, 0.5, 0.5)):
                    res = chapman_kolmogorov_residual(params, t1, t2, r, s, control)
                    col.add("chapman_kolmogorov", res, 1e-4, abs(res) <= 1e-4, t1=t1, t2=t2, r=r, s=s, **p)
            else:
                for t1, t2, r, s in ((0.5, 0.5, 1.0, 2.0), (0.25, 1.0, 0.5, 0.5)):
                    res = chapman_kolmogorov_residual(params, t1, t2, r, s, control)
                    thr = 3 * tol_series
                    col.add("chapman_kolmogorov", res, thr, abs(res) <= thr, t1=t1, t2=t2, r=r, s=s, **p)
                for r in (0.5, 1.0, 2.0):
                    res = invariance_residual(params, 1.0, r, control)
                    col.add("invariance", res, 1e-3, abs(res) <= 1e-3, t=1.0, r=r, **p)
                if alpha < 2:
                    fwd, bwd = duhamel_residuals(params, EvalPoint(1.0, 1.0, 2.0), control)
                    thr = 2 * tol_series
                    col.add("duhamel_forward", fwd, 1e-3, abs(fwd) <= 1e-3, **p)
                    col.add("duhamel_backward", bwd, 1e-3, abs(bwd) <= 1e-3, **p)
                    col.add("duhamel_agreement", fwd - bwd, thr, abs(fwd - bwd) <= thr, **p)
                # monotonicity: sign(eta) (p_eta - p) >= -1e-8
                u = 2.0 ** gen.uniform(-6, 6, (100, 3))
                free = free_kernel(zeta, alpha, u[:, 0], u[:, 1], u[:, 2])
                gap = np.sign(eta) * (perturbed(params, u[:, 0], u[:, 1], u[:, 2], control) - free)
                gmin = float(gap.min())
                col.add("monotonicity", gmin, -1e-8, gmin >= -1e-8, **p)
                # alpha = 2 closed-form path of the invariance identity
                ec2 = eta_critical(zeta, 2.0)
                if 0 < eta <= ec2 or (eta < 0 and 2 < 2 * zeta + 1):
                    p2 = CouplingParams(zeta, 2.0, min(eta, ec2))
                    for r in (0.5, 1.0, 2.0):
                        res = invariance_residual(p2, 1.0, r, control)
                        col.add("invariance_alpha2", res, 1e-8, abs(res) <= 1e-8, r=r, zeta=zeta, alpha=2.0, eta=p2.eta)
            # scaling identity
            if alpha < 2:
                c = 3.0
                v1 = float(perturbed(params, c ** alpha, c * 0.7, c * 1.3, control))
                v2 = float(perturbed(params, 1.0, 0.7, 1.3, control)) * c ** -(2 * zeta + 1)
                col.add("scaling", v1 / v2 - 1, 1e-10, abs(v1 / v2 - 1) <= 1e-10, **p)
                if eta <= 0:
                    errs, slope = levy_limit_errors(params, 1.0, 2.0, control=control)
                    ok = slope >= 0.8 and bool(np.all(np.diff(errs) < 0))
                    col.add("levy_limit_slope", slope, 0.8, ok, r=1.0, s=2.0, errors=list(errs), **p)
        except (DomainError, ArithmeticError, RuntimeError) as exc:
            col.error("identities", exc, **p)
    # compensation identity for eta < 0
    for zeta, alpha in itertools.product(grid.zeta_values, grid.alpha_values):
        if alpha == 2:
            continue
        etas = compensation_etas
        if etas is None:
            etas = sorted({e for _, a, e in grid.combos() if a == alpha and e < 0} | {-alpha / 2})
        for eta in etas:
            for r in (0.5, 1.0, 2.0):
                res = compensation_residual(zeta, alpha, eta, 1.0, r)
                col.add("compensation", res, 1e-4, abs(res) <= 1e-4, zeta=zeta, alpha=alpha, eta=eta, t=1.0, r=r)
    return _report("identities", {"tail_tol": tol_series}, grid, col, t0)


def check_forms(grid: GridSpec, suite=None, control: SeriesControl | None = None) -> CheckReport:
    """Ground-state representation, semigroup-form limit and monotonicity,
    Hardy nonnegativity at kappa_c and a negativity witness at 1.05 kappa_c."""
    suite = list(suite) if suite is not None else standard_suite()
    t0 = time.perf_counter()
    col = _Collector()
    for zeta, alpha in itertools.product(grid.zeta_values, grid.alpha_values):
        etas = [e for z, a, e in grid.combos() if z == zeta and a == alpha]
        for i, u in enumerate(suite):
            e_free = dirichlet_form(zeta, alpha, u).value
            for eta in etas:
                if eta == 0:
                    continue
                res = gsr_residual(CouplingParams(zeta, alpha, eta), u)
                col.add("gsr", res / e_free, 1e-4, abs(res) <= 1e-4 * e_free, zeta=zeta, alpha=alpha, eta=eta, u=i)
            kc = kappa_crit(2 * zeta + 1, alpha)
            v = hardy_functional(zeta, alpha, kc, u)
            col.add("hardy_nonnegative", v / e_free, -1e-6, v >= -1e-6 * e_free, zeta=zeta, alpha=alpha, u=i)
        w = sharpness_witness(zeta, alpha, 1.05)
        col.add(
            "hardy_sharpness_witness",
            None if w is None else w[1],
            0.0,
            w is not None,
            zeta=zeta,
            alpha=alpha,
            u=None if w is None else w[0].to_dict(),
        )
        # semigroup form: monotone in t and convergent to the Hardy form
        u = TestFunction.smooth_bump(1.0, 1.0)
        for eta in [e for e in etas if e >= 0][:2]:
            params = CouplingParams(zeta, alpha, eta)
            target = hardy_form(params, u).value
            big = [semigroup_form(params, t, u, control).value for t in (0.125, 0.25, 0.5)]
            mono = big[0] >= big[1] * (1 - 1e-6) and big[1] >= big[2] * (1 - 1e-6)
            col.add("semigroup_monotone", big[0] - big[2], 0.0, mono, zeta=zeta, alpha=alpha, eta=eta, values=big)
            small = [semigroup_form(params, t, u, control).value for t in (0.004, 0.002, 0.001)]
            extrap = 2 * small[2] - small[1]
            rel = extrap / target - 1
            col.add(
                "semigroup_limit", rel, 1e-3, abs(rel) <= 1e-3, zeta=zeta, alpha=alpha, eta=eta, values=small, target=target
            )
    return _report("forms", {"suite": [u.to_dict() for u in suite]}, grid, col, t0)


def check_regimes(grid: GridSpec) -> CheckReport:
    """Comparability of the time-integrated moment with its three-regime prediction."""
    t0 = time.perf_counter()
    col = _Collector()
    per = []
    fine = grid.refined()
    for zeta, alpha in itertools.product(grid.zeta_values, grid.alpha_values):
        if alpha == 2 or not alpha < 2 * zeta + 1:
            continue
        deltas = (alpha / 2, alpha, (alpha + 2 * zeta + 1) / 2)
        for name, delta in zip(("delta<alpha", "delta=alpha", "delta>alpha"), deltas):
            for t in grid.t_values:

                def ratios(rs):
                    return [integral_regimes(zeta, alpha, delta, t, r) / regime_prediction(alpha, delta, t, r) for r in rs]

                est = fit_constants(ratios(grid.rs_values), ratios(fine.rs_values))
                per.append(est)
                col.add(
                    "regime_" + name, est.refinement_drift, 0.05, est.stable(), zeta=zeta, alpha=alpha, delta=delta, t=t,
                    c_lower=est.c_lower, c_upper=est.c_upper,
                )
    est = _merge(per) if per else None
    return _report("regimes", {}, grid, col, t0, est, extra_ok=bool(per))


# Suites.

SUITES = ("normalization", "sandwich-free", "sandwich-perturbed", "threeg", "identities", "forms", "regimes")


def default_grids():
    """Default grids of the named suites."""
    coarse = geometric(-6, 6, 1.0)
    return {
        "normalization": [
            GridSpec((0.0, 1.0, 2.5), (0.5, 1.0, 1.5, 2.0), (0.0,), rs_values=coarse),
            GridSpec((1.0,), (1.0,), (0.5, -0.4), rs_values=coarse),
        ],
        "sandwich-free": [GridSpec((0.0, 1.0, 2.5), (0.5, 1.0, 1.5, 2.0), (0.0,))],
        "sandwich-perturbed": [GridSpec((1.0,), (1.0,), (-0.4, 0.5)), GridSpec((1.0,), (2.0,), (1.0,))],
        "threeg": [GridSpec((1.0, -0.25), (1.0,), (0.0,))],
        "identities": [GridSpec((1.0,), (1.0,), (0.0, -0.4, 0.25, 0.5))],
        "forms": [GridSpec((1.0,), (1.0,), (0.0, 0.5, -0.5))],
        "regimes": [GridSpec((1.0,), (1.0,), (0.0,), rs_values=geometric(-5, 5, 1.0))],
    }


def run_check(suite: str, grid: GridSpec, control: SeriesControl | None = None) -> CheckReport:
    if suite == "normalization":
        return check_normalization(grid, control)
    if suite == "sandwich-free":
        return check_sandwich("free", grid, control)
    if suite == "sandwich-perturbed":
        return check_sandwich("perturbed", grid, control)
    if suite == "threeg":
        return check_threeg(grid)
    if suite == "identities":
        return check_identities(grid, control)
    if suite == "forms":
        return check_forms(grid, control=control)
    if suite == "regimes":
        return check_regimes(grid)
    raise DomainError(f"unknown suite {suite}")


def run_suite(name: str, grids=None, control: SeriesControl | None = None):
    """Reports of a named suite (or 'all') on its default or the given grids."""
    names = SUITES if name == "all" else (name,)
    if any(n not in SUITES for n in names):
        raise DomainError(f"unknown suite {name}")
    reports = []
    for n in names:
        for g in grids if grids is not None else default_grids()[n]:
            reports.append(run_check(n, g, control))
    return reports


# Ratio tables.

CSV_COLUMNS = ("check", "zeta", "alpha", "eta", "t", "r", "s", "value", "envelope", "ratio", "method", "err_est")


def sweep_rows(params: CouplingParams, t_values, r_values, s_values, method="auto", envelope=False, budget=None, control=None):
    """Rows of the ratio table in lexicographic (t, r, s) order.

    Each row is a dict over CSV_COLUMNS plus 'error' (None unless the point failed).
    """
    rows = []
    for t, r, s in itertools.product(t_values, r_values, s_values):
        row = dict(check="sweep", zeta=params.zeta, alpha=params.alpha, eta=params.eta, t=t, r=r, s=s)
        try:
            res = evaluate(params, EvalPoint(t, r, s), method, budget, control)
            row.update(value=res.value, method=res.method, err_est=res.err_est, error=None)
            if envelope:
                env = float(envelope_values(params, t, r, s))
                row.update(envelope=env, ratio=res.value / env)
            else:
                row.update(envelope=None, ratio=None)
        except (DomainError, ArithmeticError, RuntimeError) as exc:
            row.update(value=None, method=None, err_est=None, envelope=None, ratio=None, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows
