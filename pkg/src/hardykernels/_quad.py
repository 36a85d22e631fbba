"""Composite Gauss rules on graded panels of the half line."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, beta: float):
    # Nodes and weights on [-1, 1] for the weight (1 + x)^beta.
    x, w = special.roots_jacobi(n, 0.0, beta)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_rule(edges, n: int = 8):
    """Nodes and weights of an n-point Gauss rule on each panel between edges."""
    edges = np.asarray(edges, float)
    a, b = edges[:-1], edges[1:]
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    nodes = (half[:, None] * x + (0.5 * (a + b))[:, None]).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def log_panel_rule(lo: float, hi: float, width: float = 1.0, n: int = 8):
    """Gauss rule in the variable log(z) on [lo, hi], returned in z."""
    k = max(1, int(np.ceil(np.log(hi / lo) / width)))
    u, w = panel_rule(np.linspace(np.log(lo), np.log(hi), k + 1), n)
    z = np.exp(u)
    return z, w * z


def graded_edges(lo, hi, centers=(), scales=(), ratio=2.0, min_rel=2.0 ** -4):
    """Panel edges on [lo, hi]: geometric overall, refined around each center.

    Around a center c with scale h the edges are c +- h * ratio**k, so the
    panels resolve features of width h near c and grow away from it.
    """
    pts = [np.exp(np.arange(np.log(lo), np.log(hi), np.log(ratio))), [lo, hi]]
    for c, h in zip(centers, scales):
        if not (lo < c < hi):
            continue
        h = max(h, 1e-300)
        k = h * ratio ** np.arange(np.floor(np.log(min_rel) / np.log(ratio)), 200)
        k = k[k < 4 * (c + h)]
        pts += [c - k[k < c - lo], c + k, [c]]
    pts = np.unique(np.concatenate(pts))
    return pts[(pts >= lo) & (pts <= hi)]


def power_end(z0, f0, z1, f1, side):
    """Integral beyond the last node assuming a power law through two samples.

    ``side`` is 'head' for (0, z0] and 'tail' for [z1, infinity).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.log(np.abs(f1) / np.abs(f0)) / np.log(z1 / z0)
    p = np.where(np.isfinite(p), p, 0.0)
    if side == "head":
        # f ~ z^p with p > -1 on (0, z0]
        return np.where(p > -1, f0 * z0 / (p + 1), 0.0)
    return np.where(p < -1, -f1 * z1 / (p + 1), 0.0)


def radial_integral(fun, centers, scales, lo, hi, n=8, ratio=2.0):
    """Integral of fun over (0, infinity) on graded panels with power-law ends.

    ``fun`` maps an array of nodes z to an array (..., len(z)); the integral is
    taken over the last axis.
    """
    edges = graded_edges(lo, hi, centers, scales, ratio)
    z, w = panel_rule(edges, n)
    ends = np.array([edges[0], edges[0] * 1.5, edges[-1] / 1.5, edges[-1]])
    f = fun(np.concatenate([z, ends]))
    body = f[..., : len(z)] @ w
    fe = f[..., len(z):]
    head = power_end(ends[0], fe[..., 0], ends[1], fe[..., 1], "head")
    tail = power_end(ends[2], fe[..., 2], ends[3], fe[..., 3], "tail")
    return body + head + tail
