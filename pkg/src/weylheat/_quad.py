"""Shared quadrature and log-domain helpers.

All integrals in this package are of smooth positive integrands, evaluated in
the log domain: nodes carry log-weights and sums are taken with a max-shift
(logsumexp).  Gauss-Legendre rules are cached per order; composite panels
refine resolution without touching the node generator.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@lru_cache(maxsize=None)
def hermgauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(order)
    return x, w


def gl_nodes(a, b, order: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/log-weights on [a, b].

    a and b may be arrays (broadcast against each other); the returned arrays
    have one extra trailing axis of length order*panels.  Requires b > a
    pointwise (log-weights of zero-width intervals would be -inf).
    """
    xi, wi = leggauss(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    width = (b - a) / panels
    # panel p spans [a + p*width, a + (p+1)*width]
    offs = (np.arange(panels)[:, None] + (xi[None, :] + 1.0) / 2.0) * 1.0
    nodes = a[..., None, None] + width[..., None, None] * offs
    logw = np.log(wi / 2.0)[None, :] + np.log(width)[..., None, None]
    nodes = nodes.reshape(a.shape + (panels * order,))
    logw = np.broadcast_to(logw, a.shape + (panels, order)).reshape(a.shape + (panels * order,))
    return nodes, logw


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray | float:
    """Stable log(sum(exp(a))); tolerates -inf entries."""
    a = np.asarray(a, dtype=float)
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - amax), axis=axis)) + np.squeeze(amax, axis=axis)
    if np.ndim(out) == 0:
        return float(out)
    return out


def log1mexp(u) -> np.ndarray:
    """log(1 - exp(-u)) for u > 0, stable across scales."""
    u = np.asarray(u, dtype=float)
    small = u < math.log(2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, np.log(-np.expm1(-u)), np.log1p(-np.exp(-u)))
    return out


def log_ratio_1mexp(u) -> np.ndarray:
    """log((1 - exp(-u)) / u) for u >= 0, with the confluent value 0 at u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    tiny = np.abs(u) < 1e-5
    # series: log((1-e^{-u})/u) = -u/2 + u^2/24 - u^4/2880 + ...
    ut = np.where(tiny, u, 0.0)
    out_t = -ut / 2.0 + ut * ut / 24.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out_b = log1mexp(np.where(tiny, 1.0, u)) - np.log(np.where(tiny, 1.0, u))
    out = np.where(tiny, out_t, out_b)
    return out


def log_sinh(u) -> np.ndarray:
    """log(sinh(u)) for u > 0 without overflow."""
    u = np.asarray(u, dtype=float)
    big = u > 20.0
    mid = (~big) & (u > 1e-4)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(big, u - math.log(2.0) + np.log1p(-np.exp(-2.0 * np.where(big, u, 1.0))), 0.0)
        out = np.where(mid, np.log(np.sinh(np.where(mid, u, 1.0))), out)
        small = ~(big | mid)
        us = np.where(small, u, 1.0)
        out = np.where(small, np.log(us) + np.log1p(us * us / 6.0), out)
    return out
