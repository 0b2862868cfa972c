"""Chamber heat kernels of A_n type, their envelopes, and verification oracles.

The reference measure on the closed chamber is pi(Y)^2 dY.  The flat kernel is

    p_t(X, Y) = t^{-d/2-gamma} exp(-(|X|^2+|Y|^2)/4t) psi_X(Y/2t) / (2^{gamma+d/2} c)

with d = n+1 ambient dimensions, gamma positive roots, and c the Gaussian
normalization constant, fixed so that the kernel has unit mass on the chamber.
Two independent routes to c are provided (direct Gaussian moment quadrature
and kernel-mass calibration) plus four independent checks of the kernel
itself: a signed-image expansion, an oscillatory-spectrum inversion integral,
a finite-difference heat-equation residual, and the semigroup property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import rootsystem as rs
from . import spherical as sp
from ._quad import gl_nodes, hermgauss, log_sinh, logsumexp
from .errors import (
    CalibrationError,
    DegenerateInput,
    PreconditionViolated,
    QuadratureNonconvergence,
    RankTooLarge,
)

PROV_CALIBRATED = "calibrated"
PROV_MMS = "mms_quadrature"


@dataclass(frozen=True)
class HeatContext:
    """Rank-level constants for the heat kernel; immutable after construction."""

    n: int
    d: int
    gamma: int
    c_k: float
    c_k_provenance: str
    c_k_cross: Optional[float] = None  # the other provenance, when computed


# ---------------------------------------------------------------------------
# normalization constant
# ---------------------------------------------------------------------------

def mms_constant(n: int, *, chamber: bool = True, order: int = 32) -> float:
    """Gaussian moment int e^{-|y|^2/2} pi(y)^2 dy by Gauss-Hermite quadrature.

    chamber=True restricts to the closed chamber (divide the full-space value
    by |W|, the integrand being W-invariant); this is the normalization the
    kernel formulas use.  The integrand is a polynomial times the Gaussian
    weight, so the tensor rule is exact once the order passes the degree.
    """
    m = n + 1
    u, w = hermgauss(order)
    grids = np.meshgrid(*([u] * m), indexing="ij")
    pts = np.stack(grids, axis=-1)
    poly = np.ones(pts.shape[:-1])
    for i in range(m):
        for j in range(i + 1, m):
            poly = poly * (pts[..., i] - pts[..., j]) ** 2
    wgrid = np.ones(pts.shape[:-1])
    for i, g in enumerate(np.ix_(*([w] * m))):
        wgrid = wgrid * g
    # y = sqrt(2) u maps e^{-|y|^2/2} dy to the e^{-|u|^2} weight
    val = float((poly * wgrid).sum()) * 2.0 ** (m / 2.0 + rs.gamma(n))
    if chamber:
        val /= rs.weyl_order(n)
    return val


def _log_images_T(xv: np.ndarray, Y: np.ndarray, inv2t: float) -> np.ndarray:
    """log of sum_w eps(w) exp(-(|X - wY|^2 - |X - Y|^2) / 4t) on a Y batch.

    Nonpositive roundoff results (possible when Y sits almost on a wall) are
    returned as -inf; their true contribution is below roundoff anyway.
    """
    T = np.zeros(Y.shape[:-1])
    base = Y @ xv
    for rows, signs in rs.perm_sign_chunks(xv.size):
        dots = np.einsum("...pj,j->...p", Y[..., rows], xv)
        T += (signs * np.exp((dots - base[..., None]) * inv2t)).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(T > 0.0, np.log(np.where(T > 0.0, T, 1.0)), -np.inf)


def _log_c_prime(n: int, c_k: float) -> float:
    """log of pi(rho) / (2^{gamma + d/2} c_k), the image-sum front constant."""
    d = n + 1
    g = rs.gamma(n)
    return rs.log_pi(rs.rho(n).array()) - (g + d / 2.0) * math.log(2.0) - math.log(c_k)


def _chamber_log_integral(log_f, m: int, lo: float, hi: float, order: int, panels: int) -> float:
    """log of int over {lo <= y_m <= ... <= y_1 <= hi} exp(log_f(Y)) dY.

    log_f takes a stacked array (..., m).  The outermost (smallest) coordinate
    is looped in blocks to bound memory; inner levels are tensorized with
    per-node lower limits.
    """
    ym, lwm = gl_nodes(np.array(lo), np.array(hi), order, panels)
    pieces = []
    inner = (order * panels) ** (m - 1)
    step = max(1, 400_000 // max(inner, 1))
    for s in range(0, ym.size, step):
        yb = ym[s : s + step]
        lwb = lwm[s : s + step]
        coords = [None] * m
        logw = lwb
        coords[m - 1] = yb
        for lvl in range(m - 2, -1, -1):
            lower = coords[lvl + 1]
            nk, lwk = gl_nodes(lower, np.full_like(lower, hi), order, panels)
            for i in range(m - 1, lvl, -1):
                coords[i] = coords[i][..., None]
            logw = logw[..., None] + lwk
            coords[lvl] = nk
        shape = logw.shape
        Y = np.empty(shape + (m,))
        for i in range(m):
            c = coords[i]
            while c.ndim < len(shape):
                c = c[..., None]
            Y[..., i] = np.broadcast_to(c, shape)
        pieces.append(logsumexp(log_f(Y) + logw))
    return logsumexp(np.array(pieces))


def _mass_with_unit_constant(n: int, t: float, xv: np.ndarray, order: int, panels: int) -> float:
    """log of int_chamber p_t(X, Y) pi(Y)^2 dY computed with c = 1.

    Uses the image expansion, where pi(Y)^2 / pi(Y) leaves a single pi(Y)
    factor and the integrand is smooth up to the walls.
    """
    d = n + 1
    inv2t = 1.0 / (2.0 * t)

    def log_f(Y):
        quad = ((Y - xv) ** 2).sum(axis=-1)
        logpi = np.zeros(Y.shape[:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(d):
                for j in range(i + 1, d):
                    diff = Y[..., i] - Y[..., j]
                    logpi += np.where(diff > 0.0, np.log(np.where(diff > 0.0, diff, 1.0)), -np.inf)
        return -quad / (4.0 * t) + logpi + _log_images_T(xv, Y, inv2t)

    radius = math.sqrt(4.0 * t * (math.log(1e14) + 8.0)) + 2.0
    lo = float(xv.min()) - radius
    hi = float(xv.max()) + radius
    core = _chamber_log_integral(log_f, d, lo, hi, order, panels)
    return core + _log_c_prime(n, 1.0) - (d / 2.0) * math.log(t) - rs.log_pi(xv)


def calibrate_constant(n: int, t_ref: float = 1.0, tol: float = 1e-8, x_ref=None) -> float:
    """The unique c giving unit chamber mass at t_ref, with a t-independence check.

    Rank n <= 2 (the mass integral is over n+1 ordered coordinates).  The same
    c must renormalize the kernel at 2 t_ref to 1e-6, else CalibrationError.
    """
    if n > 2:
        raise RankTooLarge("calibration quadrature supports n <= 2")
    if x_ref is None:
        xv = 0.75 * rs.rho(n).array()
    else:
        xv = rs.as_coords(x_ref, "x_ref")
    vals = {}
    for t in (t_ref, 2.0 * t_ref):
        prev = None
        for order, panels in [(24, 4), (24, 6), (28, 8), (32, 10)]:
            cur = _mass_with_unit_constant(n, t, xv, order, panels)
            if prev is not None and abs(cur - prev) <= max(tol * 0.1, 1e-13):
                break
            prev = cur
        else:
            raise QuadratureNonconvergence("calibration mass integral did not settle")
        vals[t] = math.exp(cur)
    c1, c2 = vals[t_ref], vals[2.0 * t_ref]
    if abs(c1 - c2) > 1e-6 * abs(c1):
        raise CalibrationError(
            f"calibrated constant is t-dependent: {c1!r} at t_ref vs {c2!r} at 2 t_ref"
        )
    return c1


def make_heat_context(
    n: int,
    *,
    provenance: str = PROV_MMS,
    t_ref: float = 1.0,
    tol: float = 1e-8,
    cross_check: bool = False,
) -> HeatContext:
    """Build the rank context; cross_check also computes the other provenance."""
    if provenance not in (PROV_MMS, PROV_CALIBRATED):
        raise ValueError(f"unknown provenance {provenance!r}")
    if provenance == PROV_MMS:
        c = mms_constant(n)
        other = calibrate_constant(n, t_ref, tol) if (cross_check and n <= 2) else None
    else:
        c = calibrate_constant(n, t_ref, tol)
        other = mms_constant(n) if cross_check else None
    return HeatContext(
        n=n, d=n + 1, gamma=rs.gamma(n), c_k=c, c_k_provenance=provenance, c_k_cross=other
    )


# ---------------------------------------------------------------------------
# kernels and envelopes
# ---------------------------------------------------------------------------

def heat_flat(ctx: HeatContext, t: float, x, y, target_log_err: float = 1e-12) -> sp.EvalResult:
    """log of p_t(X, Y) through the stable spherical evaluator."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    res = sp.psi_stable(xv, yv / (2.0 * t), target_log_err)
    log_value = (
        -(ctx.gamma + ctx.d / 2.0) * math.log(2.0)
        - math.log(ctx.c_k)
        - (ctx.d / 2.0 + ctx.gamma) * math.log(t)
        - (float(xv @ xv) + float(yv @ yv)) / (4.0 * t)
        + res.log_value
    )
    err = res.abs_log_error + 8.0 * np.finfo(float).eps * (1.0 + abs(log_value))
    return sp.EvalResult(log_value, res.method, err, res.mc_std_error)


def heat_envelope(t: float, x, y) -> float:
    """log of t^{-d/2} exp(-|X-Y|^2/4t) / prod_{i<j} (t + (x_i-x_j)(y_i-y_j))."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    d = xv.size
    prods = rs.root_values(xv) * rs.root_values(yv)
    return float(
        -(d / 2.0) * math.log(t)
        - float(((xv - yv) ** 2).sum()) / (4.0 * t)
        - np.sum(np.log(t + prods))
    )


def _log_curved_prefactor(t: float, xv: np.ndarray, yv: np.ndarray, n: int) -> float:
    rgh = rs.rho(n).array()
    ax = rs.root_values(xv)
    ay = rs.root_values(yv)
    if np.any(ax <= 0.0) or np.any(ay <= 0.0):
        raise DegenerateInput("curved kernel needs strictly dominant x and y")
    return float(
        -float(rgh @ rgh) * t
        + np.sum(np.log(ax)) + np.sum(np.log(ay))
        - np.sum(log_sinh(ax)) - np.sum(log_sinh(ay))
    )


def heat_curved(ctx: HeatContext, t: float, x, y, target_log_err: float = 1e-12) -> sp.EvalResult:
    """Curved-side kernel: e^{-|rho|^2 t} pi(X)pi(Y)/(sinh-products) times p_t."""
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    flat = heat_flat(ctx, t, xv, yv, target_log_err)
    pref = _log_curved_prefactor(t, xv, yv, ctx.n)
    return sp.EvalResult(pref + flat.log_value, flat.method,
                         flat.abs_log_error + 1e-14 * (1 + abs(pref)), flat.mc_std_error)


def heat_curved_envelope(t: float, x, y) -> float:
    """log of the curved two-sided comparison form (with the Gaussian factor)."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    n = xv.size - 1
    rgh = rs.rho(n).array()
    ax = rs.root_values(xv)
    ay = rs.root_values(yv)
    return float(
        -float(rgh @ rgh) * t
        - (xv.size / 2.0) * math.log(t)
        - float(rgh @ (xv + yv))
        - float(((xv - yv) ** 2).sum()) / (4.0 * t)
        + np.sum(np.log1p(ax)) + np.sum(np.log1p(ay))
        - np.sum(np.log(t + ax * ay))
    )


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def images_oracle(ctx: HeatContext, t: float, x, y) -> sp.EvalResult:
    """Signed-image evaluation of p_t: a code path independent of psi.

    p_t(X,Y) = C' t^{-d/2} sum_w eps(w) e^{-|X - wY|^2/4t} / (pi(X) pi(Y)),
    C' = pi(rho) / (2^{gamma+d/2} c).  Compensated summation over the images;
    the identity image dominates for chamber arguments.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    if np.min(xv[:-1] - xv[1:]) <= 0.0 or np.min(yv[:-1] - yv[1:]) <= 0.0:
        raise DegenerateInput("images oracle needs strictly dominant x and y")
    inv2t = 1.0 / (2.0 * t)
    base = float(xv @ yv)
    terms = []
    abs_terms = []
    for rows, signs in rs.perm_sign_chunks(xv.size):
        dots = yv[rows] @ xv
        vals = signs * np.exp((dots - base) * inv2t)
        terms.extend(vals.tolist())
        abs_terms.extend(np.abs(vals).tolist())
    T = math.fsum(terms)
    A = math.fsum(abs_terms)
    if T <= 0.0:
        raise DegenerateInput("image sum lost all significance (arguments too close to a wall)")
    gauss = -float(((xv - yv) ** 2).sum()) / (4.0 * t)
    log_value = (
        _log_c_prime(ctx.n, ctx.c_k)
        - (ctx.d / 2.0) * math.log(t)
        + gauss
        + math.log(T)
        - rs.log_pi(xv)
        - rs.log_pi(yv)
    )
    err = np.finfo(float).eps * ((4.0 + abs(gauss)) * (A / T) + 4.0 * (1.0 + abs(log_value)))
    return sp.EvalResult(log_value, sp.METHOD_ALT, float(err))


@lru_cache(maxsize=8)
def _fourier_grid(n: int, t: float, tol: float, xscale: float):
    m = n + 1
    radius = math.sqrt((math.log(1.0 / max(tol * 1e-3, 1e-15)) + 8.0) / t)
    order = int(max(72, 4.0 * radius * max(1.0, xscale)))
    order = min(order, 320)
    nodes, logw = gl_nodes(np.array(-radius), np.array(radius), order, 2)
    return nodes, np.exp(logw)


def _fourier_integral(n: int, t: float, xv: np.ndarray, yv: np.ndarray, tol: float) -> float:
    """int e^{-|lam|^2 t} Re[S_X(lam) conj(S_Y(lam))] d lam over R^{n+1}.

    S_X is the signed oscillatory sum; the spectral Vandermonde cancels
    against the inversion measure, leaving a smooth integrand.
    """
    m = n + 1
    xscale = float(max(np.abs(xv).max(), np.abs(yv).max()))
    nodes, w = _fourier_grid(n, t, tol, xscale)
    grids = np.meshgrid(*([nodes] * m), indexing="ij")
    lam = np.stack(grids, axis=-1)
    wgrid = np.ones(lam.shape[:-1])
    for g in np.ix_(*([w] * m)):
        wgrid = wgrid * g
    sx = sp.unitary_alt_sum(lam, xv)
    sy = sp.unitary_alt_sum(lam, yv)
    dens = np.exp(-t * (lam ** 2).sum(axis=-1))
    return float((dens * (sx * np.conj(sy)).real * wgrid).sum())


def fourier_constant(ctx: HeatContext, tol: float = 1e-8) -> float:
    """Front constant of the inversion integral, calibrated once per rank."""
    return _fourier_constant_cached(ctx.n, ctx.c_k, tol)


@lru_cache(maxsize=8)
def _fourier_constant_cached(n: int, c_k: float, tol: float) -> float:
    ctx = HeatContext(n=n, d=n + 1, gamma=rs.gamma(n), c_k=c_k, c_k_provenance="mms_quadrature")
    t0 = 0.5
    x0 = 0.6 * rs.rho(n).array()
    y0 = 0.45 * rs.rho(n).array() + 0.1
    ref = heat_flat(ctx, t0, x0, y0).log_value
    raw = _fourier_integral(n, t0, x0, y0, tol)
    pref = raw * math.exp(
        2.0 * rs.log_pi(rs.rho(n).array())
        - 2.0 * rs.gamma(n) * math.log(2.0)
        - rs.log_pi(x0) - rs.log_pi(y0)
    )
    return math.exp(ref) / pref


def inverse_fourier_oracle(
    ctx: HeatContext, t: float, x, y, tol: float = 1e-8, const: Optional[float] = None
) -> sp.EvalResult:
    """Oscillatory-spectrum inversion for p_t (rank <= 2).

    The front constant is calibrated once against heat_flat at a fixed
    reference point and reused for every other evaluation.
    """
    if ctx.n > 2:
        raise RankTooLarge("Fourier oracle supports n <= 2")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    c = const if const is not None else fourier_constant(ctx, tol)
    raw = _fourier_integral(ctx.n, t, xv, yv, tol)
    val = raw * math.exp(
        2.0 * rs.log_pi(rs.rho(ctx.n).array())
        - 2.0 * rs.gamma(ctx.n) * math.log(2.0)
        - rs.log_pi(xv) - rs.log_pi(yv)
    ) * c
    if val <= 0.0:
        raise QuadratureNonconvergence("inversion integral came out nonpositive")
    return sp.EvalResult(math.log(val), sp.METHOD_ITER, tol)


def pde_residual(ctx: HeatContext, t: float, x, y, h: float) -> float:
    """|d/dt p - Delta_X p| / p by central differences at step h.

    Delta is the chamber radial Laplacian: the Euclidean Laplacian plus
    2 sum_{alpha>0} <grad, alpha> / alpha(X).  Requires every gap of x to
    exceed 2h so the stencil stays strictly inside the chamber.
    """
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    if float(np.min(xv[:-1] - xv[1:])) <= 2.0 * h:
        raise PreconditionViolated("x must be at distance > 2h from the walls")
    if t <= 2.0 * h:
        raise PreconditionViolated("t must exceed 2h for the time stencil")
    tgt = 1e-13

    p0 = heat_flat(ctx, t, xv, yv, tgt).log_value

    def pn(tt, xx):
        return math.exp(heat_flat(ctx, tt, xx, yv, tgt).log_value - p0)

    dpdt = (pn(t + h, xv) - pn(t - h, xv)) / (2.0 * h)
    m = xv.size
    lap = 0.0
    grad = np.zeros(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        up = pn(t, xv + e)
        dn = pn(t, xv - e)
        lap += (up - 2.0 + dn) / (h * h)
        grad[i] = (up - dn) / (2.0 * h)
    root_term = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            root_term += 2.0 * (grad[i] - grad[j]) / (xv[i] - xv[j])
    return abs(dpdt - lap - root_term)


def semigroup_check(ctx: HeatContext, t: float, s: float, x, y, tol: float = 1e-8) -> float:
    """Relative defect |int p_t(X,Z) p_s(Z,Y) pi(Z)^2 dZ - p_{t+s}(X,Y)| / p_{t+s}.

    The pi(Z)^2 factor cancels against the two image denominators, so the
    integrand is smooth across the walls.  Rank <= 2.
    """
    if ctx.n > 2:
        raise RankTooLarge("semigroup quadrature supports n <= 2")
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    d = ctx.d
    logc = _log_c_prime(ctx.n, ctx.c_k)

    def log_f(Z):
        qt = ((Z - xv) ** 2).sum(axis=-1) / (4.0 * t)
        qs = ((Z - yv) ** 2).sum(axis=-1) / (4.0 * s)
        return (
            -qt - qs
            + _log_images_T(xv, Z, 1.0 / (2.0 * t))
            + _log_images_T(yv, Z, 1.0 / (2.0 * s))
        )

    radius = math.sqrt(4.0 * max(t, s) * (math.log(1e14) + 8.0)) + 2.0
    lo = float(min(xv.min(), yv.min())) - radius
    hi = float(max(xv.max(), yv.max())) + radius
    width = math.sqrt(4.0 * min(t, s))
    panels = int(min(36, max(6, math.ceil((hi - lo) / (3.0 * width)))))
    prev = None
    diff = math.inf
    for order, pan in [(20, panels), (24, panels + 2), (28, panels + 4)]:
        core = _chamber_log_integral(log_f, d, lo, hi, order, pan)
        cur = (
            core + 2.0 * logc
            - (d / 2.0) * (math.log(t) + math.log(s))
            - rs.log_pi(xv) - rs.log_pi(yv)
        )
        if prev is not None:
            diff = abs(cur - prev)
            if diff <= tol * 0.1:
                break
        prev = cur
    if diff > tol * 10.0:
        raise QuadratureNonconvergence(
            f"semigroup quadrature settled only to {diff:.3g} (tol {tol:.3g})"
        )
    target = heat_flat(ctx, t + s, xv, yv).log_value
    return abs(math.expm1(cur - target))


# ---------------------------------------------------------------------------
# volume comparison forms
# ---------------------------------------------------------------------------

def ball_volume(x, r: float) -> float:
    """Comparison volume r^d prod_{i<j} (r + (x_i - x_j))^2."""
    if r <= 0.0:
        raise ValueError("r must be positive")
    return math.exp(log_ball_volume(x, r))


def log_ball_volume(x, r: float) -> float:
    xv = rs.as_coords(x, "x")
    return float(xv.size * math.log(r) + 2.0 * np.sum(np.log(r + rs.root_values(xv))))


@dataclass(frozen=True)
class VolumeComparison:
    """Per-point comparison of the kernel against the volume-based sandwich."""

    t: float
    log_p: float
    log_envelope: float
    log_gauss: float  # -|X-Y|^2 / 4t, the shared Gaussian with c1 = c2 = 1/4
    log_vol_x: float
    log_vol_y: float

    @property
    def lower_fit(self) -> float:
        """C making C e^{gauss} / min(vol) touch p from below at this point."""
        return math.exp(self.log_p + min(self.log_vol_x, self.log_vol_y) - self.log_gauss)

    @property
    def upper_fit(self) -> float:
        return math.exp(self.log_p + max(self.log_vol_x, self.log_vol_y) - self.log_gauss)


def volume_compare(ctx: HeatContext, t: float, x, y) -> VolumeComparison:
    xv = rs.as_coords(x, "x")
    yv = rs.as_coords(y, "y")
    sqt = math.sqrt(t)
    return VolumeComparison(
        t=t,
        log_p=heat_flat(ctx, t, xv, yv).log_value,
        log_envelope=heat_envelope(t, xv, yv),
        log_gauss=-float(((xv - yv) ** 2).sum()) / (4.0 * t),
        log_vol_x=log_ball_volume(xv, sqt),
        log_vol_y=log_ball_volume(yv, sqt),
    )


def heat_time_slope(ctx: HeatContext, x, y, t_hi: float = 1e6) -> float:
    """d log p / d log t at large t; tends to -(d/2 + gamma)."""
    a = heat_flat(ctx, t_hi, x, y).log_value
    b = heat_flat(ctx, 2.0 * t_hi, x, y).log_value
    return (b - a) / math.log(2.0)
