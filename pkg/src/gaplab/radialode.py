"""Euler-type radial operator ``L U = r^2 U'' + n r U' - lam U`` and friends.

Mode profiles of the reduced equation satisfy ``L U = H``.  This module
applies ``L`` on nonuniform grids, builds the bounded particular solution
by reduction of order, and splits a profile into its leading power
``C r^alpha`` plus a remainder.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InapplicableError, UsageError
from .exponents import alpha_of


@dataclass(frozen=True)
class RadialFunction:
    """Values on a strictly increasing positive grid."""

    r: np.ndarray
    values: np.ndarray
    error_estimate: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape:
            raise UsageError("r and values must be 1-D arrays of equal length")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise UsageError("r must be positive and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise UsageError("values must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)


def geometric_grid(r_min=1e-5, r_max=1.0, size=400):
    """Nodes ``r_min * q^k`` ending exactly at ``r_max``."""
    return np.geomspace(r_min, r_max, size)


def _derivatives(r, u):
    """Three-point first and second derivatives on a nonuniform grid."""
    n = r.size
    d1 = np.empty(n)
    d2 = np.empty(n)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    um, u0, up = u[:-2], u[1:-1], u[2:]
    d1[1:-1] = (-hp / (hm * (hm + hp)) * um + (hp - hm) / (hm * hp) * u0
                + hm / (hp * (hm + hp)) * up)
    d2[1:-1] = 2.0 * (um / (hm * (hm + hp)) - u0 / (hm * hp) + up / (hp * (hm + hp)))

    def one_sided(x, y, at):
        # Lagrange interpolant through three nodes, differentiated at x[at]
        x0, x1, x2 = x
        y0, y1, y2 = y
        t = x[at]
        l0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2))
        l1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2))
        l2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))
        s = 2.0 * (y0 / ((x0 - x1) * (x0 - x2)) + y1 / ((x1 - x0) * (x1 - x2))
                   + y2 / ((x2 - x0) * (x2 - x1)))
        return l0 * y0 + l1 * y1 + l2 * y2, s

    d1[0], d2[0] = one_sided(r[:3], u[:3], 0)
    d1[-1], d2[-1] = one_sided(r[-3:], u[-3:], 2)
    return d1, d2


def apply_L(U, lam, n):
    """``r^2 U'' + n r U' - lam U`` by second-order finite differences."""
    if U.r.size < 3:
        raise UsageError("apply_L needs at least 3 nodes")
    d1, d2 = _derivatives(U.r, U.values)
    r = U.r
    return RadialFunction(r, r * r * d2 + n * r * d1 - lam * U.values)


def _power_law_cumint(r, f):
    """Cumulative ``int_0^{r_k} f`` assuming ``f`` is a local power law per cell.

    The first cell ``[0, r_0]`` uses the exponent fitted through the first
    two nodes.  Cells where ``f`` changes sign fall back to the trapezoid
    rule.

    Raises
    ------
    InapplicableError
        When the integrand is not integrable at the origin.
    """
    out = np.empty_like(f)
    if f[0] == 0.0 and f[1] == 0.0:
        out[0] = 0.0
    elif f[0] * f[1] > 0:
        p0 = np.log(f[1] / f[0]) / np.log(r[1] / r[0])
        if p0 <= -1.0 + 1e-9:
            raise InapplicableError(
                f"integrand behaves like r^{p0:.3f} at the origin; not integrable")
        out[0] = f[0] * r[0] / (p0 + 1.0)
    else:
        out[0] = 0.5 * f[0] * r[0]

    fa, fb = f[:-1], f[1:]
    ra, rb = r[:-1], r[1:]
    cell = 0.5 * (fa + fb) * (rb - ra)
    same = fa * fb > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(rb / ra)
        p = np.where(same, np.log(np.abs(fb) / np.abs(fa)) / lr, 0.0)
        near_m1 = same & (np.abs(p + 1.0) < 1e-10)
        pw = np.where(same & ~near_m1, (fb * rb - fa * ra) / (p + 1.0), cell)
        pw = np.where(near_m1, fa * ra * lr, pw)
    out[1:] = out[0] + np.cumsum(pw)
    return out


def _reduce(r, H, lam, n):
    alpha = alpha_of(lam, n)
    inner = _power_law_cumint(r, r ** (n - 2 + alpha) * H)
    w = _power_law_cumint(r, r ** (-(n + 2 * alpha)) * inner)
    return r ** alpha * w, w


def reduction_of_order(H, lam, n):
    """Bounded particular solution ``v = r^alpha w`` of ``L v = H``.

    ``w(r) = int_0^r s^{-(n+2 alpha)} int_0^s t^{n-2+alpha} H(t) dt ds``.
    Both integrals use a cellwise power-law rule, exact for pure powers.
    The attached ``error_estimate`` is the largest difference against the
    same construction on every other node.
    """
    r, h = H.r, H.values
    if r.size < 5:
        raise UsageError("need at least 5 nodes")
    v, _ = _reduce(r, h, lam, n)
    v_coarse, _ = _reduce(r[::2], h[::2], lam, n)
    err = float(np.max(np.abs(v[::2] - v_coarse))) if v.size else 0.0
    return RadialFunction(r, v, error_estimate=err)


def reduction_inner_factor(H, lam, n):
    """The factor ``w`` of ``v = r^alpha w`` (for the ``|w| <= C r`` check)."""
    _, w = _reduce(H.r, H.values, lam, n)
    return RadialFunction(H.r, w)


@dataclass(frozen=True)
class LeadingFit:
    C1_tilde: float
    remainder_slope: float
    residual: float
    window: tuple


def fit_loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, _), *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(slope)


def extract_leading(U, alpha, r_max=0.1, r_min=None):
    """Split ``U = C r^alpha + v`` on the window ``[r_min, r_max]``.

    ``U / r^alpha`` is fitted by ``C + D r + E r^2`` in least squares,
    which absorbs the first two corrections ``r^{1+alpha}`` and
    ``r^{2+alpha}`` instead of letting them bias ``C``.
    The remainder ``v = U - C r^alpha`` is summarized by its log-log
    slope (NaN when it vanishes to round-off).
    """
    r = U.r
    lo = r[0] if r_min is None else r_min
    mask = (r >= lo) & (r <= r_max)
    if mask.sum() < 5:
        raise UsageError(f"window [{lo:g}, {r_max:g}] holds fewer than 5 nodes")
    rw, uw = r[mask], U.values[mask]
    scaled = uw / rw ** alpha
    A = np.vstack([np.ones_like(rw), rw, rw ** 2]).T
    coef, *_ = np.linalg.lstsq(A, scaled, rcond=None)
    C = float(coef[0])
    fit_res = float(np.sqrt(np.mean((A @ coef - scaled) ** 2)) / max(abs(C), 1e-300))
    rem = uw - C * rw ** alpha
    scale = np.max(np.abs(uw))
    if np.all(np.abs(rem) <= 1e-12 * scale):
        slope = float("nan")
    else:
        ok = np.abs(rem) > 1e-12 * scale
        slope = fit_loglog_slope(rw[ok], np.abs(rem[ok]))
    return LeadingFit(C1_tilde=C, remainder_slope=slope, residual=fit_res,
                      window=(float(rw[0]), float(rw[-1])))
