"""Scaled K-Bessel with imaginary order: kappa(x) = e^{pi R/2} K_{iR}(x).

All values are produced by contour integrals whose integrands are O(1)
relative to the answer, so there is no exponential cancellation anywhere:

* oscillatory region x < 0.9 R:
      kappa(x) = Int_0^T cos(R t - x sinh t) dt  +  tail,
  where T solves x cosh T = R + PHASE_MARGIN and the tail is the same
  integrand continued down the complex segment t = T - i v, v in (0, 1]
  (integrand decays like e^{-PHASE_MARGIN * v}); the remainder beyond is
  below e^{-45} and dropped.

* transition/decay region x >= 0.9 R: the whole line is rotated to
  t = u + i theta, theta = min(0.985 * asin(min(1, R/x)), pi/2 - 0.1):
      kappa(x) = e^{-R theta} Re Int_0^infty
                   e^{-x cosh(u + i theta)} e^{i R u} du * 2 ... (even fold)

Both branches are vectorized over x arrays.
"""

from __future__ import annotations

import math

import numpy as np

PHASE_MARGIN = 55.0


def _gl(a: float, b: float, panels: int, order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * x[None, :]).ravel(), (half * w[None, :]).ravel()


def _kappa_osc_bucket(xs: np.ndarray, R: float) -> np.ndarray:
    """Oscillatory branch for a bucket of comparable x (shared [0, T] rule)."""
    x_min = float(xs.min())
    x_max = float(xs.max())
    T = math.acosh((PHASE_MARGIN + R) / x_min)  # deepest T needed in the bucket
    # panel density sized by the peak phase rate R + x_max cosh(T)
    peak_rate = R + x_max * math.cosh(T)
    osc = T * peak_rate / (2 * math.pi) + 2
    nodes, weights = _gl(0.0, T, max(8, int(osc * 14 / 16)), 16)
    phi = R * nodes[None, :] - xs[:, None] * np.sinh(nodes)[None, :]
    main = np.cos(phi) @ weights
    # tail down the segment t = T - i v (phase margin only grows with x)
    tn, tw = _gl(0.0, 1.0, 12, 16)
    tcomp = T - 1j * tn
    expo = 1j * (R * tcomp[None, :] - xs[:, None] * np.sinh(tcomp)[None, :])
    tail = np.real(-1j * (np.exp(expo) @ tw))
    return main + tail


def _kappa_osc(xs: np.ndarray, R: float) -> np.ndarray:
    """Masked-rule oscillatory branch, bucketed by decades of x."""
    out = np.empty_like(xs)
    order = np.argsort(xs)
    xs_sorted = xs[order]
    # bucket boundaries: factor-4 ranges share one rule
    start = 0
    while start < len(xs_sorted):
        stop = np.searchsorted(xs_sorted, xs_sorted[start] * 2.0, side="right")
        idx = order[start:stop]
        out[idx] = _kappa_osc_bucket(xs[idx], R)
        start = stop
    return out


def _kappa_decay(xs: np.ndarray, R: float) -> np.ndarray:
    out = np.empty_like(xs)
    for i, x in enumerate(xs):
        theta = min(0.985 * math.asin(min(1.0, R / x)), math.pi / 2 - 0.1)
        ct = math.cos(theta)
        ratio = (PHASE_MARGIN + R) / (x * ct)
        if ratio < 1.05:  # value below e^{-PHASE_MARGIN}; call it zero
            out[i] = 0.0
            continue
        U = math.acosh(ratio)
        rate = (x * math.sin(theta) + R) / (2 * math.pi) + 2
        nodes, weights = _gl(0.0, U, max(8, int(rate * U * 14 / 16) + 4), 16)
        z = nodes + 1j * theta
        vals = np.exp(-x * np.cosh(z) + 1j * R * nodes)
        out[i] = (math.exp(R * (math.pi / 2 - theta))
                  * float(np.real(np.sum(vals * weights))))
    return out


def kappa(xs, R: float) -> np.ndarray:
    """e^{pi R/2} K_{iR}(x), vectorized; x > 0."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty_like(xs)
    cut = 0.9 * R
    osc = xs < cut
    if np.any(osc):
        out[osc] = _kappa_osc(xs[osc], R)
    if np.any(~osc):
        out[~osc] = _kappa_decay(xs[~osc], R)
    return out


class KappaTable:
    """Cubic-spline table of kappa on [x_min, x_max] for fast bulk lookup."""

    def __init__(self, R: float, x_min: float, x_max: float,
                 points_per_unit_log: int = 12000):
        from scipy.interpolate import CubicSpline
        self.R = R
        self.x_min = x_min
        self.x_max = x_max
        n = max(2000, int(points_per_unit_log * math.log(x_max / x_min)))
        grid = np.exp(np.linspace(math.log(x_min), math.log(x_max), n))
        vals = kappa(grid, R)
        self._spline = CubicSpline(np.log(grid), vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x >= self.x_min) & (x <= self.x_max)
        out[inside] = self._spline(np.log(x[inside]))
        # beyond the table the values are below 1e-16 * peak; keep zero
        if np.any(x < self.x_min):
            raise ValueError("kappa table queried below its range")
        return out
