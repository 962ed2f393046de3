"""Smooth compactly supported cutoff functions shared across the package.

Every transform in this package (Mellin, Fourier, contour integrals) is fed
one of a handful of standard bump shapes:

* ``step`` -- the C-infinity unit step on [0, 1],
* ``Plateau`` -- 0 outside (a, b), identically 1 on [a+ra, b-rb],
* ``exp_bump`` -- the classic exp(-1/(1-t^2)) bump on (-1, 1).

Plateaus carry exact derivative evaluators (symbolically differentiated once,
then compiled to numpy), which the integration-by-parts representations and
tail certificates rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

# The step is built from a logistic of u(t) = 1/t - 1/(1-t), which maps (0,1)
# onto (-inf, inf).  Outside a small collar the logistic saturates to 0/1 to
# within 1e-100, so clamping there is exact at double precision.
_COLLAR = 4.0e-3


@lru_cache(maxsize=32)
def _step_derivative_fn(order: int):
    """Compiled j-th derivative of the smooth step, valid on the open (0,1)."""
    t = sp.Symbol("t")
    expr = 1 / (1 + sp.exp(1 / t - 1 / (1 - t)))
    d = sp.diff(expr, t, order)
    return sp.lambdify(t, d, modules="numpy")


def step(t, order: int = 0):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1; derivative of given order."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > _COLLAR) & (t < 1.0 - _COLLAR)
    if order == 0:
        out = np.where(t >= 1.0 - _COLLAR, 1.0, out)
        if np.any(inside):
            ti = t[inside]
            out[inside] = 1.0 / (1.0 + np.exp(1.0 / ti - 1.0 / (1.0 - ti)))
    else:
        if np.any(inside):
            out[inside] = _step_derivative_fn(order)(t[inside])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Plateau:
    """Smooth cutoff: support (a, b), identically 1 on [a+ra, b-rb].

    ``ra`` and ``rb`` are the widths of the rising and falling collars.  The
    two collars must not overlap, which keeps the derivative a single-factor
    chain rule on each piece.
    """

    a: float
    ra: float
    b: float
    rb: float

    def __post_init__(self):
        if self.a + self.ra > self.b - self.rb + 1e-15:
            raise ValueError("plateau collars overlap")

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.shape(x))
        rising = (x > self.a) & (x < self.a + self.ra)
        falling = (x > self.b - self.rb) & (x < self.b)
        if order == 0:
            flat = (x >= self.a + self.ra) & (x <= self.b - self.rb)
            out[flat] = 1.0
        if np.any(rising):
            out[rising] = step((x[rising] - self.a) / self.ra, order) / self.ra**order
        if np.any(falling):
            sign = (-1.0) ** order
            out[falling] = sign * step((self.b - x[falling]) / self.rb, order) / self.rb**order
        return out if out.ndim else float(out)

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)


def v_profile() -> Plateau:
    """The test profile for Voronoi checks: support (3/4, 9/4), 1 on [1, 2]."""
    return Plateau(0.75, 0.25, 2.25, 0.25)


def h_cutoff(eta: float) -> Plateau:
    """Summation-pipeline cutoff: support (1, 2), 1 on [1+eta, 2-eta]."""
    if not 0.0 < eta < 0.25:
        raise ValueError("cutoff width must lie in (0, 1/4)")
    return Plateau(1.0, eta, 2.0, eta)


def omega_window() -> Plateau:
    """Dyadic partition window: support (1, 2), 1 on [5/4, 7/4]."""
    return Plateau(1.0, 0.25, 2.0, 0.25)


def exp_bump(t):
    """exp(-1/(1-t^2)) on (-1, 1), 0 outside.  Not normalized."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.shape(t))
    inside = np.abs(t) < 1.0 - 1e-9
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out if out.ndim else float(out)


def inert_amplitude(Y: float, Z: float):
    """A member of the scale-Y test family on [Z, 2Z].

    Collar width Z/(2Y) at each edge gives scaled derivatives
    y^j w^(j)(y) = O(Y^j), the bookkeeping normalization the stationary-phase
    tests quantify over.  Y >= 1 required.
    """
    if Y < 1.0:
        raise ValueError("family scale must be >= 1")
    width = Z / (2.0 * Y)
    return Plateau(Z, width, 2.0 * Z, width)
