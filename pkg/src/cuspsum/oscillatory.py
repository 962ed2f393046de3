"""Complex gamma machinery and the oscillatory-integral toolkit.

Gamma is evaluated through a Lanczos rational approximation; ratios of gammas
with large imaginary parts go through log-gamma sums so nothing under- or
overflows.  The quadrature rule for oscillatory integrals allocates at least
ten Gauss nodes per period of the phase and refines by doubling; it is the
oracle every stationary-phase asymptotic in the package is tested against.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli

from .quadrature import panel_nodes

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class GammaPoleError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


class StationaryPointError(ValueError):
    pass


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    """log sin(pi z), stable for large |Im z| (up to a multiple of 2*pi*i)."""
    z = np.asarray(z, dtype=complex)
    y = z.imag
    out = np.empty_like(z)
    mod = np.abs(y) <= 8.0
    out[mod] = np.log(np.sin(np.pi * z[mod]))
    big = ~mod
    if np.any(big):
        zb = np.where(y[big] > 0, z[big], np.conj(z[big]))
        val = (-1j * np.pi * zb + np.log1p(-np.exp(2j * np.pi * zb))
               + cmath.log(0.5j))
        out[big] = np.where(y[big] > 0, val, np.conj(val))
    return out


def log_gamma_lanczos(z):
    """log Gamma up to an integer multiple of 2*pi*i; exp of it is Gamma."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        zr = z[right] - 1.0
        t = zr + _LANCZOS_G + 0.5
        series = np.full_like(zr, _LANCZOS_P[0])
        for k, pk in enumerate(_LANCZOS_P[1:], start=1):
            series = series + pk / (zr + k)
        out[right] = (0.5 * math.log(2.0 * math.pi) + (zr + 0.5) * np.log(t)
                      - t + np.log(series))
    left = ~right
    if np.any(left):
        zl = z[left]
        pole = (np.abs(zl.imag) < 1e-14) & (np.abs(zl.real - np.round(zl.real)) < 1e-14)
        if np.any(pole & (np.round(zl.real) <= 0)):
            raise GammaPoleError("gamma pole at nonpositive integer")
        out[left] = math.log(math.pi) - _log_sin_pi(zl) - log_gamma_lanczos(1.0 - zl)
    return out[0] if scalar else out


def gamma_complex(s):
    """Gamma(s); relative accuracy ~1e-13 on |s| <= 200, poles raise."""
    return np.exp(log_gamma_lanczos(s))


# ----------------------------------------------------------------------
# Stirling expansion with explicit series coefficients
# ----------------------------------------------------------------------

def _series_mul(a, b, K):
    out = np.zeros(K + 1, dtype=complex)
    for i in range(min(len(a), K + 1)):
        if a[i] == 0:
            continue
        top = min(len(b), K + 1 - i)
        out[i:i + top] += a[i] * np.asarray(b[:top])
    return out


def _series_exp(a, K):
    # exp of a power series with a[0] = 0
    e = np.zeros(K + 1, dtype=complex)
    e[0] = 1.0
    for n in range(1, K + 1):
        acc = 0.0
        for k in range(1, n + 1):
            if k < len(a):
                acc += k * a[k] * e[n - k]
        e[n] = acc / n
    return e


@lru_cache(maxsize=64)
def stirling_series_coeffs(sigma: float, K2: int) -> tuple[complex, ...]:
    """Coefficients c_j with Gamma(sigma+i tau) = leading * (1 + sum c_j / tau^j).

    Derived by expanding log Gamma(sigma + i tau) around the pure-imaginary
    leading term in powers of u = 1/tau; t-hat below is 1/(i tau) = -i u.
    """
    K = K2
    that = np.zeros(K + 2, dtype=complex)
    if K >= 1:
        that[1] = -1j
    # log(1 + sigma * that) as a series in u
    log1p = np.zeros(K + 2, dtype=complex)
    tp = that.copy()
    for k in range(1, K + 2):
        if k > 1:
            tp = _series_mul(tp, that, K + 1)
        log1p += ((-1) ** (k + 1)) * (sigma ** k) / k * tp
    # (1/that + sigma - 1/2) * log1p - sigma:
    # 1/that * log1p shifts the series down one power of that; in u this is
    # multiplication by i (since 1/that = i/u ... acting on u^k -> u^{k-1} * i^{-1}?)
    shifted = np.zeros(K + 2, dtype=complex)
    for k in range(1, K + 2):
        # term u^k coefficient divided by that = u^k / (-i u) = (u^{k-1}) * (1/-i)
        shifted[k - 1] += log1p[k] * (1.0 / -1j)
    total = shifted + (sigma - 0.5) * log1p
    total[0] -= sigma
    # Bernoulli part: sum_j B_{2j} / (2j(2j-1)) * that^{2j-1} * (1+sigma*that)^{-(2j-1)}
    J = (K + 2) // 2 + 1
    bern = bernoulli(2 * J + 2)
    inv_base = np.zeros(K + 2, dtype=complex)  # (1+sigma*that)^{-1}
    inv_base[0] = 1.0
    acc = np.zeros(K + 2, dtype=complex)
    acc[0] = 1.0
    for k in range(1, K + 2):
        acc = _series_mul(acc, -sigma * that, K + 1)
        inv_base += acc
    for j in range(1, J + 1):
        if 2 * j - 1 > K + 1:
            break
        piece = np.zeros(K + 2, dtype=complex)
        piece[0] = 1.0
        for _ in range(2 * j - 1):
            piece = _series_mul(piece, that, K + 1)
            piece = _series_mul(piece, inv_base, K + 1)
        total += bern[2 * j] / (2 * j * (2 * j - 1)) * piece
    coeffs = _series_exp(total[:K + 1], K)
    return tuple(coeffs)


def stirling_gamma(sigma: float, tau: float, K2: int = 2):
    """Truncated Stirling value of Gamma(sigma + i tau) and its error estimate.

    Returns (value, relative_error_estimate) with the estimate |tau|^{-K2-1}.
    Requires |tau| >= 2.
    """
    if abs(tau) < 2.0:
        raise ValueError("Stirling branch needs |tau| >= 2")
    if tau < 0:  # Schwarz reflection
        v, e = stirling_gamma(sigma, -tau, K2)
        return np.conj(v), e
    log_lead = (0.5 * math.log(2.0 * math.pi)
                + (sigma - 0.5) * (math.log(tau) + 0.5j * math.pi)
                - 0.5 * math.pi * tau
                + 1j * tau * (math.log(tau) - 1.0))
    coeffs = stirling_series_coeffs(float(sigma), K2)
    series = sum(c / tau**j for j, c in enumerate(coeffs))
    return np.exp(log_lead) * series, float(tau) ** (-(K2 + 1))


# ----------------------------------------------------------------------
# the gamma-quotient factors of the Voronoi transform
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RhoFactor:
    """Arguments of the transform factor rho^{+-}(sigma + i tau)."""

    mu: float
    sign: int          # +1 or -1
    sigma: float
    tau: float

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.sigma <= -1.0:
            raise ValueError("sigma must exceed -1")


def _log_cos_pi(z: np.ndarray) -> np.ndarray:
    """log cos(pi z), stable for large |Im z| (up to multiples of 2*pi*i)."""
    z = np.asarray(z, dtype=complex)
    y = z.imag
    out = np.empty_like(z)
    mod = np.abs(y) <= 8.0
    out[mod] = np.log(np.cos(np.pi * z[mod]))
    big = ~mod
    if np.any(big):
        zb = np.where(y[big] > 0, z[big], np.conj(z[big]))
        val = -1j * np.pi * zb + np.log1p(np.exp(2j * np.pi * zb)) - math.log(2.0)
        out[big] = np.where(y[big] > 0, val, np.conj(val))
    return out


def rho_values(mu: float, sign: int, sigma: float, taus) -> np.ndarray:
    """Vectorized rho^{+-}(sigma + i tau) over an array of tau values.

    Evaluated through the algebraically equivalent single-product form
        rho^+ = 2^{-2s}/pi * cosh(pi mu) * Gamma(1+s+i mu) Gamma(1+s-i mu),
        rho^- = -2^{-2s}/pi * cos(pi s) * Gamma(1+s+i mu) Gamma(1+s-i mu),
    (duplication plus reflection applied to the two gamma-quotient products),
    which avoids the catastrophic cancellation the two-product form suffers
    for |tau| outside the mu-window.
    """
    taus = np.asarray(taus, dtype=float)
    s = sigma + 1j * taus
    logs = (log_gamma_lanczos(1 + s + 1j * mu) + log_gamma_lanczos(1 + s - 1j * mu)
            - 2.0 * s * math.log(2.0) - math.log(math.pi))
    if sign == 1:
        # log cosh(pi mu), overflow-safe
        logs = logs + (math.pi * mu + math.log1p(math.exp(-2 * math.pi * mu))
                       - math.log(2.0))
        return np.exp(logs)
    return -np.exp(logs + _log_cos_pi(s))


def rho_values_two_product(mu: float, sign: int, sigma: float, taus) -> np.ndarray:
    """The transform factor as displayed: a difference of two gamma-quotient
    products.  Numerically reliable only where no large cancellation occurs;
    kept as an independent cross-check of rho_values."""
    taus = np.asarray(taus, dtype=float)
    s = sigma + 1j * taus
    g1 = np.exp(log_gamma_lanczos((1 + s + 1j * mu) / 2)
                + log_gamma_lanczos((1 + s - 1j * mu) / 2)
                - log_gamma_lanczos((-s + 1j * mu) / 2)
                - log_gamma_lanczos((-s - 1j * mu) / 2))
    g2 = np.exp(log_gamma_lanczos((2 + s + 1j * mu) / 2)
                + log_gamma_lanczos((2 + s - 1j * mu) / 2)
                - log_gamma_lanczos((1 - s + 1j * mu) / 2)
                - log_gamma_lanczos((1 - s - 1j * mu) / 2))
    return g1 + sign * g2


def rho_eval(factor: RhoFactor):
    """rho^{+-} at one point plus the growth-envelope ratio when defined.

    Returns (value, bound_ratio); bound_ratio is |rho| divided by
    (|tau+mu| |tau-mu|)^{sigma+1/2} and is None when either |tau +- mu| < 2.
    """
    value = complex(rho_values(factor.mu, factor.sign, factor.sigma,
                               np.array([factor.tau]))[0])
    ratio = None
    tp, tm = abs(factor.tau + factor.mu), abs(factor.tau - factor.mu)
    if tp >= 2.0 and tm >= 2.0:
        ratio = abs(value) / (tp * tm) ** (factor.sigma + 0.5)
    return value, ratio


# ----------------------------------------------------------------------
# oscillatory integrals
# ----------------------------------------------------------------------

@dataclass
class PhaseSpec:
    """One oscillatory integral: amplitude, phase and its two derivatives.

    support is the closed interval carrying the amplitude; Y, Z, H, R are the
    family's scale parameters (Z the support scale, H the phase height,
    R the oscillation parameter with H/Y^2 >= R >= 1 when claimed inert).
    """

    phase: callable
    dphase: callable
    d2phase: callable
    amp: callable
    support: tuple[float, float]
    Y: float = 1.0
    Z: float = 1.0
    H: float = 1.0
    R: float = 1.0

    def integrand(self, y):
        return self.amp(y) * np.exp(1j * self.phase(y))


NODES_PER_PERIOD = 10


def osc_integral(spec: PhaseSpec, abs_tol: float | None = None,
                 max_doublings: int = 12) -> complex:
    """Adaptive Gauss quadrature of the oscillatory integral.

    Panels are sized so that every period of the phase receives at least
    NODES_PER_PERIOD nodes, then doubled until two refinements agree to the
    absolute target (default 1e-10 * Z * max|amp|).
    """
    a, b = spec.support
    if not b > a:
        raise ValueError("empty support")
    probe = np.linspace(a, b, 257)
    amp_max = float(np.max(np.abs(spec.amp(probe))))
    if amp_max == 0.0:
        return 0.0 + 0.0j
    if abs_tol is None:
        abs_tol = 1e-10 * spec.Z * amp_max
    # total phase turns, estimated on the probe grid
    turns = float(np.trapz(np.abs(spec.dphase(probe)), probe)) / (2.0 * math.pi)
    order = 16
    panels = max(4, int(math.ceil(turns * NODES_PER_PERIOD / order)) + 2)
    nodes, weights = panel_nodes(a, b, panels, order)
    prev = np.sum(spec.integrand(nodes) * weights)
    for _ in range(max_doublings):
        panels *= 2
        nodes, weights = panel_nodes(a, b, panels, order)
        cur = np.sum(spec.integrand(nodes) * weights)
        if abs(cur - prev) < abs_tol:
            return cur
        prev = cur
    raise QuadratureError("oscillatory refinement did not converge "
                          f"(target {abs_tol:.2e}); pathological phase?")


def stationary_phase(spec: PhaseSpec) -> tuple[complex, float]:
    """Leading-order stationary value and the stationary point.

    Value: e^{i phase(y0)} amp(y0) sqrt(2 pi / |phase''(y0)|) e^{i pi/4 sgn}.
    y0 is located by bisection plus Newton polish to 1e-12 relative.
    """
    a, b = spec.support
    grid = np.linspace(a, b, 4097)
    d = spec.dphase(grid)
    signs = np.sign(d)
    idx = np.nonzero(np.diff(signs) != 0)[0]
    if len(idx) == 0:
        raise StationaryPointError("no stationary point: phase derivative "
                                   "does not change sign on the support")
    lo, hi = grid[idx[0]], grid[idx[0] + 1]
    flo = spec.dphase(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = spec.dphase(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-13 * max(abs(lo), abs(hi), 1.0):
            break
    y0 = 0.5 * (lo + hi)
    for _ in range(8):  # Newton polish
        d2 = spec.d2phase(y0)
        if d2 == 0:
            break
        step = spec.dphase(y0) / d2
        y0 -= step
        if abs(step) < 1e-14 * max(abs(y0), 1.0):
            break
    d2 = spec.d2phase(y0)
    if abs(d2) < 1e-300:
        raise StationaryPointError("phase second derivative vanishes at y0")
    lead = (spec.amp(y0) * cmath.exp(1j * spec.phase(y0))
            * math.sqrt(2.0 * math.pi / abs(d2))
            * cmath.exp(1j * math.copysign(math.pi / 4.0, d2)))
    return lead, float(y0)


def second_derivative_ratio(spec: PhaseSpec, lambda0: float, V0: float) -> float:
    """|integral| * sqrt(lambda0) / V0; the second-derivative test says O(1)."""
    if lambda0 <= 0:
        raise ValueError("lambda0 must be positive")
    if V0 == 0:
        return 0.0
    val = osc_integral(spec)
    return abs(val) * math.sqrt(lambda0) / V0
