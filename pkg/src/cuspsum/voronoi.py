"""Poisson summation and the GL(2) Voronoi formula.

Both sides of the summation formula are evaluated independently: the left
side by direct summation against the bump, the right side through the
contour transform Psi_{+-} (Maass forms) or through the classical Bessel-J
kernel (holomorphic forms, the exactness anchor with exact tau data).

The Psi transform evaluates

    Psi_{+-}(x) = (1/4 pi^2) Int (pi^2 x)^{-sigma-i tau}
                   rho^{+-}(sigma+i tau) phitilde(-sigma-i tau) d tau

on a shared Gauss grid in tau; the Mellin transform of the bump and the
gamma-quotient factor are computed once per bump and reused for every x.
Truncation of the tau integral is certified by the integration-by-parts
envelope of the Mellin transform times the polynomial envelope of rho.

Parity: the displayed transform pair is the even-form one.  For odd forms
the same-twist branch (Psi_+, the K-Bessel side) flips sign; this factor
(-1)^parity is applied by voronoi_sides, not by rho itself, and was
validated numerically against both an even and an odd eigenform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .bumps import Plateau, v_profile
from .coefficients import CuspForm
from .oscillatory import PhaseSpec, rho_values, stationary_phase
from .quadrature import panel_nodes

TWO_PI = 2.0 * math.pi


class VoronoiError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# test bumps and their Mellin transforms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TestBump:
    """phi(u) = V(u/X) e(-u * twist); V supported in (3/4, 9/4), 1 on [1, 2]."""

    X: float
    twist: float = 0.0
    V: Plateau = field(default_factory=v_profile)

    @property
    def support(self) -> tuple[float, float]:
        return (self.V.a * self.X, self.V.b * self.X)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        vals = self.V(u / self.X).astype(complex)
        if self.twist:
            vals = vals * np.exp(-2j * math.pi * self.twist * u)
        return vals

    def deriv_sup(self, j: int) -> float:
        """sup |d^j/du^j V(u/X)| (twist excluded), for envelope certificates."""
        grid = np.linspace(self.V.a, self.V.b, 20001)
        return float(np.max(np.abs(self.V(grid, j)))) / self.X**j


def _mellin_nodes(bump: TestBump, max_abs_tau: float, order: int = 16):
    a, b = bump.support
    osc = (abs(bump.twist) * (b - a)
           + max_abs_tau * math.log(b / a) / TWO_PI) + 1.0
    panels = max(8, int(math.ceil(osc * 12 / order)))
    return panel_nodes(a, b, panels, order)


def mellin_bump(bump: TestBump, s) -> np.ndarray:
    """phitilde(s) = Int phi(u) u^{s-1} du, vectorized over s."""
    s = np.asarray(s, dtype=complex)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    nodes, weights = _mellin_nodes(bump, float(np.max(np.abs(s.imag))))
    base = bump(nodes) * weights
    ln = np.log(nodes)
    out = np.empty(len(s), dtype=complex)
    chunk = max(1, 4_000_000 // len(nodes))
    for i in range(0, len(s), chunk):
        sk = s[i:i + chunk]
        out[i:i + chunk] = (np.exp((sk[:, None] - 1.0) * ln[None, :]) * base).sum(axis=1)
    return out[0] if scalar else out


def mellin_ibp_envelope(bump: TestBump, sigma: float, j: int) -> float:
    """M_j with |phitilde(-sigma-i tau)| <= M_j / prod_{k<j} |s-k| along the line.

    M_j = Int |d^j/du^j phi(u)| u^{j-sigma-1} du, by Leibniz over the twist.
    """
    a, b = bump.support
    nodes, weights = panel_nodes(a, b, 64, 16)
    tw = TWO_PI * abs(bump.twist)
    total = np.zeros_like(nodes)
    for i in range(j + 1):
        total = total + (math.comb(j, i) * tw**i
                         * np.abs(bump.V(nodes / bump.X, j - i)) / bump.X ** (j - i))
    return float(np.sum(weights * total * nodes ** (j - sigma - 1.0)))


# ----------------------------------------------------------------------
# the Psi transform
# ----------------------------------------------------------------------

@dataclass
class PsiQuery:
    """One evaluation target for the contour transform."""

    x: float
    c: int
    zeta: float            # twist rate of the bump per unit u
    form: CuspForm
    bump: TestBump
    sigma: float = 0.0
    t_max: float | None = None

    def __post_init__(self):
        if self.sigma <= -1.0:
            raise VoronoiError("contour must stay right of sigma = -1")


class PsiEvaluator:
    """Shared-grid evaluator of Psi_{+-} for one (form, bump, sigma).

    rho and the Mellin transform live on a fixed tau grid; each x only
    contributes the twist (pi^2 x)^{-i tau}, so batches of x are one matrix
    product.  The grid extends until the analytic tail certificate falls
    below the requested absolute tolerance.
    """

    def __init__(self, form: CuspForm, bump: TestBump, sigma: float = 0.0,
                 abs_tol: float = 1e-9, t_max: float | None = None,
                 x_range: tuple[float, float] = (1.0 / 36.0, 50.0)):
        self.form = form
        self.bump = bump
        self.sigma = float(sigma)
        self.abs_tol = abs_tol
        self.x_range = x_range
        mu = form.mu if form.kind == "maass" else (form.weight - 1) / 2.0
        self.mu = float(mu)
        r_scale = abs(bump.twist) * bump.X
        T = t_max if t_max is not None else 10.0 * max(r_scale, self.mu) + 50.0
        while self._tail_bound(T) > abs_tol:
            T *= 2.0
            if T > 2e5:
                raise VoronoiError("tau truncation certificate will not close")
        self.T = T
        # phase rate along the line: ln(pi^2 x) + ln(u-scale) + d arg(rho)/d tau
        rate = (abs(math.log(math.pi**2 * max(x_range[1], 1e-3)))
                + abs(math.log(2.25 * bump.X)) + math.log(max(T, 3.0)) + 2.0)
        panels = max(64, int(math.ceil(2.0 * T * rate / 8.0)))
        self.nodes, self.weights = panel_nodes(-T, T, panels, 16)
        self.mell = mellin_bump(bump, -self.sigma - 1j * self.nodes)
        self.rho = {s: rho_values(self.mu, s, self.sigma, self.nodes)
                    for s in (1, -1)}

    def _tail_bound(self, T: float) -> float:
        """Envelope of the |tau| > T remainder over the declared x range."""
        sigma = self.sigma
        x_lo, x_hi = self.x_range
        xfac = max((math.pi**2 * x_lo) ** (-sigma), (math.pi**2 * x_hi) ** (-sigma))
        best = math.inf
        for j in (4, 6, 8, 10):
            if T <= 2 * j or j - 2 * sigma - 2 <= 0:
                continue
            Mj = mellin_ibp_envelope(self.bump, sigma, j)
            c_rho = 2.0 ** (1 - 2 * sigma) * 1.2
            tail = (2.0 * xfac * c_rho * Mj
                    * T ** (2 * sigma + 2 - j) / (j - 2 * sigma - 2))
            best = min(best, tail / (4 * math.pi**2))
        return best

    def psi_many(self, xs, sign: int) -> np.ndarray:
        """Psi_{sign}(x) for an array of x > 0."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        pref = (math.pi ** 2 * xs) ** (-self.sigma) / (4.0 * math.pi ** 2)
        base = self.rho[sign] * self.mell * self.weights
        out = np.empty(len(xs), dtype=complex)
        lnx = np.log(math.pi ** 2 * xs)
        chunk = max(1, 6_000_000 // len(self.nodes))
        for i in range(0, len(xs), chunk):
            phase = np.exp(-1j * lnx[i:i + chunk, None] * self.nodes[None, :])
            out[i:i + chunk] = phase @ base
        return pref * out

    def psi(self, x: float, sign: int) -> complex:
        return complex(self.psi_many([x], sign)[0])


def psi_eval(q: PsiQuery, sign: int, abs_tol: float = 1e-9) -> tuple[complex, float]:
    """Psi_{sign}(x) plus the tau-tail bound actually achieved."""
    bump = q.bump if q.zeta == q.bump.twist else TestBump(
        X=q.bump.X, twist=q.zeta, V=q.bump.V)
    ev = PsiEvaluator(q.form, bump, sigma=q.sigma, abs_tol=abs_tol, t_max=q.t_max,
                      x_range=(min(q.x, 1.0 / q.c**2), max(q.x, 1.0)))
    tail = ev._tail_bound(ev.T)
    if tail > abs_tol:
        raise VoronoiError("tail estimate exceeds accuracy target; raise t_max")
    return ev.psi(q.x, sign), tail


# ----------------------------------------------------------------------
# both sides of the summation formula
# ----------------------------------------------------------------------

def _modinv(a: int, c: int) -> int:
    g, x, _ = _xgcd(a % c, c)
    if g != 1:
        raise VoronoiError(f"gcd({a},{c}) != 1")
    return x % c


def _xgcd(a: int, b: int):
    if b == 0:
        return a, 1, 0
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def voronoi_lhs(form: CuspForm, a: int, c: int, bump: TestBump) -> complex:
    lo, hi = bump.support
    ms = np.arange(max(1, int(math.floor(lo))), int(math.ceil(hi)) + 1)
    if ms.size and ms[-1] > form.N:
        raise VoronoiError("coefficient table does not cover the bump support")
    lam = form.lam[ms]
    return complex(np.sum(lam * np.exp(2j * math.pi * a * ms / c) * bump(ms)))


def voronoi_rhs_maass(form: CuspForm, a: int, c: int, bump: TestBump,
                      sigma: float = 0.0, rel_tol: float = 1e-7,
                      m_cap: int = 6000, lhs_scale: float | None = None):
    """c * sum_{+-} sum_m (lambda(m)/m) e(+-abar m/c) Psi_{+-}(m/c^2).

    The + branch carries (-1)^parity.  Truncation: consecutive blocks of m
    are added until a block contributes below rel_tol * scale.
    """
    if form.kind != "maass":
        raise VoronoiError("maass right side needs a maass form")
    abar = 0 if c == 1 else _modinv(a, c)
    eps_f = -1.0 if form.parity == 1 else 1.0
    scale = abs(lhs_scale) if lhs_scale else max(1.0, bump.X ** 0.5)
    r = abs(bump.twist) * bump.X
    mu = form.mu
    support_end = 8.0 * (max(r * r, mu * mu) + bump.X) / bump.X  # in x = m/c^2
    ev = PsiEvaluator(form, bump, sigma=sigma, abs_tol=rel_tol * scale * 0.01,
                      x_range=(1.0 / c**2, support_end))
    total = 0.0 + 0.0j
    block = 64
    m_lo = 1
    terms = 0
    m_floor = support_end * c**2 / 2.0
    while m_lo <= m_cap:
        ms = np.arange(m_lo, min(m_lo + block, m_cap + 1))
        if ms[-1] > form.N:
            raise VoronoiError("coefficient table too short for the dual sum")
        lam_over_m = form.lam[ms] / ms
        xs = ms / c**2
        contrib = 0.0 + 0.0j
        for sign in (1, -1):
            psis = ev.psi_many(xs, sign)
            twist = np.exp(2j * math.pi * sign * abar * ms / c)
            branch = np.sum(lam_over_m * twist * psis)
            if sign == 1:
                branch *= eps_f
            contrib += branch
        total += contrib
        terms += len(ms)
        if abs(contrib) < rel_tol * scale * 0.1 and m_lo > m_floor:
            break
        m_lo += block
    else:
        raise VoronoiError("dual sum did not converge within the m cap")
    return c * total, terms


def voronoi_rhs_holomorphic(form: CuspForm, a: int, c: int, bump: TestBump,
                            rel_tol: float = 1e-9, m_cap: int = 20000,
                            lhs_scale: float | None = None):
    """Bessel-kernel right side for weight-k forms:

    sum_n lam(n) e(an/c) phi(n)
      = (2 pi i^k / c) sum_m lam(m) e(-abar m/c)
                        Int phi(x) J_{k-1}(4 pi sqrt(mx)/c) dx.

    (Derived from the completed functional equation together with the
    Bessel-Mellin pair; normalized coefficients appear on both sides.)
    """
    if form.kind != "holomorphic":
        raise VoronoiError("holomorphic right side needs a holomorphic form")
    k = form.weight
    abar = 0 if c == 1 else _modinv(a, c)
    lo, hi = bump.support
    scale = abs(lhs_scale) if lhs_scale else max(1.0, bump.X ** 0.5)
    ikf = 1j ** (k % 4)

    total = 0.0 + 0.0j
    block = 64
    n_lo = 1
    terms = 0
    while n_lo <= m_cap:
        ns = np.arange(n_lo, min(n_lo + block, m_cap + 1))
        if ns[-1] > form.N:
            raise VoronoiError("coefficient table too short for the dual sum")
        # oscillation count of J_{k-1}(4 pi sqrt(n x)/c) over the support
        osc = (2.0 * math.sqrt(ns[-1]) * (math.sqrt(hi) - math.sqrt(lo)) / c
               + abs(bump.twist) * (hi - lo) + 8)
        panels = max(16, int(osc * 12 / 16))
        nodes, weights = panel_nodes(lo, hi, panels, 16)
        gx = bump(nodes) * weights
        args = 4.0 * math.pi * np.sqrt(np.outer(ns, nodes)) / c
        kernels = jv(k - 1, args) @ gx
        contrib = np.sum(form.lam[ns] * np.exp(-2j * math.pi * abar * ns / c)
                         * kernels)
        total += contrib
        terms += len(ns)
        if abs(contrib) < rel_tol * scale * 0.05 and n_lo * bump.X > (k * c) ** 2:
            break
        n_lo += block
    else:
        raise VoronoiError("dual sum did not converge within the n cap")
    return (TWO_PI * ikf / c) * total, terms


def voronoi_sides(form: CuspForm, a: int, c: int, bump: TestBump,
                  sigma: float = 0.0, rel_tol: float = 1e-7):
    """(lhs, rhs, dual terms used) for the summation formula."""
    if c < 1 or math.gcd(a % c if c > 1 else 0, c) != 1 and c > 1:
        raise VoronoiError("need gcd(a, c) = 1")
    lhs = voronoi_lhs(form, a, c, bump)
    if form.kind == "maass":
        rhs, terms = voronoi_rhs_maass(form, a, c, bump, sigma=sigma,
                                       rel_tol=rel_tol, lhs_scale=abs(lhs))
    else:
        rhs, terms = voronoi_rhs_holomorphic(form, a, c, bump,
                                             rel_tol=rel_tol, lhs_scale=abs(lhs))
    return lhs, rhs, terms


# ----------------------------------------------------------------------
# V-dagger and the regime classifier
# ----------------------------------------------------------------------

def vdagger(r: float, s: complex, V: Plateau | None = None) -> complex:
    """V-dagger(r, s) = Int V(x) e(-rx) x^{s-1} dx by oscillation-aware quadrature."""
    V = V or v_profile()
    a, b = V.support
    s = complex(s)
    osc = abs(r) * (b - a) + abs(s.imag) * math.log(b / a) / TWO_PI + 1
    panels = max(8, int(osc * 12 / 16))
    nodes, weights = panel_nodes(a, b, panels, 16)
    vals = (V(nodes) * np.exp(-2j * math.pi * r * nodes)
            * np.exp((s - 1.0) * np.log(nodes)))
    return complex(np.sum(weights * vals))


def vdagger_asymptotic(r: float, sigma: float, tau: float,
                       V: Plateau | None = None) -> tuple[complex, float]:
    """Stationary-phase branch of V-dagger(r, -sigma-i tau).

    Valid for r >> 1, tau < 0 and |tau| of matching size 2 pi r * (3/4, 9/4);
    the leading constant comes from one stationary-phase call on the phase
    -2 pi r u - tau log u.
    """
    V = V or v_profile()
    if r < 1.0 or tau >= 0:
        raise VoronoiError("asymptotic branch needs r >= 1 and tau < 0")
    u0 = -tau / (TWO_PI * r)
    a, b = V.support
    if not a < u0 < b:
        raise VoronoiError("stationary point outside the bump support")
    spec = PhaseSpec(
        phase=lambda u: -TWO_PI * r * u - tau * np.log(u),
        dphase=lambda u: -TWO_PI * r - tau / u,
        d2phase=lambda u: tau / u**2,
        amp=lambda u: V(u) * u ** (-sigma - 1.0),
        support=(a, b), Z=1.0, H=abs(tau), R=abs(tau))
    return stationary_phase(spec)


@dataclass(frozen=True)
class RegimeResult:
    tag: str           # "1a", "1b", "2", "3"
    r: float
    in_support: bool
    bound: float
    support_window: tuple[float, float] | None


def regime_classify(x: float, c: int, zeta: float, X: float, C: float,
                    mu: float, eps: float = 0.05) -> RegimeResult:
    """Place (x, c, zeta) in the transform's decay regimes; bound included.

    Regime 3: r below X^eps (no oscillation gain): support xX << mu^{2+eps},
    bound (xX)^{1/2+eps}.  Regimes 1a/1b: r inside the mu window, split by
    whether xX clears mu^{1+eps}.  Regime 2: r outside the mu window, support
    x ~ max(r^2, mu^2)/X, bound (xX)^{1/2}.
    """
    r = zeta * X / (c * C)
    xX = x * X
    if r <= X**eps:
        tag = "3"
        inside = xX <= mu ** (2.0 + eps)
        bound = xX ** (0.5 + eps) if inside else 0.0
        window = (0.0, mu ** (2.0 + eps) / X)
    elif mu ** (1.0 - eps) <= r <= mu ** (1.0 + eps):
        if xX <= mu ** (1.0 + eps):
            tag, inside = "1a", True
            bound = (r * xX) ** 0.5
            window = (0.0, mu ** (1.0 + eps) / X)
        elif xX <= r * mu ** (1.0 + eps):
            tag, inside = "1b", True
            bound = xX ** 0.5
            window = (0.0, r * mu ** (1.0 + eps) / X)
        else:
            tag, inside, bound = "1b", False, 0.0
            window = (0.0, r * mu ** (1.0 + eps) / X)
    else:
        tag = "2"
        peak = max(r * r, mu * mu) / X
        inside = 0.25 * peak <= x <= 4.0 * peak
        bound = xX ** 0.5 if inside else 0.0
        window = (0.25 * peak, 4.0 * peak)
    return RegimeResult(tag=tag, r=r, in_support=inside, bound=bound,
                        support_window=window)


# ----------------------------------------------------------------------
# Poisson summation over a progression
# ----------------------------------------------------------------------

def poisson_check(f, fhat, beta: int, c: int, decay_tol: float = 1e-14,
                  span: int = 10000) -> tuple[complex, complex]:
    """(lhs, rhs) of Poisson summation restricted to n = beta mod c.

    f and fhat are the function and its Fourier transform (Schwartz class);
    both sums are truncated where the summands drop below decay_tol.
    """
    ns = beta + c * np.arange(-span, span + 1)
    fv = np.asarray(f(ns), dtype=complex)
    if max(abs(fv[0]), abs(fv[-1])) > decay_tol:
        raise VoronoiError("lhs truncation span too small")
    lhs = complex(np.sum(fv))
    ks = np.arange(-span, span + 1)
    fh = np.asarray(fhat(ks / c), dtype=complex)
    if max(abs(fh[0]), abs(fh[-1])) > decay_tol:
        raise VoronoiError("rhs truncation span too small")
    rhs = complex(np.sum(fh * np.exp(2j * math.pi * ks * beta / c)) / c)
    return lhs, rhs
