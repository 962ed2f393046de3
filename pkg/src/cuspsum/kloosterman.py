"""Kloosterman sums S(m,n;c) with a Weil-bound monitor.

The fast path enumerates units mod c once, computes inverses by binary
exponentiation with the Carmichael exponent, and evaluates whole (m,n) grids
as a complex matrix product e(mx/c) @ e(n xbar/c).  Sums are real after the
x -> -x symmetry; the imaginary residue is asserted below 1e-9 * phi(c).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .arith import divisor_count, factorize

C_CAP = 10**7


class KloostermanError(ValueError):
    pass


def _carmichael(c: int) -> int:
    lam = 1
    for p, a in factorize(c):
        if p == 2 and a >= 3:
            piece = 2 ** (a - 2)
        else:
            piece = (p - 1) * p ** (a - 1)
        lam = lam * piece // math.gcd(lam, piece)
    return lam


@lru_cache(maxsize=256)
def unit_inverses(c: int):
    """(units mod c, their inverses) as int64 arrays, via x^(lambda(c)-1)."""
    if c == 1:
        return np.array([0], dtype=np.int64), np.array([0], dtype=np.int64)
    x = np.arange(c, dtype=np.int64)
    units = x[np.gcd(x, c) == 1]
    e = _carmichael(c) - 1
    inv = np.ones_like(units)
    base = units.copy()
    while e:
        if e & 1:
            inv = inv * base % c
        base = base * base % c
        e >>= 1
    return units, inv


def kloosterman_grid(ms, ns, c: int) -> np.ndarray:
    """S(m,n;c) for all (m,n) in ms x ns: real-valued array (len(ms), len(ns))."""
    if c < 1:
        raise KloostermanError("modulus must be >= 1")
    if c > C_CAP:
        raise KloostermanError(f"modulus cap {C_CAP} exceeded")
    ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    units, inv = unit_inverses(c)
    tw = 2.0 * np.pi / c
    a = np.exp(1j * tw * ((ms[:, None] % c) * units[None, :] % c))
    b = np.exp(1j * tw * ((ns[:, None] % c) * inv[None, :] % c))
    s = a @ b.T
    resid = np.max(np.abs(s.imag)) if s.size else 0.0
    if resid > 1e-9 * max(len(units), 1):
        raise KloostermanError(f"imaginary residue {resid:.2e} too large at c={c}")
    return s.real


def kloosterman_sum(m: int, n: int, c: int) -> float:
    """S(m,n;c) = sum over units x mod c of e((m x + n xbar)/c)."""
    return float(kloosterman_grid([m], [n], c)[0, 0])


def kloosterman_bruteforce(m: int, n: int, c: int) -> float:
    """Definitional double loop: inverse found by scanning, phases accumulated."""
    if c == 1:
        return 1.0
    total_re = 0.0
    total_im = 0.0
    for x in range(c):
        if math.gcd(x, c) != 1:
            continue
        for y in range(c):
            if (x * y) % c == 1:
                break
        theta = 2.0 * math.pi * ((m * x + n * y) % c) / c
        total_re += math.cos(theta)
        total_im += math.sin(theta)
    assert abs(total_im) <= 1e-9 * c
    return total_re


def weil_ratio(m: int, n: int, c: int) -> float:
    """|S(m,n;c)| / (d(c) gcd(m,n,c)^{1/2} c^{1/2}); the Weil bound says <= 1."""
    s = kloosterman_sum(m, n, c)
    g = math.gcd(math.gcd(abs(m), abs(n)), c)
    if g == 0:
        g = c
    return abs(s) / (divisor_count(c) * math.sqrt(g) * math.sqrt(c))


def weil_scan(c_max: int, pairs_per_c: int, seed: int = 1) -> np.ndarray:
    """Max Weil ratio per modulus over random (m,n) grids; rows (c, max_ratio)."""
    rng = np.random.default_rng(seed)
    out = np.empty((c_max, 2))
    for c in range(1, c_max + 1):
        ms = rng.integers(-10 * c, 10 * c + 1, size=pairs_per_c)
        ns = rng.integers(-10 * c, 10 * c + 1, size=pairs_per_c)
        units, inv = unit_inverses(c)
        tw = 2.0 * np.pi / c
        a = np.exp(1j * tw * ((ms[:, None] % c) * units[None, :] % c))
        b = np.exp(1j * tw * ((ns[:, None] % c) * inv[None, :] % c))
        s = np.abs(np.einsum("iu,iu->i", a, b).real)
        g = np.gcd(np.gcd(np.abs(ms), np.abs(ns)), c)
        g[g == 0] = c
        ratios = s / (divisor_count(c) * np.sqrt(g) * math.sqrt(c))
        out[c - 1] = (c, ratios.max())
    return out
