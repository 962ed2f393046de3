"""Elementary multiplicative arithmetic shared across modules."""

from __future__ import annotations

import math
from functools import lru_cache


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization ((p, multiplicity), ...) by trial division."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            while n % d == 0:
                n //= d
                a += 1
            out.append((d, a))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def divisor_count(n: int) -> int:
    return math.prod(a + 1 for _, a in factorize(n)) if n > 1 else 1


def euler_phi(n: int) -> int:
    phi = n
    for p, _ in factorize(n):
        phi -= phi // p
    return phi


def mobius(n: int) -> int:
    f = factorize(n)
    if any(a > 1 for _, a in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, a in factorize(n):
        ds = [d * p**k for d in ds for k in range(a + 1)]
    return sorted(ds)


def ramanujan_sum(n: int, c: int) -> int:
    """c_c(n) = sum over units a mod c of e(an/c), by the Mobius/gcd formula."""
    if c == 1:
        return 1
    g = math.gcd(abs(n), c) if n != 0 else c
    return sum(d * mobius(c // d) for d in divisors(g) if (c // d) >= 1)
