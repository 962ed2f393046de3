"""Hecke eigenvalue tables: exact tau generation, ingestion, validation.

Tables are dense float arrays indexed from 1 (index 0 unused) holding the
weight-normalized coefficients.  The generated tau table is backed by exact
integers: tau(n) is computed as the q-expansion of q * prod(1-q^m)^24 using
the cube identity prod(1-q^m)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}, two exact
big-integer squarings (Kronecker substitution), and a signed digit decode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

KIM_SARNAK = 7.0 / 64.0
HECKE_TOL_INGESTED = 1e-6

# five ~2^31 primes; their product exceeds 2^151, comfortably above
# 2 * max |tau(m) tau(n)| for mn <= 2^21, so residue equality is equality.
_CHECK_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563)

_WORD_BITS = 64
_DIGIT_WORDS = 3
_DIGIT_BITS = _WORD_BITS * _DIGIT_WORDS  # base B = 2^192 per packed digit


class CoefficientError(ValueError):
    """Malformed, inconsistent, or out-of-capacity coefficient data."""


# ----------------------------------------------------------------------
# small arithmetic sieves
# ----------------------------------------------------------------------

def divisor_count_sieve(N: int) -> np.ndarray:
    """d(n) for 0 <= n <= N (entry 0 is 0)."""
    d = np.zeros(N + 1, dtype=np.int32)
    for c in range(1, N + 1):
        d[c::c] += 1
    return d


def smallest_prime_factor_sieve(N: int) -> np.ndarray:
    spf = np.zeros(N + 1, dtype=np.int64)
    spf[1] = 1
    ns = np.arange(N + 1, dtype=np.int64)
    for p in range(2, int(math.isqrt(N)) + 1):
        if spf[p] == 0:
            sl = spf[p * p::p]
            sl[sl == 0] = p
            spf[p] = p
    rest = spf == 0
    rest[0] = rest[1] = False
    spf[rest] = ns[rest]
    return spf


def unitary_prime_power_split(N: int, spf: np.ndarray | None = None):
    """For each n <= N: (p^a, n/p^a) with p = spf(n) and p^a || n."""
    if spf is None:
        spf = smallest_prime_factor_sieve(N)
    n = np.arange(N + 1, dtype=np.int64)
    p = spf.copy()
    pa = np.where(n >= 2, p, 1)
    rest = np.where(n >= 2, n // np.maximum(p, 1), 1)
    psafe = np.maximum(p, 1)
    active = (n >= 2) & (rest % psafe == 0)
    while np.any(active):
        pa[active] *= p[active]
        rest[active] //= p[active]
        active = active & (rest % psafe == 0)
    return pa, rest


# ----------------------------------------------------------------------
# exact tau by packed big-integer squarings
# ----------------------------------------------------------------------

def _cube_eta_sparse(N: int):
    """Exponents/coefficients of prod(1-q^m)^3 truncated at q^N."""
    k = np.arange(0, int((math.isqrt(8 * N + 1) + 1) // 2) + 2, dtype=np.int64)
    e = k * (k + 1) // 2
    keep = e <= N
    k, e = k[keep], e[keep]
    c = (2 * k + 1) * np.where(k % 2 == 0, 1, -1)
    return e, c


def _square_sparse(exps: np.ndarray, coefs: np.ndarray, N: int) -> np.ndarray:
    """Dense int64 coefficients of the square of a sparse series, mod q^{N+1}."""
    out = np.zeros(N + 1, dtype=np.int64)
    esum = exps[:, None] + exps[None, :]
    csum = coefs[:, None] * coefs[None, :]
    keep = esum <= N
    np.add.at(out, esum[keep], csum[keep])
    return out


def _pack_signed_words(words: np.ndarray, neg: np.ndarray) -> gmpy2.mpz:
    """Pack digit magnitudes (rows of 3 little-endian words) with signs."""
    pos = words.copy()
    pos[neg] = 0
    minus = words.copy()
    minus[~neg] = 0
    p = gmpy2.mpz(int.from_bytes(pos.astype("<u8").tobytes(), "little"))
    m = gmpy2.mpz(int.from_bytes(minus.astype("<u8").tobytes(), "little"))
    return p - m


def _pack_signed_int64(coefs: np.ndarray) -> gmpy2.mpz:
    words = np.zeros((len(coefs), _DIGIT_WORDS), dtype=np.uint64)
    words[:, 0] = np.abs(coefs).astype(np.uint64)
    return _pack_signed_words(words, coefs < 0)


def _decode_signed_digits(value: gmpy2.mpz, ndigits: int):
    """First ``ndigits`` signed base-2^192 digits of a nonnegative integer.

    Digits are centered into (-B/2, B/2) with single-pass carry correction;
    valid because every polynomial coefficient is far below B/2.
    """
    if value < 0:
        raise ValueError("packed value must be nonnegative")
    nbytes = ndigits * _DIGIT_BITS // 8
    buf = int(value & ((gmpy2.mpz(1) << (ndigits * _DIGIT_BITS)) - 1)).to_bytes(
        nbytes, "little")
    words = np.frombuffer(buf, dtype="<u8").reshape(ndigits, _DIGIT_WORDS).copy()
    neg = words[:, 2] >= np.uint64(1 << 63)
    carry = np.zeros(ndigits, dtype=np.uint64)
    carry[1:] = neg[:-1].astype(np.uint64)
    # ripple the +1 carry through the three words of each digit
    w0 = words[:, 0] + carry
    ovf = w0 < carry
    w1 = words[:, 1] + ovf
    ovf = w1 < ovf
    w2 = words[:, 2] + ovf
    words = np.stack([w0, w1, w2], axis=1)
    # magnitude of negative digits: two's complement within 192 bits
    nw = words[neg]
    nw = ~nw
    c0 = nw[:, 0] + np.uint64(1)
    o = c0 < nw[:, 0] if len(nw) else np.zeros(0, bool)
    c1 = nw[:, 1] + o
    o = c1 < nw[:, 1]
    c2 = nw[:, 2] + o
    words[neg] = np.stack([c0, c1, c2], axis=1)
    return words, neg


def _digits_to_float(words: np.ndarray, neg: np.ndarray) -> np.ndarray:
    val = (words[:, 0].astype(np.float64)
           + words[:, 1].astype(np.float64) * 2.0**64
           + words[:, 2].astype(np.float64) * 2.0**128)
    return np.where(neg, -val, val)


def _digits_mod(words: np.ndarray, neg: np.ndarray, p: int) -> np.ndarray:
    s64 = (1 << 64) % p
    s128 = (1 << 128) % p
    r = (words[:, 0] % np.uint64(p)).astype(np.int64)
    r = (r + (words[:, 1] % np.uint64(p)).astype(np.int64) * s64) % p
    r = (r + (words[:, 2] % np.uint64(p)).astype(np.int64) * s128) % p
    return np.where(neg, (-r) % p, r)


@dataclass
class TauTable:
    """Exact tau(n) for 1 <= n <= N as signed 192-bit digits."""

    N: int
    words: np.ndarray  # (N+1, 3) uint64, row n = |tau(n)|, row 0 unused
    neg: np.ndarray    # (N+1,) bool

    def tau(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise CoefficientError(f"tau table capacity {self.N} exceeded at n={n}")
        w = self.words[n]
        v = int(w[0]) + (int(w[1]) << 64) + (int(w[2]) << 128)
        return -v if self.neg[n] else v

    def lam_floats(self) -> np.ndarray:
        lam = np.empty(self.N + 1, dtype=np.float64)
        lam[0] = np.nan
        n = np.arange(1, self.N + 1, dtype=np.float64)
        lam[1:] = _digits_to_float(self.words[1:], self.neg[1:]) * n**-5.5
        return lam

    def residues(self, p: int) -> np.ndarray:
        r = _digits_mod(self.words, self.neg, p)
        r[0] = 0
        return r


def tau_exact_table(N: int) -> TauTable:
    """tau(n), n <= N, via q * (prod(1-q^m)^3)^8 with exact arithmetic."""
    if N < 1:
        raise CoefficientError("capacity must be >= 1")
    M = N - 1  # need coefficients of J^8 up to q^{N-1}
    e, c = _cube_eta_sparse(M)
    j2 = _square_sparse(e, c, M)                      # exact int64
    p2 = _pack_signed_int64(j2)
    j4w, j4n = _decode_signed_digits(p2 * p2, M + 1)  # truncate at q^M
    assert j4w[:, 2].max() == 0 and j4w[:, 1].max() < (1 << 3), "digit overflow"
    p4 = _pack_signed_words(j4w, j4n)
    j8w, j8n = _decode_signed_digits(p4 * p4, M + 1)
    words = np.zeros((N + 1, _DIGIT_WORDS), dtype=np.uint64)
    neg = np.zeros(N + 1, dtype=bool)
    words[1:] = j8w
    neg[1:] = j8n
    return TauTable(N=N, words=words, neg=neg)


def verify_tau_hecke_exact(table: TauTable) -> dict:
    """Exact multiplicativity + prime-power recursion for the whole table.

    Checks tau(n) = tau(p^a) tau(n/p^a) for every n (p = spf(n), p^a || n)
    and tau(p)tau(p^j) = tau(p^{j+1}) + p^11 tau(p^{j-1}) for all prime powers.
    Residues modulo five 31-bit primes; the modulus exceeds twice any value,
    so residue equality proves integer equality.
    """
    N = table.N
    spf = smallest_prime_factor_sieve(N)
    pa, rest = unitary_prime_power_split(N, spf)
    composite = (np.arange(N + 1) >= 2) & (rest > 1)
    n_idx = np.nonzero(composite)[0]

    is_prime = spf[2:] == np.arange(2, N + 1)
    primes = np.nonzero(is_prime)[0] + 2
    pp_p, pp_j = [], []
    for p in primes:
        if p * p > N:
            break
        q = p * p
        j = 1
        while q * p <= N:
            q *= p
            j += 1
        pp_p.append(np.full(j, p))
        pp_j.append(np.arange(1, j + 1))
    if pp_p:
        pp_p = np.concatenate(pp_p)
        pp_j = np.concatenate(pp_j)
    else:
        pp_p = np.zeros(0, dtype=np.int64)
        pp_j = np.zeros(0, dtype=np.int64)

    checked_mult = len(n_idx)
    checked_pp = len(pp_p)
    for p in _CHECK_PRIMES:
        r = table.residues(p)
        if not np.all(r[n_idx] == r[pa[n_idx]] * r[rest[n_idx]] % p):
            raise CoefficientError("exact multiplicativity violated")
        if checked_pp:
            pj = pp_p**pp_j % p  # p^j fits int64 (p^j <= N)
            pow11 = np.array([pow(int(q), 11, p) for q in np.unique(pp_p)])
            lut = dict(zip(np.unique(pp_p).tolist(), pow11.tolist()))
            p11 = np.array([lut[int(q)] for q in pp_p], dtype=np.int64)
            lhs = r[pp_p] * r[pp_p**pp_j] % p
            rhs = (r[pp_p**(pp_j + 1)] + p11 * r[pp_p**(pp_j - 1)]) % p
            if not np.all(lhs == rhs):
                raise CoefficientError("exact Hecke recursion violated")
    return {"multiplicative_pairs": checked_mult, "prime_power_relations": checked_pp,
            "primes_used": len(_CHECK_PRIMES)}


# ----------------------------------------------------------------------
# the form object
# ----------------------------------------------------------------------

@dataclass
class CuspForm:
    """A holomorphic or Maass Hecke eigenform with a dense lambda(n) table."""

    kind: str                       # "holomorphic" | "maass"
    lam: np.ndarray                 # float64, lam[0] = nan
    N: int
    source: str                     # "generated" | "ingested"
    weight: int | None = None       # holomorphic only, even, >= 12
    mu: float | None = None         # maass only, > 0
    parity: int | None = None       # maass only, 0 even / 1 odd
    tau_table: TauTable | None = field(default=None, repr=False)
    _prefix_sq: np.ndarray | None = field(default=None, repr=False)
    _prefix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("holomorphic", "maass"):
            raise CoefficientError(f"unknown form kind {self.kind!r}")
        if self.kind == "holomorphic":
            if self.weight is None or self.weight % 2 or self.weight < 12:
                raise CoefficientError("holomorphic weight must be an even integer >= 12")
        else:
            if self.mu is None or self.mu <= 0:
                raise CoefficientError("spectral parameter must be positive")
            if self.parity not in (0, 1):
                raise CoefficientError("parity must be 0 or 1")
        if abs(self.lam[1] - 1.0) > 1e-12:
            raise CoefficientError("lambda(1) != 1")

    @property
    def spectral_lambda(self) -> float:
        """1/4 + mu^2; for holomorphic forms the proxy with mu = (k-1)/2."""
        if self.kind == "maass":
            return 0.25 + self.mu**2
        return 0.25 + ((self.weight - 1) / 2.0) ** 2

    @property
    def coefficient_exponent(self) -> float:
        """Exponent theta in |lambda(n)| <= d(n) n^theta."""
        return 0.0 if self.kind == "holomorphic" else KIM_SARNAK

    def prefix_sums(self):
        if self._prefix is None:
            self._prefix = np.concatenate([[0.0], np.cumsum(self.lam[1:])])
        return self._prefix

    def prefix_sums_sq(self):
        if self._prefix_sq is None:
            self._prefix_sq = np.concatenate([[0.0], np.cumsum(self.lam[1:] ** 2)])
        return self._prefix_sq


def generate_tau(N: int) -> CuspForm:
    """The weight-12 form with lambda(n) = tau(n) / n^{11/2}, exact backing."""
    table = tau_exact_table(N)
    return CuspForm(kind="holomorphic", lam=table.lam_floats(), N=N,
                    source="generated", weight=12, tau_table=table)


def hecke_extend(prime_values: dict[int, float], N: int) -> np.ndarray:
    """Fill lambda(n) for n <= N from lambda(p) via Hecke relations.

    prime_values maps every prime p <= N to lambda(p); missing primes raise.
    """
    lam = np.empty(N + 1)
    lam[0] = np.nan
    lam[1] = 1.0
    spf = smallest_prime_factor_sieve(N)
    for n in range(2, N + 1):
        p = int(spf[n])
        if n == p:
            try:
                lam[n] = prime_values[p]
            except KeyError:
                raise CoefficientError(f"missing prime value lambda({p})") from None
        else:
            m = n // p
            if m % p:  # coprime split
                lam[n] = lam[p] * lam[m]
            else:
                # n = p^j * rest with j >= 2; peel the full prime power
                pa = p * p
                rest = n // pa
                while rest % p == 0:
                    pa *= p
                    rest //= p
                if rest > 1:
                    lam[n] = lam[pa] * lam[rest]
                else:
                    lam[n] = lam[p] * lam[n // p] - lam[n // (p * p)]
    return lam


# ----------------------------------------------------------------------
# validation of float tables
# ----------------------------------------------------------------------

def hecke_residuals(lam: np.ndarray, limit: int | None = None) -> dict:
    """Max float residuals of multiplicativity and the prime-power recursion."""
    N = len(lam) - 1 if limit is None else min(limit, len(lam) - 1)
    spf = smallest_prime_factor_sieve(N)
    pa, rest = unitary_prime_power_split(N, spf)
    n = np.arange(N + 1)
    composite = (n >= 2) & (rest > 1)
    mult = 0.0
    if np.any(composite):
        mult = float(np.max(np.abs(
            lam[n[composite]] - lam[pa[composite]] * lam[rest[composite]])))
    rec = 0.0
    primes = np.nonzero(spf[2:] == np.arange(2, N + 1))[0] + 2
    for p in primes:
        if p * p > N:
            break
        powers = [1, int(p)]
        while powers[-1] * p <= N:
            powers.append(powers[-1] * p)
        for j in range(1, len(powers) - 1):
            r = abs(lam[p] * lam[powers[j]] - lam[powers[j + 1]] - lam[powers[j - 1]])
            rec = max(rec, float(r))
    return {"multiplicativity": mult, "recursion": rec, "N": N}


def coefficient_bound_excess(form: CuspForm) -> float:
    """max(|lambda(n)| - d(n) n^theta); <= 0 means the bound holds pointwise."""
    d = divisor_count_sieve(form.N).astype(np.float64)
    n = np.arange(form.N + 1, dtype=np.float64)
    bound = d[1:] * n[1:] ** form.coefficient_exponent
    return float(np.max(np.abs(form.lam[1:]) - bound))


def rankin_selberg_ratio(form: CuspForm, X: int) -> float:
    """(1/X) * sum_{n<=X} lambda(n)^2."""
    if not 1 <= X <= form.N:
        raise CoefficientError(f"X={X} exceeds table capacity {form.N}")
    return float(form.prefix_sums_sq()[X] / X)


# ----------------------------------------------------------------------
# coefficient file format
# ----------------------------------------------------------------------

def save_form(form: CuspForm, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"kind {form.kind}\n")
        if form.kind == "maass":
            fh.write(f"mu {form.mu!r}\n")
            fh.write(f"parity {form.parity}\n")
        else:
            fh.write(f"weight {form.weight}\n")
        lines = [f"{n} {form.lam[n]:.9e}" for n in range(1, form.N + 1)]
        fh.write("\n".join(lines))
        fh.write("\n")


def ingest_form(path, hecke_tol: float = HECKE_TOL_INGESTED) -> CuspForm:
    """Load and validate a coefficient file (see package docs for the format).

    Raises CoefficientError on: malformed/missing header fields, lambda(1) != 1,
    gaps or non-increasing n, Hecke residual above tolerance, or a pointwise
    coefficient-bound violation.
    """
    kind = weight = mu = parity = None
    ns, vals = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "kind":
                kind = parts[1] if len(parts) == 2 else None
            elif parts[0] == "weight":
                weight = int(parts[1])
            elif parts[0] == "mu":
                mu = float(parts[1])
            elif parts[0] == "parity":
                parity = int(parts[1])
            else:
                if len(parts) != 2:
                    raise CoefficientError(f"malformed line: {line!r}")
                ns.append(int(parts[0]))
                vals.append(float(parts[1]))
    if kind not in ("maass", "holomorphic"):
        raise CoefficientError("malformed header: missing or bad 'kind'")
    if kind == "maass" and (mu is None or parity is None):
        raise CoefficientError("malformed header: maass form needs mu and parity")
    if kind == "holomorphic" and weight is None:
        raise CoefficientError("malformed header: holomorphic form needs weight")
    if not ns or ns[0] != 1:
        raise CoefficientError("coefficients must start at n=1")
    if ns != list(range(1, len(ns) + 1)):
        raise CoefficientError("coefficient indices must be contiguous from 1")
    if abs(vals[0] - 1.0) > 1e-9:
        raise CoefficientError("lambda(1) != 1")
    N = len(ns)
    lam = np.empty(N + 1)
    lam[0] = np.nan
    lam[1:] = vals
    form = CuspForm(kind=kind, lam=lam, N=N, source="ingested",
                    weight=weight, mu=mu, parity=parity)
    res = hecke_residuals(lam)
    if max(res["multiplicativity"], res["recursion"]) > hecke_tol:
        raise CoefficientError(
            f"Hecke residual {max(res['multiplicativity'], res['recursion']):.3e} "
            f"above tolerance {hecke_tol:g} (corrupted data?)")
    excess = coefficient_bound_excess(form)
    if excess > 1e-6:
        raise CoefficientError(f"coefficient bound violated by {excess:.3e}")
    form.hecke_report = res
    return form
