"""Statistics of the iterated totients.

The central object is the additive weight

    w(n) = sum over p | n, r | p-1, q <= Q of v_q(r-1) log q

(p, r, q all prime) which tracks the small-prime content of phi(phi(n)).
Everything here keeps an exact integer backbone: weights are integer
coefficient vectors over {log q : q <= Q} and only the final readout
multiplies by floating-point logs, so independent evaluation orders can be
compared exactly before any rounding enters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .arith import FactoredNumber, _pminus1, euler_phi, factor, valuation
from .errors import RangeError

# e^{e^e} is about 3.81e6; the guard is deliberately a round number above it
RATIO_FLOOR = 5_000_000


def _loglog(x) -> float:
    return math.log(math.log(x))


def default_cutoff(x) -> int:
    """floor((log log x)^2), clamped to the minimum legal cutoff of 2."""
    if x < 16:
        raise RangeError("cutoff wants x >= 16 so that log log x is positive")
    return max(2, int(_loglog(x) ** 2))


@dataclass(frozen=True)
class HCutoff:
    """Inclusive upper bound Q for the small primes entering the weights."""

    q: int

    def __post_init__(self):
        if self.q < 2:
            raise RangeError(f"cutoff Q must be >= 2, got {self.q}")

    @classmethod
    def from_x(cls, x) -> "HCutoff":
        return cls(default_cutoff(x))

    @property
    def primes(self) -> tuple[int, ...]:
        return _primes_upto(self.q)


@lru_cache(maxsize=256)
def _primes_upto(q: int) -> tuple[int, ...]:
    return tuple(int(p) for p in kernels.get().sieve_primes(q))


@lru_cache(maxsize=1 << 18)
def _g_coeffs(r: int, qs: tuple[int, ...]) -> tuple[int, ...]:
    # v_q(r-1) per q; direct division, r-1 itself is never factored
    out = []
    m = r - 1
    for q in qs:
        v = 0
        while m and m % q == 0:
            m //= q
            v += 1
        out.append(v)
        m = r - 1
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def _depth_coeffs(p: int, k: int, qs: tuple[int, ...]) -> tuple[int, ...]:
    # chains p -> r | p-1 -> ... of k primes; the innermost link is counted
    if k == 1:
        return _g_coeffs(p, qs)
    acc = [0] * len(qs)
    for r in _pminus1(p).primes():
        for i, c in enumerate(_depth_coeffs(r, k - 1, qs)):
            acc[i] += c
    return tuple(acc)


def small_prime_weight_coeffs(n, cutoff: HCutoff) -> dict[int, int]:
    """Exact exponents: w(n) = sum of coeffs[q] * log q."""
    fn = factor(n)
    qs = cutoff.primes
    acc = [0] * len(qs)
    for p in fn.primes():
        for i, c in enumerate(_depth_coeffs(p, 2, qs)):
            acc[i] += c
    return {q: c for q, c in zip(qs, acc) if c}


def small_prime_weight(n, cutoff: HCutoff) -> float:
    return math.fsum(c * math.log(q) for q, c in small_prime_weight_coeffs(n, cutoff).items())


def small_prime_weight_depth(n, k: int, cutoff: HCutoff) -> float:
    """Depth-k variant: chains p_1 | n, p_2 | p_1 - 1, ..., ending in
    v_q(p_k - 1). Depth 2 is small_prime_weight itself."""
    if not 1 <= k <= 4:
        raise RangeError(f"depth k must be in 1..4, got {k}")
    fn = factor(n)
    qs = cutoff.primes
    acc = [0] * len(qs)
    for p in fn.primes():
        for i, c in enumerate(_depth_coeffs(p, k, qs)):
            acc[i] += c
    return math.fsum(c * math.log(q) for q, c in zip(qs, acc) if c)


def phi_ell_part_log(n, ell: int) -> float:
    """log of the ell-part of phi(n): sum over primes s | ell of
    v_s(phi(n)) log s. exp of this times the ell-coprime part of phi(n)
    recovers phi(n) exactly; see phi_ell_removed for the integer form."""
    ph = euler_phi(n)
    return math.fsum(valuation(s, ph) * math.log(s) for s in factor(ell).primes())


def phi_ell_removed(n, ell: int) -> int:
    """Integer partner of phi_ell_part_log: the product of s^{v_s(phi(n))}
    over primes s | ell."""
    ph = euler_phi(n)
    out = 1
    for s in factor(ell).primes():
        out *= s ** valuation(s, ph)
    return out


@dataclass(frozen=True)
class MomentReport:
    x: int
    cutoff_q: int
    m1: float
    m2: float
    tk_lhs: float
    tk_rhs_scale: float
    predicted_m1: float
    tk_stride: int = 1

    def __post_init__(self):
        for name in ("m1", "m2", "tk_lhs", "tk_rhs_scale", "predicted_m1"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise AssertionError(f"{name} must be finite and nonnegative, got {v}")

    @property
    def tk_ratio(self) -> float:
        return self.tk_lhs / self.tk_rhs_scale

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "cutoff_q": self.cutoff_q,
            "m1": self.m1,
            "m2": self.m2,
            "tk_lhs": self.tk_lhs,
            "tk_rhs_scale": self.tk_rhs_scale,
            "tk_ratio": self.tk_ratio,
            "predicted_m1": self.predicted_m1,
            "tk_stride": self.tk_stride,
        }


def _weight_per_prime(limit: int, cutoff: HCutoff, table=None):
    """(primes, weights) arrays: w(p) for every prime p <= limit."""
    kern = kernels.get()
    if table is None:
        table = kern.pminus1_table(limit + 1)
    primes = table.primes
    if len(primes) and primes[-1] > limit:
        primes = primes[: int(np.searchsorted(primes, limit, side="right"))]
    qs = cutoff.primes
    logs = [math.log(q) for q in qs]
    gmemo: dict[int, float] = {}
    weights = np.empty(len(primes), dtype=np.float64)
    offsets, fprimes = table.offsets, table.fprimes
    for i in range(len(primes)):
        acc = 0.0
        for k in range(offsets[i], offsets[i + 1]):
            r = int(fprimes[k])
            g = gmemo.get(r)
            if g is None:
                g = 0.0
                for q, lg in zip(qs, logs):
                    m = r - 1
                    while m and m % q == 0:
                        m //= q
                        g += lg
                gmemo[r] = g
            acc += g
        weights[i] = acc
    return primes, weights


def moments(x: int, cutoff: HCutoff, segment_size: int = 1 << 20,
            tk_stride: int = 1) -> MomentReport:
    """First and second weight moments over primes, plus the concentration
    sum tk_lhs = sum over n <= x of (w(n) - M1)^2.

    M1 = sum w(p)/p and M2 = sum w(p)^2/p are each evaluated twice --
    ascending pairwise and exactly-rounded descending -- and the two must
    agree to 1e-9 relative. For tk_stride > 1, tk_lhs is scaled up from the
    strided sample and the stride is recorded in the report.
    """
    if x < 100:
        raise RangeError(f"moments wants x >= 100, got {x}")
    if tk_stride < 1:
        raise RangeError("tk_stride must be >= 1")
    kern = kernels.get()
    table = kern.pminus1_table(x + 1)
    primes, weights = _weight_per_prime(x, cutoff, table)
    pf = primes.astype(np.float64)

    def _two_orders(terms, label):
        a = float(np.sum(terms))
        b = math.fsum(terms[::-1].tolist())
        if abs(a - b) > 1e-9 * max(1.0, abs(b)):
            raise AssertionError(f"{label} summation orders disagree: {a} vs {b}")
        return b

    m1 = _two_orders(weights / pf, "M1")
    m2 = _two_orders(weights * weights / pf, "M2")

    qs = np.asarray(cutoff.primes, dtype=np.int64)
    qlogs = np.log(qs.astype(np.float64))
    base = kern.sieve_primes(math.isqrt(x) + 1)
    scratch = kern.make_sweep_scratch(table, qs, qlogs)
    parts = []
    lo = 1
    while lo <= x:
        hi = min(lo + segment_size, x + 1)
        h_seg = kern.sweep_segment(lo, hi, scratch, base)[3]
        if tk_stride > 1:
            h_seg = h_seg[np.arange(lo, hi) % tk_stride == 1 % tk_stride]
        d = h_seg - m1
        parts.append(float(np.sum(d * d)))
        lo = hi
    tk = math.fsum(parts) * tk_stride
    y = _loglog(x)
    return MomentReport(
        x=x, cutoff_q=cutoff.q, m1=m1, m2=m2, tk_lhs=tk,
        tk_rhs_scale=x * m2, predicted_m1=y * y * math.log(y),
        tk_stride=tk_stride,
    )


def h_prime_partial_sum(t: int, cutoff: HCutoff) -> tuple[float, float]:
    """(actual, predicted) for sum over primes p <= t of w(p).

    predicted = 2 t log log t log y / log t with y = sqrt(Q), the role Q
    plays in the weight's definition.
    """
    if t < 100:
        raise RangeError(f"partial sum wants t >= 100, got {t}")
    _, weights = _weight_per_prime(t, cutoff)
    actual = math.fsum(weights.tolist())
    predicted = 2 * t * _loglog(t) * (0.5 * math.log(cutoff.q)) / math.log(t)
    return actual, predicted


def h_prime_coeffs(t: int, cutoff: HCutoff, order: str = "direct") -> dict[int, int]:
    """Integer coefficients of sum over p <= t of w(p) on the log-q basis,
    by either summation order.

    direct: per prime p, walk r | p-1 and divide out each q.
    swapped: per q and power a, count pairs (r, p) with r prime = 1 mod q^a
    and p <= t prime = 1 mod r. The two must agree coefficient by
    coefficient, exactly.
    """
    if t < 2:
        raise RangeError("t must be >= 2")
    kern = kernels.get()
    qs = cutoff.primes
    if order == "direct":
        table = kern.pminus1_table(t + 1)
        primes = table.primes
        if len(primes) and primes[-1] > t:
            primes = primes[: int(np.searchsorted(primes, t, side="right"))]
        acc = [0] * len(qs)
        gmemo: dict[int, tuple[int, ...]] = {}
        for i in range(len(primes)):
            for k in range(table.offsets[i], table.offsets[i + 1]):
                r = int(table.fprimes[k])
                vec = gmemo.get(r)
                if vec is None:
                    vec = _g_coeffs(r, qs)
                    gmemo[r] = vec
                for j, c in enumerate(vec):
                    acc[j] += c
        return {q: c for q, c in zip(qs, acc) if c}
    if order != "swapped":
        raise RangeError(f"unknown evaluation order {order!r}")
    primes = kern.sieve_primes(t)
    is_prime = np.zeros(t + 1, dtype=bool)
    is_prime[primes] = True
    out: dict[int, int] = {}
    for q in qs:
        total = 0
        qa = q
        while qa <= t:
            rs = primes[primes % qa == 1]
            for r in rs.tolist():
                total += int(np.count_nonzero(is_prime[1::r]))
            qa *= q
        if total:
            out[q] = total
    return out


def pi_progression(t: int, n: int, a: int) -> int:
    """Exact count of primes p <= t with p = a mod n."""
    if t < 2:
        raise RangeError(f"pi_progression wants t >= 2, got {t}")
    if n < 1:
        raise RangeError(f"modulus must be >= 1, got {n}")
    primes = kernels.get().sieve_primes(t)
    if n == 1:
        return len(primes)
    return int(np.count_nonzero(primes % n == a % n))


def reciprocal_prime_sum(m: int, x: int, eps: float | None = 0.1) -> tuple[float, float]:
    """(actual, predicted) for sum of 1/p over primes p <= x with p = 1 mod m.

    predicted follows (log log x - log log m)/phi(m), which is conjectural
    for m > 1 -- both numbers are reported, neither is asserted. eps guards
    the regime x >= m^(1+eps); pass eps=None to disable the guard.
    """
    if m < 1:
        raise RangeError(f"m must be >= 1, got {m}")
    if x < 3:
        raise RangeError(f"x must be >= 3, got {x}")
    if eps is not None and x < m ** (1 + eps):
        raise RangeError(f"x={x} below the range guard m^(1+eps)={m ** (1 + eps):.3g}")
    primes = kernels.get().sieve_primes(x)
    if m > 1:
        primes = primes[primes % m == 1]
    actual = math.fsum((1.0 / p) for p in primes.tolist())
    if m == 1:
        predicted = _loglog(x)
    else:
        predicted = (_loglog(x) - _loglog(m)) / int(euler_phi(m))
    return actual, predicted


def normal_order_ratio(n: int, lambda_lambda_n: int | None = None) -> float | None:
    """log(n/lamlam(n)) scaled by (log log n)^2 log log log n; None below
    the n >= 5e6 guard where the scaling is not yet meaningful."""
    if n < RATIO_FLOOR:
        return None
    if lambda_lambda_n is None:
        from .arith import lambda_iter

        lambda_lambda_n = int(lambda_iter(n, 2))
    y = _loglog(n)
    return (math.log(n) - math.log(lambda_lambda_n)) / (y * y * math.log(y))


def f_ell_exceed_fraction(x: int, ells, segment_size: int = 1 << 20) -> dict[int, float]:
    """For each ell, the fraction of n <= x whose phi(n) carries more
    ell-part than (log log n)^2, i.e. f_ell(n) > (log log n)^2 with
    f_ell = phi_ell_part_log. Streamed; one factorization pass serves
    every ell."""
    if x < 100:
        raise RangeError(f"wants x >= 100, got {x}")
    ells = [int(e) for e in ells]
    if any(e < 2 for e in ells):
        raise RangeError("every ell must be >= 2")
    kern = kernels.get()
    table = kern.pminus1_table(x + 1)
    sprimes = sorted({int(s) for e in ells for s in factor(e).primes()})
    # v_s(p-1) per table prime, one dense column per s
    vcols = {}
    for s in sprimes:
        col = np.zeros(len(table.primes), dtype=np.int64)
        pos = np.nonzero(table.fprimes == s)[0]
        rows = np.searchsorted(table.offsets, pos, side="right") - 1
        col[rows] = table.fexps[pos]
        vcols[s] = col
    base = kern.sieve_primes(math.isqrt(x) + 1)
    counts = {e: 0 for e in ells}
    lo = 2
    while lo <= x:
        hi = min(lo + segment_size, x + 1)
        offsets, fp, fe = kern.factor_range(lo, hi, base)
        rows = np.searchsorted(offsets, np.arange(len(fp)), side="right") - 1
        pidx = np.searchsorted(table.primes, fp)
        thresh = np.log(np.log(np.arange(lo, hi, dtype=np.float64))) ** 2
        fvals = {}
        for s in sprimes:
            terms = (vcols[s][pidx] + (fe - 1) * (fp == s)).astype(np.float64)
            fvals[s] = np.bincount(rows, weights=terms, minlength=hi - lo)
        for e in ells:
            f = np.zeros(hi - lo, dtype=np.float64)
            for s in factor(e).primes():
                f += fvals[int(s)] * math.log(s)
            counts[e] += int(np.count_nonzero(f > thresh))
        lo = hi
    return {e: counts[e] / x for e in ells}
