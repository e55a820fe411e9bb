"""Exact integer arithmetic on factored numbers.

Everything downstream (order computation, cycle censuses, chain traces) works on
FactoredNumber values so that lambda and phi iterates never require factoring a
large composite twice. Values are materialized on demand and capped at 128 bits;
products that would exceed the cap stay factored-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from math import gcd, isqrt, prod

from .errors import FactorizationError, RangeError

MAX_VALUE = 2**128 - 1

# Miller-Rabin with these bases is exhaustive below 3,317,044,064,679,887,385,961,981
# (Sorenson and Webster). Above that we fall back to strong BPSW.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_PROVEN_LIMIT = 3317044064679887385961981

_TRIAL_LIMIT = 1 << 16


def _small_primes() -> tuple[int, ...]:
    sieve = bytearray([1]) * _TRIAL_LIMIT
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(_TRIAL_LIMIT) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return tuple(i for i in range(_TRIAL_LIMIT) if sieve[i])


_SMALL_PRIMES: tuple[int, ...] | None = None


def small_primes() -> tuple[int, ...]:
    """Primes below 2^16, sieved once on first use."""
    global _SMALL_PRIMES
    if _SMALL_PRIMES is None:
        _SMALL_PRIMES = _small_primes()
    return _SMALL_PRIMES


def _mr_witness(a: int, d: int, s: int, n: int) -> bool:
    # True if a proves n composite.
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _jacobi(a: int, n: int) -> int:
    # n odd positive
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas_prp(n: int) -> bool:
    # Selfridge parameter search: D = 5, -7, 9, -11, ... with (D|n) = -1.
    D = 5
    while True:
        j = _jacobi(D % n, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -(D + 2) if D > 0 else -(D - 2)
        if abs(D) > 1000 and isqrt(n) ** 2 == n:
            return False
    P, Q = 1, (1 - D) // 4

    d = n + 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    # Compute U_d, V_d by the binary chain on (U, V, Q^k).
    U, V, qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * qk) % n
        qk = qk * qk % n
        if bit == "1":
            U, V = (P * U + V) % n, (D * U + P * V) % n
            if U % 2:
                U += n
            if V % 2:
                V += n
            U, V = U // 2 % n, V // 2 % n
            qk = qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * qk) % n
        if V == 0:
            return True
        qk = qk * qk % n
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality test for 0 <= n <= 2^128 - 1.

    Proven Miller-Rabin bases below 3.3e24, strong BPSW above (no random bases,
    no known counterexample).
    """
    if n < 0 or n > MAX_VALUE:
        raise RangeError(f"is_prime requires 0 <= n <= 2^128 - 1, got {n}")
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _MR_PROVEN_LIMIT:
        return not any(_mr_witness(a, d, s, n) for a in _MR_BASES if a % n)
    if _mr_witness(2, d, s, n):
        return False
    if isqrt(n) ** 2 == n:
        return False
    return _strong_lucas_prp(n)


def _brent_rho(n: int, attempt: int) -> int | None:
    # Brent's variant with batched gcd. Deterministic: parameters derive from the
    # attempt counter, so repeated runs walk the same seed sequence.
    y = (attempt * attempt + 2) % n
    c = (attempt + 1) % n
    if c == 0:
        c = 1
    m = 128
    g = r = q = 1
    x = ys = y
    budget = 1 << 20
    while g == 1 and budget > 0:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
            budget -= min(m, r - k + m)
        r *= 2
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            if g > 1:
                break
    if g == n:
        return None
    return g if g > 1 else None


def _factor_pairs(n: int) -> list[tuple[int, int]]:
    pairs: dict[int, int] = {}
    m = n
    for p in small_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs[p] = e
    if m > 1:
        if m < _TRIAL_LIMIT * _TRIAL_LIMIT or is_prime(m):
            pairs[m] = pairs.get(m, 0) + 1
        else:
            stack = [m]
            while stack:
                v = stack.pop()
                if is_prime(v):
                    pairs[v] = pairs.get(v, 0) + 1
                    continue
                d = None
                for attempt in range(64):
                    d = _brent_rho(v, attempt)
                    if d is not None and d != v:
                        break
                    d = None
                if d is None:
                    raise FactorizationError(f"could not split {v} within budget")
                stack.append(d)
                stack.append(v // d)
    return sorted(pairs.items())


@dataclass(frozen=True)
class FactoredNumber:
    """A positive integer held as an ordered tuple of (prime, exponent) pairs.

    The empty tuple is 1. `value` is None when the product exceeds 128 bits;
    use require_value() where a materialized integer is mandatory.
    """

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"factors must be sorted primes with positive exponents: {self.factors}")
            last = p

    @cached_property
    def value(self) -> int | None:
        v = 1
        for p, e in self.factors:
            v *= p**e
            if v > MAX_VALUE:
                return None
        return v

    def require_value(self) -> int:
        if self.value is None:
            raise RangeError("value exceeds 2^128 - 1 and cannot be materialized")
        return self.value

    @property
    def is_one(self) -> bool:
        return not self.factors

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, q: int) -> int:
        for p, e in self.factors:
            if p == q:
                return e
            if p > q:
                break
        return 0

    def log(self) -> float:
        """Natural log, exact-ish even when the value cannot be materialized."""
        from math import log

        return sum(e * log(p) for p, e in self.factors)

    def __int__(self) -> int:
        return self.require_value()

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)


ONE = FactoredNumber(())


def from_pairs(pairs) -> FactoredNumber:
    """Build a FactoredNumber from (prime, exponent) pairs in any order."""
    merged: dict[int, int] = {}
    for p, e in pairs:
        if e:
            merged[p] = merged.get(p, 0) + e
    return FactoredNumber(tuple(sorted(merged.items())))


def factor(n: int | FactoredNumber) -> FactoredNumber:
    """Full factorization. Requires 1 <= n <= 2^128 - 1."""
    if isinstance(n, FactoredNumber):
        return n
    if n < 1 or n > MAX_VALUE:
        raise RangeError(f"factor requires 1 <= n <= 2^128 - 1, got {n}")
    if n == 1:
        return ONE
    return FactoredNumber(tuple(_factor_pairs(n)))


@lru_cache(maxsize=1 << 20)
def _pminus1(p: int) -> FactoredNumber:
    # factored p - 1, the workhorse of every lambda/phi step; read-mostly cache
    return factor(p - 1)


def _merge_add(acc: dict[int, int], fn: FactoredNumber, scale: int = 1) -> None:
    for p, e in fn.factors:
        acc[p] = acc.get(p, 0) + e * scale


def euler_phi(n: int | FactoredNumber) -> FactoredNumber:
    """phi(n) in factored form."""
    fn = factor(n)
    acc: dict[int, int] = {}
    for p, e in fn.factors:
        if e > 1:
            acc[p] = acc.get(p, 0) + e - 1
        _merge_add(acc, _pminus1(p))
    return FactoredNumber(tuple(sorted((p, e) for p, e in acc.items() if e)))


def _lambda_piece(p: int, e: int) -> FactoredNumber:
    # lambda(p^e): phi(p^e) for odd p and for 2, 4; 2^(e-2) for higher powers of 2
    if p == 2:
        return ONE if e == 1 else FactoredNumber(((2, e - 2),)) if e > 2 else FactoredNumber(((2, 1),))
    acc: dict[int, int] = {}
    if e > 1:
        acc[p] = e - 1
    _merge_add(acc, _pminus1(p))
    return FactoredNumber(tuple(sorted(acc.items())))


def carmichael_lambda(n: int | FactoredNumber) -> FactoredNumber:
    """lambda(n) in factored form: lcm of the prime-power pieces."""
    fn = factor(n)
    acc: dict[int, int] = {}
    for p, e in fn.factors:
        for q, f in _lambda_piece(p, e).factors:
            if acc.get(q, 0) < f:
                acc[q] = f
    return FactoredNumber(tuple(sorted(acc.items())))


def lambda_iter(n: int | FactoredNumber, k: int) -> FactoredNumber:
    """k-fold lambda iterate; k = 0 returns n itself (factored)."""
    if k < 0:
        raise RangeError(f"lambda_iter requires k >= 0, got {k}")
    fn = factor(n)
    for _ in range(k):
        fn = carmichael_lambda(fn)
    return fn


def phi_iter(n: int | FactoredNumber, k: int) -> FactoredNumber:
    """k-fold phi iterate; k = 0 returns n itself (factored)."""
    if k < 0:
        raise RangeError(f"phi_iter requires k >= 0, got {k}")
    fn = factor(n)
    for _ in range(k):
        fn = euler_phi(fn)
    return fn


def valuation(q: int, n: int | FactoredNumber) -> int:
    """Exponent of the prime q in n."""
    if not is_prime(q):
        raise RangeError(f"valuation requires prime q, got {q}")
    if isinstance(n, FactoredNumber):
        return n.exponent(q)
    if n < 1:
        raise RangeError(f"valuation requires n >= 1, got {n}")
    e = 0
    while n % q == 0:
        n //= q
        e += 1
    return e


def tau(n: int | FactoredNumber) -> int:
    """Number of divisors."""
    return prod(e + 1 for _, e in factor(n).factors)


def big_omega(n: int | FactoredNumber) -> int:
    """Number of prime factors with multiplicity."""
    return sum(e for _, e in factor(n).factors)


def lcm_factored(*values: int | FactoredNumber) -> FactoredNumber:
    """lcm of any number of factored values; empty lcm is 1."""
    acc: dict[int, int] = {}
    for v in values:
        for p, e in factor(v).factors:
            if acc.get(p, 0) < e:
                acc[p] = e
    return FactoredNumber(tuple(sorted(acc.items())))


def mul_factored(*values: int | FactoredNumber) -> FactoredNumber:
    """Product in factored form (exponents add)."""
    acc: dict[int, int] = {}
    for v in values:
        _merge_add(acc, factor(v))
    return FactoredNumber(tuple(sorted(acc.items())))


def divides(a: FactoredNumber, b: FactoredNumber) -> bool:
    """a | b, checked exponentwise on the factored forms."""
    return all(b.exponent(p) >= e for p, e in a.factors)


def coprime_part(n: int | FactoredNumber, k: int) -> FactoredNumber:
    """Largest divisor of n coprime to k. k = 0 strips every prime."""
    fn = factor(n)
    if k == 0:
        return ONE
    return FactoredNumber(tuple((p, e) for p, e in fn.factors if k % p))


def largest_prime_factor(n: int | FactoredNumber) -> int:
    """P(n) for n >= 2."""
    fn = factor(n)
    if fn.is_one:
        raise RangeError("largest_prime_factor requires n >= 2")
    return fn.factors[-1][0]


def ell_map(n: int | FactoredNumber) -> int:
    """P(n) - 1, with the convention that 1 maps to 1."""
    fn = factor(n)
    if fn.is_one:
        return 1
    return fn.factors[-1][0] - 1


def gcd_value(a: FactoredNumber, b: FactoredNumber) -> FactoredNumber:
    """gcd of two factored values."""
    acc = []
    for p, e in a.factors:
        f = b.exponent(p)
        if f:
            acc.append((p, min(e, f)))
    return FactoredNumber(tuple(acc))
