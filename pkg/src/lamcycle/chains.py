"""Chains of iterated maps on factored integers.

L(n) counts lambda steps to reach 1; the ell variant replaces lambda with
P(n) - 1 for the largest prime P(n). Everything runs on factored
representations: a lambda step needs only the factorizations of p - 1 for
the current primes p, and those primes shrink along the chain, so values
never have to fit any word size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .arith import (
    ONE,
    FactoredNumber,
    carmichael_lambda,
    divides,
    ell_map,
    factor,
    from_pairs,
    is_prime,
    lcm_factored,
)
from .errors import RangeError

LCM_J_CAP = 10**4
NJ_SIEVE_CAP = 10**9
POWER3_CAP = 10**3


@dataclass
class ChainTrace:
    """A full descent to 1. steps[0] is the start, steps[-1] is 1, and every
    consecutive pair is one application of the map."""

    map_kind: str  # "lambda" or "ell_map"
    steps: list[FactoredNumber] = field(default_factory=list)

    @property
    def start(self) -> FactoredNumber:
        return self.steps[0]

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def halving_holds(self) -> bool:
        # lambda halves every even value; odd values (only the start can be
        # one, everything after the first step is even or 1) are exempt
        if self.map_kind != "lambda":
            return True
        for a, b in zip(self.steps, self.steps[1:]):
            if a.exponent(2) >= 1:
                av, bv = a.value, b.value
                if av is not None and bv is not None and 2 * bv > av:
                    return False
        return True

    def values(self) -> list[int | None]:
        return [s.value for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "map": self.map_kind,
            "length": self.length,
            "steps": [
                {"value": s.value, "factors": [list(pe) for pe in s.factors]}
                for s in self.steps
            ],
        }

    def render(self) -> str:
        shown = " → ".join(str(v) if v is not None else f"({s})"
                                for v, s in zip(self.values(), self.steps))
        return f"{shown} (L={self.length})"


def lambda_chain(n) -> ChainTrace:
    cur = factor(n)
    steps = [cur]
    while not cur.is_one:
        cur = carmichael_lambda(cur)
        steps.append(cur)
    return ChainTrace("lambda", steps)


def ell_chain(n) -> ChainTrace:
    cur = factor(n)
    steps = [cur]
    while not cur.is_one:
        cur = factor(ell_map(cur))
        steps.append(cur)
    return ChainTrace("ell_map", steps)


def chain_length(n) -> int:
    return lambda_chain(n).length


def lcm_1_to_j(j: int) -> FactoredNumber:
    """lcm{1, ..., j}: every prime p <= j with the largest e where p^e <= j."""
    if not 1 <= j <= LCM_J_CAP:
        raise RangeError(f"j must be in 1..{LCM_J_CAP}, got {j}")
    if j == 1:
        return ONE
    pairs = []
    for p in kernels.get().sieve_primes(j).tolist():
        e, pe = 1, p
        while pe * p <= j:
            pe *= p
            e += 1
        pairs.append((int(p), e))
    return from_pairs(pairs)


def lcm_identity_holds(values) -> bool:
    """L(lcm of the list) == max of the individual L values. A theorem, so
    callers may assert on it."""
    vals = [factor(v) for v in values]
    if not vals:
        raise RangeError("need at least one value")
    return chain_length(lcm_factored(*vals)) == max(chain_length(v) for v in vals)


@dataclass(frozen=True)
class NjReport:
    j: int
    exponent: float
    sieve_limit: int
    count: int
    log_value: float
    product: FactoredNumber
    nj: FactoredNumber

    def lambda_divides_nj(self) -> bool:
        return divides(carmichael_lambda(self.product), self.nj)

    def chain_length(self) -> int:
        return lambda_chain(self.product).length

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "exponent": self.exponent,
            "sieve_limit": self.sieve_limit,
            "count": self.count,
            "log_value": self.log_value,
            "value": self.product.value,
        }


def build_nj(j: int, exponent: float = 3.29) -> NjReport:
    """Product of the primes p <= j^exponent with p - 1 dividing lcm{1..j}.

    The construction yields numbers whose lambda-chains are short relative
    to their size; lambda of the product always divides lcm{1..j}.
    """
    if j < 2:
        raise RangeError(f"j must be >= 2, got {j}")
    limit = int(j ** exponent)
    if limit > NJ_SIEVE_CAP:
        raise RangeError(f"sieve limit {limit} exceeds {NJ_SIEVE_CAP}")
    nj = lcm_1_to_j(j)
    cap = {p: e for p, e in nj.factors}
    table = kernels.get().pminus1_table(limit + 1)
    primes: list[int] = []
    log_sum = 0.0
    offsets, fprimes, fexps = table.offsets, table.fprimes, table.fexps
    for i, p in enumerate(table.primes.tolist()):
        if p > limit:
            break
        ok = True
        for k in range(offsets[i], offsets[i + 1]):
            if cap.get(int(fprimes[k]), 0) < fexps[k]:
                ok = False
                break
        if ok:
            primes.append(int(p))
            log_sum += math.log(p)
    product = from_pairs([(p, 1) for p in primes])
    return NjReport(j=j, exponent=exponent, sieve_limit=limit,
                    count=len(primes), log_value=log_sum,
                    product=product, nj=nj)


def power_of_3_chain(a: int) -> tuple[int, float]:
    """(L(3^a), lower bound 1 + a). The chain length meets the bound with
    equality; that is asserted here, not just reported."""
    if not 1 <= a <= POWER3_CAP:
        raise RangeError(f"a must be in 1..{POWER3_CAP}, got {a}")
    length = lambda_chain(from_pairs([(3, a)])).length
    assert length == a + 1, (a, length)
    return length, float(1 + a)


ALLOWED_RULES = frozenset({(2, 1), (4, 1)})


def sophie_germain_chain(p_start: int, max_len: int, rules=((2, 1),),
                         node_budget: int = 10**7) -> list[int]:
    """Longest chain of primes from p_start where each step applies one of
    the affine rules x -> a*x + b. Depth-first, deterministic (rules tried
    in sorted order), capped at max_len steps and node_budget primality
    tests; the first longest chain found wins ties.
    """
    if not is_prime(p_start):
        raise RangeError(f"p_start must be prime, got {p_start}")
    if max_len < 1:
        raise RangeError("max_len must be >= 1")
    rule_set = sorted({(int(a), int(b)) for a, b in rules})
    if not set(rule_set) <= ALLOWED_RULES:
        raise RangeError(f"rules must be a subset of {sorted(ALLOWED_RULES)}")
    best: list[int] = [p_start]
    chain = [p_start]
    budget = node_budget

    def walk():
        nonlocal best, budget
        if len(chain) >= max_len:
            return
        for a, b in rule_set:
            if budget <= 0:
                return
            nxt = a * chain[-1] + b
            budget -= 1
            if is_prime(nxt):
                chain.append(nxt)
                if len(chain) > len(best):
                    best = list(chain)
                walk()
                chain.pop()

    walk()
    return best


def chain_length_table(limit: int, segment_size: int = 1 << 20) -> np.ndarray:
    """L(n) for every n <= limit as an int array (index 0 unused).

    Streams lambda values segment by segment, then fills lengths in one
    ascending pass; lambda(n) < n for n >= 2 makes the recurrence safe.
    """
    if limit < 1:
        raise RangeError("limit must be >= 1")
    kern = kernels.get()
    lam = np.zeros(limit + 1, dtype=np.int64)
    lam[1] = 1
    if limit >= 2:
        table = kern.pminus1_table(limit + 1)
        base = kern.sieve_primes(math.isqrt(limit) + 1)
        qs = kern.sieve_primes(2)
        scratch = kern.make_sweep_scratch(table, qs, np.log(qs.astype(np.float64)))
        lo = 2
        while lo <= limit:
            hi = min(lo + segment_size, limit + 1)
            lam[lo:hi] = kern.sweep_segment(lo, hi, scratch, base)[0]
            lo = hi
    out = np.zeros(limit + 1, dtype=np.int32)
    lam_list = lam.tolist()
    for n in range(2, limit + 1):
        out[n] = out[lam_list[n]] + 1
    return out
