"""Exact cycle structure of the power map x -> x^ell mod n.

A residue u lies on a cycle iff gcd(ell, order_star(u, n)) = 1 and its gcd class
d = gcd(u, n) is a unitary divisor of n; the cycle through u then has length
ord(ell mod order_star(u, n)). The census aggregates cycles per gcd class without
touching individual residues: within the class of a unitary divisor d, residues
biject with units of Z/(n/d) and the order multiset is the unit-group one, so
counting elements of each exact order s coprime to ell and dividing by the cycle
length ord(ell mod s) gives the cycle counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import gcd

from .arith import FactoredNumber, carmichael_lambda, coprime_part, euler_phi, factor, tau
from .orders import (
    UnitGroupStructure,
    count_exact_order,
    multiplicative_order,
    order_star,
    unit_group_structure,
)

BRUTE_FORCE_CAP = 10**6


@dataclass
class CycleCensus:
    """Cycle counts of x -> x^ell mod n, keyed by gcd class and cycle length."""

    ell: int
    n: int
    per_d: dict[int, dict[int, int]] = field(default_factory=dict)

    @property
    def total_cycles(self) -> int:
        return sum(c for by_len in self.per_d.values() for c in by_len.values())

    @property
    def unit_cycles(self) -> int:
        return sum(self.per_d.get(1, {}).values())

    def residues_on_cycles(self) -> int:
        return sum(t * c for by_len in self.per_d.values() for t, c in by_len.items())

    def as_sorted_items(self):
        return sorted((d, t, c) for d, by_len in self.per_d.items() for t, c in by_len.items())

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "n": self.n,
            "cycles": [
                {"d": d, "length": t, "count": c} for d, t, c in self.as_sorted_items()
            ],
            "total_cycles": self.total_cycles,
            "residues_on_cycles": self.residues_on_cycles(),
        }


def _require_map_args(ell: int, n: int) -> None:
    if ell < 2:
        raise ValueError(f"power map exponent must satisfy ell >= 2, got {ell}")
    if n < 1:
        raise ValueError(f"modulus must satisfy n >= 1, got {n}")


def is_cyclic_element(u: int, ell: int, n: int) -> bool:
    """True iff u lies on a cycle of x -> x^ell mod n."""
    _require_map_args(ell, n)
    u %= n
    d = gcd(u, n)
    if gcd(d, n // d) != 1:
        return False
    return gcd(ell, order_star(u, n)) == 1


def cycle_length_of(u: int, ell: int, n: int) -> int:
    """Length of the cycle through a cyclic element u."""
    if not is_cyclic_element(u, ell, n):
        raise ValueError(f"u={u} is not on a cycle of x -> x^{ell} mod {n}")
    s = order_star(u % n, n)
    return multiplicative_order(ell, s)


def _divisors_of_factored(fn: FactoredNumber) -> list[int]:
    out = [1]
    for p, e in fn.factors:
        powers = [p**i for i in range(e + 1)]
        out = [d * q for d in out for q in powers]
    return out


def census_structural(ell: int, n: int) -> CycleCensus:
    """Cycle census from unit-group structure alone; no residue is enumerated."""
    _require_map_args(ell, n)
    fn = factor(n)
    census = CycleCensus(ell, n)
    for keep in iproduct((False, True), repeat=len(fn.factors)):
        cofactor = FactoredNumber(tuple(pe for pe, k in zip(fn.factors, keep) if k))
        m = cofactor.require_value()
        d = n // m
        group = unit_group_structure(cofactor)
        by_len = census.per_d.setdefault(d, {})
        lam = carmichael_lambda(cofactor)
        for s in _divisors_of_factored(lam):
            if gcd(s, ell) != 1:
                continue
            cnt = count_exact_order(group, s)
            if not cnt:
                continue
            t = multiplicative_order(ell, s)
            if cnt % t:
                raise AssertionError(f"order class size {cnt} not divisible by cycle length {t}")
            by_len[t] = by_len.get(t, 0) + cnt // t
    return census


def census_bruteforce(ell: int, n: int) -> CycleCensus:
    """Cycle census by walking the functional graph; capped at n <= 10^6."""
    _require_map_args(ell, n)
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute-force census capped at n <= {BRUTE_FORCE_CAP}, got {n}")
    from . import kernels

    ds, ts, counts = kernels.get().brute_census(ell, n)
    census = CycleCensus(ell, n)
    for d, t, c in zip(ds.tolist(), ts.tolist(), counts.tolist()):
        by_len = census.per_d.setdefault(d, {})
        by_len[t] = by_len.get(t, 0) + c
    return census


def phi_coprime_part(n: int | FactoredNumber, ell: int) -> FactoredNumber:
    """Largest divisor of phi(n) coprime to ell."""
    return coprime_part(euler_phi(n), ell)


def unit_cycles_lower_bound(ell: int, n: int, census: CycleCensus | None = None):
    """Lower bound phi(n)_(ell) / lambda(lambda(n)) on the number of unit cycles.

    Returns (bound, unit_cycles, holds); holds is an exact cross-multiplied check.
    """
    _require_map_args(ell, n)
    if census is None:
        census = census_structural(ell, n)
    part = phi_coprime_part(n, ell).require_value()
    lamlam = carmichael_lambda(carmichael_lambda(n)).require_value()
    c1 = census.unit_cycles
    return Fraction(part, lamlam), c1, c1 * lamlam >= part


def cycle_count_upper_bound(ell: int, n: int, census: CycleCensus | None = None):
    """Upper bound n tau(lambda(n)) tau(n) / ord_star(ell, lambda(n)) on all cycles.

    Returns (bound, total_cycles, holds) with an exact integer comparison.
    """
    _require_map_args(ell, n)
    if census is None:
        census = census_structural(ell, n)
    lam = carmichael_lambda(n)
    denom = order_star(ell, lam)
    numer = n * tau(lam) * tau(n)
    total = census.total_cycles
    return Fraction(numer, denom), total, total * denom <= numer
