"""Multiplicative orders and the abelian structure of unit groups.

Orders are always computed by divisor stripping on the factored group exponent,
never by iterating the element, so the cost is a handful of modular powers.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm, prod

from .arith import FactoredNumber, carmichael_lambda, coprime_part, factor

_EXACT_ORDER_PRIME_CAP = 15


@dataclass(frozen=True)
class UnitGroupStructure:
    """Cyclic decomposition of (Z/m)^* per CRT factor, in modulus factor order.

    The orders are phi(p^a) per odd prime power, plus (2, 2^(a-2)) for 2^a with
    a >= 3 and a single 2 for the factor 4. Abstract groups (dummy modulus None)
    reuse the same type for bound checks.
    """

    modulus: FactoredNumber | None
    cyclic_orders: tuple[int, ...]

    @property
    def size(self) -> int:
        return prod(self.cyclic_orders)

    @property
    def exponent(self) -> int:
        return lcm(*self.cyclic_orders) if self.cyclic_orders else 1

    @classmethod
    def from_orders(cls, orders) -> "UnitGroupStructure":
        orders = tuple(int(d) for d in orders)
        if any(d < 1 for d in orders):
            raise ValueError(f"cyclic orders must be positive: {orders}")
        return cls(None, orders)


def unit_group_structure(m: int | FactoredNumber) -> UnitGroupStructure:
    """Structure of (Z/m)^* for materialized m >= 1."""
    fm = factor(m)
    fm.require_value()
    orders: list[int] = []
    for p, e in fm.factors:
        if p == 2:
            if e == 2:
                orders.append(2)
            elif e >= 3:
                orders.append(2)
                orders.append(2 ** (e - 2))
        else:
            orders.append((p - 1) * p ** (e - 1))
    return UnitGroupStructure(fm, tuple(orders))


def multiplicative_order(u: int, m: int | FactoredNumber) -> int:
    """ord(u mod m): least k >= 1 with u^k = 1, for gcd(u, m) = 1."""
    fm = factor(m)
    mv = fm.require_value()
    u %= mv
    if gcd(u, mv) != 1:
        raise ValueError(f"multiplicative_order requires gcd(u, m) = 1, got u={u}, m={mv}")
    if mv == 1:
        return 1
    lam = carmichael_lambda(fm)
    t = lam.require_value()
    for q, e in lam.factors:
        for _ in range(e):
            if pow(u, t // q, mv) == 1:
                t //= q
            else:
                break
    return t


def order_star(u: int, m: int | FactoredNumber) -> int:
    """Order of u in the part of m coprime to u: the eventual period of u^i mod m."""
    fm = factor(m)
    mv = fm.require_value()
    if u < 0:
        u %= mv
    part = coprime_part(fm, u % mv if mv > 1 else u)
    return multiplicative_order(u, part)


def count_order_dividing(group: UnitGroupStructure, t: int) -> int:
    """Number of group elements whose order divides t (exact, by CRT factor)."""
    if t < 1:
        raise ValueError(f"count_order_dividing requires t >= 1, got {t}")
    return prod(gcd(t, d) for d in group.cyclic_orders)


def count_exact_order(group: UnitGroupStructure, s: int) -> int:
    """Number of elements of order exactly s, by Moebius inversion over rad(s)."""
    if s < 1:
        raise ValueError(f"count_exact_order requires s >= 1, got {s}")
    if group.exponent % s:
        return 0
    sprimes = factor(s).primes()
    if len(sprimes) > _EXACT_ORDER_PRIME_CAP:
        raise ValueError(f"count_exact_order: s has more than {_EXACT_ORDER_PRIME_CAP} distinct primes")
    total = 0
    for mask in range(1 << len(sprimes)):
        d = s
        sign = 1
        for i, p in enumerate(sprimes):
            if mask >> i & 1:
                d //= p
                sign = -sign
        total += sign * count_order_dividing(group, d)
    return total


def order_count_bound_holds(group: UnitGroupStructure, j: int) -> bool:
    """Check #{x : x^(exponent/j) = 1} * j <= |G| for j dividing the exponent.

    Exact integer comparison; the quotient exponent/j is where the count lives.
    """
    lam = group.exponent
    if j < 1 or lam % j:
        raise ValueError(f"j must be a positive divisor of the group exponent, got j={j}")
    return count_order_dividing(group, lam // j) * j <= group.size


@lru_cache(maxsize=1 << 16)
def _order_star_cached(u: int, m: int) -> int:
    return order_star(u, m)
