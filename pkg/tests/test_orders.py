"""Unit-group structure, orders, and the order-count bound."""
import math
import random
from functools import reduce

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamcycle.arith import carmichael_lambda, euler_phi
from lamcycle.orders import (
    UnitGroupStructure,
    count_exact_order,
    count_order_dividing,
    multiplicative_order,
    order_count_bound_holds,
    order_star,
    unit_group_structure,
)


def brute_order(u: int, m: int) -> int:
    x, k = u % m, 1
    while x != 1 % m:
        x = x * u % m
        k += 1
    return k


def test_multiplicative_order_small():
    for m in range(2, 200):
        for u in range(1, m):
            if math.gcd(u, m) == 1:
                assert multiplicative_order(u, m) == brute_order(u, m)


def test_multiplicative_order_rejects_nonunit():
    with pytest.raises(ValueError):
        multiplicative_order(2, 8)


def test_order_star_is_eventual_period():
    # ord*(u, m): the period the iterates u^i mod m settle into
    for m in range(2, 120):
        for u in range(m):
            seen = {}
            x, i = 1, 0
            while x not in seen:
                seen[x] = i
                x = x * u % m
                i += 1
            period = i - seen[x]
            assert order_star(u, m) == period, (u, m)


def test_order_star_unit_case_matches_order():
    for m in (7, 9, 20, 36, 100):
        for u in range(1, m):
            if math.gcd(u, m) == 1:
                assert order_star(u, m) == multiplicative_order(u, m)


def test_unit_group_structure_invariants():
    for m in range(1, 500):
        g = unit_group_structure(m)
        assert g.size == euler_phi(m).value
        assert g.exponent == carmichael_lambda(m).value
        # every listed cyclic order divides the exponent
        for d in g.cyclic_orders:
            assert g.exponent % d == 0


def brute_count_dividing(orders, t):
    total = 0

    def rec(i, acc):
        nonlocal total
        if i == len(orders):
            total += acc
            return
        d = orders[i]
        cnt = sum(1 for a in range(d) if a * t % d == 0)
        rec(i + 1, acc * cnt)

    rec(0, 1)
    return total


def test_count_order_dividing_matches_enumeration():
    rng = random.Random(7)
    for _ in range(300):
        orders = [rng.randint(1, 24) for _ in range(rng.randint(1, 4))]
        g = UnitGroupStructure.from_orders(orders)
        t = rng.randint(1, 50)
        assert count_order_dividing(g, t) == brute_count_dividing(orders, t)


def test_count_exact_order_sums_to_size():
    for m in (7, 16, 35, 91, 240):
        g = unit_group_structure(m)
        divs = [d for d in range(1, g.exponent + 1) if g.exponent % d == 0]
        assert sum(count_exact_order(g, s) for s in divs) == g.size


def test_count_exact_order_against_real_group():
    for m in (11, 16, 24, 63, 100):
        seen: dict[int, int] = {}
        for u in range(1, m):
            if math.gcd(u, m) == 1:
                k = brute_order(u, m)
                seen[k] = seen.get(k, 0) + 1
        g = unit_group_structure(m)
        for s, cnt in seen.items():
            assert count_exact_order(g, s) == cnt, (m, s)


def test_order_count_bound_on_unit_groups():
    for m in range(1, 500):
        g = unit_group_structure(m)
        lam = g.exponent
        for j in range(1, lam + 1):
            if lam % j == 0:
                assert order_count_bound_holds(g, j), (m, j)


def test_order_count_bound_rejects_nondivisor():
    g = unit_group_structure(35)
    with pytest.raises(ValueError):
        order_count_bound_holds(g, 5)  # lam(35) = 12


@settings(max_examples=500, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=400), min_size=1, max_size=6),
       st.data())
def test_order_count_bound_random_groups(orders, data):
    g = UnitGroupStructure.from_orders(orders)
    lam = g.exponent
    divs = [d for d in range(1, min(lam, 10**4) + 1) if lam % d == 0]
    j = data.draw(st.sampled_from(divs))
    assert order_count_bound_holds(g, j)
