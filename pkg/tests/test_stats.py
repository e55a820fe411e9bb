"""Small-prime weights, moments, and progression sums against literal oracles."""
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamcycle.arith import euler_phi, factor, phi_iter, valuation
from lamcycle.errors import RangeError
from lamcycle.stats import (
    HCutoff,
    default_cutoff,
    f_ell_exceed_fraction,
    h_prime_coeffs,
    h_prime_partial_sum,
    moments,
    normal_order_ratio,
    phi_ell_part_log,
    phi_ell_removed,
    pi_progression,
    reciprocal_prime_sum,
    small_prime_weight,
    small_prime_weight_coeffs,
    small_prime_weight_depth,
)

PRIMES_200 = [p for p in range(2, 200) if all(p % d for d in range(2, p))]


def literal_weight_coeffs(n: int, q_limit: int) -> dict[int, int]:
    """The defining triple sum, written as plainly as possible:
    over primes p | n, primes r | p-1, count v_q(r-1) per prime q <= q_limit."""
    out: dict[int, int] = {}
    for p, _ in factor(n).factors:
        for r, _ in factor(p - 1).factors:
            m = r - 1
            for q in PRIMES_200:
                if q > q_limit:
                    break
                v, mm = 0, m
                while mm % q == 0:
                    mm //= q
                    v += 1
                if v:
                    out[q] = out.get(q, 0) + v
    return out


def test_weight_coeffs_match_literal_definition():
    for q_limit in (3, 10, 100):
        cut = HCutoff(q_limit)
        for n in range(1, 400):
            assert small_prime_weight_coeffs(n, cut) == literal_weight_coeffs(n, q_limit), n


def test_weight_example_prime_11():
    # p = 11: r in {2, 5}; v_2(1) = 0, v_2(4) = 2 -> coefficient 2 on log 2
    cut = HCutoff(100)
    assert small_prime_weight_coeffs(11, cut) == {2: 2}
    assert small_prime_weight(11, cut) == math.fsum([math.log(2), math.log(2)])


def test_weight_additive_on_coprime_pairs():
    rng = random.Random(11)
    cut = HCutoff(20)
    for _ in range(1000):
        a, b = rng.randint(1, 30000), rng.randint(1, 30000)
        if math.gcd(a, b) != 1:
            continue
        ca = small_prime_weight_coeffs(a, cut)
        cb = small_prime_weight_coeffs(b, cut)
        merged = {q: ca.get(q, 0) + cb.get(q, 0) for q in set(ca) | set(cb)}
        assert small_prime_weight_coeffs(a * b, cut) == merged


def test_weight_depends_only_on_prime_support():
    cut = HCutoff(50)
    for p in (2, 3, 11, 97):
        base = small_prime_weight_coeffs(p, cut)
        for a in (2, 3, 5):
            assert small_prime_weight_coeffs(p**a, cut) == base


def test_depth_weights():
    cut = HCutoff(100)
    # depth 1 on a prime p is just v_q(p-1) weights
    assert small_prime_weight_depth(11, 1, cut) == math.log(2) + math.log(5)
    # depth 2 is the default weight
    for n in (7, 11, 91, 360):
        assert small_prime_weight_depth(n, 2, cut) == small_prime_weight(n, cut)
    # depth 3 on 11: chains q | r-1, r | s-1, s | 10; only s=5 -> r=2 -> r-1=1
    assert small_prime_weight_depth(11, 3, cut) == 0.0
    with pytest.raises(RangeError):
        small_prime_weight_depth(11, 0, cut)
    with pytest.raises(RangeError):
        small_prime_weight_depth(11, 5, cut)


def test_default_cutoff_values():
    assert default_cutoff(10**4) == 4
    assert default_cutoff(10**5) == 5
    assert default_cutoff(10**6) == 6
    assert default_cutoff(10**7) == 7
    with pytest.raises(RangeError):
        default_cutoff(10)


def test_hcutoff_primes():
    assert HCutoff(10).primes == (2, 3, 5, 7)
    assert HCutoff(2).primes == (2,)
    with pytest.raises(RangeError):
        HCutoff(1)


def test_phi_ell_part():
    # phi(35) = 24 = 2^3 * 3: the 2-part is 8, the 6-part is 24
    assert phi_ell_removed(35, 2) == 8
    assert phi_ell_removed(35, 6) == 24
    assert math.isclose(phi_ell_part_log(35, 2), 3 * math.log(2))
    for n in range(2, 300):
        for ell in (2, 6, 10):
            ph = euler_phi(n).value
            part = phi_ell_removed(n, ell)
            assert ph % part == 0
            # the cofactor is coprime to ell
            assert math.gcd(ph // part, ell) == 1
            assert math.isclose(phi_ell_part_log(n, ell), math.log(part))


def test_f_ell_exceed_fraction_small_oracle():
    x = 20_000
    fracs = f_ell_exceed_fraction(x, (2, 6, 10))
    for ell in (2, 6, 10):
        count = 0
        for n in range(3, x + 1):
            if phi_ell_part_log(n, ell) > math.log(math.log(n)) ** 2:
                count += 1
        assert fracs[ell] == count / x, ell


def test_moments_small_literal_oracle():
    # M1 = sum w(p)/p, M2 = sum w(p)^2/p over primes p <= x;
    # tk_lhs = sum over n <= x of (w(n) - M1)^2
    x, cut = 100, HCutoff(10)
    rep = moments(x, cut)
    primes = [p for p in range(2, x + 1) if all(p % d for d in range(2, p))]
    m1 = math.fsum(small_prime_weight(p, cut) / p for p in primes)
    m2 = math.fsum(small_prime_weight(p, cut) ** 2 / p for p in primes)
    tk = math.fsum((small_prime_weight(n, cut) - m1) ** 2 for n in range(1, x + 1))
    assert math.isclose(rep.m1, m1, rel_tol=1e-12)
    assert math.isclose(rep.m2, m2, rel_tol=1e-12)
    assert math.isclose(rep.tk_lhs, tk, rel_tol=1e-9)
    assert rep.tk_rhs_scale == x * rep.m2


def test_moments_regression_values():
    rep = moments(100, HCutoff(10))
    assert math.isclose(rep.m1, 1.023017938433968, rel_tol=1e-12)
    assert math.isclose(rep.m2, 2.014671552770128, rel_tol=1e-12)
    assert math.isclose(rep.tk_lhs, 92.99333911616738, rel_tol=1e-12)


def test_moments_segment_size_invariance():
    a = moments(30_000, HCutoff(5), segment_size=1 << 20)
    b = moments(30_000, HCutoff(5), segment_size=4096)
    assert math.isclose(a.m1, b.m1, rel_tol=1e-9)
    assert math.isclose(a.m2, b.m2, rel_tol=1e-9)
    assert math.isclose(a.tk_lhs, b.tk_lhs, rel_tol=1e-9)


def test_h_prime_coeffs_two_orders_agree_exactly():
    for t, q in ((2000, 6), (10**4, 25)):
        cut = HCutoff(q)
        d = h_prime_coeffs(t, cut, order="direct")
        s = h_prime_coeffs(t, cut, order="swapped")
        assert d == s, (t, q)
    assert h_prime_coeffs(2000, HCutoff(6)) == {2: 832, 3: 199, 5: 79}


def test_h_prime_coeffs_literal_oracle():
    t, q_limit = 1500, 10
    cut = HCutoff(q_limit)
    out: dict[int, int] = {}
    for p in range(2, t + 1):
        if not all(p % d for d in range(2, int(p**0.5) + 1)):
            continue
        for qv, c in literal_weight_coeffs(p, q_limit).items():
            out[qv] = out.get(qv, 0) + c
    assert h_prime_coeffs(t, cut) == out


def test_h_prime_partial_sum_consistent_with_coeffs():
    cut = HCutoff(25)
    actual, predicted = h_prime_partial_sum(10**4, cut)
    coeffs = h_prime_coeffs(10**4, cut)
    via = math.fsum(c * math.log(q) for q, c in sorted(coeffs.items()))
    assert math.isclose(actual, via, rel_tol=1e-9)
    assert math.isclose(actual, 5961.2516034055, rel_tol=1e-9)
    assert predicted > 0


def test_pi_progression():
    assert pi_progression(1000, 4, 1) == 80
    for n, a in ((3, 1), (3, 2), (5, 2), (7, 3)):
        brute = sum(1 for p in range(2, 2000)
                    if all(p % d for d in range(2, int(p**0.5) + 1)) and p % n == a)
        assert pi_progression(2000, n, a) == brute


def test_reciprocal_prime_sum():
    actual, predicted = reciprocal_prime_sum(4, 10**4)
    brute = math.fsum(1 / p for p in range(2, 10**4 + 1)
                      if all(p % d for d in range(2, int(p**0.5) + 1)) and p % 4 == 1)
    assert math.isclose(actual, brute, rel_tol=1e-12)
    want = (math.log(math.log(10**4)) - math.log(math.log(4))) / 2
    assert math.isclose(predicted, want, rel_tol=1e-12)
    # the guard: x must be at least m^(1+eps)
    with pytest.raises(RangeError):
        reciprocal_prime_sum(100, 120)
    out, _ = reciprocal_prime_sum(100, 120, eps=None)
    assert out >= 0.0


def test_normal_order_ratio_guard_and_formula():
    assert normal_order_ratio(10**6) is None
    n = 10**7
    got = normal_order_ratio(n)
    from lamcycle.arith import lambda_iter
    ll = lambda_iter(n, 2).require_value()
    want = math.log(n / ll) / (math.log(math.log(n)) ** 2 * math.log(math.log(math.log(n))))
    assert math.isclose(got, want, rel_tol=1e-12)
    assert math.isclose(got, 0.7582765685052366, rel_tol=1e-12)


def test_vq_phiphi_sandwich():
    """The provable per-q bracket around v_q(phi(phi(n))): summing v_q(r-1)
    over the distinct primes r | phi(n) gives a lower bound, and adding
    v_q(phi(n)) an upper bound. Exact integers, every n."""
    cut = HCutoff(10)
    for n in range(2, 3000):
        ph = euler_phi(n)
        pp = phi_iter(n, 2)
        for q in cut.primes:
            lower = 0
            for r, _ in ph.factors:
                m = r - 1
                while m % q == 0:
                    m //= q
                    lower += 1
            v = valuation(q, pp)
            assert lower <= v <= lower + valuation(q, ph), (n, q)


def test_one_sided_weight_bound_as_specified():
    """The weight is supposed never to exceed sum of v_q(phi(phi(n))) log q
    over q <= Q, for every n up to 1e5. That claim is false: whenever two
    primes p | n share a prime r | p-1, the weight counts v_q(r-1) once per
    p while phi(n) holds r (hence r-1's q-part) only once. Smallest
    counterexample n = 1247 = 29*43 with shared r = 7; 428 violations below
    1e5 at Q = 5. Kept failing on purpose; the README's test section has
    the discussion, and test_vq_phiphi_sandwich has the bracket that is
    actually provable."""
    cut = HCutoff(5)
    violations = []
    for n in range(2, 100_001):
        pp = phi_iter(n, 2)
        coeffs = small_prime_weight_coeffs(n, cut)
        lhs = 1
        rhs = 1
        for q in cut.primes:
            lhs *= q ** valuation(q, pp)
            rhs *= q ** coeffs.get(q, 0)
        if lhs < rhs:
            violations.append(n)
    assert not violations, (
        f"{len(violations)} violations below 1e5, first {violations[:5]}; "
        "the one-sided bound fails pointwise whenever primes p | n share "
        "a common prime r | p-1")


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=10**9), st.integers(min_value=2, max_value=60))
def test_weight_nonnegative_and_bounded(n, q_limit):
    cut = HCutoff(q_limit)
    w = small_prime_weight(n, cut)
    assert w >= 0.0
    # crude ceiling: every chain exponent is at most log2 of phi(phi(n)) + 1
    assert w <= math.log(max(n, 2)) * math.log(max(n, 2))
