import cmath
from itertools import product

import numpy as np
from hypothesis import given, settings, strategies as st

from dworkbench.campaigns import random_poly
from dworkbench.charsums import (
    CyclotomicElement,
    alternating_zeta_product,
    dwork_construction,
    dwork_exp_sum,
    identity_rhs,
    inclusion_exclusion_check,
    l_star_series,
    toric_exp_sum,
)
from dworkbench.fields import FieldSpec
from dworkbench.geometry import MultiPoly, PolySystem

PRIMES = (2, 3, 5, 7)


def to_complex(x: CyclotomicElement) -> complex:
    z = cmath.exp(2j * cmath.pi / x.p)
    return sum(complex(c) * z**j for j, c in enumerate(x.coords))


@st.composite
def cyclo(draw, p=None):
    p = p or draw(st.sampled_from(PRIMES))
    return CyclotomicElement(p, tuple(draw(st.lists(st.integers(-9, 9), min_size=p - 1, max_size=p - 1))))


@given(st.data())
def test_ring_operations_match_complex_evaluation(data):
    p = data.draw(st.sampled_from(PRIMES))
    a, b = data.draw(cyclo(p)), data.draw(cyclo(p))
    assert abs(to_complex(a * b) - to_complex(a) * to_complex(b)) < 1e-6
    assert abs(to_complex(a + b) - to_complex(a) - to_complex(b)) < 1e-9
    assert abs(to_complex(a.conjugate()) - to_complex(a).conjugate()) < 1e-9


@given(cyclo())
def test_galois_action_is_a_ring_map(a):
    for c in range(1, a.p):
        assert (a * a).galois(c) == a.galois(c) * a.galois(c)
    assert a.galois(1) == a


def test_sum_of_all_roots_of_unity_vanishes():
    for p in PRIMES:
        total = sum((CyclotomicElement.zeta_power(p, j) for j in range(p)), CyclotomicElement.scalar(p, 0))
        assert total == 0


def test_small_exponential_sums():
    assert toric_exp_sum(MultiPoly(1, ()), FieldSpec(5), 1) == 4
    assert toric_exp_sum(MultiPoly.from_expr("x1", 1, 5), FieldSpec(5), 1) == -1
    assert toric_exp_sum(MultiPoly.from_expr("x2*(x1 - 1)", 2, 3), FieldSpec(3), 1) == 1


def test_quadratic_gauss_sum_has_absolute_value_sqrt_p():
    for p in (3, 5, 7):
        s = toric_exp_sum(MultiPoly.from_expr("x1**2", 1, p), FieldSpec(p), 1) + 1
        assert abs(abs(to_complex(s)) ** 2 - p) < 1e-9


def test_exponential_sum_matches_complex_brute_force():
    p = 5
    g = MultiPoly.from_expr("x1**2*x2 + 3*x2 + x1", 2, p)
    z = cmath.exp(2j * cmath.pi / p)
    expect = sum(z ** ((x * x * y + 3 * y + x) % p) for x, y in product(range(1, p), repeat=2))
    assert abs(to_complex(toric_exp_sum(g, FieldSpec(p), 1)) - expect) < 1e-9


@st.composite
def systems(draw):
    rng = np.random.default_rng(draw(st.integers(0, 10**6)))
    p = draw(st.sampled_from((2, 3, 5)))
    n = draw(st.integers(1, 2))
    r = draw(st.integers(1, 2))
    return PolySystem(FieldSpec(p), n, tuple(random_poly(rng, p, n, 3, 3) for _ in range(r)))


@given(systems(), st.integers(1, 2))
@settings(max_examples=25)
def test_grouped_and_direct_sums_agree_and_satisfy_identity(system, m):
    direct = toric_exp_sum(dwork_construction(system), system.field, m)
    grouped = dwork_exp_sum(system, m)
    assert direct == grouped
    assert grouped == identity_rhs(system, m)


def test_identity_on_linear_equation():
    s = PolySystem.from_exprs(3, 1, ["x1 - 1"])
    for m in (1, 2, 3):
        rec = inclusion_exclusion_check(s, m)
        assert rec.passed and rec.rhs == 1


def test_identity_grouped_method_on_larger_system():
    s = PolySystem.from_exprs(5, 3, ["x1*x2 + x3**2 - 1", "x1 + 2*x2*x3"])
    for m in (1, 2):
        assert inclusion_exclusion_check(s, m, method="grouped").passed


@given(systems())
@settings(max_examples=10)
def test_l_star_equals_alternating_zeta_product(system):
    assert l_star_series(system, 3) == alternating_zeta_product(system, 3)


def test_negating_g_conjugates_the_sum():
    g = MultiPoly.from_expr("x1**2 + x1*x2", 2, 5)
    minus = MultiPoly.from_expr("-x1**2 - x1*x2", 2, 5)
    fld = FieldSpec(5)
    assert toric_exp_sum(g, fld, 1).conjugate() == toric_exp_sum(minus, fld, 1)
