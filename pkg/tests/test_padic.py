from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from dworkbench.padic import PadicCyclo, PadicRing, PrecisionError

x = sympy.symbols("x")
RINGS = [(2, 10), (3, 6), (5, 4), (7, 3)]


def oracle_mul(p, M, a, b):
    """Product in Z[pi]/(pi^{p-1} + p), reduced mod p^M, by sympy polynomial remainder."""
    if p == 2:  # pi = -2 and the ring is Z_2
        return [(int(a[0]) * int(b[0])) % 2**M]
    A = sum(int(c) * x**i for i, c in enumerate(a))
    B = sum(int(c) * x**i for i, c in enumerate(b))
    r = sympy.Poly(sympy.rem(sympy.expand(A * B), x ** (p - 1) + p, x), x)
    coeffs = [0] * (p - 1)
    for (k,), c in r.terms():
        coeffs[k] = int(c) % p**M
    return coeffs


@st.composite
def elements(draw, ring):
    return np.array(draw(st.lists(st.integers(0, ring.mod - 1), min_size=ring.e, max_size=ring.e)),
                    dtype=np.int64)


@given(st.sampled_from(RINGS), st.data())
def test_multiplication_matches_polynomial_remainder(pm, data):
    R = PadicRing(*pm)
    a, b = data.draw(elements(R)), data.draw(elements(R))
    assert [int(c) for c in R.mul(a, b)] == oracle_mul(R.p, R.M, a, b)


@given(st.sampled_from(RINGS), st.data())
def test_unit_inverse(pm, data):
    R = PadicRing(*pm)
    a = data.draw(elements(R))
    a[0] = a[0] - a[0] % R.p + data.draw(st.integers(1, R.p - 1))
    assert np.array_equal(R.mul(a, R.unit_inverse(a)), R.from_int(1))


def test_pi_relation_and_valuations():
    for p, M in RINGS:
        R = PadicRing(p, M)
        pi = R.pi()
        assert R.val_pi(pi) == 1
        assert np.array_equal(R.power(pi, p - 1), R.from_int(-p))
        assert R.val_pi(R.from_int(p**2)) == 2 * (p - 1)
        assert R.val_pi(R.zeros()) == R.cap
        assert R.ord_p(R.from_int(p)) == 1


def test_matmul_matches_elementwise_products():
    R = PadicRing(3, 5)
    rng = np.random.default_rng(0)
    A = rng.integers(0, R.mod, size=(2, 3, 4))
    B = rng.integers(0, R.mod, size=(2, 4, 2))
    C = R.matmul(A, B)
    for i in range(3):
        for j in range(2):
            acc = R.zeros()
            for k in range(4):
                acc = R.add(acc, R.mul(A[:, i, k], B[:, k, j]))
            assert np.array_equal(C[:, i, j], acc)


def test_object_dtype_for_large_moduli():
    R = PadicRing(5, 20)
    assert R.dtype_for(50) is object
    a = R.from_int(5**19 + 3)
    assert R.val_pi(R.mul(a, R.from_int(5))) == 4


def test_scalar_wrapper_and_fraction_scaling():
    R = PadicRing(3, 6)
    half = PadicCyclo.wrap(R, R.scale(R.from_int(1), Fraction(1, 2)))
    assert half * 2 == 1
    pi = PadicCyclo.wrap(R, R.pi())
    assert (pi**2 + 3).is_zero()
    assert (pi * pi).val_pi == 2


def test_exact_division_by_p():
    R = PadicRing(3, 6)
    assert np.array_equal(R.div_p(R.from_int(18), 2), R.from_int(2))
    with pytest.raises(PrecisionError):
        R.div_p(R.from_int(4), 1)
