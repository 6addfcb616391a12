import pytest
from hypothesis import given, strategies as st
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_mul, gf_rem

from dworkbench.fields import (
    CapExceeded,
    FieldSpec,
    check_cap,
    enumerate_field,
    get_gf,
    is_irreducible,
    make_extension,
    smallest_irreducible,
    trace_to_prime,
)

SMALL_FIELDS = [(2, 1), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (2, 4)]


def _gf_for(p, k):
    return get_gf(p, smallest_irreducible(p, k) if k > 1 else (0, 1))


def _sympy_mul(p, modulus, a_digits, b_digits):
    # galoistools uses highest-degree-first lists
    big = lambda d: [int(x) for x in reversed(d)]
    r = gf_rem(gf_mul(big(a_digits), big(b_digits), p, ZZ), big(modulus), p, ZZ)
    out = list(reversed([int(x) for x in r]))
    return tuple(out + [0] * (len(modulus) - 1 - len(out)))


def test_f9_uses_y2_plus_1():
    assert FieldSpec(3, 2).modulus == (1, 0, 1)


def test_smallest_irreducible_is_irreducible():
    for p, k in [(2, 2), (2, 5), (3, 3), (5, 2), (7, 2)]:
        assert is_irreducible(smallest_irreducible(p, k), p)


@given(st.sampled_from(SMALL_FIELDS), st.data())
def test_multiplication_matches_polynomial_oracle(field, data):
    p, k = field
    gf = _gf_for(p, k)
    a = data.draw(st.integers(0, gf.q - 1))
    b = data.draw(st.integers(0, gf.q - 1))
    if k == 1:
        assert gf.mul(a, b) == a * b % p
    else:
        assert gf.digits(gf.mul(a, b)) == _sympy_mul(p, gf.modulus, gf.digits(a), gf.digits(b))


@given(st.sampled_from(SMALL_FIELDS), st.data())
def test_addition_is_coordinatewise(field, data):
    p, k = field
    gf = _gf_for(p, k)
    a = data.draw(st.integers(0, gf.q - 1))
    b = data.draw(st.integers(0, gf.q - 1))
    expect = tuple((x + y) % p for x, y in zip(gf.digits(a), gf.digits(b)))
    assert gf.digits(gf.add(a, b)) == expect
    assert gf.add(a, gf.neg(a)) == 0


@given(st.sampled_from(SMALL_FIELDS), st.data())
def test_inverse_and_frobenius(field, data):
    p, k = field
    gf = _gf_for(p, k)
    a = data.draw(st.integers(1, gf.q - 1))
    assert gf.mul(a, gf.inv(a)) == 1
    assert gf.pow(a, gf.q) == a
    assert gf.pow(a, gf.q - 1) == 1


@given(st.sampled_from(SMALL_FIELDS), st.data())
def test_trace_is_sum_of_conjugates_and_linear(field, data):
    p, k = field
    gf = _gf_for(p, k)
    a = data.draw(st.integers(0, gf.q - 1))
    b = data.draw(st.integers(0, gf.q - 1))
    conj = 0
    for i in range(k):
        conj = gf.add(conj, gf.pow(a, p**i))
    assert conj == gf.trace(a)
    assert 0 <= gf.trace(a) < p
    assert gf.trace(gf.add(a, b)) == (gf.trace(a) + gf.trace(b)) % p


def test_log_form_vector_ops_agree_with_scalar():
    gf = _gf_for(3, 3)
    import numpy as np

    codes = np.arange(gf.q)
    la = gf.to_log(codes)
    lb = gf.to_log(codes[::-1].copy())
    s = gf.from_log(gf.add_log(la, lb))
    m = gf.from_log(gf.mul_log(la, lb))
    for a, b, x, y in zip(codes, codes[::-1], s, m):
        assert gf.add(int(a), int(b)) == x
        assert gf.mul(int(a), int(b)) == y


def test_embedding_is_a_field_homomorphism():
    base = FieldSpec(3, 2)
    ext = make_extension(base, 2)
    gf, gq = ext.gf, base.gf
    for a in range(9):
        for b in range(9):
            ea, eb = ext.embed(gq.digits(a)), ext.embed(gq.digits(b))
            assert ext.embed(gq.digits(gq.add(a, b))) == gf.add(ea, eb)
            assert ext.embed(gq.digits(gq.mul(a, b))) == gf.mul(ea, eb)


def test_field_elements_and_trace_to_prime():
    ext = make_extension(FieldSpec(2), 3)
    elems = list(enumerate_field(ext))
    assert len(elems) == 8
    traces = [int(trace_to_prime(x)) for x in elems]
    assert sorted(traces) == [0] * 4 + [1] * 4
    x = elems[3]
    assert (x * x) / x == x
    assert x - x == 0


def test_invalid_field_specs():
    with pytest.raises(ValueError):
        FieldSpec(4)
    with pytest.raises(ValueError):
        FieldSpec(3, 2, (2, 0, 1))  # y^2 + 2 = (y-1)(y+1) over F_3
    with pytest.raises(ValueError):
        FieldSpec(5, 0)


def test_cap_guard(monkeypatch):
    with pytest.raises(CapExceeded):
        check_cap(100, "test", cap=10)
    monkeypatch.setenv("DWORKBENCH_ENUM_CAP", "16")
    with pytest.raises(CapExceeded):
        check_cap(17, "test")
    check_cap(16, "test")
