from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
import sympy

from dworkbench.dwork import (
    WeightProgram,
    alpha_matrix,
    artin_hasse_data,
    artin_hasse_exact,
    check_first_slope,
    dwork_fixture,
    fredholm_direct,
    matrix_traces,
    quotient_diagonals_vanish,
    subspace_preserved,
    teichmuller,
    trace_and_fredholm,
    verify_trace_formula,
    weight_bound,
)
from dworkbench.geometry import MultiPoly, PolySystem


def g_of(expr, n, p=3):
    return MultiPoly.from_expr(expr, n, p)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_artin_hasse_coefficients_match_sympy_series(p):
    z = sympy.symbols("z")
    K = 12
    expo = sum(z ** (p**i) / sympy.Integer(p) ** i for i in range(K) if p**i <= K)
    ser = sympy.series(sympy.exp(expo), z, 0, K + 1).removeO()
    exact = artin_hasse_exact(p, K)
    for k in range(K + 1):
        assert exact[k] == Fraction(str(ser.coeff(z, k)))
        assert exact[k].denominator % p != 0


def test_artin_hasse_e3_for_p3():
    assert artin_hasse_exact(3, 3)[3] == Fraction(1, 2)


def test_teichmuller_lift():
    assert teichmuller(2, 5, 2).coords[0] == 7
    for c in range(1, 7):
        t = teichmuller(c, 7, 4)
        assert t**6 == 1
        assert t.coords[0] % 7 == c


@pytest.mark.parametrize("p", [3, 5])
def test_dwork_root_and_splitting_value(p):
    data = artin_hasse_data(p, 6, 0)
    R = data.ring
    assert R.val_pi(data.gamma) == 1
    assert R.val_pi(R.sub(data.gamma, R.pi())) >= 2
    # theta(1) is a primitive p-th root of unity congruent to 1 + gamma
    zeta = data.zeta_image
    assert np.array_equal(R.power(zeta, p), R.from_int(1))
    assert not np.array_equal(zeta, R.from_int(1))
    assert R.val_pi(R.sub(zeta, R.add(R.from_int(1), data.gamma))) >= 2


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1)])
def test_trace_of_alpha_for_linear_g(p, m):
    # the toric sum of x over F_{p^m}^* is -1, so Tr(alpha^m) = -1 / (p^m - 1)
    mat = alpha_matrix(g_of("x1", 1, p), p, (), 12, 6)
    R = mat.ring
    tr = matrix_traces(mat, m)[m - 1]
    expect = R.scale(R.from_int(1), Fraction(-1, p**m - 1))
    assert R.val_pi(R.sub(tr, expect)) >= min(mat.floor, R.cap)


def test_trace_for_zero_polynomial_is_one():
    mat = alpha_matrix(MultiPoly(2, ()), 3, (), 6, 6)
    assert np.array_equal(matrix_traces(mat, 1)[0], mat.ring.from_int(1))


@pytest.mark.parametrize("expr,n", [("x1", 1), ("x2*x1", 2), ("x2*(x1 - 1)", 2), ("x2*(x1**2 + 1)", 2)])
def test_trace_formula_meets_floor(expr, n):
    for D in (8, 12, 16):
        rec = verify_trace_formula(g_of(expr, n), 3, 1, D, 8)
        assert rec.passed, rec.to_json()


def test_trace_formula_valuations_increase_at_high_precision():
    vals = [verify_trace_formula(g_of("x1", 1), 3, 1, D, 20).valuation for D in (8, 12, 16)]
    assert vals == [18, 28, 34]


def test_trace_formula_frozen_valuations():
    # (difference valuation, floor) in pi-units at Mprec = 8
    got = [(r.valuation, r.floor) for r in
           (verify_trace_formula(g_of("x2*x1", 2), 3, 1, D, 8) for D in (8, 12, 16))]
    assert got == [(12, 9), (16, 13), (16, 16)]
    got = [(r.valuation, r.floor) for r in
           (verify_trace_formula(g_of("x2*(x1 - 1)", 2), 3, 1, D, 8) for D in (8, 12, 16))]
    assert got == [(10, 9), (16, 13), (16, 16)]


def test_difference_valuation_need_not_be_monotone_in_D():
    # only the floor is guaranteed; this fixture dips at D = 16 at every precision tried
    for Mprec in (8, 12):
        got = [(r.valuation, r.floor) for r in
               (verify_trace_formula(g_of("x2*(x1**2 + 1)", 2), 3, 1, D, Mprec) for D in (8, 12, 16))]
        assert got == [(8, 6), (14, 9), (12, 12)]


def test_fredholm_newton_identities_agree_with_direct_elimination():
    mat = alpha_matrix(g_of("x2*(x1 - 1)", 2), 3, (), 6, 8)
    fr = trace_and_fredholm(mat, 4, 4)
    direct = fredholm_direct(mat, 4)
    for k in range(5):
        mod = 3 ** fr.precision[k]
        assert np.array_equal(fr.coeffs[k] % mod, np.asarray(direct[k]) % mod)


def test_weight_closed_form_is_a_lower_bound():
    wp = WeightProgram(2, 2, (2, 1))
    for k in range(5):
        for I in combinations(range(1, 5), k):
            wb = weight_bound(wp.with_subset(I), box=3)
            assert wb.closed_form <= wb.enumerated_min


def test_weight_program_conventions():
    wp = WeightProgram(1, 0, (), (), 2)
    assert wp.weight((3,)) == Fraction(3, 2)
    assert wp.in_cone((5,))
    wp = WeightProgram(2, 1, (2,), (1, 3))
    assert wp.I1 == (1,) and wp.I2 == (3,)
    assert wp.closed_form() == Fraction(1, 2)
    assert not wp.in_cone((3, 0, 1))


@pytest.mark.parametrize("expr,n,system", [("x1", 1, None), (None, 2, "x1"), (None, 2, "x1 - 1")])
def test_first_slope_bounds_for_every_subset(expr, n, system):
    if system is None:
        g, wp = g_of(expr, n), WeightProgram(n, 0, (), (), 1)
    else:
        g, wp = dwork_fixture(PolySystem.from_exprs(3, 1, [system]))
    for k in range(g.n + 1):
        for I in combinations(range(1, g.n + 1), k):
            rep = check_first_slope(alpha_matrix(g, 3, I, 10, 8), wp)
            assert rep.verdict == "pass", rep.to_json()


def test_cone_filter_leaves_the_determinant_unchanged():
    g, wp = dwork_fixture(PolySystem.from_exprs(3, 1, ["x1 - 1"]))
    full = alpha_matrix(g, 3, (), 6, 8)
    cone = alpha_matrix(g, 3, (), 6, 8, cone=wp.in_cone)
    a, b = fredholm_direct(full, 3), fredholm_direct(cone, 3)
    assert all(np.array_equal(np.asarray(x) % 3**6, np.asarray(y) % 3**6) for x, y in zip(a, b))
    assert quotient_diagonals_vanish(full, wp)


def test_subspace_b_i_is_preserved():
    g = g_of("x2*(x1 - 1)", 2)
    for I in [(1,), (2,), (1, 2)]:
        assert subspace_preserved(g, 3, I, 5, 6)


def test_floor_is_monotone_in_truncation_degree():
    g = g_of("x2*x1", 2)
    floors = [alpha_matrix(g, 3, (), D, 20).floor for D in (4, 8, 12, 16)]
    assert floors == sorted(floors) and len(set(floors)) == 4
