from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dworkbench.bounds import (
    DegreeProfile,
    EmptyVarietyError,
    ax_katz_check,
    bound_report,
    d_star,
    degree_window,
    divisibility_certificate,
    eps,
    eps_range,
    mu,
    nu,
    q_to_pa,
)
from dworkbench.campaigns import random_poly
from dworkbench.fields import FieldSpec
from dworkbench.geometry import PolySystem, count


@st.composite
def profiles(draw):
    n = draw(st.integers(1, 12))
    degrees = tuple(sorted(draw(st.lists(st.integers(1, 6), min_size=1, max_size=6)), reverse=True))
    dim = draw(st.integers(max(0, n - len(degrees)), n - 1))
    return DegreeProfile(n, degrees, dim, draw(st.booleans()))


def test_hand_checked_values():
    assert d_star(DegreeProfile(6, (2, 2, 2), 4)) == [2, 2, 1]
    assert d_star(DegreeProfile(6, (3, 2, 1), 4)) == [3, 2, 0]
    assert mu(DegreeProfile(3, (2,), 2), 0) == 1
    p = DegreeProfile(6, (2, 2, 2), 5)
    assert mu(p, 0) == 0 and nu(p, 0) == 1
    # linear forms: n - r free variables
    p = DegreeProfile(5, (1, 1), 3)
    assert [mu(p, j) for j in range(4)] == [3, 3, 3, 3]
    assert degree_window(p) == (3, 6)


def test_projective_shifts_numerators_only():
    a = DegreeProfile(4, (2,), 3)
    b = DegreeProfile(4, (2,), 3, projective=True)
    assert (mu(a, 0), mu(b, 0)) == (1, 2)
    assert a.c == b.c


def test_eps_range_is_enforced():
    p = DegreeProfile(4, (2, 2), 2)
    assert eps_range(p) == 0
    with pytest.raises(ValueError):
        eps(p, 1)


@given(profiles())
@settings(max_examples=300)
def test_report_invariants_hold(profile):
    inv = bound_report(profile).invariants()
    assert all(inv.values()), inv


@given(profiles())
def test_d_star_never_exceeds_d(profile):
    assert all(s <= d for s, d in zip(d_star(profile), profile.degrees))


def test_invalid_profiles():
    with pytest.raises(EmptyVarietyError):
        DegreeProfile(3, (2,), -1)
    with pytest.raises(ValueError):
        DegreeProfile(3, (1, 2), 2)
    with pytest.raises(ValueError):
        DegreeProfile(4, (2,), 1)  # codimension 3 from one equation


@given(st.integers(0, 10**6))
@settings(max_examples=40)
def test_ax_katz_divisibility_of_first_count(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 3]))
    n = int(rng.integers(1, 5))
    r = int(rng.integers(1, 3))
    s = PolySystem(FieldSpec(p), n, tuple(random_poly(rng, p, n, 3, 3) for _ in range(r)))
    mu0 = max(0, -(-(n - sum(s.degrees)) // s.degrees[0]))
    N = count(s, tuple(range(1, r + 1)), 1)
    assert N % p**mu0 == 0


def test_divisibility_certificate():
    assert divisibility_certificate([1, -9], 3, 2)["pass"]
    assert not divisibility_certificate([1, -3], 3, 2)["pass"]
    assert divisibility_certificate([1, 0, 81], 9, Fraction(1))["pass"]
    assert q_to_pa(27) == (3, 3)


def test_ax_katz_check_on_linear_system_and_hyperbola():
    v = ax_katz_check(PolySystem.from_exprs(2, 3, ["x1 + x2 + x3"]), 5, 1, 3)
    assert v.mu0 == 2 and v.passed
    assert v.zeta == {"numerator": [1], "denominator": [1, -4]}
    v = ax_katz_check(PolySystem.from_exprs(3, 2, ["x1*x2 - 1"]), 6, 1, 4)
    assert v.passed and v.mu0 == 0


def test_ax_katz_reports_reconstruction_failure():
    v = ax_katz_check(PolySystem.from_exprs(3, 2, ["x2**2 - x1**3 + x1"]), 3, 1, 1)
    assert v.counts_pass
    assert v.reconstruction_error and not v.passed
