from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from dworkbench.campaigns import SuiteSizes, generate_suite, naive_count, random_poly
from dworkbench.fields import FieldSpec
from dworkbench.geometry import (
    MultiPoly,
    PolySystem,
    SystemError_,
    count,
    count_all_subsets,
    estimate_dimension,
    recombine,
    same_zero_set,
    vanishes_identically,
)

import numpy as np


def brute_count(system, subset, region="affine"):
    """Prime-field count with plain integer arithmetic."""
    p = system.field.p
    vals = range(1, p) if region == "torus" else range(p)
    polys = [system.polys[i - 1] for i in subset]
    total = 0
    for x in product(vals, repeat=system.n):
        if all(sum(c * np.prod([xi**e for xi, e in zip(x, ex)]) for ex, c in f.terms) % p == 0
               for f in polys):
            total += 1
    return total


@st.composite
def small_systems(draw, primes=(2, 3, 5), n_max=3, r_max=2, deg_max=3):
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    p = draw(st.sampled_from(primes))
    n = draw(st.integers(1, n_max))
    r = draw(st.integers(1, r_max))
    polys = tuple(random_poly(rng, p, n, deg_max, 3) for _ in range(r))
    return PolySystem(FieldSpec(p), n, polys)


def test_fermat_cubic_over_f7():
    s = PolySystem.from_exprs(7, 2, ["x1**3 + x2**3 + 1"])
    assert count(s, (1,), 1) == 6


def test_hyperbola_over_f5():
    s = PolySystem.from_exprs(5, 2, ["x1*x2 - 1"])
    assert count(s, (1,), 1) == 4
    assert count(s, (1,), 2) == 24


def test_empty_subset_counts_the_ambient_space():
    s = PolySystem.from_exprs(3, 2, ["x1"])
    assert count(s, (), 2, "affine") == 81
    assert count(s, (), 2, "torus") == 64


@given(small_systems())
@settings(max_examples=40)
def test_vectorized_count_matches_integer_brute_force(system):
    for region in ("affine", "torus"):
        full = tuple(range(1, system.r + 1))
        assert count(system, full, 1, region) == brute_count(system, full, region)


@given(small_systems(primes=(2, 3), n_max=2))
@settings(max_examples=20)
def test_extension_count_matches_scalar_loop(system):
    full = tuple(range(1, system.r + 1))
    assert count(system, full, 2) == naive_count(system, full, 2, "affine")


@given(small_systems())
@settings(max_examples=25)
def test_all_subsets_histogram_matches_individual_counts(system):
    table = count_all_subsets(system, 1, "torus")
    for J, N in table.items():
        assert N == count(system, J, 1, "torus")


def test_count_over_nonprime_base_field():
    # x^2 + 1 splits over F_9
    s = PolySystem.from_json({"p": 3, "a": 2, "n": 1, "polys": [{"terms": [{"c": [1, 0], "e": [2]},
                                                                           {"c": [1, 0], "e": [0]}]}]})
    assert count(s, (1,), 1) == 2


def test_dimension_estimates():
    assert estimate_dimension(PolySystem.from_exprs(3, 3, ["x1 + x2 + x3"])) == 2
    assert estimate_dimension(PolySystem.from_exprs(3, 2, ["x1", "x2 - 1"])) == 0
    assert estimate_dimension(PolySystem.from_exprs(3, 1, ["x1", "x1 - 1"])) == -1
    assert estimate_dimension(PolySystem.from_exprs(3, 3, ["x1*x2", "x1*x3", "x2*x3"])) == 1


def test_vanishes_identically_on_zero_set():
    s = PolySystem.from_exprs(3, 2, ["x1*x2"])
    assert not vanishes_identically(MultiPoly.from_expr("x1", 2, 3), s)
    assert vanishes_identically(MultiPoly.from_expr("x1**2*x2 + x1*x2**2", 2, 3), s)


def test_same_zero_set_detects_radical_equality():
    a = PolySystem.from_exprs(3, 2, ["x1**2"])
    b = PolySystem.from_exprs(3, 2, ["x1"])
    c = PolySystem.from_exprs(3, 2, ["x1*x2"])
    assert same_zero_set(a, b)
    assert not same_zero_set(b, c)


def test_recombination_on_three_axes():
    s = PolySystem.from_exprs(3, 3, ["x1*x2", "x1*x3", "x2*x3"])
    rc = recombine(s, seed=1)
    assert rc.codim == 2
    assert all(rc.checks.values())
    B = rc.matrix
    assert all(B[i][j] == 0 for i in range(3) for j in range(i))
    assert all(B[i][i] in (0, 1) for i in range(3))


def test_json_round_trip_and_sorting():
    s = PolySystem.from_exprs(5, 2, ["x1 + 1", "x1*x2**2 + 2"])
    assert s.degrees == (3, 1)
    again = PolySystem.from_json(s.to_json())
    assert again.to_json() == s.to_json()


@pytest.mark.parametrize("bad", [
    {"n": 2, "polys": []},
    {"p": 3, "n": 2, "polys": [{"terms": [{"c": 1}]}]},
    {"p": 3, "n": 1, "polys": [{"terms": [{"c": 2, "e": [0]}]}]},
    {"p": 4, "n": 1, "polys": []},
])
def test_malformed_systems_are_rejected(bad):
    with pytest.raises((SystemError_, ValueError)):
        PolySystem.from_json(bad)


def test_generated_systems_respect_sizes():
    sizes = SuiteSizes(count=30)
    for name, s in generate_suite(11, sizes, include_fixtures=False):
        assert s.field.p in sizes.primes
        assert 1 <= s.n <= sizes.n_max and 1 <= s.r <= sizes.r_max
        assert 1 <= min(s.degrees) and max(s.degrees) <= sizes.deg_max
