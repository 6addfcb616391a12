"""Seeded system generation and the verification campaigns run by `verify`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import bounds, charsums, dwork, geometry, series
from .fields import FieldSpec, enum_cap
from .geometry import MultiPoly, PolySystem


@dataclass(frozen=True)
class SuiteSizes:
    count: int = 8
    primes: tuple = (2, 3, 5)
    n_max: int = 4
    r_max: int = 3
    deg_max: int = 3
    terms_max: int = 4


def random_poly(rng: np.random.Generator, p: int, n: int, deg_max: int, terms_max: int) -> MultiPoly:
    deg = int(rng.integers(1, deg_max + 1))
    terms: dict = {}
    # one term of full degree guarantees deg f = deg
    e = [0] * n
    for _ in range(deg):
        e[int(rng.integers(0, n))] += 1
    terms[tuple(e)] = int(rng.integers(1, p))
    for _ in range(int(rng.integers(0, terms_max))):
        k = int(rng.integers(0, deg + 1))
        e = [0] * n
        for _ in range(k):
            e[int(rng.integers(0, n))] += 1
        terms[tuple(e)] = int(rng.integers(1, p))
    return MultiPoly.from_dict(n, terms)


def pinned_fixtures() -> dict[str, PolySystem]:
    return {
        "intro-cubic": PolySystem.from_exprs(3, 2, ["x2**2 - x1**3 + x1"]),
        "hyperbola": PolySystem.from_exprs(5, 2, ["x1*x2 - 1"]),
        "linear-forms": PolySystem.from_exprs(3, 3, ["x1 + x2 + x3", "x1 + 2*x2"]),
    }


def generate_suite(seed: int, sizes: SuiteSizes = SuiteSizes(), include_fixtures: bool = True
                   ) -> list[tuple[str, PolySystem]]:
    """Reproducible random systems within `sizes`, preceded by the pinned worked examples."""
    rng = np.random.default_rng(seed)
    out = list(pinned_fixtures().items()) if include_fixtures else []
    for k in range(sizes.count):
        p = int(rng.choice(sizes.primes))
        n = int(rng.integers(1, sizes.n_max + 1))
        r = int(rng.integers(1, sizes.r_max + 1))
        polys = tuple(random_poly(rng, p, n, sizes.deg_max, sizes.terms_max) for _ in range(r))
        out.append((f"seed{seed}-{k}", PolySystem(FieldSpec(p), n, polys)))
    return out


def within(system: PolySystem, sizes: SuiteSizes) -> bool:
    return (system.field.p in sizes.primes and system.n <= sizes.n_max and system.r <= sizes.r_max
            and max(system.degrees) <= sizes.deg_max)


# --- campaigns ---------------------------------------------------------------

@dataclass
class CampaignResult:
    name: str
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.get("pass") for r in self.rows)

    def to_json(self) -> dict:
        return {"campaign": self.name, "pass": self.passed, "rows": self.rows, "notes": self.notes}


def naive_count(system: PolySystem, subset, m: int, region: str) -> int:
    """Direct point loop over F_{q^m}^n using scalar field arithmetic; an oracle for small cases."""
    from itertools import product as iproduct
    from .fields import make_extension

    ext = make_extension(system.field, m)
    gf = ext.gf
    coeff = {c: ext.embed(system.field.gf.digits(c) if system.field.a > 1 else c)
             for f in system.polys for _, c in f.terms}
    values = range(1, ext.order) if region == "torus" else range(ext.order)
    polys = [system.polys[i - 1] for i in subset]
    total = 0
    for x in iproduct(values, repeat=system.n):
        ok = True
        for f in polys:
            acc = 0
            for e, c in f.terms:
                t = coeff[c]
                for xi, k in zip(x, e):
                    t = gf.mul(t, gf.pow(xi, k))
                acc = gf.add(acc, t)
            if acc != 0:
                ok = False
                break
        total += ok
    return total


def inclusion_exclusion_campaign(seed: int, m_max: int = 3, count: int = 6) -> CampaignResult:
    sizes = SuiteSizes(count=count, primes=(3, 5), n_max=3, r_max=2, deg_max=3)
    res = CampaignResult("inclusion-exclusion")
    for name, system in generate_suite(seed, sizes):
        for m in range(1, m_max + 1):
            if (system.q**m - 1) ** system.n > enum_cap():
                res.notes.append(f"{name}: m={m} skipped (torus beyond enumeration cap)")
                continue
            rec = charsums.inclusion_exclusion_check(system, m, strict=False)
            res.rows.append({"system": name, "p": system.field.p, "n": system.n, "r": system.r,
                             **rec.to_json()})
    return res


def random_rational_series(rng: np.random.Generator, order: int) -> series.TruncatedSeries:
    """Series of a random P/Q with integer coefficients and constant terms 1."""
    num = [1] + [int(x) for x in rng.integers(-5, 6, size=int(rng.integers(0, 4)))]
    den = [1] + [int(x) for x in rng.integers(-5, 6, size=int(rng.integers(0, 4)))]
    return (series.TruncatedSeries.of(num, order) * series.TruncatedSeries.of(den, order).inverse())


def delta_campaign(seed: int, cases: int = 20, order: int = 12, L: int = 4) -> CampaignResult:
    rng = np.random.default_rng(seed)
    res = CampaignResult("delta")
    for k in range(cases):
        q = int(rng.choice([2, 3, 4, 5, 7, 9]))
        G = random_rational_series(rng, order)
        a = series.delta(series.delta_inverse(G, q), q) == G
        b = series.delta_inverse(series.delta(G, q), q) == G
        c = series.delta_inverse_crosscheck(G, q, L)["pass"]
        res.rows.append({"case": k, "q": q, "delta_of_inverse": a, "inverse_of_delta": b,
                         "partial_product_agreement": c, "pass": a and b and c})
    return res


AXKATZ_SIZES = SuiteSizes(count=10, primes=(2, 3), n_max=3, r_max=2, deg_max=2, terms_max=3)


def axkatz_terms(system: PolySystem, budget: int = 1 << 25, m_min: int = 3, m_max: int = 10,
                 field_cap: int = 1 << 16) -> int:
    """Largest M <= m_max with q^{Mn} within budget and F_{q^M} small enough for log tables."""
    M = m_min
    while (M < m_max and system.q ** ((M + 1) * system.n) <= budget
           and system.q ** (M + 1) <= field_cap):
        M += 1
    return M


def axkatz_suite(seed: int, count: int = 10, budget: int = 1 << 25, min_terms: int = 7
                 ) -> list[tuple[str, PolySystem]]:
    """Seeded systems over F_2, F_3 whose first `min_terms` counts fit the point budget."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        p = int(rng.choice(AXKATZ_SIZES.primes))
        n_cap = max(1, min(AXKATZ_SIZES.n_max, int(math.log(budget, p) // min_terms)))
        n = int(rng.integers(1, n_cap + 1))
        r = int(rng.integers(1, AXKATZ_SIZES.r_max + 1))
        polys = tuple(random_poly(rng, p, n, AXKATZ_SIZES.deg_max, AXKATZ_SIZES.terms_max)
                      for _ in range(r))
        out.append((f"axkatz{seed}-{k}", PolySystem(FieldSpec(p), n, polys)))
    return out


def axkatz_fixtures() -> dict[str, PolySystem]:
    """Pinned systems with mu_0 > 0, so the divisibility claims are never vacuous."""
    return {
        "plane-F2": PolySystem.from_exprs(2, 3, ["x1 + x2 + x3"]),
        "quadric-cone-F3": PolySystem.from_exprs(3, 3, ["x1*x2 + x3**2"]),
        "two-linear-forms-F2": PolySystem.from_exprs(2, 3, ["x1 + x2", "x2 + x3 + 1"]),
    }


def axkatz_campaign(seed: int, count: int = 10) -> CampaignResult:
    res = CampaignResult("axkatz")
    for name, system in list(axkatz_fixtures().items()) + axkatz_suite(seed, count):
        M = axkatz_terms(system)
        v = bounds.ax_katz_check(system, M, 1, max(1, M - 2))
        row = {"system": name, "p": system.field.p, "n": system.n, "degrees": list(system.degrees),
               "terms": M, **v.to_json()}
        row["pass"] = v.passed and all(v.divisibility[:3])
        res.rows.append(row)
    return res


def trace_formula_fixtures() -> dict[str, tuple[MultiPoly, dwork.WeightProgram]]:
    """p = 3, N <= 2."""
    out = {
        "g=0": (MultiPoly(1, ()), dwork.WeightProgram(1, 0, (), (), 1)),
        "g=x": (MultiPoly.from_expr("x1", 1, 3), dwork.WeightProgram(1, 0, (), (), 1)),
    }
    for label, expr in (("f=x1", "x1"), ("f=x1-1", "x1 - 1")):
        out[label] = dwork.dwork_fixture(PolySystem.from_exprs(3, 1, [expr]))
    return out


def trace_formula_campaign(Ds=(8, 12, 16), Mprec: int = 8, m_max: int = 2) -> CampaignResult:
    res = CampaignResult("trace-formula")
    for label, (g, _) in trace_formula_fixtures().items():
        for m in range(1, m_max + 1):
            recs = [dwork.verify_trace_formula(g, 3, m, D, Mprec) for D in Ds]
            vals = [r.valuation for r in recs]
            floors = [r.floor for r in recs]
            cap = recs[0].cap
            # strict increase below the precision cap; a capped value is exact at working precision
            increasing = all(a < b or (a >= cap and b >= cap) for a, b in zip(vals, vals[1:]))
            floors_increasing = all(a < b or b >= cap for a, b in zip(floors, floors[1:]))
            res.rows.append({"fixture": label, "m": m, "D": list(Ds), "valuations_pi": vals,
                             "floors_pi": floors, "cap_pi": cap,
                             "above_floor": all(r.passed for r in recs),
                             "valuations_increasing": increasing, "floors_increasing": floors_increasing,
                             "pass": all(r.passed for r in recs) and increasing and floors_increasing})
    return res


def slopes_campaign(D: int = 12, Mprec: int = 8) -> CampaignResult:
    res = CampaignResult("slopes")
    for label, (g, wp) in trace_formula_fixtures().items():
        for k in range(g.n + 1):
            for I in combinations(range(1, g.n + 1), k):
                mat = dwork.alpha_matrix(g, 3, I, D, Mprec)
                rep = dwork.check_first_slope(mat, wp)
                wb = dwork.weight_bound(wp.with_subset(I))
                res.rows.append({"fixture": label, **rep.to_json(), "weight": wb.to_json(),
                                 "pass": rep.passed})
    return res


def coordinate_union_fixtures() -> dict[str, PolySystem]:
    """Unions of coordinate subspaces over F_3 that are not complete intersections."""
    return {
        "three-axes-A3": PolySystem.from_exprs(3, 3, ["x1*x2", "x1*x3", "x2*x3"]),
        "two-planes-A4": PolySystem.from_exprs(3, 4, ["x1*x3", "x1*x4", "x2*x3", "x2*x4"]),
        "plane-and-line-A3": PolySystem.from_exprs(3, 3, ["x1*x2", "x1*x3"]),
        "four-axes-A4": PolySystem.from_exprs(
            3, 4, ["x1*x2", "x1*x3", "x1*x4", "x2*x3", "x2*x4", "x3*x4"]),
        "plane-and-axis-A4": PolySystem.from_exprs(3, 4, ["x1*x3", "x1*x4", "x2*x3", "x2*x4", "x1*x2"]),
    }


def recombination_campaign(seed: int) -> CampaignResult:
    res = CampaignResult("recombination")
    for label, system in coordinate_union_fixtures().items():
        try:
            rc = geometry.recombine(system, seed=seed)
        except (geometry.RecombinationError, geometry.DimensionInconclusive) as exc:
            res.rows.append({"fixture": label, "error": str(exc), "pass": False})
            continue
        res.rows.append({"fixture": label, "codim": rc.codim, "jumps": rc.jumps,
                         "matrix": rc.matrix, "checks": rc.checks,
                         "g": rc.system.to_json()["polys"],
                         "certification": rc.certification, "pass": all(rc.checks.values())})
    res.notes.append("pointwise surrogate for scheme-theoretic vanishing; unmixedness "
                     "bookkeeping is not checked")
    return res


def random_profile(rng: np.random.Generator) -> bounds.DegreeProfile:
    n = int(rng.integers(1, 13))
    r = int(rng.integers(1, 7))
    degrees = tuple(sorted((int(x) for x in rng.integers(1, 6, size=r)), reverse=True))
    # dim Z ranges over values with c = n - dim Z <= r
    lo = max(0, n - r)
    dim = int(rng.integers(lo, n))  if n > lo else lo
    return bounds.DegreeProfile(n, degrees, dim, bool(rng.integers(0, 2)))


def bounds_campaign(seed: int, profiles: int = 1000) -> CampaignResult:
    rng = np.random.default_rng(seed)
    res = CampaignResult("bounds")
    failures = []
    for k in range(profiles):
        prof = random_profile(rng)
        inv = bounds.bound_report(prof).invariants()
        if not all(inv.values()):
            failures.append({"profile": prof.to_json(), "invariants": inv})
    res.rows.append({"profiles": profiles, "failures": failures, "pass": not failures})
    return res


def cancellation_campaign(M: int = 6) -> CampaignResult:
    system = pinned_fixtures()["intro-cubic"]
    res = CampaignResult("cancellation")
    X = [geometry.count(system, (1,), m) for m in range(1, M + 1)]
    Y = [geometry.count(system, (), m) - x for m, x in zip(range(1, M + 1), X)]
    prod = series.zeta_series(X) * series.zeta_series(Y)
    target = series.RationalFunction.make([1], [1, -9]).series(M)
    res.rows.append({"counts_X": X, "counts_complement": Y, "product": prod.to_json(),
                     "target": target.to_json(), "pass": prod == target})
    return res


CAMPAIGNS = {
    "inclusion-exclusion": lambda seed: inclusion_exclusion_campaign(seed),
    "delta": lambda seed: delta_campaign(seed),
    "axkatz": lambda seed: axkatz_campaign(seed),
    "trace-formula": lambda seed: trace_formula_campaign(),
    "slopes": lambda seed: slopes_campaign(),
    "recombination": lambda seed: recombination_campaign(seed),
    "bounds": lambda seed: bounds_campaign(seed),
    "cancellation": lambda seed: cancellation_campaign(),
}
