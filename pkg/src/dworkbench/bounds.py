"""Divisibility exponents mu_j, nu_j, eps_m and their zeta-level consequences.

Only consequences visible in the zeta function are certified: every reciprocal
root and pole of zeta_Z must be divisible by q^{mu_0}. Degree-by-degree
statements about cohomology are out of reach from point counts alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .fields import prime_factors
from .geometry import PolySystem, count, estimate_dimension
from .series import (
    ReconstructionError,
    newton_polygon,
    ord_p,
    pade_reconstruct,
    zeta_series,
)

SCOPE = ("zeta-level consequences only: reciprocal roots and poles of the zeta function are "
         "checked against mu_0; per-degree cohomological divisibility is not certified")


class EmptyVarietyError(ValueError):
    """Bounds are undefined for an empty variety."""


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class DegreeProfile:
    n: int
    degrees: tuple
    dimZ: int
    projective: bool = False

    def __post_init__(self):
        d = tuple(int(x) for x in self.degrees)
        object.__setattr__(self, "degrees", d)
        if self.dimZ < 0:
            raise EmptyVarietyError("Z is empty: no divisibility bounds are defined")
        if not d:
            raise ValueError("at least one polynomial is required")
        if min(d) < 1:
            raise ValueError("all degrees must be positive")
        if list(d) != sorted(d, reverse=True):
            raise ValueError("degrees must be sorted in descending order")
        if self.dimZ > self.n:
            raise ValueError("dim Z cannot exceed n")
        if self.c > self.r:
            raise ValueError(f"codimension {self.c} exceeds the number of equations {self.r}")

    @property
    def r(self) -> int:
        return len(self.degrees)

    @property
    def c(self) -> int:
        return self.n - self.dimZ

    @property
    def n_eff(self) -> int:
        """n in the ceiling numerators; n + 1 for projective varieties."""
        return self.n + 1 if self.projective else self.n

    @property
    def d1(self) -> int:
        return self.degrees[0]

    def to_json(self) -> dict:
        return {"n": self.n, "degrees": list(self.degrees), "dimZ": self.dimZ,
                "c": self.c, "projective": self.projective}


def d_star(profile: DegreeProfile) -> list[int]:
    out = []
    for i, d in enumerate(profile.degrees, start=1):
        if i <= profile.c:
            out.append(d)
        elif d == profile.d1:
            out.append(1)
        else:
            out.append(0)
    return out


def _check_j(profile: DegreeProfile, j: int) -> None:
    if not 0 <= j <= profile.dimZ:
        raise ValueError(f"j = {j} outside 0..{profile.dimZ}")


def mu(profile: DegreeProfile, j: int) -> int:
    _check_j(profile, j)
    return j + max(0, _ceil_div(profile.n_eff - j - sum(profile.degrees), profile.d1))


def nu(profile: DegreeProfile, j: int) -> int:
    _check_j(profile, j)
    return j + max(0, _ceil_div(profile.n_eff - j - sum(d_star(profile)), profile.d1))


def eps_range(profile: DegreeProfile) -> int:
    """Largest admissible m, i.e. dim Z - (n - r)."""
    return profile.dimZ - (profile.n - profile.r)


def eps(profile: DegreeProfile, m: int) -> int:
    if not 0 <= m <= eps_range(profile):
        raise ValueError(f"m = {m} outside 0..{eps_range(profile)}")
    r = profile.r
    ds = d_star(profile)
    total = sum(profile.degrees[: r - m]) + sum(ds[r - m:])
    return max(0, _ceil_div(profile.n_eff - total, profile.d1))


def degree_window(profile: DegreeProfile) -> tuple[int, int]:
    return max(0, profile.n - profile.r), 2 * profile.dimZ


@dataclass
class BoundReport:
    profile: DegreeProfile
    d_star: list
    mu: list
    nu: list
    eps: list
    window: tuple
    dim_source: str = "input"

    def invariants(self) -> dict:
        p = self.profile
        return {
            "nonnegative": all(x >= 0 for x in self.mu + self.nu + self.eps),
            "nu_ge_mu": all(v >= m for v, m in zip(self.nu, self.mu)),
            "nu_nondecreasing": all(a <= b for a, b in zip(self.nu, self.nu[1:])),
            "eps_nondecreasing": all(a <= b for a, b in zip(self.eps, self.eps[1:])),
            "eps_ends": self.eps[0] == self.mu[0] and self.eps[-1] == self.nu[0],
            "complete_intersection_equal": p.c != p.r or self.nu == self.mu,
        }

    def to_json(self) -> dict:
        return {"profile": self.profile.to_json(), "dim_source": self.dim_source,
                "d_star": self.d_star, "mu": self.mu, "nu": self.nu, "eps": self.eps,
                "window": list(self.window), "invariants": self.invariants(), "scope": SCOPE}


def bound_report(profile: DegreeProfile, dim_source: str = "input") -> BoundReport:
    return BoundReport(
        profile,
        d_star(profile),
        [mu(profile, j) for j in range(profile.dimZ + 1)],
        [nu(profile, j) for j in range(profile.dimZ + 1)],
        [eps(profile, m) for m in range(eps_range(profile) + 1)],
        degree_window(profile),
        dim_source,
    )


def profile_of(system: PolySystem, dim: int | None = None, projective: bool = False,
               seed: int = 0) -> tuple[DegreeProfile, str]:
    system.require_positive_degrees()
    if dim is not None:
        source = "override (command line)"
    elif system.dim_override is not None:
        dim, source = system.dim_override, "override (input file)"
    else:
        dim, source = estimate_dimension(system, seed=seed), "estimated (desk-scale certified)"
    return DegreeProfile(system.n, system.degrees, dim, projective), source


# --- checks ------------------------------------------------------------------

def q_to_pa(q: int) -> tuple[int, int]:
    ps = prime_factors(q)
    if len(ps) != 1:
        raise ValueError(f"{q} is not a prime power")
    p = ps[0]
    a, x = 0, q
    while x > 1:
        x //= p
        a += 1
    return p, a


def divisibility_certificate(poly: Sequence, q: int, mu_: int | Fraction) -> dict:
    """Pass iff ord_q(c_k) >= mu * k for every k; equivalently all reciprocal roots are q^mu-divisible."""
    if Fraction(poly[0]) != 1:
        raise ValueError("polynomial must have constant term 1")
    p, a = q_to_pa(q)
    rows = []
    for k, c in enumerate(poly):
        if k == 0 or c == 0:
            continue
        v = Fraction(ord_p(c, p), a)
        rows.append({"k": k, "ord_q": str(v), "needed": str(mu_ * k), "ok": v >= mu_ * k})
    return {"q": q, "mu": str(mu_), "coefficients": rows, "pass": all(r["ok"] for r in rows)}


@dataclass
class AxKatzVerdict:
    mu0: int
    counts: list
    divisibility: list
    zeta: dict | None
    slopes: dict | None
    reconstruction_error: str | None

    @property
    def counts_pass(self) -> bool:
        return all(self.divisibility)

    @property
    def slopes_pass(self) -> bool | None:
        if self.slopes is None:
            return None
        return all(self.slopes[side]["min_slope_ok"] for side in ("numerator", "denominator"))

    @property
    def passed(self) -> bool:
        return self.counts_pass and self.slopes_pass is True

    def to_json(self) -> dict:
        return {"mu0": self.mu0, "counts": self.counts, "count_divisibility": self.divisibility,
                "zeta": self.zeta, "slopes": self.slopes,
                "reconstruction_error": self.reconstruction_error,
                "counts_pass": self.counts_pass, "slopes_pass": self.slopes_pass,
                "pass": self.passed, "scope": SCOPE}


def ax_katz_check(system: PolySystem, M: int, B: int, ceiling: int | None = None) -> AxKatzVerdict:
    system.require_positive_degrees()
    q = system.q
    p, a = system.field.p, system.field.a
    # mu_0 does not depend on dim Z
    n, d = system.n, system.degrees
    mu0 = max(0, _ceil_div(n - sum(d), d[0]))
    subset = tuple(range(1, system.r + 1))
    counts = [count(system, subset, m, "affine") for m in range(1, M + 1)]
    div = [N % (q ** (m * mu0)) == 0 for m, N in enumerate(counts, start=1)]
    try:
        Z = pade_reconstruct(zeta_series(counts), B, ceiling)
    except ReconstructionError as exc:
        return AxKatzVerdict(mu0, counts, div, None, None, str(exc))
    slopes = {}
    for side, poly in (("numerator", Z.numerator), ("denominator", Z.denominator)):
        if len(poly) == 1:
            slopes[side] = {"slopes": [], "min_slope_ok": True}
            continue
        npg = newton_polygon(poly, p, a)
        slopes[side] = {"slopes": [str(s) for s in npg.slopes],
                        "min_slope_ok": npg.min_slope >= mu0,
                        "certificate": divisibility_certificate(poly, q, mu0)["pass"]}
    return AxKatzVerdict(mu0, counts, div, Z.to_json(), slopes, None)
