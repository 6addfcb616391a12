"""Exact arithmetic in Z[zeta_p], additive characters, toric exponential sums
and the inclusion-exclusion identity tying L* to zeta functions of the Z*_J."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .fields import FieldElement, FieldSpec, check_cap, make_extension, trace_to_prime
from .geometry import (
    MultiPoly,
    PolySystem,
    _Evaluator,
    _grid_chunks,
    count_all_subsets,
)
from .series import TruncatedSeries, exp_series, zeta_series


class IdentityMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class CyclotomicElement:
    """sum c_j X^j, j < p-1, in Z[X]/Phi_p (X -> zeta_p); coordinates may be Fractions."""

    p: int
    coords: tuple

    @classmethod
    def from_full(cls, p: int, full) -> "CyclotomicElement":
        """Reduce a length-p vector (exponents 0..p-1) using X^{p-1} = -(1 + ... + X^{p-2})."""
        full = list(full) + [0] * (p - len(full))
        top = full[p - 1]
        return cls(p, tuple(full[j] - top for j in range(p - 1)))

    @classmethod
    def scalar(cls, p: int, c) -> "CyclotomicElement":
        return cls.from_full(p, [c])

    @classmethod
    def zeta_power(cls, p: int, j: int) -> "CyclotomicElement":
        full = [0] * p
        full[j % p] = 1
        return cls.from_full(p, full)

    @classmethod
    def from_histogram(cls, p: int, hist) -> "CyclotomicElement":
        """sum_j hist[j] zeta^j."""
        return cls.from_full(p, [int(h) for h in hist])

    def full(self) -> list:
        return list(self.coords) + [0]

    def _coerce(self, other) -> "CyclotomicElement":
        if isinstance(other, CyclotomicElement):
            if other.p != self.p:
                raise ValueError("cyclotomic elements of different conductors")
            return other
        return CyclotomicElement.scalar(self.p, other)

    def __add__(self, other):
        other = self._coerce(other)
        return CyclotomicElement(self.p, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.p, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, CyclotomicElement):
            return CyclotomicElement(self.p, tuple(a * other for a in self.coords))
        other = self._coerce(other)
        p = self.p
        out = [0] * p
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    if b:
                        out[(i + j) % p] += a * b
        return CyclotomicElement.from_full(p, out)

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, CyclotomicElement):
            if not k.is_rational():
                raise ValueError("division by irrational cyclotomic elements is not supported")
            k = k.coords[0]
        return CyclotomicElement(self.p, tuple(Fraction(a) / k for a in self.coords))

    def __pow__(self, e: int):
        out = CyclotomicElement.scalar(self.p, 1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicElement.scalar(self.p, other)
        if not isinstance(other, CyclotomicElement):
            return NotImplemented
        return self.p == other.p and all(a == b for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash((self.p, tuple(Fraction(a) for a in self.coords)))

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.coords[0])

    def galois(self, c: int) -> "CyclotomicElement":
        """Apply zeta -> zeta^c, c prime to p."""
        if c % self.p == 0:
            raise ValueError("c must be prime to p")
        out = [0] * self.p
        for j, a in enumerate(self.full()):
            out[(j * c) % self.p] += a
        return CyclotomicElement.from_full(self.p, out)

    def conjugate(self) -> "CyclotomicElement":
        return self.galois(-1)

    def to_json(self):
        return [a if isinstance(a, int) else (int(a) if Fraction(a).denominator == 1 else str(a))
                for a in self.coords]

    def __repr__(self):
        return f"Cyc{self.p}{self.to_json()}"


def character(x: FieldElement) -> CyclotomicElement:
    """zeta_p ** Tr(x), trace taken down to F_p."""
    return CyclotomicElement.zeta_power(x.ambient.p, int(trace_to_prime(x)))


# --- exponential sums --------------------------------------------------------

def _trace_histogram(gf, vals_log: np.ndarray) -> np.ndarray:
    return np.bincount(gf.trace_log[vals_log], minlength=gf.p)


def toric_exp_sum(g: MultiPoly, fld: FieldSpec, m: int) -> CyclotomicElement:
    """sum over x in G_m^N(F_{q^m}) of zeta_p^{Tr g(x)}, by direct enumeration."""
    ext = make_extension(fld, m)
    N = g.n
    check_cap((ext.order - 1) ** N, f"torus G_m^{N}(F_{ext.order})")
    ev = _Evaluator(fld, ext)
    hist = np.zeros(fld.p, dtype=np.int64)
    if N == 0:
        vals = ev(g, [])
        hist += _trace_histogram(ext.gf, np.atleast_1d(vals))
    else:
        for xs in _grid_chunks(ext.order, N, "torus"):
            hist += _trace_histogram(ext.gf, ev(g, xs))
    return CyclotomicElement.from_histogram(fld.p, hist)


def dwork_construction(system: PolySystem) -> MultiPoly:
    """g = sum_i x_{n+i} f_i in n + r variables."""
    n, r = system.n, system.r
    terms: dict = {}
    for i, f in enumerate(system.polys):
        for e, c in f.terms:
            y = [0] * r
            y[i] = 1
            terms[tuple(e) + tuple(y)] = c
    return MultiPoly.from_dict(n + r, terms)


def _inner_sums(fld: FieldSpec, m: int) -> list[CyclotomicElement]:
    """T[v] = sum_{y in F_{q^m}^*} zeta^{Tr(y v)} for every log-form v, by direct summation."""
    ext = make_extension(fld, m)
    gf = ext.gf
    ys = np.arange(ext.order - 1, dtype=np.int64)
    out = []
    for v in range(ext.order):
        hist = _trace_histogram(gf, gf.mul_log(ys, v))
        out.append(CyclotomicElement.from_histogram(fld.p, hist))
    return out


def dwork_exp_sum(system: PolySystem, m: int) -> CyclotomicElement:
    """S*_m of the Dwork polynomial, summing over the y-variables factor by factor.

    For fixed x the y-sum splits as prod_i sum_{y_i} Psi(y_i f_i(x)) (additivity of
    the character only), so points x are grouped by the value tuple (f_1(x), ..).
    """
    ext = make_extension(system.field, m)
    qm = ext.order
    n, r = system.n, system.r
    check_cap((qm - 1) ** n, f"torus G_m^{n}(F_{qm})")
    check_cap(qm**r, "value tuples")
    p = system.field.p
    if r == 0:
        return CyclotomicElement.scalar(p, (qm - 1) ** n)
    ev = _Evaluator(system.field, ext)
    hist = np.zeros(qm**r, dtype=np.int64)
    if n == 0:
        chunks = [[]]
    else:
        chunks = _grid_chunks(qm, n, "torus")
    for xs in chunks:
        key = np.zeros(len(xs[0]) if xs else 1, dtype=np.int64)
        for f in system.polys:
            key = key * qm + np.atleast_1d(ev(f, xs))
        hist += np.bincount(key, minlength=qm**r)
    T = _inner_sums(system.field, m)
    total = CyclotomicElement.scalar(p, 0)
    for key in np.nonzero(hist)[0]:
        term = CyclotomicElement.scalar(p, int(hist[key]))
        k = int(key)
        for _ in range(r):
            term = term * T[k % qm]
            k //= qm
        total = total + term
    return total


def identity_rhs(system: PolySystem, m: int) -> int:
    """sum_J (-1)^{r-|J|} q^{m|J|} |Z*_J(F_{q^m})|."""
    q, r = system.q, system.r
    counts = count_all_subsets(system, m, "torus")
    return sum((-1) ** (r - len(J)) * q ** (m * len(J)) * N for J, N in counts.items())


@dataclass
class IdentityRecord:
    m: int
    lhs: CyclotomicElement
    rhs: int
    method: str

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {"m": self.m, "exp_sum": self.lhs.to_json(), "count_side": self.rhs,
                "method": self.method, "pass": self.passed}


def inclusion_exclusion_check(system: PolySystem, m: int, method: str = "auto",
                              strict: bool = True) -> IdentityRecord:
    """Both sides of S*_m(g) = sum_J (-1)^{r-|J|} q^{m|J|} |Z*_J(F_{q^m})|."""
    if method == "auto":
        N = system.n + system.r
        method = "direct" if (system.q**m - 1) ** N <= 1 << 20 else "grouped"
    if method == "direct":
        lhs = toric_exp_sum(dwork_construction(system), system.field, m)
    elif method == "grouped":
        lhs = dwork_exp_sum(system, m)
    else:
        raise ValueError(f"unknown method {method!r}")
    rec = IdentityRecord(m, lhs, identity_rhs(system, m), method)
    if strict and not rec.passed:
        raise IdentityMismatch(f"m={m}: exp sum {lhs} != count side {rec.rhs}")
    return rec


def exp_sums(system: PolySystem, M: int) -> list[CyclotomicElement]:
    return [inclusion_exclusion_check(system, m, strict=False).lhs for m in range(1, M + 1)]


def l_star_series(system: PolySystem, M: int, sums=None) -> TruncatedSeries:
    """exp(sum S*_m t^m / m), computed in Q(zeta_p) and asserted rational."""
    p = system.field.p
    sums = exp_sums(system, M) if sums is None else sums
    a = [CyclotomicElement.scalar(p, 0)] + [S / m for m, S in enumerate(sums, start=1)]
    s = exp_series(a, one=CyclotomicElement.scalar(p, Fraction(1)))
    if not all(c.is_rational() for c in s.coeffs):
        raise IdentityMismatch("L* has non-rational coefficients")
    return TruncatedSeries(tuple(c.rational_value() for c in s.coeffs))


def alternating_zeta_product(system: PolySystem, M: int) -> TruncatedSeries:
    """prod_J zeta_{Z*_J}(q^{|J|} t) ** ((-1)^{r-|J|}), from torus counts."""
    q, r = system.q, system.r
    per_m = [count_all_subsets(system, m, "torus") for m in range(1, M + 1)]
    out = TruncatedSeries.one(M)
    for k in range(r + 1):
        for J in combinations(range(1, r + 1), k):
            z = zeta_series([per_m[m - 1][J] for m in range(1, M + 1)]).scale(q**k)
            out = out * (z if (r - k) % 2 == 0 else z.inverse())
    return out
