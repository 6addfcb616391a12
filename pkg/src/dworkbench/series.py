"""Truncated power series over exact rings, zeta series, Dwork's delta operator,
Pade reconstruction of rational functions and p-adic Newton polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import sympy


class ReconstructionError(ValueError):
    pass


def ord_p(x, p: int) -> float | int:
    """p-adic valuation of an integer or Fraction; inf for 0."""
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


# --- truncated series --------------------------------------------------------

@dataclass(frozen=True)
class TruncatedSeries:
    """c_0 + c_1 t + ... + c_M t^M + O(t^{M+1}) over any exact ring."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a series needs at least its constant term")

    @classmethod
    def of(cls, coeffs: Iterable, order: int | None = None) -> "TruncatedSeries":
        cs = [c if not isinstance(c, int) else Fraction(c) for c in coeffs]
        if order is not None:
            zero = cs[0] * 0
            cs = (cs + [zero] * (order + 1))[: order + 1]
        return cls(tuple(cs))

    @classmethod
    def one(cls, order: int) -> "TruncatedSeries":
        return cls.of([1], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def _zero(self):
        return self.coeffs[0] * 0

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs[: order + 1])

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        M = min(self.order, other.order)
        return TruncatedSeries(tuple(self[k] + other[k] for k in range(M + 1)))

    def __neg__(self):
        return TruncatedSeries(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(tuple(c * other for c in self.coeffs))
        M = min(self.order, other.order)
        out = []
        for k in range(M + 1):
            acc = self._zero()
            for j in range(k + 1):
                acc = acc + self[j] * other[k - j]
            out.append(acc)
        return TruncatedSeries(tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; the constant term must be 1."""
        if self[0] != 1:
            raise ValueError("only series with constant term 1 are inverted")
        b = [self[0]]  # == 1 in the coefficient ring
        for k in range(1, self.order + 1):
            acc = self._zero()
            for j in range(1, k + 1):
                acc = acc + self[j] * b[k - j]
            b.append(-acc)
        return TruncatedSeries(tuple(b))

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return TruncatedSeries(tuple(c / other for c in self.coeffs))

    def __pow__(self, e: int) -> "TruncatedSeries":
        if e < 0:
            return self.inverse() ** (-e)
        out = TruncatedSeries.of([self[0] ** 0], self.order) if e == 0 else self
        for _ in range(e - 1):
            out = out * self
        return out

    def scale(self, c) -> "TruncatedSeries":
        """Gamma(t) -> Gamma(c t)."""
        return TruncatedSeries(tuple(a * c**k for k, a in enumerate(self.coeffs)))

    def log(self) -> "TruncatedSeries":
        """log of a series with constant term 1: k l_k = k c_k - sum_{j<k} j l_j c_{k-j}."""
        if self[0] != 1:
            raise ValueError("log needs constant term 1")
        l = [self._zero()]
        for k in range(1, self.order + 1):
            acc = self[k] * k
            for j in range(1, k):
                acc = acc - l[j] * j * self[k - j]
            l.append(acc / k)
        return TruncatedSeries(tuple(l))

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        M = min(self.order, other.order)
        return all(self[k] == other[k] for k in range(M + 1))

    def __hash__(self):
        return hash(self.coeffs)

    def to_json(self):
        return [_json_number(c) for c in self.coeffs]


def _json_number(c):
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if hasattr(c, "to_json"):
        return c.to_json()
    return c


def exp_series(a: Sequence, one=Fraction(1)) -> TruncatedSeries:
    """exp(sum_{k>=1} a_k t^k); a[0] is ignored. Uses k e_k = sum_j j a_j e_{k-j}."""
    e = [one]
    for k in range(1, len(a)):
        acc = one * 0
        for j in range(1, k + 1):
            acc = acc + a[j] * j * e[k - j]
        e.append(acc / k)
    return TruncatedSeries(tuple(e))


def zeta_series(counts: Sequence[int], q: int | None = None) -> TruncatedSeries:
    """exp(sum N_m t^m / m) to order len(counts)."""
    if any(int(N) < 0 for N in counts):
        raise ValueError("point counts must be nonnegative")
    a = [Fraction(0)] + [Fraction(int(N), m) for m, N in enumerate(counts, start=1)]
    return exp_series(a)


def power_sums_from_series(s: TruncatedSeries) -> list:
    """N_1..N_M with s = exp(sum N_m t^m/m)."""
    lg = s.log()
    return [lg[m] * m for m in range(1, s.order + 1)]


# --- delta -------------------------------------------------------------------

def delta(gamma: TruncatedSeries, q: int) -> TruncatedSeries:
    """Gamma(t) / Gamma(q t)."""
    if gamma[0] != 1:
        raise ValueError("delta is defined on 1 + t R[[t]]")
    return gamma * gamma.scale(q).inverse()


def delta_inverse(gamma: TruncatedSeries, q: int) -> TruncatedSeries:
    """The unique Z with Z(t) = Gamma(t) Z(q t):  z_k (1 - q^k) = sum_{j<k} g_{k-j} q^j z_j."""
    if gamma[0] != 1:
        raise ValueError("delta_inverse is defined on 1 + t R[[t]]")
    z = [gamma[0]]
    for k in range(1, gamma.order + 1):
        if q**k == 1:
            raise ValueError("q^k = 1 makes the recursion singular")
        acc = gamma._zero()
        for j in range(k):
            acc = acc + gamma[k - j] * q**j * z[j]
        z.append(acc / (1 - q**k))
    return TruncatedSeries(tuple(z))


def partial_product(gamma: TruncatedSeries, q: int, L: int) -> TruncatedSeries:
    """prod_{i=0}^{L} Gamma(q^i t)."""
    out = TruncatedSeries.one(gamma.order)
    for i in range(L + 1):
        out = out * gamma.scale(q**i)
    return out


def _mod_fraction(x: Fraction, m: int) -> int:
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, m) % m


def delta_inverse_crosscheck(gamma: TruncatedSeries, q: int, L: int) -> dict:
    """Compare delta_inverse with the partial product modulo q^{L+1}, coefficient by coefficient.

    Z = P_L * Z(q^{L+1} t) and the tail factor is 1 mod q^{L+1} in positive degree,
    so the two agree when gamma has q-integral coefficients.
    """
    mod = q ** (L + 1)
    z = delta_inverse(gamma, q)
    pp = partial_product(gamma, q, L)
    rows = []
    for k in range(1, gamma.order + 1):
        a, b = _mod_fraction(z[k], mod), _mod_fraction(pp[k], mod)
        rows.append({"k": k, "recursion": a, "product": b, "agree": a == b})
    return {"modulus": mod, "rows": rows, "pass": all(r["agree"] for r in rows)}


# --- rational functions ------------------------------------------------------

def _poly_trim(c: Sequence) -> tuple:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def _to_sympy(c: Sequence, t):
    return sympy.Poly(list(reversed([sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x
                                     for x in c])), t, domain="QQ")


def _from_sympy(P) -> tuple:
    return tuple(Fraction(int(x.p), int(x.q)) for x in reversed(P.all_coeffs()))


def poly_mul(a: Sequence, b: Sequence) -> tuple:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _poly_trim(out)


@dataclass(frozen=True)
class RationalFunction:
    """numerator / denominator, both with constant term 1, coprime over Q."""

    numerator: tuple
    denominator: tuple

    @classmethod
    def make(cls, num: Sequence, den: Sequence) -> "RationalFunction":
        t = sympy.Symbol("t")
        P, Q = _to_sympy([Fraction(x) for x in num], t), _to_sympy([Fraction(x) for x in den], t)
        if Q.is_zero:
            raise ValueError("zero denominator")
        g = sympy.gcd(P, Q)
        P, Q = sympy.div(P, g)[0], sympy.div(Q, g)[0]
        pc, qc = _from_sympy(P), _from_sympy(Q)
        if qc[0] == 0 or pc[0] == 0:
            raise ValueError("numerator and denominator must have nonzero constant terms")
        pc = tuple(x / pc[0] for x in pc)
        scale = Fraction(num[0]) / Fraction(den[0]) if den[0] else None
        if scale != 1:
            raise ValueError("constant term of the quotient must be 1")
        qc = tuple(x / qc[0] for x in qc)
        return cls(_poly_trim(pc), _poly_trim(qc))

    @classmethod
    def one(cls) -> "RationalFunction":
        return cls((Fraction(1),), (Fraction(1),))

    @property
    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.numerator + self.denominator)

    def int_numerator(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.numerator)

    def int_denominator(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.denominator)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.make(poly_mul(self.numerator, other.numerator),
                                     poly_mul(self.denominator, other.denominator))

    def inverse(self) -> "RationalFunction":
        return RationalFunction(self.denominator, self.numerator)

    def __pow__(self, e: int) -> "RationalFunction":
        base = self if e >= 0 else self.inverse()
        out = RationalFunction.one()
        for _ in range(abs(e)):
            out = out * base
        return out

    def scale(self, c) -> "RationalFunction":
        """F(t) -> F(c t)."""
        return RationalFunction(tuple(x * Fraction(c) ** k for k, x in enumerate(self.numerator)),
                                tuple(x * Fraction(c) ** k for k, x in enumerate(self.denominator)))

    def series(self, order: int) -> TruncatedSeries:
        return TruncatedSeries.of(self.numerator, order) * TruncatedSeries.of(self.denominator, order).inverse()

    def to_json(self) -> dict:
        return {"numerator": [_json_number(Fraction(c)) for c in self.numerator],
                "denominator": [_json_number(Fraction(c)) for c in self.denominator]}

    def __str__(self):
        def show(c):
            return " ".join(f"{'+' if x >= 0 else '-'} {abs(x)}t^{k}" for k, x in enumerate(c) if x)
        return f"({show(self.numerator)}) / ({show(self.denominator)})"


def _solve_pade(s: Sequence[Fraction], L: int, K: int):
    """[L/K] approximant with Q(0) = 1, or None when the linear system is inconsistent."""
    if K == 0:
        Q = [Fraction(1)]
    else:
        rows, rhs = [], []
        for k in range(L + 1, L + K + 1):
            rows.append([s[k - j] if k - j >= 0 else 0 for j in range(1, K + 1)])
            rhs.append(-s[k])
        A = sympy.Matrix(rows).applyfunc(sympy.nsimplify)
        b = sympy.Matrix(rhs).applyfunc(sympy.nsimplify)
        try:
            sol, params = A.gauss_jordan_solve(b)
        except ValueError:
            return None
        if params.shape[0]:
            sol = sol.subs({x: 0 for x in params})
        Q = [Fraction(1)] + [Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in sol]
    P = [sum((Q[j] * s[k - j] for j in range(min(k, K) + 1)), Fraction(0)) for k in range(L + 1)]
    return P, Q


def pade_reconstruct(series: TruncatedSeries, max_deg: int, ceiling: int | None = None,
                     extra: int = 2) -> RationalFunction:
    """Smallest P/Q (deg P, deg Q <= B) reproducing every known coefficient.

    Candidates are tried by increasing deg P + deg Q; a candidate is accepted only
    if it also reproduces at least `extra` coefficients it was not fitted to.
    B escalates from max_deg to ceiling.
    """
    s = [Fraction(c) for c in series.coeffs]
    if s[0] != 1:
        raise ReconstructionError("series must start with 1")
    M = series.order
    ceiling = max_deg if ceiling is None else ceiling
    if M < 2 * max_deg:
        raise ReconstructionError(f"need at least {2 * max_deg + 1} coefficients, got {M + 1}")
    for B in range(max_deg, ceiling + 1):
        pairs = sorted(((L, K) for L, K in product(range(B + 1), repeat=2) if L + K + extra <= M),
                       key=lambda lk: (lk[0] + lk[1], lk[1]))
        for L, K in pairs:
            sol = _solve_pade(s, L, K)
            if sol is None:
                continue
            P, Q = sol
            if Q[-1] == 0 and K > 0:
                continue
            try:
                R = RationalFunction.make(P, Q)
            except ValueError:
                continue
            if list(R.series(M).coeffs) == s:
                return R
    raise ReconstructionError(
        f"no rational function of degree <= {ceiling} reproduces the {M + 1} known coefficients")


# --- Newton polygons ---------------------------------------------------------

@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple[tuple[int, int], ...]
    slopes: tuple[Fraction, ...]  # ord_q units, with multiplicity, nondecreasing
    p: int
    a: int = 1

    @property
    def min_slope(self) -> Fraction | None:
        return self.slopes[0] if self.slopes else None

    def to_json(self) -> dict:
        return {"vertices": [list(v) for v in self.vertices],
                "slopes": [_json_number(s) for s in self.slopes]}


def newton_polygon_from_points(points, p: int = 0, a: int = 1) -> NewtonPolygon:
    """Lower convex hull of (k, v) points with increasing k; slopes divided by a."""
    pts = sorted((k, Fraction(v)) for k, v in points)
    if not pts:
        raise ValueError("zero polynomial has no Newton polygon")
    hull: list = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.extend([(y2 - y1) / ((x2 - x1) * a)] * (x2 - x1))
    verts = tuple((k, int(v) if v.denominator == 1 else v) for k, v in hull)
    return NewtonPolygon(verts, tuple(slopes), p, a)


def newton_polygon(poly: Sequence, p: int, a: int = 1) -> NewtonPolygon:
    """Lower convex hull of (k, ord_p c_k); slopes reported as ord_p / a."""
    return newton_polygon_from_points([(k, ord_p(c, p)) for k, c in enumerate(poly) if c != 0], p, a)


# --- visibility --------------------------------------------------------------

def _divides(F: Sequence, G: Sequence) -> bool:
    t = sympy.Symbol("t")
    if len(_poly_trim(G)) < len(_poly_trim(F)):
        return False
    r = sympy.rem(_to_sympy([Fraction(x) for x in G], t), _to_sympy([Fraction(x) for x in F], t))
    return r.is_zero


def clear_denominators(poly: Sequence) -> tuple[int, ...]:
    fr = [Fraction(x) for x in poly]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return tuple(x // g for x in ints) if g else tuple(ints)


def weak_visibility_check(factor: Sequence[int], zetas: Sequence[RationalFunction], q: int,
                          shift_range: int) -> dict:
    """All (zeta index, shift m, side) with F(q^m t) dividing a numerator or denominator."""
    if Fraction(factor[0]) != 1:
        raise ValueError("factor must have constant term 1")
    hits = []
    for m in range(-shift_range, shift_range + 1):
        Fm = clear_denominators([Fraction(c) * Fraction(q) ** (m * k) for k, c in enumerate(factor)])
        for idx, Z in enumerate(zetas):
            for side, poly in (("zero", Z.numerator), ("pole", Z.denominator)):
                if len(_poly_trim(Fm)) > 1 and _divides(Fm, poly):
                    hits.append({"zeta": idx, "shift": m, "side": side,
                                 "rescaled_factor": list(Fm)})
    return {"factor": [int(c) for c in factor], "q": q, "range": [-shift_range, shift_range],
            "hits": hits, "verdict": "witnessed" if hits else "not witnessed"}
