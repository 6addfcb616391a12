"""Truncated Dwork operators for q = p.

alpha = psi o (multiplication by G) acts on power series in N variables with
G(x) = prod_u theta(A_u x^u), theta(z) = E(gamma z) the Artin-Hasse splitting
function. On the monomial basis, column v of alpha holds G_{pu - v} in row u.
The basis is truncated to total degree <= D; every verdict carries the
valuation floor V(D) below which truncation can no longer be excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .charsums import CyclotomicElement, toric_exp_sum
from .fields import FieldSpec
from .geometry import MultiPoly, PolySystem
from .padic import PadicCyclo, PadicRing, PrecisionError
from .series import newton_polygon_from_points


class TruncationError(ValueError):
    pass


# --- Artin-Hasse data --------------------------------------------------------

@lru_cache(maxsize=64)
def artin_hasse_exact(p: int, D_E: int) -> tuple[Fraction, ...]:
    """Coefficients of E(z) = exp(sum_m z^{p^m}/p^m) via k e_k = sum_m e_{k - p^m}."""
    e = [Fraction(1)]
    for k in range(1, D_E + 1):
        acc = Fraction(0)
        pm = 1
        while pm <= k:
            acc += e[k - pm]
            pm *= p
        e.append(acc / k)
    return tuple(e)


def artin_hasse(p: int, D_E: int, Mprec: int) -> list[int]:
    """E(z) coefficients reduced mod p^Mprec; they are p-integral."""
    mod = p**Mprec
    out = []
    for k, c in enumerate(artin_hasse_exact(p, D_E)):
        if c.denominator % p == 0:
            raise PrecisionError(f"Artin-Hasse coefficient e_{k} = {c} is not p-integral")
        out.append(c.numerator * pow(c.denominator, -1, mod) % mod)
    return out


def _gamma_terms(p: int, Mprec: int) -> int:
    """Largest m whose term z^{p^m}/p^m is visible at pi-adic precision (p-1) Mprec."""
    m = 0
    while p ** (m + 1) - (p - 1) * (m + 1) < (p - 1) * Mprec:
        m += 1
    return m


def gamma_root(p: int, Mprec: int, max_iter: int = 64) -> np.ndarray:
    """Root of sum_m z^{p^m}/p^m with gamma = pi mod pi^2, by Newton iteration from pi."""
    if Mprec < 2:
        raise ValueError("gamma needs Mprec >= 2")
    mmax = _gamma_terms(p, Mprec)
    R = PadicRing(p, Mprec)
    W = PadicRing(p, Mprec + mmax)  # guard digits absorb the divisions by p^m

    def f_and_df(z):
        zw = W.coerce(z)
        f = R.zeros()
        df = R.zeros()
        for m in range(mmax + 1):
            zpm = W.power(zw, p**m)
            f = R.add(f, R.coerce(W.div_p(zpm, m) if m else zpm))
            df = R.add(df, R.coerce(W.power(zw, p**m - 1)))
        return f, df

    z = R.pi()
    for _ in range(max_iter):
        f, df = f_and_df(z)
        if not np.any(f):
            return z
        z = R.sub(z, R.mul(f, R.unit_inverse(df)))
    raise PrecisionError("Newton iteration for gamma stagnated; raise the precision")


def teichmuller_int(c: int, p: int, Mprec: int) -> int:
    """Root of x^{p-1} = 1 congruent to c mod p (0 for c = 0), by Hensel/Newton."""
    c %= p
    if c == 0:
        return 0
    mod = p**Mprec
    x = c
    for _ in range(Mprec.bit_length() + 2):
        fx = (pow(x, p - 1, mod) - 1) % mod
        dfx = (p - 1) * pow(x, p - 2, mod) % mod
        x = (x - fx * pow(dfx, -1, mod)) % mod
    assert pow(x, p - 1, mod) == 1 and x % p == c
    return x


def teichmuller(c: int, p: int, Mprec: int) -> PadicCyclo:
    R = PadicRing(p, Mprec)
    return PadicCyclo.wrap(R, R.from_int(teichmuller_int(c, p, Mprec)))


@dataclass(frozen=True)
class ArtinHasseData:
    p: int
    Mprec: int
    E: tuple
    gamma: np.ndarray = field(compare=False)
    theta: np.ndarray = field(compare=False)  # shape (p-1, D_E+1)
    zeta_image: np.ndarray = field(compare=False)

    @property
    def ring(self) -> PadicRing:
        return PadicRing(self.p, self.Mprec)

    @property
    def D_E(self) -> int:
        return len(self.E) - 1

    def theta_valuations(self) -> np.ndarray:
        return self.ring.val_pi_array(self.theta)


@lru_cache(maxsize=32)
def artin_hasse_data(p: int, Mprec: int, D_E: int) -> ArtinHasseData:
    R = PadicRing(p, Mprec)
    D_E = max(D_E, R.cap)
    E = artin_hasse(p, D_E, Mprec)
    gamma = gamma_root(p, Mprec)
    theta = R.zeros((D_E + 1,))
    gk = R.from_int(1)
    for k in range(D_E + 1):
        theta[:, k] = R.scale(gk, E[k])
        gk = R.mul(gk, gamma)
    # val(theta_k) >= k, so terms k >= cap vanish at this precision
    zeta = theta[:, : R.cap].sum(axis=1) % R.mod
    return ArtinHasseData(p, Mprec, tuple(E), gamma, theta, zeta)


def embed_cyclotomic(S: CyclotomicElement, data: ArtinHasseData) -> np.ndarray:
    """Image of an element of Z[zeta_p] under zeta_p -> theta(1)."""
    R = data.ring
    out = R.zeros()
    zj = R.from_int(1)
    for c in S.coords:
        out = R.add(out, R.scale(zj, c))
        zj = R.mul(zj, data.zeta_image)
    return out


# --- G(x) --------------------------------------------------------------------

@dataclass
class SplittingProduct:
    """Coefficients G_w for w in the box [0, D_G]^N (exact there at the ring precision)."""

    coeffs: np.ndarray  # shape (p-1,) + (D_G+1,)*N
    N: int
    D_G: int
    degree: int
    ring: PadicRing

    def __getitem__(self, w) -> np.ndarray:
        return self.coeffs[(slice(None),) + tuple(w)]

    def lower_bound(self, w) -> int:
        """Recorded floor val_pi(G_w) >= ceil(|w| / deg g)."""
        if self.degree <= 0:
            return 0 if sum(w) == 0 else self.ring.cap
        return -(-sum(w) // self.degree)


def _check_prime_field(g: MultiPoly, p: int) -> None:
    for _, c in g.terms:
        if not 0 <= c < p:
            raise ValueError("the Dwork operator is implemented for q = p only")


def splitting_product(g: MultiPoly, p: int, D_G: int, Mprec: int) -> SplittingProduct:
    """G(x) = prod over terms c x^u of theta(Teich(c) x^u), truncated to the box of side D_G."""
    _check_prime_field(g, p)
    data = artin_hasse_data(p, Mprec, D_G)
    R = data.ring
    N = g.n
    G = R.zeros((D_G + 1,) * N)
    G[(slice(None),) + (0,) * N] = R.from_int(1)
    for u, c in g.terms:
        A = teichmuller_int(c, p, Mprec)
        deg = sum(u)
        if deg == 0:
            # constant term: the factor is the scalar theta(A)
            kmax = R.cap
        else:
            kmax = D_G // max(u)
        new = R.zeros(G.shape[1:])
        Ak = 1
        for k in range(kmax + 1):
            fk = R.scale(data.theta[:, k], Ak)
            Ak = Ak * A % R.mod
            if not np.any(fk):
                continue
            src = tuple(slice(0, D_G + 1 - k * ui) for ui in u)
            dst = tuple(slice(k * ui, D_G + 1) for ui in u)
            part = G[(slice(None),) + src]
            fk_b = fk.reshape((R.e,) + (1,) * N)
            new[(slice(None),) + dst] = R.add(new[(slice(None),) + dst], R.mul(fk_b, part))
        G = new
    return SplittingProduct(G, N, D_G, g.degree, R)


# --- alpha -------------------------------------------------------------------

def monomial_basis(N: int, D: int, I: Sequence[int] = (), cone=None) -> list[tuple[int, ...]]:
    """u in N^N with |u| <= D and u_i >= 1 for i in I (1-based); optional cone filter."""
    I0 = {i - 1 for i in I}
    out = []
    for u in product(range(D + 1), repeat=N):
        if sum(u) <= D and all(u[i] >= 1 for i in I0) and (cone is None or cone(u)):
            out.append(u)
    out.sort(key=lambda u: (sum(u), u))
    return out


@dataclass
class DworkMatrix:
    g: MultiPoly
    p: int
    I: tuple
    D: int
    D_G: int
    basis: list
    entries: np.ndarray  # shape (p-1, n, n)
    ring: PadicRing
    cone_filtered: bool = False

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def floor(self) -> int:
        """V(D) in pi-units: every dropped cycle passes a monomial of degree > D."""
        d = self.g.degree
        if d <= 0:
            return self.ring.cap
        return min(-(-(self.p - 1) * (self.D + 1) // d), self.ring.cap)

    def entry(self, u, v) -> PadicCyclo:
        i, j = self.basis.index(tuple(u)), self.basis.index(tuple(v))
        return PadicCyclo.wrap(self.ring, self.entries[:, i, j])


def _assemble(G: SplittingProduct, basis: list, p: int) -> np.ndarray:
    R = G.ring
    n = len(basis)
    if n == 0:
        return R.zeros((0, 0))
    U = np.array(basis, dtype=np.int64).reshape(n, G.N)
    W = p * U[:, None, :] - U[None, :, :]
    valid = np.all(W >= 0, axis=-1) & np.all(W <= G.D_G, axis=-1)
    Wc = np.clip(W, 0, G.D_G)
    idx = tuple(Wc[..., k] for k in range(G.N))
    out = np.stack([G.coeffs[c][idx] for c in range(R.e)])
    out = np.where(valid[None], out, 0)
    return R.coerce(out, inner=n)


def alpha_matrix(g: MultiPoly, p: int, I: Sequence[int] = (), D: int = 8, Mprec: int = 8,
                 cone=None) -> DworkMatrix:
    """Matrix of alpha on the truncated monomial basis of B_I (optionally B'_I via `cone`)."""
    I = tuple(sorted(I))
    if any(i < 1 or i > g.n for i in I):
        raise ValueError(f"subset {I} out of range for {g.n} variables")
    D_G = p * D
    G = splitting_product(g, p, D_G, Mprec)
    basis = monomial_basis(g.n, D, I, cone)
    return DworkMatrix(g, p, I, D, D_G, basis, _assemble(G, basis, p), G.ring, cone is not None)


# --- traces and Fredholm determinants ----------------------------------------

def _ord_p_int(k: int, p: int) -> int:
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


@dataclass
class FredholmResult:
    traces: list  # Tr(alpha^m), m = 1..m_max, as ring arrays
    coeffs: list  # c_0..c_K of det(1 - t alpha)
    precision: list  # certified p-adic precision (p-units) of each c_k
    ring: PadicRing

    def coeff(self, k) -> PadicCyclo:
        return PadicCyclo.wrap(self.ring, self.coeffs[k])

    def trace(self, m) -> PadicCyclo:
        return PadicCyclo.wrap(self.ring, self.traces[m - 1])

    def ord_p(self, k) -> tuple[Fraction, bool]:
        """(valuation, exact?) of c_k; when c_k vanishes at its precision the value is a lower bound."""
        R = self.ring
        prec = self.precision[k]
        c = self.coeffs[k] % (R.p**prec) if prec > 0 else R.zeros()
        v = R.val_pi(c)
        if v >= R.e * prec:
            return Fraction(prec), False
        return Fraction(v, R.e), True


def matrix_traces(mat: DworkMatrix, m_max: int) -> list:
    R = mat.ring
    if mat.size == 0:
        return [R.zeros() for _ in range(m_max)]
    out = []
    P = mat.entries
    for m in range(1, m_max + 1):
        if m > 1:
            P = R.matmul(P, mat.entries)
        out.append(np.trace(P, axis1=1, axis2=2) % R.mod)
    return out


def newton_identity_precision(p: int, M: int, K: int) -> list[int]:
    prec = [M]
    for k in range(1, K + 1):
        prec.append(min(prec) - _ord_p_int(k, p))
    return prec


def trace_and_fredholm(mat: DworkMatrix, m_max: int, K: int) -> FredholmResult:
    """Traces of alpha^m and det(1 - t alpha) mod t^{K+1} via k c_k = -sum_i Tr_i c_{k-i}."""
    if K > m_max:
        raise ValueError("K must not exceed m_max")
    R = mat.ring
    traces = matrix_traces(mat, m_max)
    prec = newton_identity_precision(R.p, R.M, K)
    if prec[K] <= 0:
        raise PrecisionError(f"c_{K} has no certified digits at precision p^{R.M}")
    coeffs = [R.from_int(1)]
    for k in range(1, K + 1):
        s = R.zeros()
        for i in range(1, k + 1):
            s = R.add(s, R.mul(traces[i - 1], coeffs[k - i]))
        v = _ord_p_int(k, R.p)
        s = s % (R.p ** min(prec[:k]))  # keep only certified digits
        s = R.div_p(s, v) if v else s
        unit = k // R.p**v
        coeffs.append(R.neg(R.scale(s, Fraction(1, unit))))
    return FredholmResult(traces, coeffs, prec, R)


def fredholm_direct(mat: DworkMatrix, K: int) -> list:
    """det(1 - t alpha) mod t^{K+1} by elimination over R[t]/t^{K+1}; pivots are 1 mod t."""
    R = mat.ring
    n = mat.size
    e = R.e
    # P[k] holds the t^k coefficient matrix
    P = np.zeros((K + 1, e, n, n), dtype=object)
    for i in range(n):
        P[0, 0, i, i] = 1
    if K >= 1:
        P[1] = R.neg(mat.entries.astype(object))

    def smul(a, b):  # series product, a: (K+1, e, ...) b: (K+1, e, ...)
        out = np.zeros((K + 1, e) + np.broadcast_shapes(a.shape[2:], b.shape[2:]), dtype=object)
        for i in range(K + 1):
            for j in range(K + 1 - i):
                out[i + j] = R.add(out[i + j], R.mul(a[i], b[j]))
        return out

    def sinv(a):  # inverse of a scalar series with constant term 1
        inv = np.zeros_like(a)
        inv[0] = R.from_int(1)
        for k in range(1, K + 1):
            acc = R.zeros().astype(object)
            for j in range(1, k + 1):
                acc = R.add(acc, R.mul(a[j], inv[k - j]))
            inv[k] = R.neg(acc)
        return inv

    det = np.zeros((K + 1, e), dtype=object)
    det[0] = R.from_int(1)
    for j in range(n):
        piv = P[:, :, j, j]
        if any(int(x) % R.mod for x in piv[0, 1:]) or int(piv[0, 0]) % R.mod != 1:
            raise PrecisionError("pivot is not 1 mod t")
        det = smul(det, piv)
        if j + 1 == n:
            break
        pinv = sinv(piv)
        col = P[:, :, j + 1:, j]  # (K+1, e, rest)
        row = P[:, :, j, j + 1:]
        factor = smul(col, pinv[:, :, None])  # (K+1, e, rest)
        upd = np.zeros((K + 1, e, n - j - 1, n - j - 1), dtype=object)
        for a in range(K + 1):
            for b in range(K + 1 - a):
                upd[a + b] = R.add(upd[a + b], R.mul(factor[a][:, :, None], row[b][:, None, :]))
        P[:, :, j + 1:, j + 1:] = R.sub(P[:, :, j + 1:, j + 1:], upd)
    return [det[k] for k in range(K + 1)]


# --- trace formula -----------------------------------------------------------

@dataclass
class TraceFormulaRecord:
    m: int
    D: int
    Mprec: int
    N: int
    valuation: int  # pi-adic valuation of the difference (== cap means 'at least cap')
    floor: int  # V(D), capped at the working precision
    cap: int
    exp_sum: list
    trace: dict
    note: str = ("coefficient-level identity (q^m - 1)^N Tr(alpha^m) = S*_m with N the number of "
                 "variables of g; the displayed exponent n in the source statement is taken to be N")

    @property
    def capped(self) -> bool:
        return self.valuation >= self.cap

    @property
    def passed(self) -> bool:
        return self.valuation >= self.floor

    def to_json(self) -> dict:
        return {"m": self.m, "D": self.D, "precision": self.Mprec, "N": self.N,
                "difference_valuation_pi": self.valuation,
                "difference_exact_at_precision": self.capped,
                "certified_floor_pi": self.floor, "precision_cap_pi": self.cap,
                "exp_sum": self.exp_sum, "trace": self.trace, "pass": self.passed,
                "note": self.note}


def verify_trace_formula(g: MultiPoly, p: int, m: int, D: int, Mprec: int) -> TraceFormulaRecord:
    mat = alpha_matrix(g, p, (), D, Mprec)
    R = mat.ring
    tr = matrix_traces(mat, m)[m - 1]
    N = g.n
    lhs = R.scale(tr, (p**m - 1) ** N)
    S = toric_exp_sum(g, FieldSpec(p), m)
    data = artin_hasse_data(p, Mprec, p * D)
    rhs = embed_cyclotomic(S, data)
    val = R.val_pi(R.sub(lhs, rhs))
    return TraceFormulaRecord(m, D, Mprec, N, val, mat.floor, R.cap, S.to_json(),
                              PadicCyclo.wrap(R, tr).to_json())


# --- weights and slopes ------------------------------------------------------

@dataclass(frozen=True)
class WeightProgram:
    """Weight data for g = sum_i x_{n+i} f_i(x_1..x_n); r = 0 means a bare g of degree d.

    With r > 0 the weight is w(u) = u_{n+1} + ... + u_{n+r} on the cone
    sum_{i<=n} u_i <= sum_i d_i u_{n+i}; with r = 0 it is |u| / d.
    """

    n: int
    r: int
    degrees: tuple
    I: tuple = ()
    d: int | None = None

    def __post_init__(self):
        if list(self.degrees) != sorted(self.degrees, reverse=True):
            raise ValueError("degrees must be sorted in descending order")
        if self.r != len(self.degrees):
            raise ValueError("r must equal the number of degrees")
        if self.r == 0 and not self.d:
            raise ValueError("a bare polynomial (r = 0) needs its degree d")
        if any(i < 1 or i > self.N for i in self.I):
            raise ValueError("I out of range")

    @property
    def N(self) -> int:
        return self.n + self.r

    @property
    def d1(self) -> int:
        return self.degrees[0] if self.r else self.d

    @property
    def I1(self) -> tuple:
        return tuple(i for i in self.I if i <= self.n)

    @property
    def I2(self) -> tuple:
        return tuple(i for i in self.I if i > self.n)

    def with_subset(self, I) -> "WeightProgram":
        return WeightProgram(self.n, self.r, self.degrees, tuple(sorted(I)), self.d)

    def weight(self, u) -> Fraction:
        if self.r == 0:
            return Fraction(sum(u), self.d)
        return Fraction(sum(u[self.n:]))

    def in_cone(self, u) -> bool:
        if self.r == 0:
            return True
        return sum(u[: self.n]) <= sum(d * y for d, y in zip(self.degrees, u[self.n:]))

    def closed_form(self) -> Fraction:
        return Fraction(len(self.I1) + sum(self.d1 - self.degrees[i - self.n - 1] for i in self.I2), self.d1)


@dataclass
class WeightBound:
    closed_form: Fraction
    enumerated_min: Fraction
    witness: tuple
    box: int

    def to_json(self) -> dict:
        return {"closed_form": str(self.closed_form), "enumerated_min": str(self.enumerated_min),
                "witness": list(self.witness), "box": self.box}


def weight_bound(wp: WeightProgram, box: int | None = None) -> WeightBound:
    """Closed form, plus the lattice minimum of w over the cone with u_i >= 1 on I."""
    box = box if box is not None else wp.n + 1
    I0 = {i - 1 for i in wp.I}
    best, witness = None, None
    for u in product(range(box + 1), repeat=wp.N):
        if any(u[i] < 1 for i in I0) or not wp.in_cone(u):
            continue
        w = wp.weight(u)
        if best is None or w < best:
            best, witness = w, u
    if best is None:
        raise ValueError(f"no cone point with u_i >= 1 on {wp.I} inside the box [0,{box}]^{wp.N}")
    cf = wp.closed_form()
    if cf > best:
        raise AssertionError(f"closed form {cf} exceeds lattice minimum {best}")
    return WeightBound(cf, best, witness, box)


@dataclass
class SlopeReport:
    I: tuple
    bound: Fraction
    floor: int  # |I''|
    K: int
    valuations: list  # (k, ord_p c_k, exact?)
    first_slope: Fraction | None
    verdict: str  # pass | fail | inconclusive
    cone_filtered: bool

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {"I": list(self.I), "weight_bound": str(self.bound), "floor_I2": self.floor,
                "certified_K": self.K, "cone_filtered": self.cone_filtered,
                "valuations": [{"k": k, "ord_p": str(v), "exact": ex} for k, v, ex in self.valuations],
                "first_slope": None if self.first_slope is None else str(self.first_slope),
                "verdict": self.verdict}


def certified_K(p: int, M: int, target: Fraction, K_max: int) -> int:
    """Largest K <= K_max such that every c_k, k <= K, is known beyond k * target."""
    prec = newton_identity_precision(p, M, K_max)
    K = 0
    for k in range(1, K_max + 1):
        if k * target > prec[k]:
            break
        K = k
    return K


def check_first_slope(mat: DworkMatrix, wp: WeightProgram, K_max: int = 8) -> SlopeReport:
    """First Newton slope of the truncated det(1 - t alpha | B_I) against w_I and |I''|."""
    wpI = wp.with_subset(mat.I)
    bound = wpI.closed_form()
    floor = len(wpI.I2)
    target = max(bound, Fraction(floor))
    R = mat.ring
    K = min(certified_K(R.p, R.M, target, K_max), max(mat.size, 1))
    if K == 0:
        return SlopeReport(mat.I, bound, floor, 0, [], None, "inconclusive", mat.cone_filtered)
    fr = trace_and_fredholm(mat, K, K)
    vals, verdict = [], "pass"
    for k in range(1, K + 1):
        v, exact = fr.ord_p(k)
        vals.append((k, v, exact))
        if v < k * target:
            verdict = "fail" if exact else "inconclusive"
            if exact:
                break
    pts = [(0, Fraction(0))] + [(k, v) for k, v, ex in vals if ex]
    first = newton_polygon_from_points(pts).min_slope if len(pts) > 1 else None
    return SlopeReport(mat.I, bound, floor, K, vals, first, verdict, mat.cone_filtered)


# --- structural checks -------------------------------------------------------

def subspace_preserved(g: MultiPoly, p: int, I: Sequence[int], D: int, Mprec: int) -> bool:
    """Entries from B_I columns into rows outside B_I vanish."""
    full = alpha_matrix(g, p, (), D, Mprec)
    I0 = [i - 1 for i in I]
    rows_out = [k for k, u in enumerate(full.basis) if any(u[i] == 0 for i in I0)]
    cols_in = [k for k, v in enumerate(full.basis) if all(v[i] >= 1 for i in I0)]
    if not rows_out or not cols_in:
        return True
    return not np.any(full.entries[:, rows_out][:, :, cols_in] % full.ring.mod)


def quotient_diagonals_vanish(mat: DworkMatrix, wp: WeightProgram, m_max: int = 3) -> bool:
    """Diagonal entries of alpha^m at monomials outside the cone are zero."""
    R = mat.ring
    outside = [k for k, u in enumerate(mat.basis) if not wp.in_cone(u)]
    if not outside:
        return True
    P = mat.entries
    for m in range(1, m_max + 1):
        if m > 1:
            P = R.matmul(P, mat.entries)
        if np.any(P[:, outside, outside] % R.mod):
            return False
    return True


def dwork_fixture(system: PolySystem) -> tuple[MultiPoly, WeightProgram]:
    from .charsums import dwork_construction

    if system.field.a != 1:
        raise ValueError("the Dwork operator is implemented for q = p only")
    return dwork_construction(system), WeightProgram(system.n, system.r, system.degrees)
