"""Sparse polynomial systems over F_q, point counts, dimension estimates and
the recombination of a system into one whose first c members cut out a
set-theoretic complete intersection.

Dimension and identical vanishing are decided by exhaustive checks over
F_{q^s} for small s ("desk-scale certified"); no Groebner machinery is used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .fields import (
    ExtensionDescriptor,
    FieldSpec,
    check_cap,
    make_extension,
)

CHUNK = 1 << 18
DEFAULT_S_MAX = 3
CERTIFICATION = "desk-scale certified"


class SystemError_(ValueError):
    """Malformed polynomial system."""


class DimensionInconclusive(RuntimeError):
    def __init__(self, message: str, evidence: dict):
        super().__init__(message)
        self.evidence = evidence


class EmptyVariety(ValueError):
    pass


class RecombinationError(RuntimeError):
    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.stage = stage


# --- polynomials -------------------------------------------------------------

@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial in n variables; coefficients are F_q codes."""

    n: int
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_dict(cls, n: int, mapping: dict) -> "MultiPoly":
        items = []
        for e, c in mapping.items():
            e = tuple(int(x) for x in e)
            if len(e) != n or min(e, default=0) < 0:
                raise SystemError_(f"bad exponent vector {e} for {n} variables")
            if c:
                items.append((e, int(c)))
        return cls(n, tuple(sorted(items)))

    @classmethod
    def from_expr(cls, expr: str, n: int, p: int) -> "MultiPoly":
        """Parse an integer-coefficient expression in x1..xn, reduced mod p (prime fields only)."""
        import sympy

        xs = sympy.symbols(f"x1:{n + 1}")
        poly = sympy.Poly(sympy.sympify(expr, locals={str(x): x for x in xs}), *xs)
        mapping: dict = {}
        for mon, coeff in poly.terms():
            c = int(coeff) % p
            if c:
                mapping[mon] = c
        return cls.from_dict(n, mapping)

    @classmethod
    def variable(cls, i: int, n: int) -> "MultiPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, ((tuple(e), 1),))

    def as_dict(self) -> dict:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def add(self, other: "MultiPoly", fld: FieldSpec) -> "MultiPoly":
        gf = fld.gf
        out = self.as_dict()
        for e, c in other.terms:
            out[e] = gf.add(out.get(e, 0), c)
        return MultiPoly.from_dict(self.n, out)

    def scale(self, c: int, fld: FieldSpec) -> "MultiPoly":
        gf = fld.gf
        return MultiPoly.from_dict(self.n, {e: gf.mul(v, c) for e, v in self.terms})

    def mul(self, other: "MultiPoly", fld: FieldSpec) -> "MultiPoly":
        gf = fld.gf
        out: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = gf.add(out.get(e, 0), gf.mul(c1, c2))
        return MultiPoly.from_dict(self.n, out)

    def extend(self, n_new: int) -> "MultiPoly":
        """Same polynomial viewed in n_new >= n variables."""
        pad = (0,) * (n_new - self.n)
        return MultiPoly(n_new, tuple((e + pad, c) for e, c in self.terms))

    def to_json(self, fld: FieldSpec) -> dict:
        return {"terms": [{"c": fld.coeff_json(c), "e": list(e)} for e, c in self.terms]}


@dataclass(frozen=True)
class PolySystem:
    """f_1..f_r over F_q in n variables, kept sorted by descending degree."""

    field: FieldSpec
    n: int
    polys: tuple[MultiPoly, ...]
    dim_override: int | None = None

    def __post_init__(self):
        for f in self.polys:
            if f.n != self.n:
                raise SystemError_("all polynomials must live in the same number of variables")
        ordered = tuple(sorted(self.polys, key=lambda f: -f.degree))
        object.__setattr__(self, "polys", ordered)

    @property
    def r(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(f.degree for f in self.polys)

    @property
    def q(self) -> int:
        return self.field.q

    def subsystem(self, idx: Iterable[int]) -> "PolySystem":
        return PolySystem(self.field, self.n, tuple(self.polys[i] for i in idx))

    def require_positive_degrees(self) -> None:
        bad = [i + 1 for i, d in enumerate(self.degrees) if d <= 0]
        if bad:
            raise SystemError_(f"polynomials {bad} are constant; all degrees must be positive")

    def base_change(self, s: int) -> "PolySystem":
        """The same system read over F_{q^s}, with coefficients pushed through the embedding."""
        if s == 1:
            return self
        ext = make_extension(self.field, s)
        new_field = FieldSpec(self.field.p, ext.degree, ext.modulus)
        polys = tuple(
            MultiPoly.from_dict(self.n, {e: ext.embed(self.field.gf.digits(c)) for e, c in f.terms})
            for f in self.polys
        )
        return PolySystem(new_field, self.n, polys)

    def to_json(self) -> dict:
        out = self.field.to_json()
        out["n"] = self.n
        out["polys"] = [f.to_json(self.field) for f in self.polys]
        if self.dim_override is not None:
            out["dim"] = self.dim_override
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PolySystem":
        try:
            fld = FieldSpec(int(data["p"]), int(data.get("a", 1)),
                            tuple(data["modulus"]) if data.get("modulus") is not None else None)
            n = int(data["n"])
            polys = []
            for k, pj in enumerate(data["polys"]):
                mapping: dict = {}
                for t in pj["terms"]:
                    e = tuple(int(x) for x in t["e"])
                    code = fld.code(t["c"])
                    mapping[e] = fld.gf.add(mapping.get(e, 0), code)
                f = MultiPoly.from_dict(n, mapping)
                polys.append(f)
        except (KeyError, TypeError) as exc:
            raise SystemError_(f"malformed system: missing or invalid field {exc}") from exc
        dim = data.get("dim")
        system = cls(fld, n, tuple(polys), None if dim is None else int(dim))
        system.require_positive_degrees()
        return system

    @classmethod
    def load(cls, path) -> "PolySystem":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def from_exprs(cls, p: int, n: int, exprs: Sequence[str]) -> "PolySystem":
        return cls(FieldSpec(p), n, tuple(MultiPoly.from_expr(e, n, p) for e in exprs))


# --- vectorized evaluation ---------------------------------------------------

class _Evaluator:
    """Evaluate polynomials over F_q at log-form points of an extension."""

    def __init__(self, fld: FieldSpec, ext: ExtensionDescriptor):
        self.fld = fld
        self.ext = ext
        self.gf = ext.gf

    def coeff_log(self, code: int) -> int:
        digits = self.fld.gf.digits(code)
        return int(self.gf.log[self.ext.embed(digits if self.fld.a > 1 else code)])

    def __call__(self, poly: MultiPoly, xs: Sequence[np.ndarray]) -> np.ndarray:
        gf = self.gf
        shape = np.broadcast(*xs).shape if xs else ()
        acc = np.full(shape, gf.ZERO, dtype=np.int64)
        for e, c in poly.terms:
            term = np.full(shape, self.coeff_log(c), dtype=np.int64)
            for x, k in zip(xs, e):
                if k:
                    term = gf.mul_log(term, gf.pow_log(x, k))
            acc = gf.add_log(acc, term)
        return acc


def _grid_chunks(q: int, n: int, region: str, chunk: int = CHUNK) -> Iterator[list[np.ndarray]]:
    """Log-form coordinates of A^n (values 0..q-1) or G_m^n (0..q-2), in flat chunks."""
    radix = q if region == "affine" else q - 1
    total = radix**n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coords = []
        for _ in range(n):
            coords.append(idx % radix)
            idx = idx // radix
        yield coords[::-1]


def _check_region(region: str) -> None:
    if region not in ("affine", "torus"):
        raise ValueError(f"region must be 'affine' or 'torus', not {region!r}")


@lru_cache(maxsize=512)
def _vanishing_histogram(system: PolySystem, m: int, region: str) -> tuple[int, ...]:
    """hist[code] = number of points whose vanishing pattern (bit i <-> f_i = 0) is code."""
    _check_region(region)
    ext = make_extension(system.field, m)
    qm = ext.order
    size = (qm if region == "affine" else qm - 1) ** system.n
    check_cap(size, f"{region} points of A^{system.n}(F_{qm})")
    ev = _Evaluator(system.field, ext)
    hist = np.zeros(1 << system.r, dtype=np.int64)
    if system.n == 0:
        code = sum(1 << i for i, f in enumerate(system.polys) if f.is_zero())
        hist[code] = 1
        return tuple(int(h) for h in hist)
    for xs in _grid_chunks(qm, system.n, region):
        code = np.zeros(len(xs[0]), dtype=np.int64)
        for i, f in enumerate(system.polys):
            code |= (ev(f, xs) == ext.gf.ZERO).astype(np.int64) << i
        hist += np.bincount(code, minlength=1 << system.r)
    return tuple(int(h) for h in hist)


def subset_mask(subset: Iterable[int]) -> int:
    """Bit mask of a 1-based subset of {1..r}."""
    return sum(1 << (i - 1) for i in subset)


def count(system: PolySystem, subset: Iterable[int], m: int, region: str = "affine") -> int:
    """|Z_I(F_{q^m})| (affine) or |Z_I*(F_{q^m})| (torus); subset is 1-based."""
    subset = tuple(subset)
    if any(i < 1 or i > system.r for i in subset):
        raise ValueError(f"subset {subset} out of range 1..{system.r}")
    if m < 1:
        raise ValueError("m must be positive")
    hist = _vanishing_histogram(system, m, region)
    mask = subset_mask(subset)
    return sum(h for code, h in enumerate(hist) if code & mask == mask)


def count_all_subsets(system: PolySystem, m: int, region: str = "affine") -> dict[tuple[int, ...], int]:
    hist = _vanishing_histogram(system, m, region)
    out = {}
    for k in range(system.r + 1):
        for sub in combinations(range(1, system.r + 1), k):
            mask = subset_mask(sub)
            out[sub] = sum(h for code, h in enumerate(hist) if code & mask == mask)
    return out


@dataclass(frozen=True)
class SubsetCounts:
    subset: tuple[int, ...]
    affine: tuple[int, ...]
    torus: tuple[int, ...]


def subset_counts(system: PolySystem, subset: Iterable[int], M: int) -> SubsetCounts:
    subset = tuple(subset)
    return SubsetCounts(
        subset,
        tuple(count(system, subset, m, "affine") for m in range(1, M + 1)),
        tuple(count(system, subset, m, "torus") for m in range(1, M + 1)),
    )


def zero_mask(system: PolySystem, ext: ExtensionDescriptor, xs: Sequence[np.ndarray]) -> np.ndarray:
    ev = _Evaluator(system.field, ext)
    shape = np.broadcast(*xs).shape
    mask = np.ones(shape, dtype=bool)
    for f in system.polys:
        mask &= ev(f, xs) == ext.gf.ZERO
    return mask


def _zero_points(system: PolySystem, s: int, cap: int | None = None) -> Iterator[list[np.ndarray]]:
    """Chunks of log-form points of Z(system)(F_{q^s})."""
    ext = make_extension(system.field, s)
    check_cap(ext.order**system.n, f"A^{system.n}(F_{ext.order})", cap)
    for xs in _grid_chunks(ext.order, system.n, "affine"):
        mask = zero_mask(system, ext, xs)
        if mask.any():
            yield [x[mask] for x in xs]


def vanishes_identically(f: MultiPoly, system: PolySystem, s_max: int = DEFAULT_S_MAX) -> bool:
    """True iff f vanishes at every F_{q^s}-point of Z(system) for all s <= s_max."""
    if f.n != system.n:
        raise ValueError("f and the system must share the ambient space")
    for s in range(1, s_max + 1):
        ext = make_extension(system.field, s)
        ev = _Evaluator(system.field, ext)
        for pts in _zero_points(system, s):
            if (ev(f, pts) != ext.gf.ZERO).any():
                return False
    return True


def same_zero_set(a: PolySystem, b: PolySystem, s_max: int = DEFAULT_S_MAX) -> bool:
    """Pointwise equality of Z(a) and Z(b) over F_{q^s}, s <= s_max."""
    if a.n != b.n or a.field != b.field:
        raise ValueError("systems must share field and ambient space")
    for s in range(1, s_max + 1):
        ext = make_extension(a.field, s)
        for xs in _grid_chunks(ext.order, a.n, "affine"):
            if (zero_mask(a, ext, xs) != zero_mask(b, ext, xs)).any():
                return False
    return True


# --- dimension ---------------------------------------------------------------

@dataclass
class DimensionEvidence:
    by_counts: int | None
    counts: dict
    by_slices: int | None
    slice_field: int | None
    hit_rates: dict
    certification: str = CERTIFICATION

    @property
    def value(self) -> int | None:
        vals = {v for v in (self.by_counts, self.by_slices) if v is not None}
        return vals.pop() if len(vals) == 1 else None


def _count_estimate(system: PolySystem, budget: int) -> tuple[int | None, dict]:
    counts = {}
    m = 1
    while system.q ** (m * system.n) <= budget:
        counts[m] = count(system, range(1, system.r + 1), m, "affine")
        m += 1
    if not counts:
        return None, counts
    nonzero = [(mm, c) for mm, c in counts.items() if c > 0]
    if not nonzero:
        return -1, counts
    mm, c = nonzero[-1]
    return int(math.floor(math.log(c) / math.log(system.q**mm) + 0.5)), counts


def _random_slice(rng: np.random.Generator, ext: ExtensionDescriptor, n: int, codim: int):
    """Log-form points of a random affine subspace of codimension codim."""
    gf = ext.gf
    dim = n - codim
    base = rng.integers(0, ext.order, size=n)
    dirs = rng.integers(0, ext.order, size=(dim, n))
    if dim == 0:
        return [np.array([b]) for b in base]
    ts = list(_grid_chunks(ext.order, dim, "affine", chunk=ext.order**dim))[0]
    xs = []
    for i in range(n):
        acc = np.full(len(ts[0]), base[i], dtype=np.int64)
        for j in range(dim):
            acc = gf.add_log(acc, gf.mul_log(ts[j], dirs[j, i]))
        xs.append(acc)
    return xs


def dimension_evidence(system: PolySystem, trials: int = 12, seed: int = 0,
                       count_budget: int = 1 << 21, slice_threshold: int = 64,
                       slice_cap: int = 1 << 19, hit_fraction: float = 0.25) -> DimensionEvidence:
    by_counts, counts = _count_estimate(system, count_budget)
    s = 1
    while system.q**s < slice_threshold:
        s += 1
    ext = make_extension(system.field, s)
    rng = np.random.default_rng(seed)
    by_slices = None
    rates: dict = {}
    for codim in range(system.n, -1, -1):
        size = ext.order ** (system.n - codim)
        if size > slice_cap:
            break
        if codim == 0:
            hits = trials if any(True for _ in _zero_points(system, s)) else 0
        else:
            hits = sum(bool(zero_mask(system, ext, _random_slice(rng, ext, system.n, codim)).any())
                       for _ in range(trials))
        rates[codim] = hits / trials
        if hits / trials >= hit_fraction:
            by_slices = codim
            break
    else:
        by_slices = -1
    if by_slices is None and by_counts is None:
        raise DimensionInconclusive("neither counts nor slices are within budget", {})
    return DimensionEvidence(by_counts, counts, by_slices, ext.order, rates)


def estimate_dimension(system: PolySystem, trials: int = 12, seed: int = 0, **kw) -> int:
    """dim Z (or -1 when empty) from random slices, cross-checked against point-count growth."""
    if system.dim_override is not None:
        return system.dim_override
    ev = dimension_evidence(system, trials, seed, **kw)
    if ev.by_slices is not None and ev.by_counts is not None and ev.by_slices != ev.by_counts:
        raise DimensionInconclusive(
            f"slice estimate {ev.by_slices} disagrees with count estimate {ev.by_counts}",
            ev.__dict__)
    return ev.by_slices if ev.by_slices is not None else ev.by_counts


# --- recombination -----------------------------------------------------------

@dataclass
class Recombination:
    system: PolySystem  # g_1..g_r over the constant field
    matrix: list[list[int]]  # B with g = B f, codes in the constant field
    jumps: list[int]  # 1-based indices with zero diagonal
    constant_field_degree: int  # s0: constants drawn from F_{q^s0}
    codim: int
    checks: dict = field(default_factory=dict)
    certification: str = CERTIFICATION


def _combine(fs: Sequence[MultiPoly], coeffs: Sequence[int], fld: FieldSpec) -> MultiPoly:
    acc = MultiPoly(fs[0].n, ())
    for f, c in zip(fs, coeffs):
        if c:
            acc = acc.add(f.scale(c, fld), fld)
    return acc


def recombine(system: PolySystem, seed: int = 0, s_max: int = DEFAULT_S_MAX,
              max_draws: int = 24, field_threshold: int = 64, trials: int = 12) -> Recombination:
    """New sequence g = B f with Z(g) = Z(f), deg g_i <= d_i and Z(g_1..g_c) of dimension dim Z.

    Random constants are drawn from F_q first; the constant field is enlarged to
    F_{q^s} (up to size field_threshold) only when F_q keeps failing.
    """
    system.require_positive_degrees()
    dim_z = estimate_dimension(system, trials, seed)
    if dim_z < 0:
        raise EmptyVariety("Z is empty; recombination refuses to run")
    n, r = system.n, system.r
    c = n - dim_z
    if c > r:
        raise RecombinationError(f"codimension {c} exceeds number of equations {r}", 0)
    rng = np.random.default_rng(seed)
    s0 = 1
    while True:
        try:
            result = _recombine_over(system.base_change(s0), c, dim_z, rng, s_max, max_draws, trials, seed)
            result.constant_field_degree = s0
            return result
        except RecombinationError:
            if system.q ** (s0 + 1) > field_threshold:
                raise
            s0 += 1


def _recombine_over(sys_k: PolySystem, c: int, dim_z: int, rng, s_max, max_draws, trials, seed) -> Recombination:
    fld = sys_k.field
    n, r = sys_k.n, sys_k.r
    fs = list(sys_k.polys)
    B = [[0] * r for _ in range(r)]
    gs: list[MultiPoly] = [fs[0]]
    B[0][0] = 1
    jumps = []
    for idx in range(1, c):
        prefix = PolySystem(fld, n, tuple(gs))
        diag = 0 if vanishes_identically(fs[idx], prefix, s_max) else 1
        if diag == 0:
            jumps.append(idx + 1)
        target = n - idx - 1
        for draw in range(max_draws):
            consts = [int(x) for x in rng.integers(0, fld.q, size=r - idx - 1)]
            row = [0] * idx + [diag] + consts
            cand = _combine(fs, row, fld)
            if cand.is_zero():
                continue
            trial = PolySystem(fld, n, tuple(gs) + (cand,))
            try:
                got = estimate_dimension(trial, trials, seed + draw)
            except DimensionInconclusive:
                continue
            if got == target:
                gs.append(cand)
                B[idx] = row
                break
        else:
            raise RecombinationError(f"no admissible constants for g_{idx + 1} after {max_draws} draws", idx + 1)
    for idx in range(c, r):
        gs.append(fs[idx])
        B[idx][idx] = 1
    # keep positional order g_1..g_r (no re-sorting by degree)
    g_system = PolySystem.__new__(PolySystem)
    object.__setattr__(g_system, "field", fld)
    object.__setattr__(g_system, "n", n)
    object.__setattr__(g_system, "polys", tuple(gs))
    object.__setattr__(g_system, "dim_override", None)
    checks = {
        "same_zero_set": same_zero_set(sys_k, g_system, s_max),
        "degrees_bounded": all(g.degree <= d for g, d in zip(gs, sys_k.degrees)),
        "prefix_dimension": estimate_dimension(PolySystem(fld, n, tuple(gs[:c])), trials, seed) == dim_z,
        "upper_triangular": all(B[i][j] == 0 for i in range(r) for j in range(i)),
        "diagonal_01": all(B[i][i] in (0, 1) for i in range(r)),
    }
    return Recombination(g_system, B, jumps, 1, c, checks)
