"""Finite fields F_p, F_q = F_{p^a} and their extensions F_{q^m}.

Every extension is realized as F_p[y]/(P) for a single irreducible P of
degree a*m.  Elements are encoded as integers ``sum(c_i * p**i)`` where
``c_i`` is the coefficient of ``y**i``; the prime subfield is therefore
``0..p-1``.  Hot loops work in *log form*: a nonzero element is stored as
its discrete logarithm with respect to a fixed primitive element and zero
is the sentinel ``q - 1``.  Addition in log form goes through a Zech table.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

DEFAULT_ENUM_CAP = 1 << 26


class CapExceeded(ValueError):
    """Raised when an enumeration would exceed the configured cap."""


def enum_cap() -> int:
    """Enumeration cap, overridable through ``DWORKBENCH_ENUM_CAP``."""
    raw = os.environ.get("DWORKBENCH_ENUM_CAP")
    if raw:
        return int(raw)
    return DEFAULT_ENUM_CAP


def check_cap(size: int, what: str, cap: int | None = None) -> None:
    cap = enum_cap() if cap is None else cap
    if size > cap:
        raise CapExceeded(f"{what}: {size} elements exceeds enumeration cap {cap}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# --- dense polynomials over F_p, constant term first -------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def poly_divmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = a[-1] * inv % p
        q[shift] = c
        for j, y in enumerate(b):
            a[shift + j] = (a[shift + j] - c * y) % p
        _trim(a)
    return _trim(q), a


def poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    return poly_divmod(a, b, p)[1]


def poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def poly_powmod(base: Sequence[int], e: int, mod: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = poly_mod(base, mod, p)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, p), mod, p)
        e >>= 1
        if e:
            base = poly_mod(poly_mul(base, base, p), mod, p)
    return result


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Ben-Or test: f of degree k is irreducible iff gcd(f, y^(p^i) - y) = 1 for i <= k/2."""
    f = _trim([c % p for c in coeffs])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    y = [0, 1]
    h = y
    for _ in range(k // 2):
        h = poly_powmod(h, p, f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        if len(poly_gcd(f, _trim(diff), p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree k, scanning codes sum(c_i p^i) upward."""
    for code in range(p**k):
        low = [(code // p**i) % p for i in range(k)]
        cand = low + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # unreachable for prime p


# --- table-driven arithmetic on F_p[y]/(P) -----------------------------------

class GF:
    """Log/antilog/Zech tables for F_p[y]/(modulus)."""

    def __init__(self, p: int, modulus: Sequence[int]):
        self.p = p
        self.modulus = tuple(modulus)
        self.k = len(modulus) - 1
        self.q = p**self.k
        self.ZERO = self.q - 1  # log-form sentinel for 0
        self.order = self.q - 1
        self._powers = np.array([p**i for i in range(self.k)], dtype=np.int64)
        self._build()

    # scalar polynomial helpers on codes
    def digits(self, code: int) -> tuple[int, ...]:
        return tuple((code // self.p**i) % self.p for i in range(self.k))

    def from_digits(self, digits: Sequence[int]) -> int:
        return sum((int(c) % self.p) * self.p**i for i, c in enumerate(digits))

    def _mulpoly(self, a: int, b: int) -> int:
        prod = poly_mul(list(self.digits(a)), list(self.digits(b)), self.p)
        return self.from_digits(poly_mod(prod, self.modulus, self.p))

    def _powpoly(self, a: int, e: int) -> int:
        return self.from_digits(poly_powmod(list(self.digits(a)), e, self.modulus, self.p))

    def _find_primitive(self) -> int:
        if self.q == 2:
            return 1
        factors = prime_factors(self.order)
        for g in range(2 if self.k == 1 else self.p, self.q):
            if all(self._powpoly(g, self.order // f) != 1 for f in factors):
                return g
        raise AssertionError("no primitive element")  # unreachable

    def _build(self) -> None:
        p, k, q = self.p, self.k, self.q
        g = self._find_primitive() if q > 2 else 1
        self.generator = g
        # multiplication by g as a k x k matrix over F_p (column j = g * y^j)
        mat = np.zeros((k, k), dtype=np.int64)
        for j in range(k):
            mat[:, j] = self.digits(self._mulpoly(g, p**j))
        block = max(1, int(np.sqrt(self.order)) + 1)
        first = np.zeros((k, block), dtype=np.int64)
        v = np.zeros(k, dtype=np.int64)
        v[0] = 1
        for i in range(block):
            first[:, i] = v
            v = (mat @ v) % p
        # g^block as a matrix: apply mat block times to the identity
        step = np.eye(k, dtype=np.int64)
        for _ in range(block):
            step = (mat @ step) % p
        cols = [first]
        total = block
        cur = first
        while total < self.order:
            cur = (step @ cur) % p
            cols.append(cur)
            total += block
        allv = np.concatenate(cols, axis=1)[:, : self.order]
        exp = (self._powers @ allv).astype(np.int64)
        self.exp = np.append(exp, 0)  # exp[ZERO] = 0
        log = np.empty(q, dtype=np.int64)
        log[exp] = np.arange(self.order, dtype=np.int64)
        log[0] = self.ZERO
        self.log = log
        if len(set(exp.tolist())) != self.order:
            raise AssertionError("generator is not primitive")
        # Zech: log(1 + g^d)
        c0 = exp % p
        plus_one = exp - c0 + (c0 + 1) % p
        self.zech = log[plus_one]
        # trace of each basis element y^j, then trace table by code
        basis_tr = []
        for j in range(k):
            acc = [0] * k
            x = p**j
            for _ in range(k):
                acc = [(s + t) % p for s, t in zip(acc, self.digits(x))]
                x = self._powpoly(x, p)
            basis_tr.append(acc[0])  # the trace lies in F_p
        all_digits = (np.arange(q, dtype=np.int64)[:, None] // self._powers[None, :]) % p
        self.trace_code = (all_digits @ np.array(basis_tr, dtype=np.int64)) % p
        self.trace_log = np.append(self.trace_code[exp], 0)

    # vectorized log-form arithmetic
    def mul_log(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = (a + b) % self.order
        return np.where((a == self.ZERO) | (b == self.ZERO), self.ZERO, out)

    def pow_log(self, a, e: int):
        a = np.asarray(a)
        if e == 0:
            return np.zeros_like(a)
        return np.where(a == self.ZERO, self.ZERO, (a * e) % self.order)

    def add_log(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if self.q == 2:
            # F_2: log(1) = 0, zero sentinel 1
            return np.where(a == b, self.ZERO, 0)
        d = (b - a) % self.order
        z = self.zech[np.where(a == self.ZERO, 0, d)]
        s = np.where(z == self.ZERO, self.ZERO, (a + z) % self.order)
        s = np.where(a == self.ZERO, b, s)
        return np.where(b == self.ZERO, a, s)

    def to_log(self, codes):
        return self.log[np.asarray(codes)]

    def from_log(self, logs):
        return self.exp[np.asarray(logs)]

    # scalar code-form arithmetic
    def add(self, a: int, b: int) -> int:
        return self.from_digits([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a: int) -> int:
        return self.from_digits([-x for x in self.digits(a)])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[(self.log[a] + self.log[b]) % self.order])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        return int(self.exp[(-self.log[a]) % self.order])

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero to a negative power")
            return 0
        return int(self.exp[(int(self.log[a]) * e) % self.order])

    def trace(self, a: int) -> int:
        return int(self.trace_code[a])


@lru_cache(maxsize=64)
def get_gf(p: int, modulus: tuple[int, ...]) -> GF:
    check_cap(p ** (len(modulus) - 1), "field table")
    return GF(p, modulus)


# --- public domain types -----------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """The base field F_q, q = p^a, given by an irreducible modulus when a > 1."""

    p: int
    a: int = 1
    modulus: tuple[int, ...] | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.a < 1:
            raise ValueError("a must be positive")
        if self.a == 1:
            if self.modulus is not None and len(self.modulus) != 2:
                raise ValueError("degree-1 field takes no modulus")
            object.__setattr__(self, "modulus", None)
            return
        mod = self.modulus
        if mod is None:
            mod = smallest_irreducible(self.p, self.a)
        mod = tuple(int(c) % self.p for c in mod)
        if len(mod) != self.a + 1 or mod[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {self.a}")
        if not is_irreducible(mod, self.p):
            raise ValueError(f"modulus {mod} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)

    @property
    def q(self) -> int:
        return self.p**self.a

    @property
    def gf(self) -> GF:
        """Table arithmetic on F_q itself (codes as in the system file)."""
        return get_gf(self.p, self.modulus if self.modulus is not None else (0, 1))

    def code(self, coeff) -> int:
        """F_q code of a JSON coefficient: int when a = 1, length-a list otherwise."""
        if isinstance(coeff, (list, tuple)):
            if len(coeff) != self.a:
                raise ValueError(f"coefficient {coeff} must have length {self.a}")
            return self.gf.from_digits(coeff)
        if self.a != 1:
            return int(coeff) % self.p
        return int(coeff) % self.p

    def coeff_json(self, code: int):
        if self.a == 1:
            return int(code)
        return list(self.gf.digits(code))

    def to_json(self) -> dict:
        out = {"p": self.p, "a": self.a}
        if self.modulus is not None:
            out["modulus"] = list(self.modulus)
        return out


@dataclass(frozen=True)
class ExtensionDescriptor:
    """F_{q^m} = F_p[y]/(modulus) with the F_q generator embedded."""

    base: FieldSpec
    m: int
    modulus: tuple[int, ...]
    embedding: int | None  # code of a root of base.modulus; None when a = 1

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def degree(self) -> int:
        return self.base.a * self.m

    @property
    def order(self) -> int:
        return self.p**self.degree

    @cached_property
    def gf(self) -> GF:
        return get_gf(self.p, self.modulus)

    def embed(self, c) -> int:
        """Code in F_{q^m} of an F_q element (int for a = 1, coordinate list otherwise)."""
        if self.base.a == 1:
            return int(c) % self.p
        coords = [int(c)] if isinstance(c, (int, np.integer)) else list(c)
        gf = self.gf
        acc, power = 0, 1
        for ci in coords:
            ci %= self.p
            if ci:
                acc = gf.add(acc, gf.mul(ci, power))
            power = gf.mul(power, self.embedding)
        return acc

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        if isinstance(value, (tuple, list)):
            return FieldElement(self.gf.from_digits(value), self)
        return FieldElement(int(value) % self.p, self)


@dataclass(frozen=True, eq=False)
class FieldElement:
    code: int
    ambient: ExtensionDescriptor

    @property
    def coordinates(self) -> tuple[int, ...]:
        return self.ambient.gf.digits(self.code)

    def _lift(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ambient.modulus != self.ambient.modulus or other.ambient.p != self.ambient.p:
                raise ValueError("elements of different fields")
            return other.code
        return int(other) % self.ambient.p

    def __add__(self, other):
        return FieldElement(self.ambient.gf.add(self.code, self._lift(other)), self.ambient)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.ambient.gf.neg(self.code), self.ambient)

    def __sub__(self, other):
        return self + (-FieldElement(self._lift(other), self.ambient))

    def __rsub__(self, other):
        return FieldElement(self._lift(other), self.ambient) - self

    def __mul__(self, other):
        return FieldElement(self.ambient.gf.mul(self.code, self._lift(other)), self.ambient)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * FieldElement(self.ambient.gf.inv(self._lift(other)), self.ambient)

    def __pow__(self, e: int):
        return FieldElement(self.ambient.gf.pow(self.code, e), self.ambient)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.code == other.code and self.ambient.modulus == other.ambient.modulus
        if isinstance(other, int):
            return self.code == other % self.ambient.p and self.code < self.ambient.p
        return NotImplemented

    def __hash__(self):
        return hash((self.code, self.ambient.modulus))

    def __int__(self):
        if self.code >= self.ambient.p:
            raise ValueError("element is not in the prime field")
        return self.code

    def is_zero(self) -> bool:
        return self.code == 0

    def __repr__(self):
        return f"FieldElement({self.coordinates}, F_{self.ambient.order})"


def _root_codes(ext_gf: GF, coeffs: Sequence[int]) -> np.ndarray:
    """All codes x in the table field with sum coeffs[i] x^i = 0 (coeffs in F_p)."""
    logs = np.arange(ext_gf.q, dtype=np.int64)
    logs[-1] = ext_gf.ZERO  # covers 0 and every nonzero log
    acc = np.full(ext_gf.q, ext_gf.ZERO, dtype=np.int64)
    for i, c in enumerate(coeffs):
        if c % ext_gf.p == 0:
            continue
        term = ext_gf.mul_log(ext_gf.log[c % ext_gf.p], ext_gf.pow_log(logs, i))
        acc = ext_gf.add_log(acc, term)
    return np.sort(ext_gf.exp[logs[acc == ext_gf.ZERO]])


@lru_cache(maxsize=128)
def make_extension(spec: FieldSpec, m: int, cap: int | None = None) -> ExtensionDescriptor:
    """Descriptor for F_{q^m}; modulus is the smallest irreducible of degree a*m."""
    if m < 1:
        raise ValueError("extension degree must be positive")
    deg = spec.a * m
    check_cap(spec.p**deg, f"F_{spec.p}^{deg}", cap)
    if spec.a > 1 and m == 1:
        modulus = spec.modulus
    else:
        modulus = smallest_irreducible(spec.p, deg)
    embedding = None
    if spec.a > 1:
        gf = get_gf(spec.p, modulus)
        roots = _root_codes(gf, spec.modulus)
        if len(roots) == 0:
            raise AssertionError("base modulus has no root in the extension")
        embedding = int(roots[0])
    return ExtensionDescriptor(spec, m, tuple(modulus), embedding)


def prime_field(p: int) -> ExtensionDescriptor:
    return make_extension(FieldSpec(p), 1)


def trace_to_prime(x: FieldElement) -> FieldElement:
    """Absolute trace sum_{i<s} x^(p^i) of x in F_{p^s}, returned in F_p."""
    return FieldElement(x.ambient.gf.trace(x.code), prime_field(x.ambient.p))


def enumerate_field(desc: ExtensionDescriptor, cap: int | None = None) -> Iterator[FieldElement]:
    """All elements in lexicographic coordinate order, starting at 0."""
    check_cap(desc.order, f"F_{desc.order}", cap)
    gf = desc.gf
    for coords in itertools.product(range(desc.p), repeat=desc.degree):
        yield FieldElement(gf.from_digits(coords), desc)
