"""Z_p[pi]/(pi^{p-1} + p) modulo p^M.

Elements are coordinate vectors in the basis 1, pi, ..., pi^{p-2}. Arrays of
elements carry the coordinate axis first, so scalars, vectors and matrices
share one code path. Precision is a ring-level modulus p^M; routines that
divide by p track the resulting loss themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PadicRing:
    p: int
    M: int

    @property
    def e(self) -> int:
        """Ramification index p - 1; pi-adic precision is e * M."""
        return self.p - 1

    @cached_property
    def mod(self) -> int:
        return self.p**self.M

    @property
    def cap(self) -> int:
        return self.e * self.M

    def dtype_for(self, inner: int = 1):
        """int64 when inner-product accumulation of `inner` terms cannot overflow."""
        return np.int64 if self.mod**2 * max(inner, 1) * self.e * 2 < 2**62 else object

    # construction
    def zeros(self, shape=(), inner: int = 1) -> np.ndarray:
        return np.zeros((self.e,) + tuple(shape), dtype=self.dtype_for(inner))

    def from_int(self, c) -> np.ndarray:
        out = self.zeros()
        out[0] = _mod_int(c, self.mod)
        return out

    def pi(self) -> np.ndarray:
        out = self.zeros()
        if self.e == 1:
            out[0] = (-self.p) % self.mod  # p = 2: pi = -2
        else:
            out[1] = 1
        return out

    def coerce(self, a, inner: int = 1) -> np.ndarray:
        a = np.asarray(a)
        dt = self.dtype_for(inner)
        if dt is object:
            return np.vectorize(int, otypes=[object])(a) % self.mod if a.size else a.astype(object)
        return a.astype(np.int64) % self.mod

    # arithmetic
    def add(self, a, b):
        return (a + b) % self.mod

    def sub(self, a, b):
        return (a - b) % self.mod

    def neg(self, a):
        return (-a) % self.mod

    def scale(self, a, c):
        """Multiply by an integer (or p-integral Fraction)."""
        return (a * _mod_int(c, self.mod)) % self.mod

    def _fold(self, full):
        e, p = self.e, self.p
        out = full[:e].copy()
        for k in range(e, full.shape[0]):
            out[k - e] = (out[k - e] - p * full[k]) % self.mod
        return out % self.mod

    def mul(self, a, b):
        """Elementwise product with numpy broadcasting on the trailing axes."""
        e = self.e
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        dt = object if (a.dtype == object or b.dtype == object) else np.int64
        full = np.zeros((2 * e - 1,) + shape, dtype=dt)
        for i in range(e):
            for j in range(e):
                full[i + j] = (full[i + j] + a[i] * b[j]) % self.mod
        return self._fold(full)

    def matmul(self, A, B):
        e = self.e
        inner = A.shape[-1]
        dt = self.dtype_for(inner)
        A, B = A.astype(dt), B.astype(dt)
        full = np.zeros((2 * e - 1,) + A.shape[1:-1] + B.shape[2:], dtype=dt)
        for i in range(e):
            for j in range(e):
                full[i + j] = (full[i + j] + (A[i] @ B[j]) % self.mod) % self.mod
        return self._fold(full)

    def power(self, a, k: int):
        out = np.broadcast_to(self.from_int(1).reshape((self.e,) + (1,) * (a.ndim - 1)), a.shape).copy()
        base = a
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def unit_inverse(self, a):
        """Inverse of a unit scalar by Newton iteration y <- y (2 - a y)."""
        c = int(a[0]) % self.p
        if c == 0:
            raise PrecisionError("element is not a unit")
        y = self.from_int(pow(c, -1, self.p))
        two = self.from_int(2)
        for _ in range(2 * self.cap.bit_length() + 2):
            y_new = self.mul(y, self.sub(two, self.mul(a, y)))
            if np.array_equal(y_new, y):
                return y
            y = y_new
        raise PrecisionError("unit inversion did not converge")

    def div_p(self, a, k: int = 1):
        """Exact division by p^k; raises if some coordinate is not divisible."""
        pk = self.p**k
        if np.any(a % pk != 0):
            raise PrecisionError(f"division by p^{k} of a non-multiple")
        return a // pk

    # valuations
    def val_pi(self, a) -> int:
        """pi-adic valuation of a scalar; returns cap for 0 (i.e. 'at least cap')."""
        best = self.cap
        for i in range(self.e):
            c = int(a[i]) % self.mod
            if c:
                v = 0
                while c % self.p == 0:
                    c //= self.p
                    v += 1
                best = min(best, self.e * v + i)
        return best

    def val_pi_array(self, a) -> np.ndarray:
        """Elementwise pi-adic valuation of an array (cap for zero entries)."""
        out = np.full(a.shape[1:], self.cap, dtype=np.int64)
        for i in range(self.e):
            c = np.asarray(a[i] % self.mod, dtype=object)
            v = np.zeros(c.shape, dtype=np.int64)
            nz = c != 0
            cc = c.copy()
            while True:
                step = nz & (cc % self.p == 0)
                if not step.any():
                    break
                cc = np.where(step, cc // self.p, cc)
                v = v + step
            out = np.where(nz, np.minimum(out, self.e * v + i), out)
        return out

    def ord_p(self, a) -> Fraction:
        return Fraction(self.val_pi(a), self.e)

    def reduce_to(self, a, M: int) -> np.ndarray:
        return a % (self.p**M)

    def to_int(self, a):
        """Scalar in Z_p (pi-free) as an integer mod p^M."""
        if any(int(a[i]) % self.mod for i in range(1, self.e)):
            raise ValueError("element is not in Z_p")
        return int(a[0]) % self.mod


def _mod_int(c, m: int) -> int:
    if isinstance(c, Fraction):
        return c.numerator * pow(c.denominator, -1, m) % m
    return int(c) % m


@dataclass(frozen=True, eq=False)
class PadicCyclo:
    """Scalar element of Z_p[pi]/(pi^{p-1}+p) known modulo p^M."""

    ring: PadicRing
    coords: tuple

    @classmethod
    def wrap(cls, ring: PadicRing, arr) -> "PadicCyclo":
        return cls(ring, tuple(int(x) % ring.mod for x in arr))

    @property
    def arr(self) -> np.ndarray:
        return np.array(self.coords, dtype=object)

    def _other(self, o):
        if isinstance(o, PadicCyclo):
            return o.arr
        return self.ring.from_int(o).astype(object)

    def __add__(self, o):
        return PadicCyclo.wrap(self.ring, self.ring.add(self.arr, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return PadicCyclo.wrap(self.ring, self.ring.sub(self.arr, self._other(o)))

    def __rsub__(self, o):
        return PadicCyclo.wrap(self.ring, self.ring.sub(self._other(o), self.arr))

    def __neg__(self):
        return PadicCyclo.wrap(self.ring, self.ring.neg(self.arr))

    def __mul__(self, o):
        return PadicCyclo.wrap(self.ring, self.ring.mul(self.arr, self._other(o)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return PadicCyclo.wrap(self.ring, self.ring.power(self.arr, k))

    def __eq__(self, o):
        if isinstance(o, (int, Fraction)):
            o = self._other(o)
        elif isinstance(o, PadicCyclo):
            o = o.arr
        else:
            return NotImplemented
        return all(int(x) % self.ring.mod == int(y) % self.ring.mod for x, y in zip(self.arr, o))

    def __hash__(self):
        return hash((self.ring, self.coords))

    @property
    def val_pi(self) -> int:
        return self.ring.val_pi(self.arr)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def to_json(self) -> dict:
        return {"coords": list(self.coords), "modulus": f"{self.ring.p}^{self.ring.M}"}
