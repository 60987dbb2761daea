"""Truncated Laurent series in one variable Y over a finite field.

A series is ``sum_{i < prec} c[i] * Y**(val + i) + O(Y**(val + prec))``.  The
relative precision ``prec`` counts known coefficients; ``prec=None`` marks an
exact Laurent polynomial.  Leading zeros are always stripped, so a nonzero
series has ``c[0] != 0``; a truncated zero has no coefficients and
``val`` equal to its absolute precision.

Precision is never inflated: every operation returns the window that its
inputs justify.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DivisionByZero, NoRoot, PrecisionExhausted
from .gfield import GF, FieldParams

DEFAULT_PRECISION = 24

INF = math.inf


def set_default_precision(n: int) -> None:
    global DEFAULT_PRECISION
    if n < 1:
        raise ValueError("precision must be positive")
    DEFAULT_PRECISION = n


@dataclass(frozen=True)
class Verdict:
    """A yes/no answer that holds at a stated precision (None = exact)."""

    value: bool
    precision: Optional[int]
    detail: str = ""

    def __bool__(self):
        return self.value


# --- coefficient-level helpers ---------------------------------------------

def conv(F: GF, x: Sequence[int], y: Sequence[int], n: Optional[int] = None) -> list[int]:
    """First n coefficients of the product of two coefficient lists."""
    lx, ly = len(x), len(y)
    if not lx or not ly:
        return [0] * (n or 0)
    full = lx + ly - 1
    if n is None:
        n = full
    x = x[:n]
    y = y[:n]
    lx, ly = len(x), len(y)
    if F.k == 1:
        r = np.convolve(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)) % F.p
        out = r[:n].tolist()
    else:
        xa = np.asarray(x, dtype=np.int64)
        ya = np.asarray(y, dtype=np.int64)
        prods = F.exp_ext[F.log_np[xa][:, None] + F.log_np[ya][None, :]]
        m = lx + ly - 1
        if F.p == 2:
            acc = np.zeros(m, dtype=np.int64)
            for i in range(lx):
                acc[i:i + ly] ^= prods[i]
            out = acc[:n].tolist()
        else:
            D = F.digits(prods)
            acc = np.zeros((m, F.k), dtype=np.int64)
            for i in range(lx):
                acc[i:i + ly] += D[i]
            out = F.undigits(acc)[:n].tolist()
    if len(out) < n:
        out += [0] * (n - len(out))
    return out


def unit_inverse(F: GF, c: Sequence[int], n: int) -> list[int]:
    """First n coefficients of 1/c for a coefficient list with c[0] != 0."""
    c0inv = F.inv(c[0])
    b = [c0inv] + [0] * (n - 1)
    ncinv = F.neg(c0inv)
    for k in range(1, n):
        s = 0
        for i in range(1, min(k, len(c) - 1) + 1):
            if c[i] and b[k - i]:
                s = F.add(s, F.mul(c[i], b[k - i]))
        b[k] = F.mul(ncinv, s)
    return b


class Series:
    __slots__ = ("F", "val", "coeffs", "prec")

    def __init__(self, F: GF, val: int, coeffs: tuple, prec: Optional[int]):
        # raw constructor, callers must pass normalized data; use Series.make
        self.F = F
        self.val = val
        self.coeffs = coeffs
        self.prec = prec

    # -- constructors ------------------------------------------------------------
    @classmethod
    def make(cls, F: GF, val: int, coeffs: Iterable[int], prec: Optional[int] = None) -> "Series":
        c = list(coeffs)
        if prec is not None:
            if len(c) < prec:
                c += [0] * (prec - len(c))
            else:
                del c[prec:]
        z = 0
        while z < len(c) and c[z] == 0:
            z += 1
        if z == len(c):
            if prec is None:
                return cls(F, 0, (), None)
            return cls(F, val + prec, (), 0)
        if prec is None:
            while c[-1] == 0:
                c.pop()
            return cls(F, val + z, tuple(c[z:]), None)
        return cls(F, val + z, tuple(c[z:]), prec - z)

    @classmethod
    def exact(cls, F: GF, coeffs: Iterable[int], val: int = 0) -> "Series":
        return cls.make(F, val, coeffs, None)

    @classmethod
    def const(cls, F: GF, c: int) -> "Series":
        return cls.make(F, 0, [c], None)

    @classmethod
    def one(cls, F: GF) -> "Series":
        return cls(F, 0, (1,), None)

    @classmethod
    def zero(cls, F: GF, absprec: Optional[int] = None) -> "Series":
        if absprec is None:
            return cls(F, 0, (), None)
        return cls(F, absprec, (), 0)

    @classmethod
    def monomial(cls, F: GF, c: int, e: int) -> "Series":
        return cls.make(F, e, [c], None)

    @classmethod
    def from_record(cls, F: GF, rec) -> "Series":
        v, prec, coeffs = rec
        return cls.make(F, v, coeffs, None if prec in (None, "exact") else prec)

    # -- basic properties ------------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def absprec(self):
        return INF if self.prec is None else self.val + self.prec

    @property
    def relprec(self):
        return INF if self.prec is None else self.prec

    def is_zero(self) -> bool:
        """Zero, or indistinguishable from zero inside the window."""
        return not self.coeffs

    def valuation(self):
        if self.coeffs:
            return self.val
        if self.prec is None:
            return INF
        raise PrecisionExhausted(f"valuation of O(Y^{self.val}) is unknown")

    def lead(self) -> int:
        if not self.coeffs:
            raise PrecisionExhausted("leading coefficient of a zero series")
        return self.coeffs[0]

    def coefficient(self, e: int) -> int:
        if e >= self.absprec:
            raise PrecisionExhausted(f"coefficient of Y^{e} lies beyond O(Y^{self.absprec})")
        i = e - self.val
        if i < 0 or i >= len(self.coeffs):
            return 0
        return self.coeffs[i]

    def window(self, lo: int, hi: int) -> list[int]:
        """Coefficients of Y^lo .. Y^(hi-1)."""
        if hi > self.absprec:
            raise PrecisionExhausted(f"window up to Y^{hi} exceeds O(Y^{self.absprec})")
        out = [0] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            if lo <= e < hi:
                out[e - lo] = c
        return out

    def terms(self):
        """(exponent, coefficient) pairs of the nonzero known terms."""
        return [(self.val + i, c) for i, c in enumerate(self.coeffs) if c]

    def retag(self, F: GF) -> "Series":
        """Same coefficients viewed in a field containing the current one."""
        return Series(F, self.val, self.coeffs, self.prec)

    def truncate(self, absprec) -> "Series":
        if absprec >= self.absprec:
            return self
        return Series.make(self.F, self.val, self.coeffs[:max(0, absprec - self.val)],
                           max(0, absprec - self.val)) if absprec > self.val else \
            Series.zero(self.F, absprec)

    # -- arithmetic ------------------------------------------------------------------
    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.F is not self.F:
                if other.F.order < self.F.order and other.F.p == self.F.p:
                    return other.retag(self.F)
                raise TypeError(f"incompatible fields {self.F} and {other.F}")
            return other
        if isinstance(other, int):
            return Series.const(self.F, self.F.from_int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.F
        A = min(self.absprec, other.absprec)
        cands = [s.val for s in (self, other) if s.coeffs]
        if not cands:
            return Series.zero(F, None if A == INF else A)
        lo = min(cands)
        if A == INF:
            hi = max(s.val + len(s.coeffs) for s in (self, other) if s.coeffs)
        else:
            hi = A
            if lo >= hi:
                return Series.zero(F, A)
        out = [0] * (hi - lo)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                e = s.val + i - lo
                if e >= hi - lo:
                    break
                if c:
                    out[e] = F.add(out[e], c)
        return Series.make(F, lo, out, None if A == INF else hi - lo)

    __radd__ = __add__

    def __neg__(self):
        F = self.F
        return Series(F, self.val, tuple(F.neg(c) for c in self.coeffs), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.F
        a, b = self, other
        if (a.prec is None and not a.coeffs) or (b.prec is None and not b.coeffs):
            return Series.zero(F)
        if not a.coeffs or not b.coeffs:
            va = a.val
            vb = b.val
            # absolute precision of a product when one factor is O(Y^k)
            if not a.coeffs and not b.coeffs:
                return Series.zero(F, a.val + b.val)
            return Series.zero(F, va + vb)
        n = min(a.relprec, b.relprec)
        if n == INF:
            c = conv(F, a.coeffs, b.coeffs)
            return Series.make(F, a.val + b.val, c, None)
        c = conv(F, a.coeffs, b.coeffs, n)
        return Series.make(F, a.val + b.val, c, n)

    __rmul__ = __mul__

    def scale(self, c: int) -> "Series":
        """Multiply by a constant of the coefficient field."""
        F = self.F
        if not c:
            return Series.zero(F, None if self.prec is None else self.absprec)
        return Series(F, self.val, tuple(F.mul(c, x) for x in self.coeffs), self.prec)

    def shift(self, k: int) -> "Series":
        """Multiply by Y^k."""
        return Series(self.F, self.val + k, self.coeffs, self.prec)

    def map_coeffs(self, fn) -> "Series":
        """Apply an injective additive map (e.g. Frobenius) coefficient-wise."""
        return Series(self.F, self.val, tuple(fn(c) for c in self.coeffs), self.prec)

    def frobenius(self, k: int = 1) -> "Series":
        F = self.F
        k %= F.n
        if k == 0:
            return self
        return self.map_coeffs(lambda c: F.frobenius(c, k))

    def inverse(self, prec: Optional[int] = None) -> "Series":
        """Multiplicative inverse; exact inputs are expanded to ``prec`` terms."""
        F = self.F
        if not self.coeffs:
            if self.prec is None:
                raise DivisionByZero("inverse of the zero series")
            raise PrecisionExhausted(f"cannot invert O(Y^{self.val})")
        if self.prec is None and len(self.coeffs) == 1:
            return Series(F, -self.val, (F.inv(self.coeffs[0]),), None)
        n = self.prec if self.prec is not None else (prec or DEFAULT_PRECISION)
        return Series(F, -self.val, tuple(unit_inverse(F, self.coeffs, n)), n)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = Series.one(self.F)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, Series) or other.F is not self.F else other
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def equals_exactly(self, other: "Series") -> bool:
        """Identical data, including precision."""
        return (self.val, self.coeffs, self.prec) == (other.val, other.coeffs, other.prec) \
            or (not self.coeffs and not other.coeffs and self.absprec == other.absprec)

    # -- output -----------------------------------------------------------------------
    def to_record(self):
        return [self.val, "exact" if self.prec is None else self.prec, list(self.coeffs)]

    def __str__(self):
        parts = []
        for e, c in self.terms():
            if e == 0:
                parts.append(f"{c}")
            elif e == 1:
                parts.append(f"{c}*Y")
            else:
                parts.append(f"{c}*Y^{e}")
        if self.prec is not None:
            parts.append(f"O(Y^{self.absprec})")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"Series({self})"


def one_plus_y(F: GF) -> Series:
    return Series.exact(F, [1, 1])


# --- norm, trace and roots ----------------------------------------------------

def series_norm(x: Series, d: int, K: Optional[GF] = None) -> Series:
    """Product of the d Frobenius conjugates (Frobenius on coefficients only)."""
    r = x
    for k in range(1, d):
        r = r * x.frobenius(k)
    return r.retag(K) if K is not None else r


def series_trace(x: Series, d: int, K: Optional[GF] = None) -> Series:
    r = x
    for k in range(1, d):
        r = r + x.frobenius(k)
    return r.retag(K) if K is not None else r


def _trace_preimages(params: FieldParams) -> dict[int, int]:
    """For each c in K the preimage of smallest discrete log under the trace."""
    E = params.E
    out: dict[int, int] = {}
    for e in range(E.m):
        x = E.exp(e)
        t = E.trace(x)
        if t not in out:
            out[t] = x
        if len(out) == params.q:
            break
    out[0] = 0
    return out


def solve_norm_unit(params: FieldParams, prec: Optional[int] = None) -> Series:
    """A series X = 1 + x_1 Y + ... over F_{q^d} whose norm is 1 + Y.

    Coprime case: X is the d-th root of 1 + Y, with coefficients in F_q.
    Otherwise the coefficients are found one at a time from trace equations,
    taking 0 for a zero target and else the solution of least discrete log.
    """
    n = prec or DEFAULT_PRECISION
    K, E, d = params.K, params.E, params.d
    if math.gcd(params.p, d) == 1:
        root = dth_root(Series.make(K, 0, [1, 1], n), d)
        return root.retag(E)
    pre = _trace_preimages(params)
    xs = [1] + [0] * (n - 1)
    target = Series.make(K, 0, [1, 1], n)
    for m in range(1, n):
        X = Series.make(E, 0, xs[:m], m + 1)
        N = series_norm(X, d, K)
        c = (target - N).coefficient(m)
        xs[m] = pre[c]
    return Series.make(E, 0, xs, n)


def _unit_power(F: GF, c: list[int], m: int, n: int) -> list[int]:
    out = [1] + [0] * (n - 1)
    base = list(c[:n])
    e = m
    while e:
        if e & 1:
            out = conv(F, out, base, n)
        e >>= 1
        if e:
            base = conv(F, base, base, n)
    return out


def dth_root(s: Series, m: int, prec: Optional[int] = None) -> Series:
    """An m-th root of a series, or NoRoot.

    The p-power part of m is handled by inverse Frobenius and needs every
    nonzero exponent to be divisible by it; the prime-to-p part is solved
    coefficient by coefficient.  The leading coefficient root is the one of
    least discrete log.  Valuations must be divisible by m.
    """
    F = s.F
    p = F.p
    if m < 1:
        raise ValueError("m must be positive")
    if not s.coeffs:
        if s.prec is None:
            return Series.zero(F)
        raise PrecisionExhausted("root of a series that is zero in the window")
    if s.val % m:
        raise NoRoot(f"valuation {s.val} is not divisible by {m}")
    ps = 1
    while m % (ps * p) == 0:
        ps *= p
    m1 = m // ps
    n = s.prec if s.prec is not None else (prec or DEFAULT_PRECISION)
    c = list(s.window(s.val, s.val + n)) if s.prec is not None else \
        (list(s.coeffs[:n]) + [0] * max(0, n - len(s.coeffs)))
    # p-power stage
    if ps > 1:
        for i, x in enumerate(c):
            if x and i % ps:
                raise NoRoot(f"exponent {s.val + i} is not divisible by {ps}")
        nn = (n - 1) // ps + 1
        c = [F.root(c[i * ps], ps) for i in range(nn)]
        n = nn
    # prime-to-p stage
    if m1 > 1:
        r0 = F.root(c[0], m1)
        if r0 is None:
            raise NoRoot(f"leading coefficient {c[0]} is not a {m1}-th power")
        u0inv = F.inv(c[0])
        y = [F.mul(u0inv, x) for x in c]
        z = [1] + [0] * (n - 1)
        inv_m1 = F.inv(F.from_int(m1))
        for k in range(1, n):
            zk = _unit_power(F, z[:k], m1, k + 1)[k]
            z[k] = F.mul(inv_m1, F.sub(y[k], zk))
        c = [F.mul(r0, x) for x in z]
    return Series.make(F, s.val // m, c, n)


def is_dth_power(s: Series, m: int) -> Verdict:
    """Does the series have an m-th root (checked within its window)?"""
    prec = None if s.prec is None else s.absprec
    try:
        dth_root(s, m)
    except NoRoot as exc:
        return Verdict(False, prec, str(exc))
    return Verdict(True, prec)
