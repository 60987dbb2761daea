"""Finite fields F_q and F_{q^d}, built as a tower over the prime field.

An element of a field of order Q = p^k is stored as an int in range(Q).
For an extension of a base field of order b with generator w, the int
sum(c_i * b**i) stands for sum(c_i * w**i), the c_i being base-field ints.
Since base-field ints use the same scheme, the base-p digits of an element
are exactly its coordinates over F_p; addition is digit-wise mod p.

Multiplication goes through log/exp tables; odd-characteristic addition
uses Zech logarithms.  Every field also carries numpy versions of the
tables so that whole coefficient arrays can be combined at once.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DivisionByZero, FieldTooLarge, ZeroElement

MAX_ORDER = 1 << 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of n, ascending."""
    out = []
    i = 2
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            while n % i == 0:
                n //= i
        i += 1
    if n > 1:
        out.append(n)
    return out


def ord_p(m: int, p: int) -> int:
    """Largest power of p dividing m (as a number, not an exponent)."""
    if m == 0:
        raise ValueError("ord_p(0) is undefined")
    r = 1
    m = abs(m)
    while m % p == 0:
        m //= p
        r *= p
    return r


# --- polynomials over a GF, little-endian lists of field ints ---------------

def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list, f: Sequence[int], F: "GF") -> list:
    """a mod f, f monic."""
    a = list(a)
    n = len(f) - 1
    for top in range(len(a) - 1, n - 1, -1):
        c = a[top]
        if c:
            s = top - n
            for i in range(n + 1):
                a[s + i] = F.sub(a[s + i], F.mul(c, f[i]))
    return _trim(a[:n])


def _poly_mulmod(a: list, b: list, f: Sequence[int], F: "GF") -> list:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] = F.add(prod[i + j], F.mul(x, y))
    return _poly_mod(prod, f, F)


def _poly_powmod(a: list, e: int, f: Sequence[int], F: "GF") -> list:
    result = [1]
    base = _poly_mod(a, f, F)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, F)
        e >>= 1
        if e:
            base = _poly_mulmod(base, base, f, F)
    return result


def is_primitive_poly(f: Sequence[int], F: "GF") -> bool:
    """True iff the monic f is primitive over F, i.e. x has order |F|^n - 1 mod f.

    A reducible f can never pass: the unit group of F[x]/(f) is then too small.
    """
    n = len(f) - 1
    if n < 1 or f[-1] != 1 or f[0] == 0:
        return False
    m = F.order ** n - 1
    x = [0, 1]
    if _poly_powmod(x, m, f, F) != [1]:
        return False
    for r in prime_factors(m):
        if _poly_powmod(x, m // r, f, F) == [1]:
            return False
    return True


@lru_cache(maxsize=None)
def conway_polynomial(p: int, n: int) -> tuple[int, ...]:
    """Conway polynomial of degree n over F_p, computed from its definition.

    Primitive, compatible with the lower-degree ones on subfields, and least
    in the ordering on ((-1)^j c_{n-j})_j.
    """
    F = GF.prime(p)
    lower = [(m, conway_polynomial(p, m)) for m in range(1, n) if n % m == 0]
    for s in product(range(p), repeat=n):
        f = [0] * (n + 1)
        f[n] = 1
        for j in range(1, n + 1):
            f[n - j] = (-s[j - 1]) % p if j % 2 else s[j - 1]
        if f[0] == 0 or not is_primitive_poly(f, F):
            continue
        ok = True
        for m, g in lower:
            y = _poly_powmod([0, 1], (p ** n - 1) // (p ** m - 1), f, F)
            acc: list = []
            for c in reversed(g):
                acc = _poly_mulmod(acc, y, f, F) or [0]
                acc[0] = F.add(acc[0], c)
                acc = _trim(acc)
            if acc:
                ok = False
                break
        if ok:
            return tuple(f)
    raise AssertionError("no Conway polynomial found")  # cannot happen


def least_primitive_polynomial(F: "GF", n: int) -> tuple[int, ...]:
    """Least primitive monic polynomial of degree n over F.

    Candidates are ordered lexicographically on (c_{n-1}, ..., c_0) with
    coefficients compared as element ints.
    """
    for s in product(range(F.order), repeat=n):
        f = list(reversed(s)) + [1]
        if is_primitive_poly(f, F):
            return tuple(f)
    raise AssertionError("no primitive polynomial found")


class GF:
    """A finite field with integer-encoded elements.

    Build with ``GF.prime(p)`` or ``GF.extension(base, modulus)``.  The
    generator ``gen`` is a primitive element; for an extension it is the
    class of x (int ``base.order``), for a prime field the least primitive root.
    """

    def __init__(self, p: int, base: Optional["GF"], modulus: Optional[tuple],
                 gen: Optional[int] = None):
        self.p = p
        self.base = base
        self.modulus = modulus
        if base is None:
            self.k = 1
            self.n = 1
            self.sub_order = p
        else:
            self.n = len(modulus) - 1
            self.k = base.k * self.n
            self.sub_order = base.order
        self.order = p ** self.k
        if self.order > MAX_ORDER:
            raise FieldTooLarge(f"field of order {self.order} exceeds cap {MAX_ORDER}")
        self.m = self.order - 1
        self.char_two = p == 2
        if base is None:
            self.gen = gen if gen is not None else _least_primitive_root(p)
        else:
            self.gen = base.order
        self._pw = [p ** j for j in range(self.k)]
        self._build_tables()

    # -- construction ------------------------------------------------------
    @classmethod
    @lru_cache(maxsize=None)
    def prime(cls, p: int) -> "GF":
        if not is_prime(p):
            raise ConfigError(f"{p} is not prime")
        return cls(p, None, None)

    @classmethod
    def extension(cls, base: "GF", modulus: Sequence[int]) -> "GF":
        modulus = tuple(int(c) for c in modulus)
        if not is_primitive_poly(modulus, base):
            raise ConfigError(f"modulus {list(modulus)} is not primitive over F_{base.order}")
        if base.order ** (len(modulus) - 1) > MAX_ORDER:
            raise FieldTooLarge(f"field of order {base.order}^{len(modulus) - 1} exceeds cap {MAX_ORDER}")
        return cls(base.p, base, modulus)

    def _gen_images(self) -> list[int]:
        """Images under multiplication by gen of the F_p-basis p^j."""
        if self.base is None:
            return [self.gen]
        B, n, a0 = self.base, self.n, self.base.k
        imgs = []
        for j in range(self.k):
            s, r = j % a0, j // a0
            if r + 1 < n:
                imgs.append(self.p ** (j + a0))
            else:
                c = B._pw[s]
                val = 0
                for i in range(n):
                    val += B.neg(B.mul(c, self.modulus[i])) * B.order ** i
                imgs.append(val)
        return imgs

    def _build_tables(self):
        Q, p, k = self.order, self.p, self.k
        idx = np.arange(Q, dtype=np.int64)
        imgs = self._gen_images()
        if p == 2:
            mulgen = np.zeros(Q, dtype=np.int64)
            for j in range(k):
                mulgen ^= np.where((idx >> j) & 1 == 1, imgs[j], 0)
        else:
            digs = [(idx // self._pw[j]) % p for j in range(k)]
            img_d = [[(v // self._pw[l]) % p for l in range(k)] for v in imgs]
            mulgen = np.zeros(Q, dtype=np.int64)
            for l in range(k):
                acc = np.zeros(Q, dtype=np.int64)
                for j in range(k):
                    if img_d[j][l]:
                        acc += digs[j] * img_d[j][l]
                mulgen += (acc % p) * self._pw[l]
        step = mulgen.tolist()
        exp = [1] * self.m
        x = 1
        for i in range(1, self.m):
            x = step[x]
            exp[i] = x
        if step[x] != 1 or (self.m > 1 and len(set(exp)) != self.m):
            raise ConfigError("generator is not primitive")
        log = [0] * Q
        for i, v in enumerate(exp):
            log[v] = i
        self.zero_log = 2 * self.m
        log[0] = self.zero_log
        self._exp = exp + exp  # index < 2m without a modulo
        self._log = log
        self.exp_np = np.array(exp, dtype=np.int64)
        self.log_np = np.array(log, dtype=np.int64)
        self.exp_ext = np.concatenate([self.exp_np, self.exp_np,
                                       np.zeros(2 * self.m + 1, dtype=np.int64)])
        # pick scalar addition
        if p == 2:
            self.add = operator.xor
            self.sub = operator.xor
            self._zech = None
        else:
            onep = self.vadd(np.ones(self.m, dtype=np.int64), self.exp_np)
            z = self.log_np[onep]
            self._zech = np.where(onep == 0, -1, z).tolist()
        self._half = self.m // 2 if p != 2 else 0
        self._frob = None

    # -- scalar arithmetic ---------------------------------------------------
    def add(self, x: int, y: int) -> int:  # replaced by xor in characteristic 2
        if not x:
            return y
        if not y:
            return x
        lx = self._log[x]
        z = self._zech[(self._log[y] - lx) % self.m]
        if z < 0:
            return 0
        return self._exp[lx + z]

    def neg(self, x: int) -> int:
        if self.char_two or not x:
            return x
        return self._exp[self._log[x] + self._half]

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if not x or not y:
            return 0
        return self._exp[self._log[x] + self._log[y]]

    def inv(self, x: int) -> int:
        if not x:
            raise DivisionByZero("inverse of 0 in a finite field")
        return self._exp[(self.m - self._log[x]) % self.m]

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def pow(self, x: int, e: int) -> int:
        if not x:
            if e > 0:
                return 0
            if e == 0:
                return 1
            raise DivisionByZero("negative power of 0")
        return self._exp[(self._log[x] * e) % self.m]

    def exp(self, e: int) -> int:
        """gen**e."""
        return self._exp[e % self.m]

    def discrete_log(self, x: int) -> int:
        """The unique e in range(order - 1) with gen**e == x."""
        if not x:
            raise ZeroElement("discrete log of 0")
        return self._log[x]

    def from_int(self, c: int) -> int:
        """Image of the integer c under Z -> F."""
        return c % self.p

    def is_power(self, x: int, e: int) -> bool:
        """Is the nonzero x an e-th power?"""
        return self.discrete_log(x) % math.gcd(e, self.m) == 0

    def root(self, x: int, e: int) -> Optional[int]:
        """The e-th root of x with least discrete log, or None."""
        if not x:
            return 0
        L = self._log[x]
        g = math.gcd(e, self.m)
        if L % g:
            return None
        mm = self.m // g
        if mm == 1:
            return 1
        r = (L // g) * pow(e // g, -1, mm) % mm
        return self._exp[r]

    # -- relative structure over the base field ------------------------------
    def frobenius(self, x: int, k: int = 1) -> int:
        """x -> x^(b^k), b the order of the base field."""
        if not x:
            return 0
        return self._exp[(self._log[x] * pow(self.sub_order, k % self.n, self.m)) % self.m]

    @property
    def frob_np(self) -> np.ndarray:
        if self._frob is None:
            e = (self.log_np[1:] * (self.sub_order % self.m if self.m > 1 else 0)) % max(self.m, 1)
            self._frob = np.concatenate([[0], self.exp_np[e]]).astype(np.int64)
        return self._frob

    def norm(self, x: int) -> int:
        """Relative norm to the base field, as an int below base order."""
        if not x:
            return 0
        return self._exp[(self._log[x] * (self.m // (self.sub_order - 1))) % self.m]

    def trace(self, x: int) -> int:
        t = 0
        y = x
        for _ in range(self.n):
            t = self.add(t, y)
            y = self.frobenius(y)
        return t

    def coords(self, x: int) -> list[int]:
        """Coordinates over the base field in the power basis of gen."""
        b = self.sub_order
        out = []
        for _ in range(self.n):
            out.append(x % b)
            x //= b
        return out

    def from_coords(self, c: Sequence[int]) -> int:
        b = self.sub_order
        return sum(int(v) * b ** i for i, v in enumerate(c))

    def fp_digits(self, x: int) -> list[int]:
        return [(x // w) % self.p for w in self._pw]

    def elements(self) -> range:
        return range(self.order)

    def units(self) -> list[int]:
        return list(self._exp[:self.m])

    # -- vectorized arithmetic on int64 arrays ---------------------------------
    def vadd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.p == 2:
            return np.bitwise_xor(a, b)
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        p = self.p
        for w in self._pw:
            out += ((a // w + b // w) % p) * w
        return out

    def vneg(self, a: np.ndarray) -> np.ndarray:
        if self.p == 2:
            return a
        out = np.zeros_like(a)
        p = self.p
        for w in self._pw:
            out += ((p - (a // w) % p) % p) * w
        return out

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.exp_ext[self.log_np[a] + self.log_np[b]]

    def vscale(self, c: int, a: np.ndarray) -> np.ndarray:
        if not c:
            return np.zeros_like(a)
        return self.exp_ext[self.log_np[a] + self._log[c]]

    def digits(self, a: np.ndarray) -> np.ndarray:
        """F_p digits along a new last axis."""
        a = np.asarray(a, dtype=np.int64)
        return np.stack([(a // w) % self.p for w in self._pw], axis=-1)

    def undigits(self, d: np.ndarray) -> np.ndarray:
        return (d % self.p) @ np.array(self._pw, dtype=np.int64)

    def __repr__(self):
        return f"GF({self.p}^{self.k})"


def _least_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    fs = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in fs):
            return g
    raise AssertionError


@dataclass(frozen=True)
class FieldParams:
    """The pair K = F_q, E = F_{q^d} for q = p^a."""

    p: int
    a: int
    d: int
    K: GF
    E: GF

    @property
    def q(self) -> int:
        return self.p ** self.a

    @property
    def base_modulus(self) -> Optional[tuple]:
        return self.K.modulus

    @property
    def ext_modulus(self) -> tuple:
        return self.E.modulus

    @property
    def omega(self) -> int:
        return self.E.gen

    @property
    def n_points(self) -> int:
        return (self.q ** self.d - 1) // (self.q - 1)

    def label(self) -> str:
        return f"d={self.d},q={self.q}"

    def to_record(self) -> dict:
        return {"p": self.p, "a": self.a, "d": self.d, "q": self.q,
                "base_modulus": list(self.K.modulus) if self.K.modulus else None,
                "ext_modulus": list(self.E.modulus)}


class _Adder:
    """All-pairs addition on int32 arrays.

    In odd characteristic each element is packed with radix 2p, so the sum
    of two packed elements has no carries and one table lookup reduces it.
    """

    def __init__(self, E: GF):
        self.xor = E.p == 2
        if self.xor:
            return
        p, k = E.p, E.k
        x = np.arange(E.order, dtype=np.int64)
        digs = [(x // w) % p for w in E._pw]
        self.pack = sum(dg * (2 * p) ** j for j, dg in enumerate(digs)).astype(np.int32)
        s = np.arange((2 * p) ** k, dtype=np.int64)
        self.red = sum(((s // (2 * p) ** j) % (2 * p) % p) * p ** j for j in range(k)).astype(np.int32)

    def table(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if self.xor:
            return np.bitwise_xor(xs[:, None], ys[None, :])
        return np.take(self.red, self.pack[xs][:, None] + self.pack[ys][None, :])


def _log_linear(E: GF, g: np.ndarray) -> bool:
    """Is g (with g(0) = 0, g(units) units) multiplicative on all pairs?

    Products are exp(log x + log y) on the cyclic group of order m, so g is
    multiplicative iff i -> log g(w^i) is additive mod m, i.e. equals
    i * log g(w).  This covers every pair without enumerating them.
    """
    m = E.m
    if g[0] != 0 or not g[1:].all():
        return False
    lg = E.log_np[g[E.exp_np]]
    return bool(np.array_equal(lg, (np.arange(m, dtype=np.int64) * lg[1]) % m))


def exhaustive_checks(P: FieldParams, block_cells: int = 1 << 21) -> dict:
    """Checks over all of F_{q^d}: Frobenius is a ring automorphism of order d,
    the norm is multiplicative and the trace additive and onto F_q.

    Additivity is tested on every pair; multiplicativity through the cyclic
    structure of the unit group (see ``_log_linear``), which is equivalent.
    Norm and trace are the product and sum of the d conjugates, independent
    of the closed form used by ``GF.norm``.
    """
    E, K, d = P.E, P.K, P.d
    n = E.order
    x = np.arange(n, dtype=np.int64)
    f = E.frob_np
    it = x
    for _ in range(d):
        it = f[it]
    order_ok = bool(np.array_equal(it, x)) and not np.array_equal(f, x)
    nm, tr, y = x.copy(), x.copy(), x.copy()
    for _ in range(d - 1):
        y = f[y]
        nm = E.vmul(nm, y)
        tr = E.vadd(tr, y)
    ok = {"frobenius_additive": True, "trace_additive": True,
          "frobenius_multiplicative": _log_linear(E, f),
          "norm_multiplicative": _log_linear(E, nm)}
    add = _Adder(E)
    f32, tr32 = f.astype(np.int32), tr.astype(np.int32)
    x32 = x.astype(np.int32)
    step = max(1, block_cells // n)
    for s in range(0, n, step):
        xs = x32[s:s + step]
        A = add.table(xs, x32)
        if ok["frobenius_additive"]:
            ok["frobenius_additive"] = bool(np.array_equal(np.take(f32, A), add.table(f32[xs], f32)))
        if ok["trace_additive"]:
            ok["trace_additive"] = bool(np.array_equal(np.take(tr32, A), add.table(tr32[xs], tr32)))
        if not (ok["frobenius_additive"] and ok["trace_additive"]):
            break
    q = K.order
    ok["frobenius_order_d"] = order_ok
    ok["norm_in_base"] = bool(nm.max() < q)
    ok["norm_matches_power"] = bool(np.array_equal(
        nm[1:], E.exp_ext[(E.log_np[1:] * ((n - 1) // (q - 1))) % (n - 1)]))
    ok["trace_surjective"] = bool(tr.max() < q) and len(np.unique(tr)) == q
    fib = np.bincount(nm[1:], minlength=q)[1:]
    ok["norm_fibres_uniform"] = bool((fib == (n - 1) // (q - 1)).all())
    return ok


@lru_cache(maxsize=None)
def _params(p, a, d, base_mod, ext_mod) -> FieldParams:
    if not is_prime(p):
        raise ConfigError(f"p={p} is not prime")
    if a < 1:
        raise ConfigError("a must be positive")
    if d < 2:
        raise ConfigError("d must be at least 2")
    if p ** (a * d) > MAX_ORDER:
        raise FieldTooLarge(f"q^d = {p ** (a * d)} exceeds the cap {MAX_ORDER}")
    P = GF.prime(p)
    if a == 1:
        if base_mod is not None:
            raise ConfigError("an explicit base modulus needs a >= 2")
        K = P
    else:
        K = GF.extension(P, base_mod or conway_polynomial(p, a))
    E = GF.extension(K, ext_mod or least_primitive_polynomial(K, d))
    return FieldParams(p, a, d, K, E)


def field_params(p: int, a: int, d: int, base_modulus=None, ext_modulus=None) -> FieldParams:
    """Deterministic construction of (F_q, F_{q^d}); moduli may be overridden."""
    bm = tuple(base_modulus) if base_modulus is not None else None
    em = tuple(ext_modulus) if ext_modulus is not None else None
    return _params(p, a, d, bm, em)


def params_for_q(q: int, d: int) -> FieldParams:
    """Field parameters from a prime power q."""
    for p in prime_factors(q)[:1]:
        a = round(math.log(q, p))
        if p ** a == q:
            return field_params(p, a, d)
    raise ConfigError(f"{q} is not a prime power")
