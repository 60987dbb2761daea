"""The cyclic algebra (E((Y)), sigma, 1+Y) and its matrix realizations.

An element is sum_j a_j tau^j with a_j in E((Y)), where tau^d = 1 + Y and
tau b = sigma(b) tau.  ``psi`` realizes the algebra as d x d matrices over
K((Y)) using a fixed solution X of N(X) = 1 + Y; ``phi`` writes the inner
automorphism y -> x y x^-1 in the basis omega^i tau^j (ordered by j, then i)
and ``theta`` is its Y-degree zero part.

Membership answers are ``Verdict`` objects: "true at precision n" means
no violation was seen among coefficients below Y^n.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Sequence

from .errors import NotInvertible, PrecisionExhausted
from .gfield import FieldParams, ord_p
from .pgeom import identity as fin_identity, mat_inv, mat_mul
from .pgl import ProjMat
from .series import DEFAULT_PRECISION, Series, Verdict, one_plus_y, solve_norm_unit

__all__ = [
    "AlgContext", "AlgElem", "alg_mul", "alg_inv", "psi", "psi_inverse", "phi", "theta",
    "in_gamma_tilde", "in_gamma", "det_h_formula", "h_alg", "h_element", "h_theta",
    "h_in_psl", "h_psl_index", "h_elements", "ProjMat", "series_det", "series_matmul",
    "series_mat_inv",
]


# --- matrices of series ---------------------------------------------------------------

def series_matmul(A, B):
    n, m, k = len(A), len(B), len(B[0])
    F = A[0][0].F
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            s = Series.zero(F)
            for l in range(m):
                s = s + A[i][l] * B[l][j]
            row.append(s)
        out.append(row)
    return out


def _pivot_row(M, col, start):
    best = None
    for r in range(start, len(M)):
        s = M[r][col]
        if s.coeffs and (best is None or s.val < M[best][col].val):
            best = r
    return best


def series_det(M) -> Series:
    """Determinant by elimination with minimal-valuation pivots."""
    M = [list(r) for r in M]
    n = len(M)
    F = M[0][0].F
    det = Series.one(F)
    for c in range(n):
        r = _pivot_row(M, c, c)
        if r is None:
            if all(M[i][c].is_exact for i in range(c, n)):
                return Series.zero(F)
            raise PrecisionExhausted("pivot column vanishes inside the window")
        if r != c:
            M[c], M[r] = M[r], M[c]
            det = -det
        piv = M[c][c]
        det = det * piv
        inv = piv.inverse()
        for i in range(c + 1, n):
            if M[i][c].coeffs:
                f = M[i][c] * inv
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return det


def series_mat_inv(M):
    """Gauss-Jordan inverse over K((Y))."""
    n = len(M)
    F = M[0][0].F
    one, zero = Series.one(F), Series.zero(F)
    A = [list(M[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        r = _pivot_row(A, c, c)
        if r is None:
            raise NotInvertible("matrix is singular inside the precision window")
        A[c], A[r] = A[r], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c].coeffs:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return [row[n:] for row in A]


# --- context -----------------------------------------------------------------------------

class AlgContext:
    """Shared read-only data for one (p, a, d) and precision."""

    def __init__(self, params: FieldParams, prec: Optional[int] = None):
        self.params = params
        self.prec = prec or DEFAULT_PRECISION
        self.E, self.K, self.d = params.E, params.K, params.d
        E, d = self.E, self.d
        self.X = solve_norm_unit(params, self.prec)
        # tau^j goes to (X tau-hat)^j = X sigma(X) ... sigma^(j-1)(X) tau-hat^j
        tw = [Series.one(E)]
        for j in range(1, d):
            tw.append(tw[-1] * self.X.frobenius(j - 1))
        self.Xpow = tw
        self.Xinv_pow = [s.inverse() for s in tw]
        # W[i][j] = sigma^j(omega^i); psi(sum c_j tau-hat^j) sends omega^i to sum_j W[i][j] c_j
        self.W = tuple(tuple(E.frobenius(E.exp(i), j) for j in range(d)) for i in range(d))
        self.Winv = mat_inv(E, self.W)
        self.one_plus_y = one_plus_y(E)

    def __repr__(self):
        P = self.params
        return f"AlgContext(p={P.p}, a={P.a}, d={P.d}, prec={self.prec})"

    # coordinates of E((Y)) over K((Y)) in the power basis of omega
    def split(self, s: Series) -> list[Series]:
        E, K, d = self.E, self.K, self.d
        if not s.coeffs:
            return [Series.zero(K, None if s.prec is None else s.absprec) for _ in range(d)]
        cols = [E.coords(c) for c in s.coeffs]
        return [Series.make(K, s.val, [c[r] for c in cols], s.prec) for r in range(d)]

    def join(self, parts: Sequence[Series]) -> Series:
        E = self.E
        out = Series.zero(E)
        for r, s in enumerate(parts):
            out = out + s.retag(E).scale(E.exp(r))
        return out


@lru_cache(maxsize=None)
def context(params: FieldParams, prec: int) -> AlgContext:
    return AlgContext(params, prec)


# --- algebra elements ---------------------------------------------------------------------

class AlgElem:
    """sum_j a_j tau^j with a_j Series over E."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx: AlgContext, coeffs: Sequence[Series]):
        if len(coeffs) != ctx.d:
            raise ValueError(f"need {ctx.d} coefficients")
        self.ctx = ctx
        self.c = tuple(coeffs)

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, [Series.zero(ctx.E)] * ctx.d)

    @classmethod
    def one(cls, ctx):
        return cls.monomial(ctx, 1, 0)

    @classmethod
    def monomial(cls, ctx, a, k: int = 0):
        """a tau^k with a an E element (int) or Series; k may exceed d - 1."""
        d = ctx.d
        s = a if isinstance(a, Series) else Series.const(ctx.E, a)
        if k >= d or k < 0:
            s = s * ctx.one_plus_y ** (k // d)
            k %= d
        c = [Series.zero(ctx.E)] * d
        c[k] = s
        return cls(ctx, c)

    @classmethod
    def tau(cls, ctx, k: int = 1):
        return cls.monomial(ctx, 1, k)

    @classmethod
    def const(cls, ctx, a):
        return cls.monomial(ctx, a, 0)

    def __add__(self, other: "AlgElem") -> "AlgElem":
        return AlgElem(self.ctx, [a + b for a, b in zip(self.c, other.c)])

    def __sub__(self, other: "AlgElem") -> "AlgElem":
        return AlgElem(self.ctx, [a - b for a, b in zip(self.c, other.c)])

    def __neg__(self):
        return AlgElem(self.ctx, [-a for a in self.c])

    def __mul__(self, other: "AlgElem") -> "AlgElem":
        return alg_mul(self, other)

    def inverse(self) -> "AlgElem":
        return alg_inv(self)

    def scale(self, s: Series) -> "AlgElem":
        """Multiply by a central scalar from K((Y)) or E((Y)) on the left."""
        s = s.retag(self.ctx.E) if s.F is not self.ctx.E else s
        return AlgElem(self.ctx, [s * a for a in self.c])

    def __eq__(self, other):
        return isinstance(other, AlgElem) and all(a == b for a, b in zip(self.c, other.c))

    __hash__ = None

    def is_one(self) -> bool:
        return self == AlgElem.one(self.ctx)

    def absprec(self):
        return min(a.absprec for a in self.c)

    def to_record(self) -> list:
        """Per tau-degree the (exponent, discrete log) pairs of nonzero terms."""
        E = self.ctx.E
        return [[[e, E.discrete_log(c)] for e, c in a.terms()] for a in self.c]

    def __repr__(self):
        parts = [f"({a})*tau^{j}" for j, a in enumerate(self.c) if a.coeffs]
        return "AlgElem(" + (" + ".join(parts) or "0") + ")"


def alg_mul(x: AlgElem, y: AlgElem) -> AlgElem:
    ctx = x.ctx
    d = ctx.d
    out = [Series.zero(ctx.E)] * d
    for j, a in enumerate(x.c):
        if not a.coeffs and a.is_exact:
            continue
        for k, b in enumerate(y.c):
            if not b.coeffs and b.is_exact:
                continue
            prod = a * b.frobenius(j)
            l = j + k
            if l >= d:
                prod = prod * ctx.one_plus_y
                l -= d
            out[l] = out[l] + prod
    return AlgElem(ctx, out)


def psi(x: AlgElem) -> list[list[Series]]:
    """Matrix over K((Y)) of b -> sum_j a_j X_j sigma^j(b), basis omega^i.

    X_j = X sigma(X) ... sigma^(j-1)(X); this equals X^j when X has
    coefficients in K, and keeps psi multiplicative otherwise.
    """
    ctx = x.ctx
    d = ctx.d
    cj = [a * Xj for a, Xj in zip(x.c, ctx.Xpow)]
    cols = []
    for i in range(d):
        img = Series.zero(ctx.E)
        for j in range(d):
            img = img + cj[j].scale(ctx.W[i][j])
        cols.append(ctx.split(img))
    return [[cols[i][r] for i in range(d)] for r in range(d)]


def psi_inverse(ctx: AlgContext, M) -> AlgElem:
    """The algebra element whose psi-matrix is M."""
    d, E = ctx.d, ctx.E
    m = [ctx.join([M[r][i] for r in range(d)]) for i in range(d)]
    out = []
    for j in range(d):
        c = Series.zero(E)
        for i in range(d):
            w = ctx.Winv[j][i]
            if w:
                c = c + m[i].scale(w)
        out.append(c * ctx.Xinv_pow[j])
    return AlgElem(ctx, out)


def alg_inv(x: AlgElem) -> AlgElem:
    """Two-sided inverse, from the inverse of the psi-matrix."""
    return psi_inverse(x.ctx, series_mat_inv(psi(x)))


def psi_projective(x: AlgElem, prec: Optional[int] = None) -> ProjMat:
    return ProjMat.from_series(x.ctx.K, psi(x), prec or x.ctx.prec)


# --- conjugation representation ----------------------------------------------------------

def phi(x: AlgElem, x_inv: Optional[AlgElem] = None) -> list[list[Series]]:
    """Matrix of y -> x y x^-1 in the basis omega^i tau^j.

    Column j*d + i is the image of omega^i tau^j; row l*d + r holds the
    omega^r coordinate of its tau^l coefficient.
    """
    ctx = x.ctx
    d, E = ctx.d, ctx.E
    xi = x_inv if x_inv is not None else alg_inv(x)
    opy = ctx.one_plus_y
    opy_pow = [opy ** k for k in range(3)]
    # P[l][j][m] = a_l * sigma^(l+j)(b_m) * (1+Y)^((l+j+m) // d)
    P = {}
    for l, a in enumerate(x.c):
        if not a.coeffs and a.is_exact:
            continue
        for j in range(d):
            for m, b in enumerate(xi.c):
                if not b.coeffs and b.is_exact:
                    continue
                e = l + j + m
                P[l, j, m] = a * b.frobenius(l + j) * opy_pow[e // d]
    big = [[None] * (d * d) for _ in range(d * d)]
    for j in range(d):
        for i in range(d):
            out = [Series.zero(E)] * d
            for (l, jj, m), s in P.items():
                if jj != j:
                    continue
                deg = (l + j + m) % d
                out[deg] = out[deg] + s.scale(E.frobenius(E.exp(i), l))
            col = j * d + i
            for deg in range(d):
                parts = ctx.split(out[deg])
                for r in range(d):
                    big[deg * d + r][col] = parts[r]
    return big


def _degree_zero(big) -> tuple:
    rows = []
    for row in big:
        out = []
        for s in row:
            if s.absprec <= 0:
                raise PrecisionExhausted("constant term lies outside the window")
            out.append(s.coefficient(0))
        rows.append(tuple(out))
    return tuple(rows)


def theta(x: AlgElem, big=None) -> tuple:
    """Y-degree zero part of phi(x), a d^2 x d^2 matrix over K."""
    return _degree_zero(big if big is not None else phi(x))


def _positive_part_free(big) -> Verdict:
    prec = math.inf
    for a, row in enumerate(big):
        for b, s in enumerate(row):
            prec = min(prec, s.absprec)
            for e, c in s.terms():
                if e > 0:
                    return Verdict(False, s.absprec, f"entry ({a},{b}) has a Y^{e} term")
    if prec <= 1:
        raise PrecisionExhausted("window too small to test for positive Y-exponents")
    return Verdict(True, None if prec == math.inf else int(prec))


def in_gamma_tilde(x: AlgElem, big=None) -> Verdict:
    """Does conjugation by x preserve the E[1/Y]-span of 1, tau, ..., tau^(d-1)?"""
    return _positive_part_free(big if big is not None else phi(x))


def is_block_unitriangular(T, d: int) -> bool:
    n = d * d
    for row in range(n):
        for col in range(n):
            bl, bj = row // d, col // d
            v = T[row][col]
            if bl > bj and v:
                return False
            if bl == bj and v != (1 if row == col else 0):
                return False
    return True


def in_gamma(x: AlgElem, big=None) -> Verdict:
    """Gamma-tilde membership plus a unitriangular degree-zero part."""
    big = big if big is not None else phi(x)
    v = in_gamma_tilde(x, big)
    if not v:
        return v
    T = theta(x, big)
    if not is_block_unitriangular(T, x.ctx.d):
        return Verdict(False, v.precision, "degree-zero part is not unitriangular")
    return v


# --- the finite group H of conjugations by a tau^k --------------------------------------------

def h_alg(ctx: AlgContext, a: int, k: int) -> AlgElem:
    return AlgElem.monomial(ctx, a, k)


def h_element(ctx: AlgContext, a: int, k: int) -> ProjMat:
    """Projective class of psi(a tau^k)."""
    if not a:
        raise ValueError("a must be nonzero")
    return psi_projective(h_alg(ctx, a, k))


def h_theta(ctx: AlgContext, a: int, k: int) -> tuple:
    """Closed form of theta for conjugation by a tau^k: b tau^i -> a sigma^i(a^-1) sigma^k(b) tau^i."""
    E, d = ctx.E, ctx.d
    ainv = E.inv(a)
    n = d * d
    M = [[0] * n for _ in range(n)]
    for i in range(d):
        f = E.mul(a, E.frobenius(ainv, i))
        for r in range(d):
            img = E.mul(f, E.frobenius(E.exp(r), k))
            for s, c in enumerate(E.coords(img)):
                M[i * d + s][i * d + r] = c
    return tuple(tuple(r) for r in M)


def h_elements(params: FieldParams) -> list[tuple[int, int]]:
    """Representatives (a, k) of H: a over E^x / K^x as powers of omega, 0 <= k < d."""
    E = params.E
    n = (params.q ** params.d - 1) // (params.q - 1)
    return [(E.exp(e), k) for k in range(params.d) for e in range(n)]


def det_h_formula(params: FieldParams, a: int, k: int, z: Series) -> Series:
    """z^d N(a) (1+Y)^k (-1)^((d-1)k), the determinant of z psi(a tau^k)."""
    K, E, d = params.K, params.E, params.d
    c = E.norm(a)
    if (d - 1) * k % 2:
        c = K.neg(c)
    return (z ** d) * one_plus_y(K) ** k * Series.const(K, c)


def h_in_psl(params: FieldParams, a: int, k: int) -> bool:
    """Is the class of psi(a tau^k) in PSL?

    The determinant N(a)(1+Y)^k(-1)^((d-1)k) must be a d-th power up to
    the scalar freedom: the constant needs to be a d-th power in K and
    (1+Y)^k needs k divisible by the p-part of d.
    """
    K, E, d = params.K, params.E, params.d
    c = E.norm(a)
    if (d - 1) * k % 2:
        c = K.neg(c)
    return K.is_power(c, d) and k % ord_p(d, params.p) == 0


def h_psl_index(params: FieldParams) -> int:
    return math.gcd(params.d, params.q - 1) * ord_p(params.d, params.p)


def theta_mul(K, A, B):
    return mat_mul(K, A, B)


def theta_identity(d: int):
    return fin_identity(d * d)
