"""Matrices over F_q[[t]] / t^N and the projective group PGL_d(F_q((t))).

A polynomial matrix is an int64 array of shape (rows, cols, N): entry
[i, j, n] is the coefficient of t^n in entry (i, j).  ``ProjMat`` stores a
class in PGL_d in a normalized form: entries in F_q[[t]] with minimal
valuation 0, the first row-major entry of valuation 0 scaled to exactly 1,
all entries known modulo t^N.  Two representatives of the same class at the
same precision normalize to the same array.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import NotInvertible, PrecisionExhausted
from .gfield import GF
from .series import DEFAULT_PRECISION, Series


@lru_cache(maxsize=None)
def _toeplitz_index(N: int) -> np.ndarray:
    """[n, v] -> n - v + N, indexing into an array left-padded with N zeros."""
    return np.subtract.outer(np.arange(N), np.arange(N)) + N


_MREP: dict = {}


def mult_rep(F: GF) -> np.ndarray:
    """For every x in F the F_p-matrix of multiplication by x, shape (Q, k, k)."""
    M = _MREP.get(id(F))
    if M is None:
        xs = np.arange(F.order, dtype=np.int64)
        cols = [F.digits(F.vmul(xs, np.full(F.order, w, dtype=np.int64))) for w in F._pw]
        M = np.stack(cols, axis=-1)  # (Q, k_out, k_in)
        _MREP[id(F)] = M
    return M


def pmatmul(F: GF, A: np.ndarray, B: np.ndarray, N: int) -> np.ndarray:
    """Product of polynomial matrices, truncated to N coefficients.

    The left factor is expanded into a block Toeplitz matrix over F_p so that
    the whole product is a single (float, hence BLAS) matrix multiplication;
    all intermediate integers stay far below 2^53.
    """
    r, m, na = A.shape
    m2, c, nb = B.shape
    assert m == m2
    if na < N:
        A = np.concatenate([A, np.zeros((r, m, N - na), dtype=np.int64)], axis=2)
    if nb < N:
        B = np.concatenate([B, np.zeros((m, c, N - nb), dtype=np.int64)], axis=2)
    Ap = np.concatenate([np.zeros((r, m, N), dtype=np.int64), A[..., :N]], axis=2)
    T = Ap[:, :, _toeplitz_index(N)]  # (r, m, n, v)
    p = F.p
    if F.k == 1:
        AT = T.transpose(0, 2, 1, 3).reshape(r * N, m * N).astype(np.float64)
        Bf = B[..., :N].transpose(0, 2, 1).reshape(m * N, c).astype(np.float64)
        out = (AT @ Bf).astype(np.int64) % p
        return out.reshape(r, N, c).transpose(0, 2, 1)
    k = F.k
    MR = mult_rep(F)[T]  # (r, m, n, v, ko, ki)
    AT = MR.transpose(0, 2, 4, 1, 3, 5).reshape(r * N * k, m * N * k).astype(np.float64)
    Bd = F.digits(B[..., :N])  # (m, c, v, ki)
    Bf = Bd.transpose(0, 2, 3, 1).reshape(m * N * k, c).astype(np.float64)
    out = (AT @ Bf).astype(np.int64) % p  # (r*N*k, c)
    out = out.reshape(r, N, k, c).transpose(0, 3, 1, 2)
    return out @ np.array(F._pw, dtype=np.int64)


def pscale(F: GF, u: np.ndarray, A: np.ndarray, N: int) -> np.ndarray:
    """Multiply every entry of a polynomial matrix by the polynomial u."""
    r, c, _ = A.shape
    U = u[:N].reshape(1, 1, -1)
    flat = A.reshape(r * c, 1, -1)
    out = pmatmul(F, flat, U, N)
    return out.reshape(r, c, N)


@lru_cache(maxsize=None)
def _antidiag(N: int) -> np.ndarray:
    """(N*N, N) 0/1 matrix collecting the terms x_u y_v with u + v = n < N."""
    S = np.zeros((N * N, N), dtype=np.float64)
    for u in range(N):
        for v in range(N - u):
            S[u * N + v, u + v] = 1
    return S


def batched_conv(F: GF, X: np.ndarray, Y: np.ndarray, N: int) -> np.ndarray:
    """Row-wise products of polynomials mod t^N; X, Y of shape (n, >=N)."""
    X = X[:, :N]
    Y = Y[:, :N]
    n = X.shape[0]
    if F.k == 1:
        Xp = np.concatenate([np.zeros((n, N), dtype=np.int64), X], axis=1)
        T = Xp[:, _toeplitz_index(N)].astype(np.float64)  # (n, N, N)
        out = np.einsum("nij,nj->ni", T, Y.astype(np.float64))
        return out.astype(np.int64) % F.p
    P = F.exp_ext[F.log_np[X][:, :, None] + F.log_np[Y][:, None, :]].reshape(n, N * N)
    k = F.k
    D = np.stack([(P // w) % F.p for w in F._pw], axis=1).reshape(n * k, N * N)
    out = (D.astype(np.float64) @ _antidiag(N)).astype(np.int64) % F.p  # (n*k, N)
    return np.einsum("nkm,k->nm", out.reshape(n, k, N), np.array(F._pw, dtype=np.int64))


def pmul1(F: GF, a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    """Product of two polynomials mod t^N."""
    if F.k == 1:
        out = np.convolve(a[:N], b[:N])[:N] % F.p
        if out.shape[0] < N:
            out = np.concatenate([out, np.zeros(N - out.shape[0], dtype=np.int64)])
        return out
    a = np.concatenate([a[:N], np.zeros(max(0, N - a.shape[0]), dtype=np.int64)])
    b = np.concatenate([b[:N], np.zeros(max(0, N - b.shape[0]), dtype=np.int64)])
    return batched_conv(F, a[None], b[None], N)[0]


def padd(F: GF, a, b):
    return (a + b) % F.p if F.k == 1 else F.vadd(a, b)


def psub(F: GF, a, b):
    return (a - b) % F.p if F.k == 1 else F.vsub(a, b)


def pneg(F: GF, a):
    return (-a) % F.p if F.k == 1 else F.vneg(a)


def valuations(A: np.ndarray) -> np.ndarray:
    """Per-entry valuation along the last axis; N for entries zero mod t^N."""
    N = A.shape[-1]
    nz = A != 0
    return np.where(nz.any(axis=-1), nz.argmax(axis=-1), N)


def pdet_many(F: GF, A: np.ndarray, N: int) -> np.ndarray:
    """Determinants of a batch of square polynomial matrices, shape (B, d, d, >=N) -> (B, N).

    Laplace expansion along successive rows, memoized over column subsets;
    every level is a single batched convolution.
    """
    Bn, d = A.shape[0], A.shape[1]
    if A.shape[-1] < N:
        A = np.concatenate([A, np.zeros(A.shape[:-1] + (N - A.shape[-1],), dtype=np.int64)], axis=-1)
    A = A[..., :N]
    if d == 1:
        return A[:, 0, 0].copy()
    D = {(j,): A[:, 0, j] for j in range(d)}
    for k in range(1, d):
        subsets = list(combinations(range(d), k + 1))
        xs, ys, groups = [], [], []
        for S in subsets:
            g = []
            for pos, j in enumerate(S):
                g.append((len(xs), (len(S) - 1 - pos) % 2))
                xs.append(A[:, k, j])
                ys.append(D[S[:pos] + S[pos + 1:]])
            groups.append(g)
        X = np.stack(xs).reshape(-1, N)
        Y = np.stack(ys).reshape(-1, N)
        prods = batched_conv(F, X, Y, N).reshape(len(xs), Bn, N)
        newD = {}
        for S, g in zip(subsets, groups):
            if F.k == 1:
                sg = np.array([-1 if s else 1 for _, s in g], dtype=np.int64)
                newD[S] = np.einsum("t,tbn->bn", sg, prods[[t for t, _ in g]]) % F.p
                continue
            acc = None
            for t, s in g:
                term = prods[t]
                if acc is None:
                    acc = pneg(F, term) if s else term
                else:
                    acc = psub(F, acc, term) if s else padd(F, acc, term)
            newD[S] = acc
        D = newD
    return D[tuple(range(d))]


def pdet(F: GF, A: np.ndarray, N: int) -> np.ndarray:
    """Determinant of a square polynomial matrix mod t^N."""
    return pdet_many(F, A[None], N)[0]


def padjugate(F: GF, A: np.ndarray, N: int) -> np.ndarray:
    """Adjugate of a square polynomial matrix mod t^N."""
    d = A.shape[0]
    out = np.zeros((d, d, N), dtype=np.int64)
    if d == 1:
        out[0, 0, 0] = 1
        return out
    rows = list(range(d))
    minors = np.stack([A[[r for r in rows if r != j]][:, [c for c in rows if c != i]]
                       for i in range(d) for j in range(d)])
    dets = pdet_many(F, minors, N)
    for i in range(d):
        for j in range(d):
            m = dets[i * d + j]
            out[i, j] = pneg(F, m) if (i + j) % 2 else m
    return out


def unit_inverse_np(F: GF, u: np.ndarray, N: int) -> np.ndarray:
    """Inverse of a unit power series mod t^N by Newton iteration."""
    r = np.zeros(N, dtype=np.int64)
    r[0] = F.inv(int(u[0]))
    two = np.zeros(N, dtype=np.int64)
    two[0] = F.from_int(2)
    k = 1
    while k < N:
        k = min(2 * k, N)
        ur = pmul1(F, u, r, k)
        r = pmul1(F, r, psub(F, two[:k], ur), k)
    if r.shape[0] < N:
        r = np.concatenate([r, np.zeros(N - r.shape[0], dtype=np.int64)])
    return r


def shift_array(A: np.ndarray, N: int) -> tuple[np.ndarray, int]:
    """Divide by the largest power of t dividing every entry."""
    A = A[..., :N]
    v = valuations(A)
    m = int(v.min())
    if m >= N:
        raise PrecisionExhausted("matrix vanishes inside the precision window")
    if m == 0:
        return A, N
    return A[..., m:], N - m


def normalize_array(F: GF, A: np.ndarray, N: int) -> tuple[np.ndarray, int]:
    """Projective normal form of a polynomial matrix known mod t^N."""
    B, N2 = shift_array(A, N)
    d1, d2 = B.shape[:2]
    flat = B.reshape(d1 * d2, N2)
    piv = int(np.flatnonzero(flat[:, 0])[0])
    u = flat[piv]
    if not (u[0] == 1 and not u[1:].any()):
        B = pscale(F, unit_inverse_np(F, u, N2), B, N2)
    return np.ascontiguousarray(B), N2


class ProjMat:
    """An element of PGL_d(F_q((t))) at finite precision.

    ``data`` is some representative with entries in F_q[[t]] and minimal
    valuation 0, known mod t^N; it is unique only up to a unit scalar.
    ``canon`` is the normalized representative used for equality and hashing.
    """

    __slots__ = ("F", "d", "data", "N", "_det", "_canon")

    def __init__(self, F: GF, data: np.ndarray, N: int, shifted: bool = False):
        if not shifted:
            data, N = shift_array(data, N)
        self.F = F
        self.d = data.shape[0]
        self.data = data
        self.N = N
        self._det = None
        self._canon = None

    # -- constructors ----------------------------------------------------------------
    @classmethod
    def identity(cls, F: GF, d: int, N: Optional[int] = None) -> "ProjMat":
        N = N or DEFAULT_PRECISION
        A = np.zeros((d, d, N), dtype=np.int64)
        for i in range(d):
            A[i, i, 0] = 1
        g = cls(F, A, N, shifted=True)
        g._canon = A
        return g

    @classmethod
    def from_series(cls, F: GF, rows: Sequence[Sequence[Series]], prec: Optional[int] = None) -> "ProjMat":
        """From a matrix of Series; exact entries are expanded to ``prec``."""
        d = len(rows)
        m = None
        for row in rows:
            for s in row:
                if s.coeffs and (m is None or s.val < m):
                    m = s.val
        if m is None:
            raise PrecisionExhausted("all entries vanish inside the window")
        N = prec or DEFAULT_PRECISION
        for row in rows:
            for s in row:
                if s.prec is not None:
                    N = min(N, s.absprec - m)
        if N < 1:
            raise PrecisionExhausted("no common precision window")
        A = np.zeros((d, d, N), dtype=np.int64)
        for i, row in enumerate(rows):
            for j, s in enumerate(row):
                if s.prec is not None:
                    A[i, j] = s.window(m, m + N)
                else:
                    for e, c in s.terms():
                        if e - m < N:
                            A[i, j, e - m] = c
        return cls(F, A, N)

    @classmethod
    def diagonal_t(cls, F: GF, exps: Sequence[int], prec: Optional[int] = None) -> "ProjMat":
        """diag(t^e_1, ..., t^e_d)."""
        d = len(exps)
        rows = [[Series.monomial(F, 1, exps[i]) if i == j else Series.zero(F) for j in range(d)]
                for i in range(d)]
        return cls.from_series(F, rows, prec)

    @classmethod
    def constant(cls, F: GF, M, N: Optional[int] = None) -> "ProjMat":
        """From a d x d matrix over F (nested lists of ints)."""
        M = np.asarray(M, dtype=np.int64)
        d = M.shape[0]
        N = N or DEFAULT_PRECISION
        A = np.zeros((d, d, N), dtype=np.int64)
        A[:, :, 0] = M
        return cls(F, A, N)

    # -- group operations -----------------------------------------------------------------
    def __mul__(self, other: "ProjMat") -> "ProjMat":
        N = min(self.N, other.N)
        return ProjMat(self.F, pmatmul(self.F, self.data, other.data, N), N)

    def inverse(self) -> "ProjMat":
        adj = padjugate(self.F, self.data, self.N)
        try:
            return ProjMat(self.F, adj, self.N)
        except PrecisionExhausted as exc:
            raise NotInvertible("matrix is singular inside the precision window") from exc

    def __pow__(self, e: int) -> "ProjMat":
        if e < 0:
            return self.inverse() ** (-e)
        result = ProjMat.identity(self.F, self.d, self.N)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def conj(self, h: "ProjMat", h_inv: Optional["ProjMat"] = None) -> "ProjMat":
        """h * self * h^-1."""
        return h * self * (h_inv if h_inv is not None else h.inverse())

    # -- canonical form ---------------------------------------------------------------------
    @property
    def canon(self) -> np.ndarray:
        if self._canon is None:
            self._canon, _ = normalize_array(self.F, self.data, self.N)
        return self._canon

    def equals(self, other: "ProjMat") -> bool:
        N = min(self.N, other.N)
        return bool((self.canon[..., :N] == other.canon[..., :N]).all())

    __eq__ = equals
    __hash__ = None

    def key(self, k: int) -> bytes:
        """Hash key from the first k coefficients of the canonical form."""
        if k > self.N:
            raise PrecisionExhausted(f"key needs {k} coefficients, have {self.N}")
        return self.canon[..., :k].tobytes()

    def is_identity(self) -> bool:
        """Is the representative a scalar matrix?"""
        D = self.data
        d = self.d
        diag = D[np.arange(d), np.arange(d)]
        if not (diag == diag[0]).all():
            return False
        off = D.copy()
        off[np.arange(d), np.arange(d)] = 0
        return not off.any()

    def truncate(self, N: int) -> "ProjMat":
        if N >= self.N:
            return self
        return ProjMat(self.F, self.data[..., :N].copy(), N)

    # -- invariants ------------------------------------------------------------------------
    def det_poly(self) -> np.ndarray:
        """Determinant of the stored representative."""
        if self._det is None:
            self._det = pdet(self.F, self.data, self.N)
        return self._det

    def det_series(self) -> Series:
        return Series.make(self.F, 0, self.det_poly().tolist(), self.N)

    def det_valuation(self) -> int:
        dp = self.det_poly()
        nz = np.flatnonzero(dp)
        if not nz.size:
            raise PrecisionExhausted("determinant vanishes inside the precision window")
        return int(nz[0])

    def type_shift(self) -> int:
        return self.det_valuation() % self.d

    def constant_term(self) -> np.ndarray:
        return self.canon[:, :, 0].copy()

    # -- output ------------------------------------------------------------------------------
    def entry(self, i: int, j: int) -> Series:
        return Series.make(self.F, 0, self.canon[i, j].tolist(), self.N)

    def rows(self) -> list[list[Series]]:
        return [[self.entry(i, j) for j in range(self.d)] for i in range(self.d)]

    def to_record(self) -> dict:
        return {"d": self.d, "precision": self.N,
                "entries": [[self.entry(i, j).to_record() for j in range(self.d)] for i in range(self.d)]}

    def __repr__(self):
        return f"ProjMat(d={self.d}, N={self.N}, const={self.canon[:, :, 0].tolist()})"
