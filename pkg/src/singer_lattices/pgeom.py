"""Projective geometry PG(d-1, q), Singer cycles and their normalizers."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterable, Optional, Sequence

from .errors import NotInvertible, SizeCapExceeded
from .gfield import GF, FieldParams

CLOSURE_CAP = 10 ** 6

Matrix = tuple  # tuple of row tuples


# --- small dense linear algebra over a GF -----------------------------------

def mat_mul(F: GF, A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    n, m, k = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        Ai = A[i]
        for j in range(k):
            s = 0
            for l in range(m):
                a = Ai[l]
                if a:
                    b = B[l][j]
                    if b:
                        s = F.add(s, F.mul(a, b))
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def mat_vec(F: GF, A, v) -> tuple:
    return tuple(row[0] for row in mat_mul(F, A, [[x] for x in v]))


def identity(d: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def transpose(A) -> Matrix:
    return tuple(zip(*A))


def rref(F: GF, rows: Iterable[Sequence[int]]) -> tuple[Matrix, tuple]:
    """Reduced row echelon form of the row space; returns (nonzero rows, pivot columns)."""
    M = [list(r) for r in rows]
    if not M:
        return (), ()
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(M)):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, x) for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return tuple(tuple(row) for row in M[:r]), tuple(pivots)


def mat_det(F: GF, A) -> int:
    M = [list(r) for r in A]
    n = len(M)
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = F.neg(det)
        det = F.mul(det, M[c][c])
        inv = F.inv(M[c][c])
        for i in range(c + 1, n):
            if M[i][c]:
                f = F.mul(M[i][c], inv)
                M[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[i], M[c])]
    return det


def mat_inv(F: GF, A) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    R, piv = rref(F, aug)
    if piv[:n] != tuple(range(n)) or len(R) < n:
        raise NotInvertible("singular matrix over a finite field")
    return tuple(tuple(r[n:]) for r in R)


def projective_normalize(F: GF, A) -> Matrix:
    """Scale so that the first nonzero entry (row-major) is 1."""
    for row in A:
        for x in row:
            if x:
                inv = F.inv(x)
                return tuple(tuple(F.mul(inv, y) for y in r) for r in A)
    raise NotInvertible("zero matrix")


# --- group elements ----------------------------------------------------------------

class FinMat:
    """An invertible d x d matrix over F_q, optionally taken modulo scalars."""

    __slots__ = ("F", "M", "projective", "_key")

    def __init__(self, F: GF, M, projective: bool = False):
        M = tuple(tuple(int(x) for x in row) for row in M)
        if projective:
            M = projective_normalize(F, M)
        self.F = F
        self.M = M
        self.projective = projective
        self._key = None

    @property
    def d(self) -> int:
        return len(self.M)

    def key(self):
        return (self.projective, self.M)

    def __hash__(self):
        return hash(self.M)

    def __eq__(self, other):
        return isinstance(other, FinMat) and self.key() == other.key()

    def __mul__(self, other: "FinMat") -> "FinMat":
        return FinMat(self.F, mat_mul(self.F, self.M, other.M), self.projective or other.projective)

    def inverse(self) -> "FinMat":
        return FinMat(self.F, mat_inv(self.F, self.M), self.projective)

    def __pow__(self, e: int) -> "FinMat":
        if e < 0:
            return self.inverse() ** (-e)
        r = FinMat(self.F, identity(self.d), self.projective)
        b = self
        while e:
            if e & 1:
                r = r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def det(self) -> int:
        return mat_det(self.F, self.M)

    def is_identity(self) -> bool:
        return self.M == identity(self.d)

    def order(self, cap: int = CLOSURE_CAP) -> int:
        x = self
        n = 1
        while not x.is_identity():
            x = x * self
            n += 1
            if n > cap:
                raise SizeCapExceeded("element order exceeds cap")
        return n

    def as_projective(self) -> "FinMat":
        return FinMat(self.F, self.M, True)

    def apply(self, v: Sequence[int]) -> tuple:
        return mat_vec(self.F, self.M, v)

    def __repr__(self):
        return f"FinMat({[list(r) for r in self.M]}{', proj' if self.projective else ''})"


class Group:
    """A finite matrix group given by generators, closed on demand."""

    def __init__(self, gens: Sequence[FinMat], cap: int = CLOSURE_CAP, name: str = ""):
        if not gens:
            raise ValueError("need at least one generator")
        self.gens = list(gens)
        self.cap = cap
        self.name = name
        self._elements: Optional[list[FinMat]] = None

    @property
    def elements(self) -> list[FinMat]:
        if self._elements is None:
            one = FinMat(self.gens[0].F, identity(self.gens[0].d), self.gens[0].projective)
            seen = {one: None}
            frontier = [one]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in self.gens:
                        y = x * g
                        if y not in seen:
                            seen[y] = None
                            nxt.append(y)
                            if len(seen) > self.cap:
                                raise SizeCapExceeded(f"closure exceeds {self.cap} elements")
                frontier = nxt
            self._elements = list(seen)
        return self._elements

    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: FinMat) -> bool:
        return x in set(self.elements)

    def as_set(self) -> set:
        return set(self.elements)


# --- subspaces -------------------------------------------------------------------------

def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@dataclass(frozen=True)
class ProjSubspace:
    """A subspace of F_q^d given by its reduced row echelon basis."""

    rows: Matrix
    pivots: tuple

    @property
    def dim(self) -> int:
        return len(self.rows)


def subspace(F: GF, vectors: Iterable[Sequence[int]]) -> ProjSubspace:
    R, piv = rref(F, vectors)
    return ProjSubspace(R, piv)


def enumerate_subspaces(F: GF, d: int, k: int) -> list[ProjSubspace]:
    """All k-dimensional subspaces of F^d, in a fixed deterministic order."""
    out = []
    Q = F.order
    for piv in combinations(range(d), k):
        free = [(r, c) for r in range(k) for c in range(piv[r] + 1, d) if c not in piv]
        for vals in product(range(Q), repeat=len(free)):
            M = [[0] * d for _ in range(k)]
            for r, c in enumerate(piv):
                M[r][c] = 1
            for (r, c), v in zip(free, vals):
                M[r][c] = v
            out.append(ProjSubspace(tuple(tuple(r) for r in M), piv))
    return out


def points(F: GF, d: int) -> list[ProjSubspace]:
    return enumerate_subspaces(F, d, 1)


def hyperplanes(F: GF, d: int) -> list[ProjSubspace]:
    return enumerate_subspaces(F, d, d - 1)


def act_on_subspace(g: FinMat, U: ProjSubspace) -> ProjSubspace:
    """Image g(U), vectors as columns."""
    img = mat_mul(g.F, U.rows, transpose(g.M))
    return subspace(g.F, img)


def incident(F: GF, U: ProjSubspace, W: ProjSubspace) -> bool:
    """U contained in W or W contained in U."""
    a, b = (U, W) if U.dim <= W.dim else (W, U)
    return subspace(F, a.rows + b.rows).dim == b.dim


# --- Singer cycles ------------------------------------------------------------------------

def singer_gl(params: FieldParams) -> FinMat:
    """Multiplication by the primitive element on F_{q^d}, power basis over F_q."""
    E, K, d = params.E, params.K, params.d
    w = params.omega
    cols = [E.coords(E.mul(w, E.exp(j))) for j in range(d)]
    return FinMat(K, transpose(cols))


def multiplication_matrix(params: FieldParams, a: int) -> FinMat:
    E, K, d = params.E, params.K, params.d
    cols = [E.coords(E.mul(a, E.exp(j))) for j in range(d)]
    return FinMat(K, transpose(cols))


def frobenius_matrix(params: FieldParams) -> FinMat:
    """The F_q-linear map x -> x^q of F_{q^d}."""
    E, K, d = params.E, params.K, params.d
    cols = [E.coords(E.frobenius(E.exp(j))) for j in range(d)]
    return FinMat(K, transpose(cols))


def singer_pgl(params: FieldParams) -> Group:
    return Group([singer_gl(params).as_projective()], name="Singer cycle in PGL")


def normalizer_singer(params: FieldParams) -> Group:
    return Group([singer_gl(params).as_projective(), frobenius_matrix(params).as_projective()],
                 name="Singer normalizer in PGL")


def in_psl(g: FinMat) -> bool:
    """A projective class lies in PSL iff its determinant is a d-th power."""
    det = g.det()
    return det != 0 and g.F.is_power(det, g.d)


def singer_psl(params: FieldParams) -> Group:
    """The Singer cycle intersected with PSL_d(q)."""
    S = singer_pgl(params)
    elems = [x for x in S.elements if in_psl(x)]
    # cyclic, so the element of largest order generates
    gen = max(elems, key=lambda x: (x.order(), x.M))
    return Group([gen], name="Singer cycle in PSL")


@dataclass
class TransitivityResult:
    transitive: bool
    simply: bool
    n_objects: int
    group_order: int
    orbit_sizes: list = field(default_factory=list)

    def __bool__(self):
        return self.transitive and self.simply


def verify_simple_transitivity(group: Group, objects: Sequence, action: Optional[Callable] = None
                               ) -> TransitivityResult:
    """Check a finite group acts simply transitively (transitive, trivial stabilizers)."""
    act = action or act_on_subspace
    objs = list(objects)
    remaining = set(objs)
    sizes = []
    elems = group.elements
    stab_trivial = True
    while remaining:
        x = next(o for o in objs if o in remaining)
        images = [act(g, x) for g in elems]
        orb = set(images)
        sizes.append(len(orb))
        if len(orb) != len(elems):
            stab_trivial = False
        remaining -= orb
    transitive = len(sizes) == 1
    return TransitivityResult(transitive, transitive and stab_trivial, len(objs), len(elems), sizes)


def maximal_pprime_orders(q: int) -> dict[str, int]:
    """Orders of the maximal p'-subgroups of PGL_3(q) used in covolume comparisons."""
    return {
        "3(q-1)^2": 3 * (q - 1) ** 2,
        "3(q^2+q+1)": 3 * (q * q + q + 1),
        "2(q-1)^2": 2 * (q - 1) ** 2,
        "q^2+q+1": q * q + q + 1,
        "2(q^2-1)": 2 * (q * q - 1),
        "6(q-1)^2": 6 * (q - 1) ** 2,
    }
