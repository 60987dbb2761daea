"""Vertices of the affine building of PGL_d(F_q((t))) as lattice classes.

A vertex is the homothety class of an F_q[[t]]-lattice L in K^d.  Its
representative is the unique scaling with L inside O^d but not inside tO^d,
stored as the column Hermite normal form of a basis:

* upper triangular, diagonal entries t^e_i,
* each entry above the diagonal in row i a polynomial of degree < e_i.

The type is sum(e_i) mod d.  All computations happen in F_q[t]/t^N; the
result is certified exact when sum(e_i) < N, because then t^N O^d lies in L
and the lattice is determined by its image modulo t^N.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import NotInStabilizer, PrecisionExhausted, Singular, SizeCapExceeded
from .gfield import GF
from .pgeom import FinMat, enumerate_subspaces, gaussian_binomial
from .pgl import ProjMat, batched_conv, padjugate, pdet, pmatmul, psub, valuations

BALL_CAP = 200_000


class Vertex:
    """Canonical representative of a building vertex."""

    __slots__ = ("mat", "exps", "type", "_key", "_hash")

    def __init__(self, mat: np.ndarray, exps: tuple):
        self.mat = mat
        self.exps = exps
        self.type = sum(exps) % mat.shape[0]
        self._key = bytes(exps) + mat.tobytes()
        self._hash = hash(self._key)

    @property
    def d(self) -> int:
        return self.mat.shape[0]

    @property
    def key(self) -> bytes:
        return self._key

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Vertex) and self._key == other._key

    def __lt__(self, other):
        return (self.exps, self.mat.tolist()) < (other.exps, other.mat.tolist())

    def depth(self) -> int:
        """Number of t-adic coefficients retained (1 + largest diagonal exponent)."""
        return self.mat.shape[2]

    def to_record(self) -> dict:
        d = self.d
        ent = {}
        for i in range(d):
            for j in range(i, d):
                c = self.mat[i, j].tolist()
                if any(c):
                    ent[f"{i},{j}"] = c
        return {"type": self.type, "exps": list(self.exps), "entries": ent}

    def label(self) -> str:
        parts = []
        d = self.d
        for j in range(d):
            col = []
            for i in range(d):
                c = self.mat[i, j].tolist()
                col.append("".join(str(x) for x in c).rstrip("0") or "0")
            parts.append("(" + ",".join(col) + ")")
        return "[" + " ".join(parts) + "]"

    def __repr__(self):
        return f"Vertex(type={self.type}, exps={self.exps}, {self.label()})"


def _shift_rows(X: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Per-row division by t^e (drop the first e[b] coefficients), zero filled."""
    N = X.shape[-1]
    idx = np.arange(N)[None, :] + e[:, None]
    ok = idx < N
    out = np.take_along_axis(X, np.minimum(idx, N - 1), axis=-1)
    return np.where(ok, out, 0)


def _vinv(F: GF, x: np.ndarray) -> np.ndarray:
    return F.exp_np[(F.m - F.log_np[x]) % F.m]


def unit_inverse_batch(F: GF, U: np.ndarray, N: int) -> np.ndarray:
    """Row-wise inverses of unit power series mod t^N (Newton iteration)."""
    B = U.shape[0]
    r = np.zeros((B, N), dtype=np.int64)
    r[:, 0] = _vinv(F, U[:, 0])
    two = np.zeros((B, N), dtype=np.int64)
    two[:, 0] = F.from_int(2)
    k = 1
    while k < N:
        k = min(2 * k, N)
        ur = batched_conv(F, U[:, :k], r[:, :k], k)
        r[:, :k] = batched_conv(F, r[:, :k], psub(F, two[:, :k], ur), k)
    return r


def hermite_batch(F: GF, A: np.ndarray, N: int) -> list:
    """Canonical vertices for a batch of lattice bases, shape (B, d, d, >=N).

    Items whose lattice cannot be certified inside the window come back as None.
    """
    A = np.asarray(A, dtype=np.int64)
    Bn, d = A.shape[0], A.shape[1]
    if A.shape[3] < N:
        A = np.concatenate([A, np.zeros(A.shape[:3] + (N - A.shape[3],), dtype=np.int64)], axis=3)
    A = A[..., :N]
    # homothety: divide each item by the largest power of t dividing it
    vals = valuations(A).reshape(Bn, d * d).min(axis=1)
    Nb = N - vals
    good = Nb > 0
    A = _shift_rows(A.reshape(Bn * d * d, N), np.repeat(np.minimum(vals, N), d * d)).reshape(Bn, d, d, N)
    exps = np.zeros((Bn, d), dtype=np.int64)
    ar = np.arange(Bn)
    for i in range(d - 1, -1, -1):
        v = valuations(A[:, i, :i + 1])  # (B, i+1)
        j = np.argmin(v, axis=1)
        e = v[ar, j]
        good &= e < Nb
        e = np.where(good, e, 0)
        if i:
            perm = np.tile(np.arange(d), (Bn, 1))
            perm[ar, i] = j
            perm[ar, j] = i
            A = np.take_along_axis(A, perm[:, None, :, None], axis=2)
        u = _shift_rows(A[:, i, i], e)
        u[:, 0] = np.where(u[:, 0] == 0, 1, u[:, 0])  # failed items only
        need = (u[:, 0] != 1) | u[:, 1:].any(axis=1)
        if need.any():
            sel = np.flatnonzero(need)
            uinv = unit_inverse_batch(F, u[sel], N)
            col = A[sel, :, i].reshape(-1, N)
            A[sel, :, i] = batched_conv(F, col, np.repeat(uinv, d, axis=0), N).reshape(len(sel), d, N)
        if i:
            C = _shift_rows(A[:, i, :i].reshape(-1, N), np.repeat(e, i)).reshape(Bn, i, N)
            if C.any():
                X = np.broadcast_to(A[:, :, i][:, :, None, :], (Bn, d, i, N)).reshape(-1, N)
                Y = np.broadcast_to(C[:, None, :, :], (Bn, d, i, N)).reshape(-1, N)
                P = batched_conv(F, X, Y, N).reshape(Bn, d, i, N)
                A[:, :, :i] = psub(F, A[:, :, :i], P)
        exps[:, i] = e
    good &= exps.sum(axis=1) < Nb
    for jj in range(1, d):
        for i in range(jj - 1, -1, -1):
            q = _shift_rows(A[:, i, jj], exps[:, i])
            if q.any():
                X = A[:, :, i].reshape(-1, N)
                Y = np.repeat(q, d, axis=0)
                A[:, :, jj] = psub(F, A[:, :, jj], batched_conv(F, X, Y, N).reshape(Bn, d, N))
    out = []
    for b in range(Bn):
        if not good[b]:
            out.append(None)
            continue
        ex = exps[b]
        n = int(ex.max()) + 1
        out.append(Vertex(np.ascontiguousarray(A[b, :, :, :n]), tuple(int(x) for x in ex)))
    return out


def hermite_form(F: GF, A: np.ndarray, N: int) -> Vertex:
    """Canonical vertex of the lattice spanned by the columns of A (known mod t^N)."""
    v = hermite_batch(F, np.asarray(A)[None], N)[0]
    if v is None:
        raise PrecisionExhausted(f"need more than {N} coefficients to certify this lattice")
    return v


def canonicalize(F: GF, M, N: Optional[int] = None) -> Vertex:
    """Vertex of the lattice spanned by the columns of M.

    M may be a Vertex, a ProjMat, a polynomial array of shape (d, d, n)
    (exact unless N < n says otherwise), or a square nested list of Series.
    """
    if isinstance(M, Vertex):
        M = M.mat
    if isinstance(M, ProjMat):
        return hermite_form(F, M.data, M.N)
    if isinstance(M, np.ndarray):
        d, n = M.shape[0], M.shape[2]
        if N is None or N > n:
            # exact polynomial input: pad with zeros far enough to certify
            N = max(N or 0, d * (n + 1) + 2)
            A = np.zeros(M.shape[:2] + (N,), dtype=np.int64)
            A[..., :n] = M
            M = A
        return hermite_form(F, M, N)
    g = ProjMat.from_series(F, M, N)
    if not g.det_poly().any():
        raise Singular("matrix is singular inside the precision window")
    return hermite_form(F, g.data, g.N)


def standard_vertex(F: GF, d: int, i: int) -> Vertex:
    """v_i = class of diag(t, ..., t, 1, ..., 1) with i entries t."""
    A = np.zeros((d, d, 2), dtype=np.int64)
    for k in range(d):
        A[k, k, 1 if k < i else 0] = 1
    return hermite_form(F, A, 2 + d)


def origin(F: GF, d: int) -> Vertex:
    return standard_vertex(F, d, 0)


@lru_cache(maxsize=None)
def _neighbor_generators(F: GF, d: int) -> tuple:
    """Lattice bases L_U (shape (d, d, 2)) for the proper subspaces U of F^d, plus codims."""
    mats, codims = [], []
    for k in range(1, d):
        for U in enumerate_subspaces(F, d, k):
            A = np.zeros((d, d, 2), dtype=np.int64)
            col = 0
            for row in U.rows:
                A[:, col, 0] = row
                col += 1
            for c in range(d):
                if c not in U.pivots:
                    A[c, col, 1] = 1
                    col += 1
            mats.append(A)
            codims.append(d - k)
    return np.concatenate(mats, axis=1), tuple(codims)


def neighbors_many(F: GF, vs: Sequence[Vertex]) -> list[list[Vertex]]:
    """Neighbour lists for several vertices at once (see ``neighbors``)."""
    if not vs:
        return []
    d = vs[0].d
    big, _ = _neighbor_generators(F, d)
    S = big.shape[1] // d
    N = max(max(sum(v.exps) + d, v.depth() + 1) + 1 for v in vs)
    prods = [pmatmul(F, v.mat, big, N).reshape(d, S, d, N).transpose(1, 0, 2, 3) for v in vs]
    flat = hermite_batch(F, np.concatenate(prods, axis=0), N)
    if any(w is None for w in flat):  # cannot happen for exact polynomial input
        raise PrecisionExhausted("neighbour computation lost precision")
    return [flat[k * S:(k + 1) * S] for k in range(len(vs))]


def neighbors(F: GF, v: Vertex) -> list[Vertex]:
    """All neighbours of v, one per proper nonzero subspace of L/tL.

    A subspace U of codimension c gives the sublattice spanned by lifts of U
    and tL; its type is type(v) + c mod d.  The order follows the enumeration
    of subspaces by dimension.
    """
    return neighbors_many(F, [v])[0]


def neighbor_count(q: int, d: int) -> int:
    return sum(gaussian_binomial(d, i, q) for i in range(1, d))


def _stack_vertices(vs: Sequence[Vertex]) -> np.ndarray:
    n = max(v.depth() for v in vs)
    d = vs[0].d
    M = np.zeros((d, d * len(vs), n), dtype=np.int64)
    for k, v in enumerate(vs):
        M[:, k * d:(k + 1) * d, :v.depth()] = v.mat
    return M


def act_many(g: ProjMat, vs: Sequence[Vertex]) -> list[Vertex]:
    """Images of several vertices under g."""
    if not vs:
        return []
    F, d = g.F, g.d
    M = _stack_vertices(vs)
    guess = min(g.N, max(8, 2 * max(sum(v.exps) for v in vs) + 2 * d + 2))
    out = hermite_batch(F, pmatmul(F, g.data, M, guess).reshape(d, len(vs), d, guess)
                        .transpose(1, 0, 2, 3), guess)
    bad = [k for k, w in enumerate(out) if w is None]
    if bad and guess < g.N:
        sub = [vs[k] for k in bad]
        Mb = _stack_vertices(sub)
        redo = hermite_batch(F, pmatmul(F, g.data, Mb, g.N).reshape(d, len(sub), d, g.N)
                             .transpose(1, 0, 2, 3), g.N)
        for k, w in zip(bad, redo):
            out[k] = w
    if any(w is None for w in out):
        raise PrecisionExhausted(f"precision {g.N} is too small to move these vertices")
    return out


def act(g: ProjMat, v: Vertex) -> Vertex:
    """Image of the vertex under g."""
    return act_many(g, [v])[0]


class ActionCache:
    """Memoized action of a fixed list of group elements on vertices."""

    def __init__(self, elements: Sequence[ProjMat]):
        self.elements = list(elements)
        self._cache: list[dict] = [dict() for _ in self.elements]
        self.calls = 0

    def __call__(self, idx: int, v: Vertex) -> Vertex:
        c = self._cache[idx]
        w = c.get(v)
        if w is None:
            self.calls += 1
            w = act(self.elements[idx], v)
            c[v] = w
        return w


def type_shift(g: ProjMat) -> int:
    return g.type_shift()


@dataclass
class Ball:
    """Vertices within graph distance r of a root, in BFS order."""

    root: Vertex
    radius: int
    vertices: list
    dist: list
    adjacency: list
    index: dict = field(repr=False)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v: Vertex) -> bool:
        return v in self.index

    def by_type(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for k, v in enumerate(self.vertices):
            out.setdefault(v.type, []).append(k)
        return out

    def type_counts(self) -> dict[int, int]:
        return {t: len(ix) for t, ix in sorted(self.by_type().items())}

    def vertex_set(self) -> set:
        return set(self.vertices)

    def to_record(self) -> dict:
        return {"root": self.root.to_record(), "radius": self.radius,
                "vertices": [{"id": k, "type": v.type, "dist": self.dist[k], "label": v.label()}
                             for k, v in enumerate(self.vertices)],
                "edges": [[a, b] for a, nb in enumerate(self.adjacency) for b in nb if a < b]}


def ball(F: GF, v: Vertex, r: int, cap: int = BALL_CAP, induced: bool = True) -> Ball:
    """Breadth-first ball of radius r.

    With ``induced`` the adjacency also records edges between two vertices
    on the boundary sphere (this expands the boundary once more).
    """
    verts = [v]
    dist = [0]
    index = {v: 0}
    adj: list[set] = [set()]
    frontier = [0]
    for step in range(r + (1 if induced else 0)):
        nxt = []
        nbs = neighbors_many(F, [verts[k] for k in frontier]) if frontier else []
        for k, nb in zip(frontier, nbs):
            for w in nb:
                j = index.get(w)
                if j is None:
                    if step >= r:
                        continue
                    j = len(verts)
                    if j >= cap:
                        raise SizeCapExceeded(f"ball exceeds {cap} vertices")
                    index[w] = j
                    verts.append(w)
                    dist.append(step + 1)
                    adj.append(set())
                    nxt.append(j)
                adj[k].add(j)
                adj[j].add(k)
        frontier = nxt
    return Ball(v, r, verts, dist, [sorted(s) for s in adj], index)


def distance(F: GF, v: Vertex, w: Vertex) -> int:
    """Graph distance: spread of the elementary divisors of M_v^-1 M_w."""
    d = v.d
    N = d * (sum(v.exps) + sum(w.exps) + v.depth() + w.depth() + 2) + 1
    B = pmatmul(F, padjugate(F, v.mat, N), w.mat, N)
    smin = int(valuations(B).min())
    detv = np.flatnonzero(pdet(F, B, N))
    adjv = int(valuations(padjugate(F, B, N)).min())
    if not detv.size:
        raise PrecisionExhausted("distance computation ran out of precision")
    smax = int(detv[0]) - adjv
    return smax - smin


def reduce_mod_t(g: ProjMat) -> FinMat:
    """Image in PGL_d(q) of an element fixing the origin vertex."""
    if g.det_valuation() != 0:
        raise NotInStabilizer("element does not stabilize the origin vertex")
    return FinMat(g.F, g.constant_term(), projective=True)
