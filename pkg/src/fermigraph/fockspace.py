"""Exact many-body backend in the occupation-number basis.

Sites are ordered 0..N-1 and bit i of a basis word is the occupation of
site i. Hopping a_i^dag a_j picks up the parity of the occupied sites
strictly between i and j.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .graphs import DisorderField, Graph

DENSE_LIMIT = 256
EIG_LIMIT = 4000


def _popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    c = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        c += (x & np.uint64(1)).astype(np.int64)
        x = x >> np.uint64(1)
    return c


@dataclass(frozen=True)
class FockBasis:
    """Occupation words of N sites, full space or fixed particle number k."""

    n: int
    k: Optional[int]
    states: np.ndarray
    lookup: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def index(self, word: int) -> int:
        return int(self.lookup[word])


def build_fock_basis(N: int, k: int | None = None) -> FockBasis:
    """Sorted occupation basis; ``k=None`` means the full 2^N space."""
    if N < 0 or N > 24:
        raise ValueError("N must lie in 0..24")
    if k is not None and not 0 <= k <= N:
        raise ValueError(f"particle number {k} out of range for N={N}")
    words = np.arange(2 ** N, dtype=np.uint64)
    if k is not None:
        words = words[_popcount(words) == k]
    lookup = np.full(2 ** N, -1, dtype=np.int64)
    lookup[words.astype(np.int64)] = np.arange(words.size)
    return FockBasis(n=N, k=k, states=words, lookup=lookup)


@dataclass
class FockOperator:
    basis: FockBasis
    mat: object  # dense ndarray or scipy sparse matrix

    def dense(self) -> np.ndarray:
        return self.mat.toarray() if sp.issparse(self.mat) else np.asarray(self.mat)

    # linear-space arithmetic so Lanczos can treat operators as vectors
    def __add__(self, other: "FockOperator") -> "FockOperator":
        _same_basis(self, other)
        return FockOperator(self.basis, self.mat + other.mat)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        _same_basis(self, other)
        return FockOperator(self.basis, self.mat - other.mat)

    def __mul__(self, s) -> "FockOperator":
        return FockOperator(self.basis, self.mat * s)

    __rmul__ = __mul__

    def __truediv__(self, s) -> "FockOperator":
        return FockOperator(self.basis, self.mat / s)


def _finish(basis, rows, cols, vals) -> FockOperator:
    m = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)
    m.sum_duplicates()
    if basis.dim < DENSE_LIMIT:
        return FockOperator(basis, m.toarray())
    return FockOperator(basis, m)


def _bit(words, i):
    return ((words >> np.uint64(i)) & np.uint64(1)).astype(bool)


def hop_terms(basis: FockBasis, i: int, j: int):
    """Rows, columns and signs of a_i^dag a_j over the basis (i != j)."""
    s = basis.states
    src = np.flatnonzero(_bit(s, j) & ~_bit(s, i))
    w = s[src]
    lo, hi = min(i, j), max(i, j)
    between = np.uint64(((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    sign = 1.0 - 2.0 * (_popcount(w & between) % 2)
    tgt = w ^ np.uint64((1 << i) | (1 << j))
    return basis.lookup[tgt.astype(np.int64)], src, sign


def build_many_body_hamiltonian(g: Graph, J: float = 1.0, interacting: bool = False,
                                disorder: DisorderField | None = None,
                                basis: FockBasis | None = None) -> FockOperator:
    """Sum over edges of J(a_i^dag a_j + h.c.), optionally + J n_i n_j and w_i n_i."""
    if basis is None:
        basis = build_fock_basis(g.n)
    if basis.n != g.n:
        raise ValueError("basis and graph sizes differ")
    rows, cols, vals = [], [], []
    s = basis.states
    diag = np.zeros(basis.dim)
    for i, j in g.edges:
        for a, c in ((i, j), (j, i)):
            r, col, sg = hop_terms(basis, a, c)
            rows.append(r)
            cols.append(col)
            vals.append(J * sg)
        if interacting:
            diag += J * (_bit(s, i) & _bit(s, j))
    if disorder is not None:
        for i, wi in enumerate(np.asarray(disorder.w, dtype=float)):
            diag += wi * _bit(s, i)
    idx = np.arange(basis.dim)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    return _finish(basis, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def number_operator_matrix(i: int, basis: FockBasis) -> FockOperator:
    if not 0 <= i < basis.n:
        raise IndexError(f"site {i} out of range")
    d = _bit(basis.states, i).astype(float)
    idx = np.arange(basis.dim)
    return _finish(basis, idx, idx, d)


def identity_operator(basis: FockBasis) -> FockOperator:
    idx = np.arange(basis.dim)
    return _finish(basis, idx, idx, np.ones(basis.dim))


def annihilation_matrix(i: int, basis: FockBasis) -> FockOperator:
    """a_i on the full basis, with sign from occupied sites below i."""
    if basis.k is not None:
        raise ValueError("a_i changes particle number; use the full basis")
    s = basis.states
    src = np.flatnonzero(_bit(s, i))
    w = s[src]
    sign = 1.0 - 2.0 * (_popcount(w & np.uint64((1 << i) - 1)) % 2)
    tgt = basis.lookup[(w ^ np.uint64(1 << i)).astype(np.int64)]
    return _finish(basis, tgt, src, sign)


def quadratic_to_fock(m: np.ndarray, basis: FockBasis) -> FockOperator:
    """Embed sum_ij m_ij a_i^dag a_j into the Fock basis."""
    rows, cols, vals = [], [], []
    N = basis.n
    for i in range(N):
        for j in range(N):
            if m[i, j] == 0:
                continue
            if i == j:
                idx = np.flatnonzero(_bit(basis.states, i))
                rows.append(idx)
                cols.append(idx)
                vals.append(np.full(idx.size, m[i, i], dtype=complex))
            else:
                r, c, sg = hop_terms(basis, i, j)
                rows.append(r)
                cols.append(c)
                vals.append(m[i, j] * sg)
    if not rows:
        return _finish(basis, np.zeros(0, int), np.zeros(0, int), np.zeros(0))
    return _finish(basis, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def _same_basis(a: FockOperator, b: FockOperator) -> None:
    if a.basis is not b.basis and (a.basis.n != b.basis.n or a.basis.k != b.basis.k):
        raise ValueError("operators live on different bases")


def fock_liouville_apply(H: FockOperator, O: FockOperator) -> FockOperator:
    """[H, O] = H O - O H."""
    _same_basis(H, O)
    out = H.mat @ O.mat - O.mat @ H.mat
    if sp.issparse(out) and not sp.issparse(O.mat):
        out = out.toarray()
    return FockOperator(O.basis, out)


def fock_inner(A: FockOperator, B: FockOperator) -> complex:
    """Tr[A^dag B] / dim of the basis."""
    _same_basis(A, B)
    a = A.mat.toarray() if sp.issparse(A.mat) else A.mat
    b = B.mat.toarray() if sp.issparse(B.mat) else B.mat
    return complex(np.vdot(a, b) / A.basis.dim)


def evolve_state(H: FockOperator, psi0, t, normalize: bool = True):
    """e^{-iHt} psi0 for scalar t or an array of times.

    Small bases use a dense eigendecomposition; larger ones step with
    ``scipy.sparse.linalg.expm_multiply``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-9:
        if not normalize:
            raise ValueError("initial state is not normalised")
        warnings.warn("initial state was not normalised; normalising")
        psi0 = psi0 / nrm
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if H.basis.dim <= EIG_LIMIT:
        e, v = np.linalg.eigh(H.dense())
        c = v.conj().T @ psi0
        out = (np.exp(-1j * np.outer(ts, e)) * c) @ v.T
    else:
        m = sp.csr_matrix(H.mat)
        out = np.array([expm_multiply(-1j * tt * m, psi0) for tt in ts])
    return out[0] if np.ndim(t) == 0 else out


# ------------------------------------------------------------ number sectors

def _real_block(H: FockOperator) -> np.ndarray:
    # .real is a strided view; BLAS needs a contiguous copy
    return np.ascontiguousarray(H.dense().real)


def sector_hamiltonians(g: Graph, J: float = 1.0, interacting: bool = False,
                        disorder: DisorderField | None = None):
    """Dense Hamiltonian blocks for k = 0..N."""
    out = []
    for k in range(g.n + 1):
        b = build_fock_basis(g.n, k)
        out.append((b, _real_block(build_many_body_hamiltonian(g, J, interacting, disorder, b))))
    return out


def sector_eigensystems(g: Graph, J: float = 1.0, interacting: bool = False,
                        disorder: DisorderField | None = None, sectors=None):
    """List of (basis, energies, eigenvectors) per particle-number sector."""
    ks = range(g.n + 1) if sectors is None else sectors
    out = []
    for k in ks:
        b = build_fock_basis(g.n, k)
        h = _real_block(build_many_body_hamiltonian(g, J, interacting, disorder, b))
        e, v = np.linalg.eigh(h)
        out.append((b, e, v))
    return out


def number_operator_measure(eigsystems, site: int, node_tol: float = 1e-9,
                            weight_tol: float = 1e-20):
    """Spectral measure of n_site under ad_H with the 2^N-normalised trace.

    In each sector, with H = V diag(E) V^T, the matrix elements
    (V^T n V)_ab sit at frequency E_a - E_b with weight |.|^2 / 2^N.
    """
    from .krylov import merge_measure

    N = eigsystems[0][0].n
    nodes, weights = [], []
    for basis, e, v in eigsystems:
        o = _bit(basis.states, site).astype(float)
        ot = v.T @ (o[:, None] * v)
        nodes.append((e[:, None] - e[None, :]).ravel())
        weights.append((ot ** 2).ravel() / 2.0 ** N)
    return merge_measure(np.concatenate(nodes), np.concatenate(weights),
                         node_tol=node_tol, weight_tol=weight_tol)


@dataclass
class BlockOperator:
    """Direct sum of per-sector matrices, inner product normalised by 2^N."""

    n: int
    blocks: list

    def __add__(self, other):
        return BlockOperator(self.n, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        return BlockOperator(self.n, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, s):
        return BlockOperator(self.n, [s * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, s):
        return BlockOperator(self.n, [a / s for a in self.blocks])


def block_number_operator(n: int, site: int) -> BlockOperator:
    blocks = []
    for k in range(n + 1):
        b = build_fock_basis(n, k)
        blocks.append(np.diag(_bit(b.states, site).astype(complex)))
    return BlockOperator(n, blocks)


def block_commutator(hblocks, o: BlockOperator) -> BlockOperator:
    return BlockOperator(o.n, [h @ m - m @ h for h, m in zip(hblocks, o.blocks)])


def block_inner(a: BlockOperator, b: BlockOperator) -> complex:
    return sum(np.vdot(x, y) for x, y in zip(a.blocks, b.blocks)) / 2.0 ** a.n


def max_krylov_dim(n: int) -> int:
    """Sum_k C(n,k)^2, the number-conserving operator-space dimension."""
    return sum(comb(n, k) ** 2 for k in range(n + 1))
