"""Quadratic-operator backend for free fermions.

An operator sum_ij m_ij a_i^dag a_j is stored as its N x N coefficient
matrix. Commutators with a quadratic Hamiltonian stay quadratic, so the
Liouvillian is a plain matrix commutator.
"""
from __future__ import annotations

import numpy as np

from .graphs import DisorderField, Graph


def hopping_matrix(g: Graph, J: float = 1.0, disorder: DisorderField | None = None) -> np.ndarray:
    """Single-particle Hamiltonian h with h_ij = J on edges and h_ii = w_i."""
    h = J * g.adjacency()
    if disorder is not None:
        w = np.asarray(disorder.w, dtype=float)
        if w.shape != (g.n,):
            raise ValueError("disorder field has the wrong length")
        h[np.diag_indices(g.n)] = w
    return h


def number_operator(N: int, i: int) -> np.ndarray:
    """Coefficient matrix of n_i."""
    if not 0 <= i < N:
        raise IndexError(f"site {i} out of range for N={N}")
    m = np.zeros((N, N), dtype=complex)
    m[i, i] = 1.0
    return m


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def liouville_apply_quadratic(h: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Coefficient matrix of [H, O], i.e. h m - m h."""
    _check_pair(h, m)
    return h @ m - m @ h


def quadratic_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Normalised Fock trace Tr[A^dag B] / 2^N for quadratic A and B.

    Equals (sum conj(a) b + conj(tr a) tr b) / 4.
    """
    _check_pair(a, b)
    return (np.vdot(a, b) + np.conj(np.trace(a)) * np.trace(b)) / 4.0


def quadratic_measure(h: np.ndarray, site: int, node_tol: float = 1e-9,
                      weight_tol: float = 1e-28):
    """Spectral measure of n_site under the Liouvillian of h.

    In the eigenbasis h = V diag(e) V^dag, n_i has components
    V_ia conj(V_ib) on the eigen-operator with frequency e_a - e_b. The
    (a, b) weights in the quadratic inner product are |V_ia|^2 |V_ib|^2 / 4,
    with the trace channel adding 1/4 at zero frequency. Returns merged
    ``(nodes, weights)``, whose total weight is (n_i|n_i) = 1/2.
    """
    from .krylov import merge_measure

    e, v = np.linalg.eigh(h)
    p = np.abs(v[site]) ** 2
    nodes = (e[:, None] - e[None, :]).ravel()
    weights = (np.outer(p, p) / 4.0).ravel()
    nodes = np.append(nodes, 0.0)
    weights = np.append(weights, 0.25)
    return merge_measure(nodes, weights, node_tol=node_tol, weight_tol=weight_tol)
