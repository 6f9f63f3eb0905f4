"""Half-system entanglement entropy for free and interacting fermions."""
from __future__ import annotations

import numpy as np

from .fockspace import FockBasis

HEALTH_TOL = 1e-9


def initial_correlation(N: int) -> np.ndarray:
    """C_ij = <a_i^dag a_j> for the first N/2 sites filled."""
    if N % 2:
        raise ValueError("half filling needs even N")
    c = np.zeros((N, N), dtype=complex)
    c[np.arange(N // 2), np.arange(N // 2)] = 1.0
    return c


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * t)) @ v.conj().T


def evolve_correlation(h: np.ndarray, c0: np.ndarray, t: float) -> np.ndarray:
    """C(t) = conj(U) C0 U^T with U = exp(-i h t).

    a_j(t) = sum_k U_jk a_k, so <a_i^dag a_j> picks up conj(U) on the left.
    Eigenmode occupations are stationary under this map.
    """
    if h.shape != c0.shape:
        raise ValueError("shape mismatch")
    u = propagator(h, t)
    return u.conj() @ c0 @ u.T


def _binary_entropy(z: np.ndarray) -> float:
    z = z[(z > 0) & (z < 1)]
    return float(-np.sum(z * np.log(z) + (1 - z) * np.log1p(-z)))


def free_entropy(c: np.ndarray, l: int) -> float:
    """Entropy of the first l sites from the l x l correlation block."""
    N = c.shape[0]
    if not 1 <= l <= N:
        raise ValueError(f"subsystem size {l} out of range")
    z = np.linalg.eigvalsh(c[:l, :l])
    if z.min() < -HEALTH_TOL or z.max() > 1 + HEALTH_TOL:
        raise FloatingPointError(f"correlation eigenvalue outside [0, 1]: {z.min()}, {z.max()}")
    return _binary_entropy(np.clip(z, 0.0, 1.0))


def entropy_series(h: np.ndarray, times, l: int | None = None) -> np.ndarray:
    """S(l)(t) after a quench from the first-half-filled state.

    Only the l x l block of C is needed, and for that initial state it is
    conj(U[:l, :N/2]) U[:l, :N/2]^T.
    """
    N = h.shape[0]
    l = N // 2 if l is None else l
    e, v = np.linalg.eigh(h)
    vl = v[:l]
    vh = v[: N // 2].conj()
    out = np.empty(len(times))
    for k, t in enumerate(times):
        u = (vl * np.exp(-1j * e * t)) @ vh.T
        out[k] = free_entropy(u.conj() @ u.T, l)
    return out


def many_body_entropy(psi: np.ndarray, l: int, basis: FockBasis) -> float:
    """Von Neumann entropy of sites 0..l-1 via the Schmidt decomposition.

    The cut is contiguous in the site ordering, so a basis word factorises
    as (low l bits) x (high bits) with no extra fermionic sign.
    """
    N = basis.n
    if not 0 <= l <= N:
        raise ValueError(f"subsystem size {l} out of range")
    if l in (0, N):
        return 0.0
    w = basis.states.astype(np.int64)
    a = w & ((1 << l) - 1)
    b = w >> l
    m = np.zeros((1 << l, 1 << (N - l)), dtype=complex)
    m[a, b] = psi
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-300]
    return float(-np.sum(s * np.log(s)))


def half_filled_product_state(basis: FockBasis) -> np.ndarray:
    """First N/2 sites occupied, as a vector over ``basis``."""
    word = (1 << (basis.n // 2)) - 1
    idx = basis.index(word)
    if idx < 0:
        raise ValueError("basis does not contain the half-filled product state")
    psi = np.zeros(basis.dim, dtype=complex)
    psi[idx] = 1.0
    return psi


def late_time_average(series, fraction: float = 0.5) -> float:
    """Mean over the last ``fraction`` of the grid."""
    s = np.asarray(series)
    start = int(np.floor(len(s) * (1 - fraction)))
    return float(np.mean(s[start:]))
