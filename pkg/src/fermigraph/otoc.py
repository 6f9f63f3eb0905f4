"""Infinite-temperature out-of-time-order correlators.

F(t) = <O(t) Q O(t) Q> with O(t) = e^{iHt} O e^{-iHt} and <.> the
normalised trace over the chosen space: the full Fock space
(``trace="full"``) or the half-filling sector (``trace="half"``).
C(t) = 2 (1 - Re F(t)).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .fockspace import FockOperator, _popcount


@dataclass
class OtocSeries:
    times: np.ndarray
    f: np.ndarray
    c: np.ndarray
    estimator_error: Optional[np.ndarray] = None
    trace: str = "full"


@dataclass
class LyapunovFit:
    rate: float
    stderr: float
    window: tuple = (float("nan"), float("nan"))
    ok: bool = True
    points: int = 0


def site_parity_operator(i: int, basis) -> FockOperator:
    """2 n_i - 1 on ``basis``."""
    from .fockspace import number_operator_matrix

    d = sp.csr_matrix(number_operator_matrix(i, basis).mat).diagonal().real
    return FockOperator(basis, sp.diags(2.0 * d - 1.0).astype(complex).tocsr())


def _check_involution(op: FockOperator, name: str):
    m = sp.csr_matrix(op.mat)
    herm = abs(m - m.conj().T).max() if m.nnz else 0.0
    if herm > 1e-10:
        raise ValueError(f"{name} is not Hermitian")
    sq = m @ m - sp.identity(m.shape[0], format="csr")
    if (abs(sq).max() if sq.nnz else 0.0) > 1e-10:
        raise ValueError(f"{name} does not square to the identity")
    return m


def _block(m, idx) -> np.ndarray:
    b = m[idx][:, idx].toarray()
    # real symmetric blocks allow real eigenvectors and cheaper products
    if np.iscomplexobj(b) and not np.any(b.imag):
        b = np.ascontiguousarray(b.real)
    return b


def _blocks(H: FockOperator, trace: str):
    """Index sets of the number sectors that enter the trace."""
    pc = _popcount(H.basis.states)
    N = H.basis.n
    if trace == "full":
        ks = np.unique(pc)
    elif trace == "half":
        if N % 2:
            raise ValueError("half-filling trace needs even N")
        ks = [N // 2]
        if not np.any(pc == N // 2):
            raise ValueError("basis has no half-filling states")
    else:
        raise ValueError(f"unknown trace {trace!r}")
    return [np.flatnonzero(pc == k) for k in ks]


def otoc_series(H: FockOperator, O: FockOperator, Q: FockOperator, times,
                method: str = "exact", samples: int = 20, seed=None,
                trace: str = "full") -> OtocSeries:
    """F(t) by exact sector eigendecomposition or by random-vector typicality.

    O and Q must be Hermitian involutions (e.g. 2 n_i - 1). The number
    sectors are diagonalised separately. ``typicality`` replaces the trace
    by the mean of <r|.|r> over ``samples`` complex Gaussian vectors and
    reports its standard error.
    """
    times = np.asarray(times, dtype=float)
    om = _check_involution(O, "O")
    qm = _check_involution(Q, "Q")
    hm = sp.csr_matrix(H.mat)
    groups = _blocks(H, trace)
    dim = sum(g.size for g in groups)
    if method == "exact":
        f = np.zeros(times.size, dtype=complex)
        for idx in groups:
            e, v = np.linalg.eigh(_block(hm, idx))
            oe = v.conj().T @ _block(om, idx) @ v
            qe = v.conj().T @ _block(qm, idx) @ v
            for a, t in enumerate(times):
                ph = np.exp(1j * e * t)
                ot = (ph[:, None] * oe) * ph.conj()[None, :]
                A = ot @ qe
                f[a] += np.sum(A * A.T)
        f /= dim
        return OtocSeries(times, f, 2.0 * (1.0 - f.real), None, trace)
    if method != "typicality":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    est = np.zeros((samples, times.size), dtype=complex)
    r = rng.standard_normal((dim, samples)) + 1j * rng.standard_normal((dim, samples))
    r /= np.linalg.norm(r, axis=0)
    start = 0
    for idx in groups:
        e, v = np.linalg.eigh(_block(hm, idx))
        oe = v.conj().T @ _block(om, idx) @ v
        qe = v.conj().T @ _block(qm, idx) @ v
        rb = v.conj().T @ r[start:start + idx.size]
        start += idx.size
        ph = np.exp(1j * np.outer(e, times))[:, :, None]  # (n, T, 1)
        n, T = idx.size, times.size
        # O(t) x for every time and sample at once: (n, T, samples)
        x = np.broadcast_to((qe @ rb)[:, None, :], (n, T, samples))
        y = ph * _mul(oe, ph.conj() * x)
        y = ph * _mul(oe, _mul(qe, y) * ph.conj())
        est += np.einsum("ns,nts->st", rb.conj(), y)
    f = est.mean(axis=0)
    err = est.real.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros(times.size)
    return OtocSeries(times, f, 2.0 * (1.0 - f.real), err, trace)


def _mul(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """m @ x over the first axis of a 3-d array."""
    n = x.shape[0]
    return (m @ x.reshape(n, -1)).reshape(x.shape)


def _esym(lams: np.ndarray, k: int) -> complex:
    c = np.zeros(lams.size + 1, dtype=complex)
    c[0] = 1.0
    for lam in lams:
        c[1:] = c[1:] + lam * c[:-1]
    return c[k]


def free_otoc_series(h: np.ndarray, i: int, q: int, times, trace: str = "full") -> OtocSeries:
    """F(t) for O = 2n_i - 1, Q = 2n_q - 1 under a quadratic Hamiltonian.

    (-1)^{n_i} is the Gaussian operator of P_i = I - 2 E_ii, so
    O(t) Q O(t) Q is the Gaussian operator of M = R P_q R P_q with
    R = U P_i U^dag. Its full trace is det(I + M) and its trace over k
    particles is the elementary symmetric polynomial e_k(eig M).
    """
    N = h.shape[0]
    times = np.asarray(times, dtype=float)
    e, v = np.linalg.eigh(h)
    Pi = np.eye(N)
    Pi[i, i] = -1.0
    Pq = np.eye(N)
    Pq[q, q] = -1.0
    f = np.empty(times.size, dtype=complex)
    for a, t in enumerate(times):
        u = (v * np.exp(1j * e * t)) @ v.conj().T
        R = u @ Pi @ u.conj().T
        M = R @ Pq @ R @ Pq
        if trace == "full":
            f[a] = np.linalg.det((np.eye(N) + M) / 2.0)
        elif trace == "half":
            if N % 2:
                raise ValueError("half-filling trace needs even N")
            f[a] = _esym(np.linalg.eigvals(M), N // 2) / comb(N, N // 2)
        else:
            raise ValueError(f"unknown trace {trace!r}")
    return OtocSeries(times, f, 2.0 * (1.0 - f.real), None, trace)


def lyapunov_fit(c, times, window: tuple | None = None, rel_tol: float = 0.05,
                 min_points: int = 4, floor: float = 1e-8,
                 growth_end: float = 0.5) -> LyapunovFit:
    """Exponential growth rate of C(t) from a straight-line fit of ln C.

    With ``window=(t0, t1)`` the fit uses exactly that range. Otherwise the
    search runs over the early-growth range, from the first point above
    ``floor`` until C first reaches half of its maximum. The chosen window
    is the longest contiguous run on which every point of ln C lies within
    ln(1 + rel_tol) of the run's own least-squares line, with positive slope.
    """
    c = np.asarray(c, dtype=float)
    t = np.asarray(times, dtype=float)
    fail = LyapunovFit(rate=0.0, stderr=0.0, ok=False)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1]) & (c > 0)
        if sel.sum() < 2:
            return fail
        return _line_fit(t[sel], np.log(c[sel]), ok=True)
    if c.size < min_points or np.max(c) <= floor:
        return fail
    pos = np.flatnonzero(c > floor)
    lo = pos[0]
    half = np.flatnonzero(c >= growth_end * np.max(c))
    hi = max(half[0], lo + min_points - 1) if half.size else c.size - 1
    hi = min(hi, c.size - 1)
    x, y = t[lo:hi + 1], np.log(np.maximum(c[lo:hi + 1], floor))
    tol = np.log1p(rel_tol)
    n = x.size
    for length in range(n, min_points - 1, -1):
        for s in range(0, n - length + 1):
            xs, ys = x[s:s + length], y[s:s + length]
            slope, icpt = np.polyfit(xs, ys, 1)
            if slope <= 0:
                continue
            if np.max(np.abs(ys - (slope * xs + icpt))) <= tol:
                return _line_fit(xs, ys, ok=True)
    return fail


def _line_fit(x, y, ok=True) -> LyapunovFit:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    n = x.size
    if n > 2:
        resid = y - A @ coef
        se = np.sqrt(np.sum(resid ** 2) / (n - 2) / np.sum((x - x.mean()) ** 2))
    else:
        se = 0.0
    ok = ok and coef[0] > 0
    return LyapunovFit(rate=float(coef[0]) if ok else 0.0, stderr=float(se),
                       window=(float(x[0]), float(x[-1])), ok=bool(ok), points=int(n))
