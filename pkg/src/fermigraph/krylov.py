"""Lanczos recursion, Krylov chain dynamics and plateau detection.

Two routes lead to the Lanczos coefficients b_n:

* :func:`lanczos` runs the recursion with two full re-orthogonalisation
  passes over any operator backend (``apply`` and ``inner`` callables).
* :func:`jacobi_from_measure` builds the same tridiagonal matrix from the
  operator's spectral measure under the Liouvillian. This is the route
  ensembles use, because in floating point the recursion keeps
  generating directions that are not in the exact Krylov space once it
  runs long enough, which inflates D.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

from ._kernels import chebyshev_chain, rkpw

ORTHO_BUDGET = 1e-10


@dataclass
class LanczosResult:
    """Output of a Lanczos run.

    Attributes:
        b: Lanczos coefficients b_1..b_{D-1}.
        dim: Krylov dimension D.
        basis: orthonormal Krylov elements, or None when not kept.
        max_residual: worst |(O_i|O_j) - delta_ij| over the basis.
        reliable: False when max_residual exceeds the orthogonality budget.
    """

    b: np.ndarray
    dim: int
    basis: Optional[list] = None
    max_residual: float = 0.0
    reliable: bool = True
    alpha: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class KrylovSeries:
    times: np.ndarray
    c: np.ndarray
    phi: Optional[np.ndarray] = None
    norm_error: float = 0.0


@dataclass
class Plateau:
    value: float
    found: bool
    window: tuple


def lanczos(apply: Callable, inner: Callable, o0, tol: float = 1e-8,
            max_dim: int | None = None, reorth_passes: int = 2,
            keep_basis: bool = True, atol: float = 1e-12) -> LanczosResult:
    """Lanczos recursion with full re-orthogonalisation.

    Every new vector is orthogonalised against all previous Krylov
    elements ``reorth_passes`` times (two by default). The run stops when
    b_n <= tol * b_1, when b_1 <= atol, or when D reaches ``max_dim``.
    """
    n0 = inner(o0, o0).real
    if not n0 > 0:
        raise ValueError("initial operator has zero norm")
    basis = [o0 / np.sqrt(n0)]
    bs: list[float] = []
    alphas: list[float] = []
    prev_b = 0.0
    while max_dim is None or len(basis) < max_dim:
        a = apply(basis[-1])
        alphas.append(inner(basis[-1], a).real)
        a = a - prev_b * basis[-2] if len(basis) > 1 else a
        for _ in range(reorth_passes):
            for q in basis:
                a = a - inner(q, a) * q
        bn = np.sqrt(max(inner(a, a).real, 0.0))
        if (not bs and bn <= atol) or (bs and bn <= tol * bs[0]):
            break
        bs.append(bn)
        basis.append(a / bn)
        prev_b = bn
    dim = len(basis)
    gram = np.array([[inner(p, q) for q in basis] for p in basis])
    resid = float(np.max(np.abs(gram - np.eye(dim)))) if dim else 0.0
    reliable = resid < ORTHO_BUDGET
    if not reliable:
        warnings.warn(f"Lanczos orthogonality residual {resid:.2e} exceeds budget")
    return LanczosResult(b=np.array(bs), dim=dim, basis=basis if keep_basis else None,
                         max_residual=resid, reliable=reliable, alpha=np.array(alphas))


def merge_measure(nodes, weights, node_tol: float = 1e-9, weight_tol: float = 1e-20):
    """Merge a discrete measure into distinct atoms.

    Nodes closer than ``node_tol`` (single linkage after sorting) are joined
    at their weighted mean. Merged atoms carrying less than
    ``weight_tol`` of the total weight are dropped.
    """
    nodes = np.asarray(nodes, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if nodes.shape != weights.shape:
        raise ValueError("nodes and weights differ in length")
    order = np.argsort(nodes, kind="stable")
    x, w = nodes[order], weights[order]
    starts = np.r_[0, np.flatnonzero(np.diff(x) > node_tol) + 1]
    ws = np.add.reduceat(w, starts)
    xs = np.add.reduceat(x * w, starts)
    keep = ws > weight_tol * w.sum()
    xs, ws = xs[keep] / ws[keep], ws[keep]
    return xs, ws


def jacobi_from_measure(nodes, weights, tol: float = 1e-8) -> LanczosResult:
    """Lanczos coefficients of the measure sum_k w_k delta(x - x_k).

    The Krylov dimension is the number of atoms. A coefficient falling to
    ``tol * b_1`` truncates the chain as the recursion would.
    """
    x = np.ascontiguousarray(nodes, dtype=float)
    w = np.ascontiguousarray(weights, dtype=float)
    if x.size == 0:
        raise ValueError("empty measure")
    alpha, beta = rkpw(x, w / w.sum())
    b = np.sqrt(np.maximum(beta[1:], 0.0))
    if b.size:
        small = np.flatnonzero(b <= tol * b[0])
        if small.size:
            b = b[:small[0]]
    dim = b.size + 1
    return LanczosResult(b=b, dim=dim, basis=None, max_residual=0.0,
                         reliable=True, alpha=alpha[:dim])


def time_grid(tmax: float = 1e3, tpoints: int = 400, tscale: str = "log",
              tmin: float = 0.1) -> np.ndarray:
    if tscale == "log":
        return np.logspace(np.log10(tmin), np.log10(tmax), tpoints)
    if tscale == "lin":
        return np.linspace(0.0, tmax, tpoints)
    raise ValueError(f"unknown time scale {tscale!r}")


def _cheb_plan(deltas, scale, eps=1e-16):
    coefs, offsets = [], [0]
    for dt in deltas:
        a = scale * dt
        if a <= 0:
            coefs.append(np.ones(1))
        else:
            kmax = int(a + 12.0 * a ** (1.0 / 3.0) + 40)
            k = np.arange(kmax)
            j = jv(k, a)
            big = np.flatnonzero(np.abs(j) > eps)
            kk = big[-1] + 2 if big.size else 2
            c = 2.0 * j[:kk]
            c[0] = j[0]
            coefs.append(c)
        offsets.append(offsets[-1] + coefs[-1].size)
    return np.concatenate(coefs), np.array(offsets, dtype=np.int64)


def _chain_real(b, times):
    """Real amplitudes psi_n(t), with phi_n = i^n psi_n."""
    b = np.ascontiguousarray(b, dtype=float)
    times = np.asarray(times, dtype=float)
    D = b.size + 1
    order = np.argsort(times, kind="stable")
    ts = times[order]
    if ts.size and ts[0] < 0:
        raise ValueError("negative times are not supported by the Chebyshev propagator")
    top = eigh_tridiagonal(np.zeros(D), b, eigvals_only=True,
                           select="i", select_range=(D - 1, D - 1))[0]
    scale = 1.01 * abs(top) + 1e-300
    coefs, offsets = _cheb_plan(np.diff(np.r_[0.0, ts]), scale)
    out = np.empty((ts.size, D))
    chebyshev_chain(b, scale, coefs, offsets, out)
    res = np.empty_like(out)
    res[order] = out
    return res


def _chain_eig(b, times):
    D = b.size + 1
    lam, v = eigh_tridiagonal(np.zeros(D), b)
    ph = np.exp(1j * np.outer(times, lam))
    return (ph * v[0]) @ v.T


def evolve_phi(b, times, method: str = "auto") -> np.ndarray:
    """Amplitudes phi_n(t) on the Krylov chain, phi_n(0) = delta_n0.

    Solves -i d/dt phi_n = b_n phi_{n-1} + b_{n+1} phi_{n+1}. ``method`` is
    "eig" (tridiagonal eigendecomposition), "chebyshev" (real Chebyshev
    propagation, faster for long chains) or "auto".
    """
    b = np.asarray(b, dtype=float)
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty((0, b.size + 1), dtype=complex)
    if np.any(b <= 0):
        raise ValueError("Lanczos coefficients must be positive")
    if b.size == 0:
        return np.ones((times.size, 1), dtype=complex)
    if method == "auto":
        method = "eig" if b.size < 400 else "chebyshev"
    if method == "eig":
        return _chain_eig(b, times)
    if method == "chebyshev":
        return _chain_real(b, times) * (1j ** (np.arange(b.size + 1) % 4))
    raise ValueError(f"unknown method {method!r}")


def complexity_series(phi) -> np.ndarray:
    """C(t) = sum_n n |phi_n(t)|^2 for amplitudes shaped (times, D)."""
    p = np.abs(np.asarray(phi)) ** 2
    return p @ np.arange(p.shape[-1])


def krylov_series(b, times, method: str = "auto", keep_phi: bool = False) -> KrylovSeries:
    """Complexity series for Lanczos coefficients ``b``.

    Only |phi|^2 is needed, so the Chebyshev route never forms complex
    amplitudes unless ``keep_phi`` is set.
    """
    b = np.asarray(b, dtype=float)
    times = np.asarray(times, dtype=float)
    if method == "auto":
        method = "eig" if b.size < 400 else "chebyshev"
    if keep_phi or method == "eig" or b.size == 0:
        phi = evolve_phi(b, times, method=method)
        p = np.abs(phi) ** 2
    else:
        phi = None
        p = _chain_real(b, times) ** 2
    c = p @ np.arange(p.shape[-1]) if p.size else np.zeros(times.size)
    err = float(np.max(np.abs(p.sum(axis=1) - 1.0))) if p.size else 0.0
    return KrylovSeries(times=times, c=c, phi=phi if keep_phi else None, norm_error=err)


def plateau_average(series, times, drift: float = 0.02, min_fraction: float = 0.25) -> Plateau:
    """Mean of the late-time saturated part of a series.

    The plateau is the longest trailing window whose least-squares slope
    against log10(t), relative to the window mean, stays below ``drift``
    per decade. Without such a window covering ``min_fraction`` of the
    grid, the last quarter is averaged and ``found`` is False.
    """
    y = np.asarray(series, dtype=float)
    t = np.asarray(times, dtype=float)
    if y.size < 10 or y.shape != t.shape:
        raise ValueError("need at least 10 matching samples")
    pos = t > 0
    y, t = y[pos], t[pos]
    n = y.size
    x = np.log10(t)
    # suffix sums give every trailing-window regression in O(n)
    S1 = np.cumsum(np.ones(n)[::-1])[::-1]
    Sx = np.cumsum(x[::-1])[::-1]
    Sy = np.cumsum(y[::-1])[::-1]
    Sxx = np.cumsum((x * x)[::-1])[::-1]
    Sxy = np.cumsum((x * y)[::-1])[::-1]
    need = max(int(np.ceil(min_fraction * n)), 3)
    for s in range(0, n - need + 1):
        m = S1[s]
        var = Sxx[s] - Sx[s] ** 2 / m
        mean = Sy[s] / m
        slope = (Sxy[s] - Sx[s] * Sy[s] / m) / var if var > 0 else 0.0
        scale = abs(mean)
        ok = abs(slope) <= drift * scale if scale > 0 else abs(slope) <= 1e-14
        if ok:
            return Plateau(value=float(np.mean(y[s:])), found=True, window=(float(t[s]), float(t[-1])))
    s = n - max(n // 4, 1)
    return Plateau(value=float(np.mean(y[s:])), found=False, window=(float(t[s]), float(t[-1])))
