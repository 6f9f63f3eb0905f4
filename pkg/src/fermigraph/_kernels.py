"""Numba kernels for the Krylov chain."""
import numba
import numpy as np


@numba.njit(cache=True)
def rkpw(x, w):
    """Jacobi matrix of the discrete measure sum_k w_k delta(x - x_k).

    Rutishauser-Kahan-Pal-Walker update, O(n^2) and stable. Returns
    ``(alpha, beta)`` where beta[0] is the total weight and beta[k] = b_k^2.
    """
    n = x.shape[0]
    p0 = x.copy()
    p1 = np.zeros(n)
    p1[0] = w[0]
    for m in range(n - 1):
        pn = w[m + 1]
        gam = 1.0
        sig = 0.0
        t = 0.0
        xlam = x[m + 1]
        for k in range(m + 2):
            rho = p1[k] + pn
            tmp = gam * rho
            tsig = sig
            if rho <= 0.0:
                gam = 1.0
                sig = 0.0
            else:
                gam = p1[k] / rho
                sig = pn / rho
            tk = sig * (p0[k] - xlam) - gam * t
            p0[k] = p0[k] - (tk - t)
            t = tk
            if sig <= 0.0:
                pn = tsig * p1[k]
            else:
                pn = (t * t) / sig
            tsig = sig
            p1[k] = tmp
    return p0, p1


@numba.njit(cache=True)
def chebyshev_chain(b, scale, coefs, offsets, out):
    """Propagate psi(0) = e_0 on the chiral chain through successive steps.

    With phi_n = i^n psi_n the chain equation becomes psi' = B psi, where
    (B psi)_n = b_n psi_{n-1} - b_{n+1} psi_{n+1} is real antisymmetric.
    The Chebyshev series of exp(i T dt) then maps to
    sum_k c_k R_k with R_{k+1} = 2 (B/s) R_k + R_{k-1}, all real.
    Step j uses coefficients coefs[offsets[j]:offsets[j+1]]; the state
    after step j is written to out[j].
    """
    D = b.shape[0] + 1
    psi = np.zeros(D)
    psi[0] = 1.0
    r0 = np.empty(D)
    r1 = np.empty(D)
    r2 = np.empty(D)
    acc = np.empty(D)
    inv = 1.0 / scale
    for j in range(offsets.shape[0] - 1):
        lo = offsets[j]
        hi = offsets[j + 1]
        if hi - lo == 1:
            for n in range(D):
                out[j, n] = psi[n]
            continue
        for n in range(D):
            r0[n] = psi[n]
        # r1 = B r0 / s
        for n in range(D):
            v = 0.0
            if n > 0:
                v += b[n - 1] * r0[n - 1]
            if n < D - 1:
                v -= b[n] * r0[n + 1]
            r1[n] = v * inv
        c0 = coefs[lo]
        c1 = coefs[lo + 1]
        for n in range(D):
            acc[n] = c0 * r0[n] + c1 * r1[n]
        for k in range(lo + 2, hi):
            ck = coefs[k]
            for n in range(D):
                v = 0.0
                if n > 0:
                    v += b[n - 1] * r1[n - 1]
                if n < D - 1:
                    v -= b[n] * r1[n + 1]
                r2[n] = 2.0 * v * inv + r0[n]
                acc[n] += ck * r2[n]
            tmp = r0
            r0 = r1
            r1 = r2
            r2 = tmp
        for n in range(D):
            psi[n] = acc[n]
            out[j, n] = acc[n]
    return out
