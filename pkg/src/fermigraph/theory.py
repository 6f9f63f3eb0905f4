"""Partition averages behind the analytic Krylov-dimension estimates.

A degree-2 graph on N sites is a set of disjoint loops, i.e. a partition
of N into parts >= 3. The operator n_i sits in a loop of length L with
probability L/N. Averaging f(L) over partitions, uniformly, gives

* f(L) = L^2: free-fermion Krylov dimension,
* f(L) = 4^L: interacting upper bound,
* f(L) = L: mean loop length (its power of 4 is the interacting lower bound).

All sums are exact. Over all partitions of N, the part L occurs
sum_{j>=1} p3(N - jL) times, with p3 the number of partitions into parts
>= 3, so no explicit enumeration is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


@lru_cache(maxsize=None)
def count_partitions(N: int, M: int, I: int = 3) -> int:
    """Number of partitions of N into exactly M parts, each >= I."""
    if M < 1 or N < 0:
        return 0
    if M == 1:
        return 1 if N >= I else 0
    return sum(count_partitions(N - k, M - 1, k) for k in range(I, N // M + 1))


@lru_cache(maxsize=None)
def _p3_table(nmax: int) -> tuple:
    p = [0] * (nmax + 1)
    p[0] = 1
    for part in range(3, nmax + 1):
        for m in range(part, nmax + 1):
            p[m] += p[m - part]
    return tuple(p)


def total_partitions(N: int) -> int:
    """Partitions of N into parts >= 3."""
    return _p3_table(max(N, 3))[N]


def _partition_average(N: int, f: Callable[[int], int]) -> Fraction:
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    p = _p3_table(N)
    total = 0
    for L in range(3, N + 1):
        mult = sum(p[N - j * L] for j in range(1, N // L + 1))
        total += f(L) * L * mult
    return Fraction(total, N * p[N])


def theory_d_free(N: int) -> float:
    """Partition average of sum_L L^2 (L/N)."""
    return float(theory_d_free_exact(N))


def theory_d_free_exact(N: int) -> Fraction:
    return _partition_average(N, lambda L: L * L)


def theory_d_int_upper(N: int) -> float:
    """log4 of the partition average of sum_L 4^L (L/N)."""
    v = _partition_average(N, lambda L: 4 ** L)
    return (math.log(v.numerator) - math.log(v.denominator)) / math.log(4.0)


def theory_loop_avg(N: int) -> float:
    """Partition average of sum_L L (L/N); also log4 of the lower bound."""
    return float(theory_loop_avg_exact(N))


def theory_loop_avg_exact(N: int) -> Fraction:
    return _partition_average(N, lambda L: L)


def theory_d3_free(N: int) -> int:
    """Cubic graphs are treated as one loop of length N."""
    return N * N


def theory_d3_loop(N: int) -> int:
    return N


@dataclass
class FitResult:
    exponent: float
    prefactor: float
    stderr: float
    model: str = "loglog"


def scaling_fit(xs: Sequence[float], ys: Sequence[float], model: str = "loglog") -> FitResult:
    """Least-squares power-law fit.

    ``loglog`` fits ln y = a ln x + c. ``log4_vs_logN`` takes dimensions D
    (Python ints are fine, however large) and fits ln(log4 D) against ln N,
    the form D ~ 4^(N^a).
    """
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("need at least three (x, y) pairs")
    if model == "log4_vs_logN":
        ys = [math.log(y) / math.log(4.0) if y > 0 else -1.0 for y in ys]
    elif model != "loglog":
        raise ValueError(f"unknown model {model!r}")
    if any(x <= 0 for x in xs) or any(y <= 0 for y in ys):
        raise ValueError("scaling fit needs positive data")
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    n = x.size
    resid = y - A @ coef
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid ** 2) / (n - 2) / sxx)) if n > 2 and sxx > 0 else 0.0
    return FitResult(exponent=float(coef[0]), prefactor=float(np.exp(coef[1])),
                     stderr=stderr, model=model)


@dataclass
class TheoryRow:
    n: int
    count: int
    d_free: float
    log4_d_int_upper: float
    loop_avg: float

    @property
    def log4_d_int_lower(self) -> float:
        return self.loop_avg


def theory_table(nmax: int, nmin: int = 3) -> list[TheoryRow]:
    rows = []
    for N in range(max(nmin, 3), nmax + 1):
        rows.append(TheoryRow(n=N, count=total_partitions(N), d_free=theory_d_free(N),
                              log4_d_int_upper=theory_d_int_upper(N),
                              loop_avg=theory_loop_avg(N)))
    return rows
