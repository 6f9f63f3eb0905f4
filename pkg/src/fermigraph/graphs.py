"""Regular graphs of degree 2 and 3.

Construction from partitions, configuration-model sampling, exhaustive
enumeration at small N, isomorphism certificates and edge-list I/O.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Partition = tuple  # sorted tuple of ints, each >= 3

MAX_SAMPLE_ATTEMPTS = 10_000


@dataclass(frozen=True)
class Graph:
    """Simple undirected d-regular graph on vertices 0..n-1.

    Edges are stored as sorted ``(i, j)`` pairs with ``i < j``.
    """

    n: int
    degree: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = sorted({(min(i, j), max(i, j)) for i, j in self.edges})
        if len(norm) != len(self.edges):
            raise ValueError("duplicate edges")
        deg = np.zeros(self.n, dtype=int)
        for i, j in norm:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range")
            deg[i] += 1
            deg[j] += 1
        if np.any(deg != self.degree):
            raise ValueError(f"graph is not {self.degree}-regular")
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in norm))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def neighbors(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return [sorted(x) for x in nb]


@dataclass(frozen=True)
class DisorderField:
    """On-site energies ``w`` drawn uniformly from [-W, W]."""

    w: np.ndarray
    strength: float
    seed: int | None = None

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("disorder strength must be non-negative")
        if np.any(np.abs(self.w) > self.strength):
            raise ValueError("disorder value exceeds strength")


def disorder_field(n: int, strength: float, seed=None) -> DisorderField:
    rng = np.random.default_rng(seed)
    w = rng.uniform(-strength, strength, size=n) if strength > 0 else np.zeros(n)
    return DisorderField(w=w, strength=float(strength), seed=seed)


# ---------------------------------------------------------------- partitions

def _partitions_with_parts(n: int, m: int, smallest: int):
    """Yield nondecreasing m-tuples of ints >= smallest summing to n."""
    if m == 1:
        if n >= smallest:
            yield (n,)
        return
    for k in range(smallest, n // m + 1):
        for rest in _partitions_with_parts(n - k, m - 1, k):
            yield (k,) + rest


def enumerate_d2_partitions(N: int) -> list[Partition]:
    """All partitions of N into parts >= 3.

    Ordered by number of parts, then lexicographically, so 9 gives
    ``[(9,), (3, 6), (4, 5), (3, 3, 3)]``.
    """
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    out = []
    for m in range(1, N // 3 + 1):
        out.extend(_partitions_with_parts(N, m, 3))
    return out


def build_d2_graph(parts: Sequence[int]) -> Graph:
    """Disjoint union of cycles, labelled consecutively per cycle."""
    parts = tuple(int(p) for p in parts)
    if not parts or min(parts) < 3:
        raise ValueError(f"every cycle needs length >= 3, got {parts}")
    edges = []
    start = 0
    for L in parts:
        for k in range(L):
            edges.append((start + k, start + (k + 1) % L))
        start += L
    return Graph(n=start, degree=2, edges=tuple(edges))


# ---------------------------------------------------------------- sampling

def sample_regular_graph(N: int, d: int, seed=None) -> Graph:
    """Random simple d-regular graph from the configuration model.

    Stubs are paired uniformly at random and the whole pairing is
    rejected if it produces a self-loop or a repeated edge.
    """
    if (N * d) % 2:
        raise ValueError(f"N*d must be even (N={N}, d={d})")
    if N <= d:
        raise ValueError(f"no simple {d}-regular graph on {N} vertices")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(N), d)
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        perm = rng.permutation(stubs).reshape(-1, 2)
        a = np.minimum(perm[:, 0], perm[:, 1])
        b = np.maximum(perm[:, 0], perm[:, 1])
        if np.any(a == b):
            continue
        keys = a * N + b
        if len(np.unique(keys)) != len(keys):
            continue
        return Graph(n=N, degree=d, edges=tuple(zip(a.tolist(), b.tolist())))
    raise RuntimeError(f"configuration model failed after {MAX_SAMPLE_ATTEMPTS} attempts")


def task_seed(master: int, *key: int) -> np.random.SeedSequence:
    """Counter-based child seed, independent of scheduling."""
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, *[int(k) for k in key]])


def sample_graphs(N: int, d: int, count: int, seed: int = 0) -> list[Graph]:
    """``count`` independent labelled samples; isomorphic repeats are kept."""
    return [sample_regular_graph(N, d, task_seed(seed, N, d, k)) for k in range(count)]


def sample_unique_graphs(N: int, d: int, count: int, seed: int = 0,
                         max_collisions: int | None = None) -> list[Graph]:
    """Sample up to ``count`` pairwise non-isomorphic d-regular graphs.

    Duplicates (equal certificates) are discarded and resampled. If the
    space looks exhausted the shorter list is returned with a warning.
    """
    if max_collisions is None:
        max_collisions = 50 * count + 200
    graphs, seen = [], set()
    attempt, misses = 0, 0
    while len(graphs) < count and misses < max_collisions:
        g = sample_regular_graph(N, d, task_seed(seed, N, d, attempt))
        attempt += 1
        key = isomorphism_certificate(g)
        if key in seen:
            misses += 1
            continue
        seen.add(key)
        graphs.append(g)
    if len(graphs) < count:
        warnings.warn(f"only {len(graphs)} distinct {d}-regular graphs found for N={N}")
    return graphs


# ---------------------------------------------------------------- structure

def connected_components(g: Graph) -> list[frozenset]:
    """Vertex sets of the connected components, ordered by smallest vertex."""
    nb = g.neighbors()
    seen = np.zeros(g.n, dtype=bool)
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in nb[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(frozenset(comp))
    return comps


def permute_graph(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel vertex i as perm[i]."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(g.n)):
        raise ValueError("perm is not a bijection on the vertices")
    return Graph(n=g.n, degree=g.degree,
                 edges=tuple((perm[i], perm[j]) for i, j in g.edges))


def _cycle_lengths(g: Graph) -> tuple:
    return tuple(sorted(len(c) for c in connected_components(g)))


def _refined_signatures(a: np.ndarray, rounds: int = 3) -> list:
    # closed-walk counts seed a colour refinement
    n = a.shape[0]
    ai = a.astype(np.int64)
    p = ai.copy()
    walks = []
    for _ in range(2, 7):
        p = p @ ai
        walks.append(np.diag(p).copy())
    colors = [tuple(int(w[v]) for w in walks) for v in range(n)]
    nb = [np.nonzero(a[v])[0] for v in range(n)]
    for _ in range(rounds):
        table = {c: k for k, c in enumerate(sorted(set(colors)))}
        ids = [table[c] for c in colors]
        new = [(ids[v], tuple(sorted(ids[u] for u in nb[v]))) for v in range(n)]
        # relabel by rank so signatures stay small and order-free
        rank = {c: k for k, c in enumerate(sorted(set(new)))}
        colors = [(rank[c],) for c in new]
        if len(rank) == len(table):
            break
    # final multiset, expressed through the original walk signatures
    final = sorted(zip(colors, (tuple(int(w[v]) for w in walks) for v in range(n))))
    return [c for c in final]


def isomorphism_certificate(g: Graph, method: str | None = None) -> tuple:
    """Relabelling-invariant key.

    Degree-2 graphs use the sorted cycle-length multiset, which is exact.
    Other graphs use the rounded adjacency spectrum plus sorted
    colour-refinement signatures. ``method`` forces "cycles" or "spectral".
    """
    if method is None:
        method = "cycles" if g.degree == 2 else "spectral"
    if method == "cycles":
        if g.degree != 2:
            raise ValueError("cycle certificate needs a degree-2 graph")
        return ("cycles", g.n, _cycle_lengths(g))
    if method != "spectral":
        raise ValueError(f"unknown certificate method {method!r}")
    a = g.adjacency()
    ev = np.linalg.eigvalsh(a)
    spec = tuple(float(x) + 0.0 for x in np.round(ev, 8))
    return ("spectral", g.n, g.degree, spec, tuple(_refined_signatures(a)))


# ---------------------------------------------------------------- enumeration

def _enumerate_cubic(N: int) -> list[Graph]:
    """All non-isomorphic 3-regular graphs on N vertices by backtracking.

    Only practical for N <= 10. Vertex 0 is wired to 1, 2, 3 without loss
    of generality. Candidates are bucketed by certificate and buckets are
    split with an exact isomorphism test.
    """
    import networkx as nx

    if N % 2 or N < 4:
        return []
    found: dict = {}

    def rec(deg, edges):
        v = next((u for u in range(N) if deg[u] < 3), None)
        if v is None:
            g = Graph(n=N, degree=3, edges=tuple(edges))
            key = isomorphism_certificate(g)
            bucket = found.setdefault(key, [])
            gx = nx.Graph(list(g.edges))
            if not any(nx.is_isomorphic(gx, h) for _, h in bucket):
                bucket.append((g, gx))
            return
        existing = {(a, b) for a, b in edges}
        # smallest free partner first keeps the search ordered
        for u in range(v + 1, N):
            if deg[u] < 3 and (v, u) not in existing:
                deg[v] += 1
                deg[u] += 1
                edges.append((v, u))
                rec(deg, edges)
                edges.pop()
                deg[v] -= 1
                deg[u] -= 1
                if deg[u] == 0:
                    # untouched vertices are interchangeable
                    break

    deg = [0] * N
    edges = [(0, 1), (0, 2), (0, 3)]
    deg[0], deg[1], deg[2], deg[3] = 3, 1, 1, 1
    rec(deg, edges)
    out = [g for key in sorted(found, key=repr) for g, _ in found[key]]
    return out


def enumerate_regular_graphs(N: int, d: int) -> list[Graph]:
    """Every non-isomorphic d-regular graph on N vertices (small N)."""
    if d == 2:
        return [build_d2_graph(p) for p in enumerate_d2_partitions(N)]
    if d == 3:
        if N > 12:
            raise ValueError("exhaustive cubic enumeration is limited to N <= 12")
        return _enumerate_cubic(N)
    raise ValueError(f"unsupported degree {d}")


# ---------------------------------------------------------------- I/O

def format_edgelist(g: Graph) -> str:
    lines = [f"{g.n} {g.degree}"] + [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def parse_edgelist(text: str) -> Graph:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError("edge list needs a header line 'N d'")
    n, d = int(rows[0][0]), int(rows[0][1])
    return Graph(n=n, degree=d, edges=tuple((int(a), int(b)) for a, b in rows[1:]))


def write_ensemble(path, graphs: Iterable[Graph]) -> None:
    """Write graphs as edge-list blocks separated by blank lines."""
    Path(path).write_text("\n".join(format_edgelist(g) for g in graphs))


def read_ensemble(path) -> list[Graph]:
    text = Path(path).read_text()
    blocks = [b for b in text.split("\n\n") if b.strip()]
    return [parse_edgelist(b) for b in blocks]
