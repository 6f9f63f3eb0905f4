"""Experiment orchestration over graph ensembles.

Every (graph, N) task gets its own seed derived from the master seed by a
counter-based split. Results are reduced in a fixed order, so records
depend only on the configuration and never on the worker count.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from . import entanglement as ent
from .fockspace import (build_fock_basis, build_many_body_hamiltonian,
                        max_krylov_dim, number_operator_measure, sector_eigensystems)
from .freeops import (hopping_matrix, liouville_apply_quadratic, number_operator,
                      quadratic_inner, quadratic_measure)
from .graphs import (Graph, build_d2_graph, connected_components, disorder_field,
                     enumerate_d2_partitions, enumerate_regular_graphs, isomorphism_certificate,
                     permute_graph, sample_graphs, sample_unique_graphs, task_seed)
from .krylov import (jacobi_from_measure, krylov_series, lanczos, plateau_average, time_grid)
from .otoc import free_otoc_series, lyapunov_fit, otoc_series, site_parity_operator
from .theory import scaling_fit

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
KINDS = ("free-entanglement", "free-krylov", "int-entanglement", "int-krylov",
         "otoc", "dimension", "theory")

_GRID_DEFAULTS = {
    "otoc": dict(tmax=20.0, tpoints=201, tscale="lin"),
}


@dataclass
class ExperimentConfig:
    """Resolved settings of one experiment."""

    kind: str
    sizes: list = field(default_factory=list)
    degree: int = 3
    samples: Union[int, str] = 10
    j: float = 1.0
    disorder_w: float = 0.0
    tmax: Optional[float] = None
    tpoints: Optional[int] = None
    tscale: Optional[str] = None
    tmin: float = 0.1
    seed: int = 0
    tol: float = 1e-8
    interacting: bool = False
    workers: Optional[int] = 1
    raw: bool = False
    backend: str = "measure"
    max_dim: Optional[int] = None
    otoc_trace: str = "half"
    otoc_method: str = "auto"
    otoc_samples: int = 20
    lyapunov_window: Optional[tuple] = None
    dedup: bool = True
    single_loop: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.degree not in (2, 3):
            raise ValueError("degree must be 2 or 3")
        if self.samples != "all" and int(self.samples) < 1:
            raise ValueError("samples must be >= 1 or 'all'")
        if self.disorder_w < 0:
            raise ValueError("disorder strength must be non-negative")
        if self.single_loop and self.degree != 2:
            raise ValueError("single_loop needs degree 2")
        if self.backend not in ("measure", "lanczos"):
            raise ValueError(f"unknown backend {self.backend!r}")
        d = _GRID_DEFAULTS.get(self.kind, dict(tmax=1e3, tpoints=400, tscale="log"))
        self.tmax = d["tmax"] if self.tmax is None else float(self.tmax)
        self.tpoints = d["tpoints"] if self.tpoints is None else int(self.tpoints)
        self.tscale = d["tscale"] if self.tscale is None else self.tscale
        self.sizes = [int(n) for n in self.sizes]

    def times(self) -> np.ndarray:
        return time_grid(self.tmax, self.tpoints, self.tscale, self.tmin)


# ------------------------------------------------------------------ reduction

def reduce_mean(groups: dict) -> dict:
    """Mean and standard error per key, independent of value order.

    ``math.fsum`` is correctly rounded, so any permutation of a group gives
    bit-identical results.
    """
    out = {}
    for key in sorted(groups, key=repr):
        vals = [float(v) for v in groups[key]]
        if not vals:
            raise ValueError(f"empty group {key!r}")
        n = len(vals)
        mean = math.fsum(vals) / n
        if n > 1:
            var = math.fsum((v - mean) ** 2 for v in sorted(vals)) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = 0.0
        out[key] = (mean, se)
    return out


# ------------------------------------------------------------------ graph sets

def graph_set(N: int, cfg: ExperimentConfig) -> list[Graph]:
    d = cfg.degree
    if cfg.single_loop:
        graphs = [build_d2_graph((N,))]
    elif cfg.samples == "all":
        graphs = enumerate_regular_graphs(N, d)
    elif cfg.dedup:
        graphs = sample_unique_graphs(N, d, int(cfg.samples), seed=cfg.seed)
    else:
        graphs = sample_graphs(N, d, int(cfg.samples), seed=cfg.seed)
    if cfg.kind.endswith("entanglement") and cfg.samples == "all":
        # enumerated graphs have structured labels; the half-system cut needs random ones
        graphs = [permute_graph(g, np.random.default_rng(task_seed(cfg.seed, N, k, 7))
                                .permutation(N)) for k, g in enumerate(graphs)]
    return graphs


def _disorder(cfg, N, k):
    if cfg.disorder_w <= 0:
        return None
    return disorder_field(N, cfg.disorder_w, task_seed(cfg.seed, N, k, 1))


# ------------------------------------------------------------------ tasks

@lru_cache(maxsize=256)
def _ring_krylov(L: int, J: float, tol: float, grid: tuple):
    times = time_grid(*grid)
    h = hopping_matrix(build_d2_graph((L,)), J)
    res = jacobi_from_measure(*quadratic_measure(h, 0), tol=tol)
    ser = krylov_series(res.b, times)
    return res.dim, ser.c, ser.norm_error


def _free_operator_run(h, i, cfg, times):
    N = h.shape[0]
    if cfg.backend == "lanczos":
        cap = N * N + 1 if cfg.max_dim is None else min(N * N + 1, cfg.max_dim)
        res = lanczos(lambda m: liouville_apply_quadratic(h, m), quadratic_inner,
                      number_operator(N, i), tol=cfg.tol, max_dim=cap, keep_basis=False)
    else:
        res = jacobi_from_measure(*quadratic_measure(h, i), tol=cfg.tol)
    return res


def _krylov_ops(g: Graph, cfg: ExperimentConfig, k: int, dims_only: bool = False):
    """Per-operator (dim, c-series, reliable, norm_error) for every n_i."""
    N = g.n
    times = cfg.times()
    grid = (cfg.tmax, cfg.tpoints, cfg.tscale, cfg.tmin)
    w = _disorder(cfg, N, k)
    out = [None] * N
    if cfg.interacting:
        es = sector_eigensystems(g, cfg.j, True, w)
        for i in range(N):
            res = jacobi_from_measure(*number_operator_measure(es, i), tol=cfg.tol)
            if dims_only:
                out[i] = (res.dim, None, True, 0.0)
            else:
                ser = krylov_series(res.b, times)
                out[i] = (res.dim, ser.c, True, ser.norm_error)
        return out
    h = hopping_matrix(g, cfg.j, w)
    if g.degree == 2 and w is None and cfg.backend == "measure":
        # every site of a loop is equivalent and loops do not talk to each other
        for comp in connected_components(g):
            L = len(comp)
            if dims_only:
                dim = jacobi_from_measure(*quadratic_measure(
                    hopping_matrix(build_d2_graph((L,)), cfg.j), 0), tol=cfg.tol).dim
                item = (dim, None, True, 0.0)
            else:
                dim, c, err = _ring_krylov(L, cfg.j, cfg.tol, grid)
                item = (dim, c, True, err)
            for i in comp:
                out[i] = item
        return out
    for i in range(N):
        res = _free_operator_run(h, i, cfg, times)
        if dims_only:
            out[i] = (res.dim, None, res.reliable, 0.0)
        else:
            ser = krylov_series(res.b, times)
            out[i] = (res.dim, ser.c, res.reliable, ser.norm_error)
    return out


def _task(args):
    kind, g, cfg, k = args
    N = g.n
    times = cfg.times()
    if kind in ("free-krylov", "int-krylov", "dimension"):
        ops = _krylov_ops(g, cfg, k, dims_only=(kind == "dimension"))
        good = [o for o in ops if o[2]]
        dims = [o[0] for o in good]
        if kind == "dimension":
            return dict(values=[float(d) for d in dims], dims=dims, failures=N - len(good))
        memo = {}  # loop sites share one series object
        plats = [memo[id(o[1])] if id(o[1]) in memo
                 else memo.setdefault(id(o[1]), plateau_average(o[1], times)) for o in good]
        series = np.mean([o[1] for o in good], axis=0) if good else np.zeros(times.size)
        return dict(values=[p.value for p in plats], dims=dims,
                    found=[p.found for p in plats], failures=N - len(good),
                    series=series, norm_error=max((o[3] for o in good), default=0.0))
    if kind == "free-entanglement":
        h = hopping_matrix(g, cfg.j, _disorder(cfg, N, k))
        s = ent.entropy_series(h, times, N // 2)
        return dict(values=[ent.late_time_average(s)], series=s, failures=0)
    if kind == "int-entanglement":
        basis = build_fock_basis(N, N // 2)
        H = build_many_body_hamiltonian(g, cfg.j, True,
                                        _disorder(cfg, N, k), basis)
        psi = ent.half_filled_product_state(basis)
        states = np.atleast_2d(_evolve(H, psi, times))
        s = np.array([ent.many_body_entropy(p, N // 2, basis) for p in states])
        return dict(values=[ent.late_time_average(s)], series=s, failures=0)
    if kind == "otoc":
        i, q = 0, N // 2 - 1
        w = _disorder(cfg, N, k)
        if cfg.interacting:
            basis = build_fock_basis(N)
            H = build_many_body_hamiltonian(g, cfg.j, True, w, basis)
            method = cfg.otoc_method
            if method == "auto":
                method = "exact" if N <= 10 else "typicality"
            r = otoc_series(H, site_parity_operator(i, basis), site_parity_operator(q, basis),
                            times, method=method, samples=cfg.otoc_samples,
                            seed=task_seed(cfg.seed, N, k, 2), trace=cfg.otoc_trace)
        else:
            r = free_otoc_series(hopping_matrix(g, cfg.j, w), i, q, times, trace=cfg.otoc_trace)
        return dict(f=r.f, c=r.c, failures=0)
    raise ValueError(kind)


def _evolve(H, psi, times):
    from .fockspace import evolve_state

    return evolve_state(H, psi, times)


def _run_tasks(tasks, workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_task, tasks, chunksize=1))


def _cert_digest(g: Graph) -> str:
    return hashlib.sha1(repr(isomorphism_certificate(g)).encode()).hexdigest()[:16]


def _tolist(x):
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    return x


# ------------------------------------------------------------------ driver

def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Run every size in ``cfg.sizes`` and return one record per N."""
    if cfg.kind == "theory":
        raise ValueError("use theory.theory_table for the analytic layer")
    records = []
    times = cfg.times()
    for N in cfg.sizes:
        if cfg.kind in ("free-entanglement", "int-entanglement") and N % 2:
            log.warning("skipping odd N=%d for a half-filling run", N)
            continue
        if cfg.kind == "otoc" and N % 2:
            log.warning("skipping odd N=%d for otoc", N)
            continue
        try:
            graphs = graph_set(N, cfg)
        except (ValueError, RuntimeError) as err:
            log.warning("skipping N=%d: %s", N, err)
            continue
        if not graphs:
            log.warning("no graphs for N=%d", N)
            continue
        results = _run_tasks([(cfg.kind, g, cfg, k) for k, g in enumerate(graphs)], cfg.workers)
        records.append(_make_record(cfg, N, graphs, results, times))
    _attach_fit(cfg, records)
    return records


def _make_record(cfg, N, graphs, results, times) -> dict:
    rec = dict(schema_version=SCHEMA_VERSION, kind=cfg.kind, N=N, degree=cfg.degree,
               config=_config_echo(cfg))
    rec["graphs"] = len(graphs)
    rec["failures"] = int(sum(r["failures"] for r in results))
    rec["provenance"] = dict(seed=cfg.seed, certificates=[_cert_digest(g) for g in graphs])
    if cfg.kind == "otoc":
        f = np.mean([r["f"] for r in results], axis=0)
        c = np.mean([r["c"] for r in results], axis=0)
        plat = plateau_average(f.real, times) if times.size >= 10 else None
        lw = tuple(cfg.lyapunov_window) if cfg.lyapunov_window else None
        fit = lyapunov_fit(c, times, window=lw)
        per_graph = [plateau_average(r["f"].real, times).value for r in results]
        stats = reduce_mean({"f": per_graph})["f"]
        rec.update(mean=plat.value if plat else float(np.mean(f.real)), stderr=stats[1],
                   count=len(graphs), plateau_found=bool(plat.found) if plat else False,
                   min_f=float(np.min(f.real)),
                   lyapunov=dict(rate=fit.rate, stderr=fit.stderr, ok=fit.ok,
                                 window=list(fit.window)),
                   series=dict(times=times.tolist(), f=_tolist(f), c=c.tolist()))
        if cfg.raw:
            rec["raw"] = [dict(f=_tolist(r["f"])) for r in results]
        return rec
    per_graph = [math.fsum(r["values"]) / len(r["values"]) for r in results if r["values"]]
    pooled = [v for r in results for v in r["values"]]
    two = reduce_mean({"g": per_graph})["g"]
    pool = reduce_mean({"p": pooled})["p"]
    rec.update(mean=two[0], stderr=two[1], pooled_stderr=pool[1], count=len(pooled))
    if "dims" in results[0]:
        dims = [d for r in results for d in r["dims"]]
        rec["mean_dim"] = math.fsum(dims) / len(dims)
        rec["max_dim"] = int(max(dims))
    if "found" in results[0]:
        found = [f for r in results for f in r["found"]]
        rec["plateau_found_fraction"] = sum(found) / len(found)
        rec["max_norm_error"] = float(max(r["norm_error"] for r in results))
    if "series" in results[0]:
        rec["series"] = dict(times=times.tolist(),
                             mean=np.mean([r["series"] for r in results], axis=0).tolist())
    if cfg.raw:
        rec["raw"] = [dict(values=r["values"], series=_tolist(r.get("series")))
                      for r in results]
    return rec


def _attach_fit(cfg, records) -> None:
    pts = [(r["N"], r["mean"]) for r in records if r.get("mean", 0) > 0]
    if cfg.kind == "otoc" or len(pts) < 3:
        return
    model = "loglog"
    if cfg.interacting and cfg.kind == "dimension":
        model = "log4_vs_logN"
    try:
        fit = scaling_fit([p[0] for p in pts], [p[1] for p in pts], model=model)
    except ValueError as err:
        log.warning("scaling fit failed: %s", err)
        return
    for r in records:
        r["fit"] = dict(exponent=fit.exponent, prefactor=fit.prefactor,
                        stderr=fit.stderr, model=model)


def _config_echo(cfg) -> dict:
    d = asdict(cfg)
    d["workers"] = None  # never affects results
    if d["lyapunov_window"] is not None:
        d["lyapunov_window"] = list(d["lyapunov_window"])
    return d


def records_to_jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def records_to_csv(records) -> str:
    lines = ["N,mean,stderr,count"]
    for r in records:
        lines.append(f"{r['N']},{r['mean']!r},{r['stderr']!r},{r['count']}")
    return "\n".join(lines) + "\n"
