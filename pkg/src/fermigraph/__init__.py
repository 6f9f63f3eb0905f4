"""Entanglement, Krylov complexity and OTOCs of fermions on regular graphs."""

from .graphs import (DisorderField, Graph, build_d2_graph, connected_components,
                     disorder_field, enumerate_d2_partitions, enumerate_regular_graphs,
                     isomorphism_certificate, permute_graph, sample_regular_graph,
                     sample_graphs, sample_unique_graphs)
from .krylov import (LanczosResult, KrylovSeries, complexity_series, evolve_phi,
                     jacobi_from_measure, krylov_series, lanczos, plateau_average, time_grid)
from .theory import (count_partitions, scaling_fit, theory_d_free, theory_d_int_upper,
                     theory_loop_avg, theory_table)

__version__ = "0.1.0"
