import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermigraph.entanglement import (entropy_series, evolve_correlation, free_entropy,
                                     half_filled_product_state, initial_correlation,
                                     late_time_average, many_body_entropy)
from fermigraph.fockspace import build_fock_basis, build_many_body_hamiltonian, evolve_state
from fermigraph.freeops import hopping_matrix
from fermigraph.graphs import Graph, build_d2_graph, sample_regular_graph

LN2 = np.log(2.0)


def test_initial_correlation():
    assert np.allclose(initial_correlation(4), np.diag([1, 1, 0, 0]))
    c = initial_correlation(10)
    assert np.trace(c).real == 5
    assert np.allclose(np.sort(np.linalg.eigvalsh(c)), [0] * 5 + [1] * 5)
    with pytest.raises(ValueError):
        initial_correlation(5)


@given(st.integers(0, 1000), st.floats(0, 100))
@settings(max_examples=15)
def test_evolution_preserves_trace_and_spectrum(seed, t):
    h = hopping_matrix(sample_regular_graph(10, 3, seed=seed))
    c0 = initial_correlation(10)
    c = evolve_correlation(h, c0, t)
    assert abs(np.trace(c) - 5) < 1e-10
    assert np.allclose(np.sort(np.linalg.eigvalsh(c)), [0] * 5 + [1] * 5, atol=1e-10)
    assert np.allclose(evolve_correlation(h, c0, 0.0), c0)


def test_free_entropy_examples():
    assert free_entropy(initial_correlation(6), 3) == pytest.approx(0.0)
    assert free_entropy(np.diag([0.5, 0.0]).astype(complex), 1) == pytest.approx(LN2)
    with pytest.raises(FloatingPointError):
        free_entropy(np.diag([1.5, 0.0]), 1)
    with pytest.raises(ValueError):
        free_entropy(np.eye(2), 3)


def test_single_edge_quarter_period():
    J = 1.3
    g = Graph(n=2, degree=1, edges=((0, 1),))
    h = hopping_matrix(g, J)
    c = evolve_correlation(h, initial_correlation(2), np.pi / (4 * J))
    assert c[0, 0].real == pytest.approx(0.5)
    assert free_entropy(c, 1) == pytest.approx(LN2)


def test_entropy_symmetric_under_complement():
    h = hopping_matrix(sample_regular_graph(12, 3, seed=3))
    c = evolve_correlation(h, initial_correlation(12), 2.3)
    for l in range(1, 12):
        # pure Gaussian state: S(A) = S(complement); complement of the first l sites
        z = np.linalg.eigvalsh(c[l:, l:])
        z = z[(z > 1e-14) & (z < 1 - 1e-14)]
        s_rest = -np.sum(z * np.log(z) + (1 - z) * np.log1p(-z))
        assert free_entropy(c, l) == pytest.approx(s_rest, abs=1e-9)


def test_entropy_series_matches_full_correlation():
    h = hopping_matrix(build_d2_graph((5, 5)))
    t = np.array([0.0, 0.7, 3.0, 40.0])
    s = entropy_series(h, t, 5)
    ref = [free_entropy(evolve_correlation(h, initial_correlation(10), x), 5) for x in t]
    assert np.allclose(s, ref, atol=1e-12)
    assert s[0] == pytest.approx(0.0)


def test_many_body_examples():
    basis = build_fock_basis(4, 2)
    psi = half_filled_product_state(basis)
    assert many_body_entropy(psi, 2, basis) == pytest.approx(0.0)
    # (|0011> + |1100>)/sqrt2 has two Schmidt terms across the cut
    psi = np.zeros(basis.dim, complex)
    psi[basis.index(0b0011)] = psi[basis.index(0b1100)] = 1 / np.sqrt(2)
    assert many_body_entropy(psi, 2, basis) == pytest.approx(LN2)
    assert many_body_entropy(psi, 0, basis) == 0.0


@pytest.mark.parametrize("N,seed", [(4, 0), (6, 1), (8, 2), (8, 5)])
def test_free_matches_many_body(N, seed):
    g = sample_regular_graph(N, 3, seed=seed)
    h = hopping_matrix(g)
    basis = build_fock_basis(N, N // 2)
    H = build_many_body_hamiltonian(g, 1.0, False, None, basis)
    psi0 = half_filled_product_state(basis)
    t = np.array([0.3, 1.1, 5.0, 17.0])
    psi = evolve_state(H, psi0, t)
    for l in range(1, N):
        sf = entropy_series(h, t, l)
        sm = [many_body_entropy(p, l, basis) for p in psi]
        assert np.allclose(sf, sm, atol=1e-8)


def test_late_time_average():
    assert late_time_average(np.arange(10.0)) == pytest.approx(7.0)
    assert late_time_average(np.arange(8.0), fraction=0.25) == pytest.approx(6.5)
