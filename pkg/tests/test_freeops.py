import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermigraph.fockspace import build_fock_basis, fock_inner, fock_liouville_apply, quadratic_to_fock
from fermigraph.freeops import (hopping_matrix, liouville_apply_quadratic, number_operator,
                                quadratic_inner, quadratic_measure)
from fermigraph.graphs import build_d2_graph, disorder_field, sample_regular_graph


def test_triangle_spectrum():
    h = hopping_matrix(build_d2_graph((3,)))
    assert np.allclose(np.linalg.eigvalsh(h), [-1, -1, 2])


def test_hopping_properties():
    g = sample_regular_graph(12, 3, seed=2)
    h = hopping_matrix(g, J=0.7)
    assert np.allclose(h, h.conj().T)
    assert np.all(np.diag(h) == 0)
    w = disorder_field(12, 1.5, seed=0)
    hd = hopping_matrix(g, 0.7, w)
    assert np.allclose(np.diag(hd), w.w)
    assert np.all((hd != 0) == ((0.7 * g.adjacency() + np.diag(w.w)) != 0))


def test_commutator_examples():
    h = hopping_matrix(sample_regular_graph(8, 3, seed=1))
    assert np.allclose(liouville_apply_quadratic(h, h), 0)
    assert np.allclose(liouville_apply_quadratic(np.zeros((4, 4)), number_operator(4, 2)), 0)
    J = 0.9
    out = liouville_apply_quadratic(np.array([[0, J], [J, 0]]), np.diag([1.0, 0.0]))
    assert np.allclose(out, [[0, -J], [J, 0]])
    with pytest.raises(ValueError):
        liouville_apply_quadratic(np.zeros((3, 3)), np.zeros((4, 4)))


def test_inner_examples():
    n1, n2 = number_operator(4, 0), number_operator(4, 1)
    assert quadratic_inner(n1, n1) == pytest.approx(0.5)
    assert quadratic_inner(n1, n2) == pytest.approx(0.25)
    hop = np.zeros((4, 4), complex)
    hop[0, 1] = 1
    assert quadratic_inner(hop, hop) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        quadratic_inner(n1, np.zeros((3, 3)))


@given(st.integers(1, 4), st.integers(0, 10_000))
def test_inner_matches_fock_trace(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    basis = build_fock_basis(n)
    ref = fock_inner(quadratic_to_fock(a, basis), quadratic_to_fock(b, basis))
    assert abs(quadratic_inner(a, b) - ref) < 1e-10


@given(st.integers(0, 10_000))
def test_liouvillian_symmetries(seed):
    rng = np.random.default_rng(seed)
    n = 5
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = h + h.conj().T
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    lhs = quadratic_inner(liouville_apply_quadratic(h, a), b)
    rhs = quadratic_inner(a, liouville_apply_quadratic(h, b))
    assert abs(lhs - rhs) < 1e-10
    m = a + a.conj().T
    c = liouville_apply_quadratic(h, m)
    assert np.allclose(c.conj().T, -c)


def test_commutator_matches_fock():
    g = sample_regular_graph(6, 3, seed=3)
    h = hopping_matrix(g)
    basis = build_fock_basis(6)
    H = quadratic_to_fock(h, basis)
    m = number_operator(6, 2)
    lhs = quadratic_to_fock(liouville_apply_quadratic(h, m), basis).dense()
    rhs = fock_liouville_apply(H, quadratic_to_fock(m, basis)).dense()
    assert np.allclose(lhs, rhs)


def test_measure_total_weight_and_ring_dimensions():
    h = hopping_matrix(build_d2_graph((10,)))
    x, w = quadratic_measure(h, 0)
    assert w.sum() == pytest.approx(0.5)
    # distinct eigenvalue differences reachable from n_0 on rings
    dims = [len(quadratic_measure(hopping_matrix(build_d2_graph((L,))), 0)[0])
            for L in range(4, 13)]
    assert dims == [5, 7, 9, 13, 13, 21, 19, 31, 21]
