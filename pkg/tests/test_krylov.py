import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermigraph.fockspace import (build_fock_basis, build_many_body_hamiltonian, fock_inner,
                                  fock_liouville_apply, identity_operator, number_operator_matrix)
from fermigraph.freeops import (hopping_matrix, liouville_apply_quadratic, number_operator,
                                quadratic_inner, quadratic_measure)
from fermigraph.graphs import build_d2_graph, sample_regular_graph
from fermigraph.krylov import (complexity_series, evolve_phi, jacobi_from_measure, krylov_series,
                               lanczos, merge_measure, plateau_average, time_grid)

# 50-digit Gram-Schmidt oracles (mpmath), n_0 under J = 1
TRIANGLE_B = [1.4142135623730950488, 2.6457513110645905905]
RING6_B = [1.4142135623730950488, 2.6457513110645905905, 1.690308509457033155,
           2.6726124191242438468, 1.8330302779823360026, 2.1150256105620407672,
           1.2334346973020880169, 1.2826946301275191564]


def quad_lanczos(h, site, **kw):
    return lanczos(lambda m: liouville_apply_quadratic(h, m), quadratic_inner,
                   number_operator(h.shape[0], site), **kw)


def test_trivial_dimension_one():
    r = quad_lanczos(np.zeros((4, 4)), 0)
    assert r.dim == 1 and r.b.size == 0
    basis = build_fock_basis(4)
    H = build_many_body_hamiltonian(sample_regular_graph(4, 3, seed=0), 1.0, True, None, basis)
    r = lanczos(lambda o: fock_liouville_apply(H, o), fock_inner, identity_operator(basis))
    assert r.dim == 1


def test_zero_operator_rejected():
    with pytest.raises(ValueError):
        lanczos(lambda m: m, quadratic_inner, np.zeros((2, 2)))


@pytest.mark.parametrize("parts,oracle", [((3,), TRIANGLE_B), ((6,), RING6_B)])
def test_oracle_coefficients(parts, oracle):
    h = hopping_matrix(build_d2_graph(parts))
    r = quad_lanczos(h, 0)
    assert r.dim == len(oracle) + 1
    assert np.allclose(r.b, oracle, rtol=1e-12, atol=0)
    m = jacobi_from_measure(*quadratic_measure(h, 0))
    assert m.dim == r.dim
    assert np.allclose(m.b, oracle, rtol=1e-10, atol=0)


def test_fock_backend_agrees():
    g = build_d2_graph((6,))
    basis = build_fock_basis(6)
    H = build_many_body_hamiltonian(g, 1.0, False, None, basis)
    r = lanczos(lambda o: fock_liouville_apply(H, o), fock_inner, number_operator_matrix(0, basis))
    assert r.dim == len(RING6_B) + 1
    assert np.allclose(r.b, RING6_B, rtol=1e-10)


def test_basis_orthonormal_and_tridiagonal():
    h = hopping_matrix(build_d2_graph((7,)))
    r = quad_lanczos(h, 0)
    assert r.reliable and r.max_residual < 1e-10
    D = r.dim
    L = np.array([[quadratic_inner(p, liouville_apply_quadratic(h, q)) for q in r.basis]
                  for p in r.basis])
    tri = np.diag(r.b, 1) + np.diag(r.b, -1)
    assert np.allclose(np.abs(L), tri, atol=1e-9)
    assert L.shape == (D, D)


def test_max_dim_caps_run():
    h = hopping_matrix(build_d2_graph((9,)))
    assert quad_lanczos(h, 0, max_dim=4).dim == 4


def test_interacting_measure_matches_lanczos():
    from fermigraph.fockspace import number_operator_measure, sector_eigensystems

    g = build_d2_graph((4,))
    basis = build_fock_basis(4)
    H = build_many_body_hamiltonian(g, 1.0, True, None, basis)
    r = lanczos(lambda o: fock_liouville_apply(H, o), fock_inner, number_operator_matrix(0, basis))
    m = jacobi_from_measure(*number_operator_measure(sector_eigensystems(g, 1.0, True), 0))
    assert r.dim == m.dim == 11
    assert np.allclose(r.b, m.b, rtol=1e-8)


def test_merge_measure():
    x, w = merge_measure([0.0, 1.0, 1.0 + 1e-12, 2.0, 3.0], [1.0, 0.5, 0.5, 1e-30, 2.0])
    assert np.allclose(x, [0.0, 1.0, 3.0])
    assert np.allclose(w, [1.0, 1.0, 2.0])


def test_two_dim_closed_form():
    b1 = 1.7
    t = np.linspace(0, 5, 23)
    phi = evolve_phi([b1], t)
    assert np.allclose(phi[:, 0], np.cos(b1 * t))
    assert np.allclose(phi[:, 1], 1j * np.sin(b1 * t))
    assert np.allclose(complexity_series(phi), np.sin(b1 * t) ** 2)
    assert np.allclose(evolve_phi([b1], t, method="chebyshev"), phi, atol=1e-12)


def test_evolve_phi_validation():
    with pytest.raises(ValueError):
        evolve_phi([1.0, -1.0], [1.0])
    with pytest.raises(ValueError):
        evolve_phi([1.0], [1.0], method="rk4")
    assert np.allclose(evolve_phi([], [0.0, 2.0]), 1.0)


@settings(max_examples=20)
@given(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=40), st.integers(0, 1000))
def test_unitarity_and_bounds(b, seed):
    t = np.random.default_rng(seed).uniform(0, 50, 12)
    for method in ("eig", "chebyshev"):
        phi = evolve_phi(b, t, method=method)
        assert np.allclose(np.sum(np.abs(phi) ** 2, axis=1), 1, atol=1e-10)
        c = complexity_series(phi)
        assert np.all(c >= -1e-12) and np.all(c <= len(b) + 1e-9)


def test_chebyshev_matches_eig_long_chain():
    rng = np.random.default_rng(4)
    b = rng.uniform(0.5, 2.0, 600)
    t = time_grid(1e3, 50)
    a = krylov_series(b, t, method="eig")
    c = krylov_series(b, t, method="chebyshev")
    assert np.allclose(a.c, c.c, atol=1e-8)
    assert c.norm_error < 1e-10


def test_time_grid():
    t = time_grid(100, 5, "log", tmin=1)
    assert np.allclose(t, [1, np.sqrt(10), 10, 10 ** 1.5, 100])
    assert time_grid(10, 11, "lin")[0] == 0.0
    with pytest.raises(ValueError):
        time_grid(10, 11, "cubic")


def test_plateau_examples():
    t = time_grid(1e3, 200)
    flat = np.full(t.size, 3.0)
    p = plateau_average(flat, t)
    assert p.found and p.value == pytest.approx(3.0) and p.window[0] == pytest.approx(t[0])
    step = np.where(t < 10, t / 10, 1.0)
    p = plateau_average(step, t)
    assert p.found and p.value == pytest.approx(1.0, abs=0.02)
    p = plateau_average(t, t)
    assert not p.found
    assert p.value == pytest.approx(np.mean(t[-50:]))
    with pytest.raises(ValueError):
        plateau_average(np.ones(5), np.ones(5))


def test_plateau_ignores_nonpositive_times():
    t = np.linspace(0, 100, 101)
    y = np.ones_like(t)
    y[0] = 100.0
    assert plateau_average(y, t).value == pytest.approx(1.0)


def test_ring_complexity_saturates():
    h = hopping_matrix(build_d2_graph((12,)))
    m = jacobi_from_measure(*quadratic_measure(h, 0))
    t = time_grid(1e3, 300)
    s = krylov_series(m.b, t)
    p = plateau_average(s.c, t)
    assert p.found
    assert 0 < p.value < m.dim - 1
