import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermigraph.fockspace import (FockOperator, build_fock_basis, build_many_body_hamiltonian,
                                  identity_operator)
from fermigraph.freeops import hopping_matrix
from fermigraph.graphs import build_d2_graph, sample_regular_graph
from fermigraph.otoc import free_otoc_series, lyapunov_fit, otoc_series, site_parity_operator


def _setup(N, seed, interacting=True, k=None):
    g = sample_regular_graph(N, 3, seed=seed)
    basis = build_fock_basis(N, k)
    H = build_many_body_hamiltonian(g, 1.0, interacting, None, basis)
    return g, basis, H


def test_time_zero():
    _, basis, H = _setup(6, 0)
    O, Q = site_parity_operator(0, basis), site_parity_operator(3, basis)
    s = otoc_series(H, O, Q, [0.0])
    assert s.f[0] == pytest.approx(1.0)
    assert s.c[0] == pytest.approx(0.0, abs=1e-12)


def test_rejects_non_involution():
    _, basis, H = _setup(4, 0)
    O = site_parity_operator(0, basis)
    with pytest.raises(ValueError):
        otoc_series(H, O * 2.0, O, [0.0])
    with pytest.raises(ValueError):
        otoc_series(H, O, O, [0.0], method="magic")


@pytest.mark.parametrize("interacting", [False, True])
def test_disjoint_loops(interacting):
    g = build_d2_graph((3, 5))
    basis = build_fock_basis(8)
    H = build_many_body_hamiltonian(g, 1.0, interacting, None, basis)
    t = np.linspace(0, 30, 31)
    s = otoc_series(H, site_parity_operator(0, basis), site_parity_operator(4, basis), t)
    assert np.max(np.abs(s.c)) < 1e-10
    f = free_otoc_series(hopping_matrix(g), 0, 4, t)
    assert np.max(np.abs(f.c)) < 1e-10


@pytest.mark.parametrize("trace,k", [("full", None), ("half", 3)])
@pytest.mark.parametrize("seed", [1, 2])
def test_free_determinant_matches_brute_force(trace, k, seed):
    g, basis, H = _setup(6, seed, interacting=False, k=k)
    t = np.linspace(0, 8, 9)
    ref = otoc_series(H, site_parity_operator(0, basis), site_parity_operator(3, basis), t,
                      trace=trace)
    fast = free_otoc_series(hopping_matrix(g), 0, 3, t, trace=trace)
    assert np.allclose(ref.f, fast.f, atol=1e-10)


@settings(max_examples=10)
@given(st.integers(0, 500))
def test_exact_unitarity_bound(seed):
    _, basis, H = _setup(6, seed)
    s = otoc_series(H, site_parity_operator(0, basis), site_parity_operator(2, basis),
                    np.linspace(0, 20, 15))
    assert np.all(np.abs(s.f) <= 1 + 1e-9)
    assert np.all(s.c >= -1e-9)


@pytest.mark.parametrize("trace", ["full", "half"])
def test_typicality_within_error(trace):
    _, basis, H = _setup(8, 4)
    O, Q = site_parity_operator(0, basis), site_parity_operator(4, basis)
    t = np.linspace(0, 6, 13)
    ex = otoc_series(H, O, Q, t, trace=trace)
    ty = otoc_series(H, O, Q, t, method="typicality", samples=40, seed=0, trace=trace)
    z = np.abs(ty.f.real - ex.f.real) / np.maximum(ty.estimator_error, 1e-12)
    assert ty.estimator_error[0] < 1e-12 and np.all(z[1:] < 4.0)


def test_half_trace_needs_even_n():
    g = build_d2_graph((3, 4))
    h = hopping_matrix(g)
    with pytest.raises(ValueError):
        free_otoc_series(h, 0, 3, [0.0], trace="half")


def test_identity_is_trivial_involution():
    _, basis, H = _setup(4, 1)
    eye = identity_operator(basis)
    s = otoc_series(H, eye, site_parity_operator(1, basis), [0.0, 3.0])
    assert np.allclose(s.f, 1.0)


def test_lyapunov_synthetic():
    t = np.linspace(0, 10, 101)
    fit = lyapunov_fit(1e-3 * np.exp(0.5 * t), t, window=(1.0, 6.0))
    assert fit.ok and fit.rate == pytest.approx(0.5, abs=1e-6)
    fit = lyapunov_fit(1e-3 * np.exp(0.5 * t), t)
    assert fit.ok and fit.rate == pytest.approx(0.5, abs=1e-6)
    fit = lyapunov_fit(np.full(t.size, 0.7), t)
    assert not fit.ok and fit.rate == 0.0


def test_lyapunov_saturating_curve():
    t = np.linspace(0, 20, 201)
    c = 1.0 / (1.0 + 1e4 * np.exp(-0.8 * t))
    fit = lyapunov_fit(c, t)
    assert fit.ok and fit.rate == pytest.approx(0.8, rel=0.05)
    assert fit.window[1] <= t[np.argmax(c >= 0.5)]
