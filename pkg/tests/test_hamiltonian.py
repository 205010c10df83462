from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clustertherm import hamiltonian
from clustertherm.clique import CliqueSystem, lambda_deformation
from clustertherm.errors import ConvergenceError, InputError, ResourceError
from clustertherm.hamiltonian import (
    LocalTerm,
    SparseOperator,
    assemble,
    build_K,
    build_P,
    build_Q,
    gamma_energy,
    ground_analysis,
    single_qubit_ground_data,
)
from clustertherm.mbqc import ClusterLayout, build_deformed_cluster, smooth, verify_carving
from clustertherm.spin_model import SpinModel
from clustertherm.state import KET_0, LatticeGraph, cluster_state

from helpers import PX, PZ, compiled, dense_parent_hamiltonian, full_operator

I2 = np.eye(2)


def bare_layout(rows: int, cols: int) -> ClusterLayout:
    lat = LatticeGraph(rows, cols)
    return ClusterLayout(lat, "C" * lat.size, {q: q for q in range(lat.size)}, {})


def oracle_ground(x: float) -> np.ndarray:
    gamma, _ = gamma_energy(x)
    w, v = np.linalg.eigh(-PX.real - gamma * PZ.real)
    return w, v


# --- single-qubit data ----------------------------------------------------------------


def test_gamma_energy_examples():
    assert gamma_energy(0.0) == (-0.0, -1.0)
    g, E = gamma_energy(math.log(2))
    assert g == pytest.approx(-0.75, abs=1e-15) and E == pytest.approx(-1.25, abs=1e-15)


@given(st.floats(-5, 5))
def test_gamma_energy_against_eigensolver(x):
    g, E = gamma_energy(x)
    w, v = np.linalg.eigh(np.array([[-g, -1.0], [-1.0, g]]))
    assert w[0] == pytest.approx(E, abs=1e-12)
    assert E == pytest.approx(-math.sqrt(1 + g * g), abs=1e-12)
    target = np.array([math.exp(-x / 2), math.exp(x / 2)])
    target /= np.linalg.norm(target)
    assert abs(abs(v[:, 0] @ target) - 1) <= 1e-12
    g2, E2 = gamma_energy(-x)
    assert g2 == pytest.approx(-g, abs=1e-15) and E2 == pytest.approx(E, abs=1e-15)


def test_gamma_energy_overflow():
    with pytest.raises(ResourceError):
        gamma_energy(400.0)


def test_single_qubit_ground_data():
    sys, layout = compiled("chain")
    lam = lambda_deformation(sys, 0.8)
    data = single_qubit_ground_data(layout, lam)
    assert [d.qubit for d in data] == layout.output_qubits
    for d in data:
        H = -PX.real - d.gamma * PZ.real
        np.testing.assert_allclose(H @ d.ground_vector(), d.E * d.ground_vector(), atol=1e-12)


# --- stabilizers ---------------------------------------------------------------------


def test_build_K_examples():
    K = build_K(bare_layout(2, 2), 0)
    assert K.support == (0, 1, 2) and K.paulis == "XZZ"
    assert build_K(bare_layout(1, 1), 0).paulis == "X"
    assert len(build_K(bare_layout(3, 3), 4).support) == 5
    with pytest.raises(InputError):
        build_K(bare_layout(2, 2), 4)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 3)])
def test_cluster_stabilizer_properties(shape):
    layout = bare_layout(*shape)
    n = layout.lattice.size
    C = cluster_state(layout.lattice).amplitudes
    fulls = []
    for a in range(n):
        K = build_K(layout, a)
        m = K.matrix()
        np.testing.assert_allclose(m @ m, np.eye(m.shape[0]), atol=1e-15)
        full = full_operator(n, {q: (PX if q == a else PZ) for q in K.support})
        assert np.vdot(C, full @ C).real == pytest.approx(1.0, abs=1e-12)
        fulls.append(full)
    for A in fulls:
        for B in fulls:
            np.testing.assert_allclose(A @ B, B @ A, atol=1e-14)


# --- local terms --------------------------------------------------------------------------


def test_undeformed_terms_are_one_minus_K():
    sys, layout = compiled("pair")
    a = layout.a_qubits[0]
    P = build_P(layout, None, a)
    np.testing.assert_allclose(P.block, np.eye(P.block.shape[0]) - build_K(layout, a).matrix())
    k = layout.output_qubits[0]
    Q = build_Q(layout, None, lambda_deformation(sys, 0.0), k)
    np.testing.assert_allclose(Q.block, np.eye(Q.block.shape[0]) - build_K(layout, k).matrix(), atol=1e-15)


def test_term_kind_checks():
    _, layout = compiled("pair")
    with pytest.raises(InputError):
        build_P(layout, None, layout.output_qubits[0])
    with pytest.raises(InputError):
        build_Q(layout, None, None, layout.a_qubits[0])


@pytest.mark.parametrize("name", ["pair", "chain", "triangle"])
@pytest.mark.parametrize("eps", [0.05, 0.2])
def test_terms_annihilate_deformed_cluster(name, eps):
    sys, layout = compiled(name)
    lam = lambda_deformation(sys, 1.0)
    om = smooth(layout, eps)
    psi = build_deformed_cluster(layout, om, lam)
    H = assemble(layout, om, lam)
    n = layout.lattice.size
    for term in H.terms:
        single = SparseOperator(n, [term])
        out = single.matvec(psi.amplitudes)
        assert np.linalg.norm(out) <= 1e-9 * term.norm()
        assert term.hermiticity_error() <= 1e-12 * term.norm()
        assert term.min_eigenvalue() >= -1e-10
        assert term.block_min_eigenvalue() >= -1e-12 * term.norm()
        assert term.support == tuple(sorted((term.center,) + layout.lattice.neighbors(term.center)))
        assert len(term.support) <= 5


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.2])
def test_P_eigenvalue_bound(eps):
    _, layout = compiled("triangle")
    om = smooth(layout, eps)
    a_set = set(layout.a_qubits)
    for a in layout.a_qubits:
        P = build_P(layout, om, a)
        k = sum(1 for q in P.support if q in a_set)
        w = P.eigenvalues()
        assert w[0] >= -1e-10
        assert w[-1] <= 2 * eps ** (-2 * k) * (1 + 1e-12)


def test_factor_reproduces_block():
    sys, layout = compiled("triangle")
    H = assemble(layout, smooth(layout, 0.05), lambda_deformation(sys, 1.0))
    for t in H.terms:
        np.testing.assert_allclose(t.factor.conj().T @ t.factor, t.block, rtol=0, atol=1e-12 * t.norm())


def test_field_term_expansion():
    # conjugating -gamma Z_k by the smoothing inverses leaves -gamma (W^-dag W^-1 on A neighbours) (x) Z_k
    sys, layout = compiled("pair")
    lam = lambda_deformation(sys, 1.0)
    om = smooth(layout, 0.1)
    for k in layout.output_qubits:
        Q = build_Q(layout, om, lam, k)
        K = build_K(layout, k)
        gamma, E = gamma_energy(lam.beta_J(layout.target_map[k]))
        inv = [om.inverses[q].matrix if q in om.inverses else I2 for q in K.support]
        W = reduce(np.kron, inv)
        rest = W.conj().T @ (-K.matrix() - E * np.eye(W.shape[0])) @ W
        field = reduce(np.kron, [m.conj().T @ m if q != k else PZ for q, m in zip(K.support, inv)])
        np.testing.assert_allclose(Q.block - rest, -gamma * field, atol=1e-9 * Q.norm())


def test_single_a_neighbor_layout_matches_single_factor_form():
    # two free spins: the middle qubit of a 1x3 row is deleted
    model = SpinModel(2)
    sys = CliqueSystem(model)
    layout = ClusterLayout(LatticeGraph(1, 3), "CAC", {0: 0, 2: 1}, {1: KET_0}, model)
    assert verify_carving(layout, sys).valid
    assert layout.satisfies_one_a_neighbor()
    om = smooth(layout, 0.1)
    lam = lambda_deformation(sys, 0.0)
    for k in (0, 2):
        Q = build_Q(layout, om, lam, k)
        K = build_K(layout, k)
        inv = om.inverses[1].matrix
        W = np.kron(I2, inv) if k == 0 else np.kron(inv, I2)
        H_k = -K.matrix() + np.eye(4)
        np.testing.assert_allclose(Q.block, W.conj().T @ H_k @ W, atol=1e-12)


# --- assembly ------------------------------------------------------------------------------


@pytest.mark.parametrize("eps,beta", [(0.1, 0.5), (0.3, 1.0)])
def test_assembly_matches_full_register_oracle(eps, beta):
    sys, layout = compiled("pair")
    lam = lambda_deformation(sys, beta)
    om = smooth(layout, eps)
    H = assemble(layout, om, lam)
    oracle = dense_parent_hamiltonian(layout, om, lam)
    scale = np.abs(oracle).max()
    np.testing.assert_allclose(H.to_dense(), oracle, atol=1e-12 * scale)


@pytest.mark.parametrize("name", ["pair", "chain"])
def test_matrix_free_and_sparse_agree(name):
    sys, layout = compiled(name)
    H = assemble(layout, smooth(layout, 0.2), lambda_deformation(sys, 0.7))
    rng = np.random.default_rng(0)
    v = rng.normal(size=H.dimension) + 1j * rng.normal(size=H.dimension)
    a, b = H.matvec(v), H.to_sparse() @ v
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()
    D = H.to_dense()
    np.testing.assert_allclose(D, D.conj().T, atol=1e-12 * np.abs(D).max())


def test_one_by_one():
    H = assemble(bare_layout(1, 1), None, None)
    np.testing.assert_allclose(H.to_dense(), np.eye(2) - PX)
    g = ground_analysis(H, cluster_state(LatticeGraph(1, 1)))
    assert g.E0 == pytest.approx(0, abs=1e-12) and g.gap == pytest.approx(2) and g.fidelity == pytest.approx(1)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 3)])
@pytest.mark.parametrize("method", ["dense", "lanczos", "shift-invert"])
def test_undeformed_cluster_spectrum(shape, method):
    layout = bare_layout(*shape)
    g = ground_analysis(assemble(layout, None, None), cluster_state(layout.lattice), method=method)
    assert abs(g.E0) <= 1e-9
    assert g.gap == pytest.approx(2.0, abs=1e-8)
    assert g.fidelity >= 1 - 1e-9
    assert not g.degeneracy_flag


def test_budget_cap(monkeypatch):
    monkeypatch.setenv("CLUSTERTHERM_EIGEN_DIM_CAP", str(2**5))
    with pytest.raises(ResourceError):
        assemble(bare_layout(2, 3), None, None)


# --- ground analysis ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["pair", "chain"])
def test_solvers_agree(name):
    sys, layout = compiled(name)
    lam = lambda_deformation(sys, 1.0)
    om = smooth(layout, 0.1)
    H = assemble(layout, om, lam)
    ref = build_deformed_cluster(layout, om, lam)
    d = ground_analysis(H, ref, method="dense")
    s = ground_analysis(H, ref, method="shift-invert")
    assert s.E1 == pytest.approx(d.E1, rel=1e-8)
    assert s.fidelity >= 1 - 1e-9 and d.fidelity >= 1 - 1e-9
    assert abs(s.E0) <= 1e-8 * s.norm


@pytest.mark.parametrize("name", ["chain", "triangle"])
def test_larger_fixtures_have_unique_zero_energy_ground_state(name):
    sys, layout = compiled(name)
    lam = lambda_deformation(sys, 1.0)
    om = smooth(layout, 0.1)
    H = assemble(layout, om, lam)
    ref = build_deformed_cluster(layout, om, lam)
    g = ground_analysis(H, ref)
    assert abs(g.E0) <= 1e-8 * g.norm
    assert g.gap >= hamiltonian.GAP_FLOOR
    assert g.fidelity >= 1 - 1e-8
    assert H.expectation(ref) <= 1e-10 * H.max_term_norm()


def test_kernel_preserved_by_orthogonal_projector():
    sys, layout = compiled("pair")
    lam = lambda_deformation(sys, 1.0)
    om = smooth(layout, 0.1)
    H = assemble(layout, om, lam)
    ref = build_deformed_cluster(layout, om, lam)
    rng = np.random.default_rng(3)
    v = rng.normal(size=H.dimension) + 1j * rng.normal(size=H.dimension)
    v -= np.vdot(ref.amplitudes, v) * ref.amplitudes
    v /= np.linalg.norm(v)
    extra = LocalTerm(tuple(range(H.n_qubits)), 5.0 * np.outer(v, v.conj()), "extra", -1)
    base = ground_analysis(H, ref)
    bumped = ground_analysis(SparseOperator(H.n_qubits, H.terms + [extra]), ref)
    assert bumped.E0 == pytest.approx(base.E0, abs=1e-8 * base.norm)
    assert bumped.fidelity >= 1 - 1e-9


def test_degeneracy_flag():
    term = LocalTerm((0,), np.eye(2) - PZ.real, "P", 0)
    g = ground_analysis(SparseOperator(2, [term]), method="dense")
    assert g.degeneracy_flag and g.gap < 1e-12


def test_non_convergence_reported(monkeypatch):
    monkeypatch.setattr(hamiltonian, "EIGEN_MAXITER", 1)
    sys, layout = compiled("chain")
    H = assemble(layout, smooth(layout, 0.05), lambda_deformation(sys, 1.0))
    with pytest.raises(ConvergenceError):
        ground_analysis(H, method="lanczos")


def test_unknown_method():
    with pytest.raises(InputError):
        ground_analysis(assemble(bare_layout(2, 2), None, None), method="magic")


def test_dense_cap_enforced(monkeypatch):
    monkeypatch.setattr(hamiltonian.limits, "DENSE_EIGEN_CAP", 8)
    with pytest.raises(ResourceError):
        ground_analysis(assemble(bare_layout(2, 2), None, None), method="dense")


def test_conditioning_scales_with_omega_count():
    # worst term carries k smoothing inverses, each contributing up to 1/eps
    sys, layout = compiled("pair")
    lam = lambda_deformation(sys, 1.0)
    a_set = set(layout.a_qubits)
    k_max = max(sum(1 for q in build_K(layout, c).support if q in a_set) for c in range(layout.lattice.size))
    grid = np.array([0.2, 0.1, 0.05, 0.02, 0.01])
    norms = np.array([assemble(layout, smooth(layout, e), lam).max_term_norm() for e in grid])
    C = np.exp(np.mean(np.log(norms * grid ** (2 * k_max))))
    ratio = norms / (C * grid ** (-2 * k_max))
    assert np.all((ratio > 0.25) & (ratio < 4))
    slope = np.polyfit(np.log(grid), np.log(norms), 1)[0]
    assert slope == pytest.approx(-2 * k_max, abs=0.5)


def test_term_dump_shape():
    _, layout = compiled("pair")
    H = assemble(layout, None, None)
    dump = H.term_dump()
    assert len(dump) == layout.lattice.size
    d = dump[0]
    assert len(d["block"]) == 2 ** len(d["support"]) and len(d["block"][0][0]) == 2
