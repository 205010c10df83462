from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clustertherm.errors import InputError, ResourceError
from clustertherm.state import (
    KET_0,
    KET_1,
    KET_PLUS,
    X,
    Z,
    LatticeGraph,
    SingleQubitOp,
    StateVector,
    apply_cz,
    apply_local,
    apply_locals,
    basis_marginal,
    cluster_state,
    dump_state,
    fidelity,
    load_state,
    partial_trace,
    plus_state,
)

from helpers import cluster_oracle


def random_state(seed: int, n: int) -> StateVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def random_op(seed: int, diagonal: bool = False) -> SingleQubitOp:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return SingleQubitOp(np.diag(np.diag(m)) if diagonal else m)


states = st.builds(random_state, st.integers(0, 10**6), st.integers(1, 6))


# --- basics ---------------------------------------------------------------------


def test_plus_state_examples():
    np.testing.assert_allclose(plus_state(1).amplitudes, [2**-0.5, 2**-0.5])
    np.testing.assert_allclose(plus_state(2).amplitudes, [0.5] * 4)
    np.testing.assert_allclose(plus_state(0).amplitudes, [1.0])


def test_bit_order_qubit_zero_is_most_significant():
    s = StateVector.basis([1, 0, 0])
    assert s.amplitudes[4] == 1.0
    assert s.tensor()[1, 0, 0] == 1.0


def test_wrong_length_rejected():
    with pytest.raises(InputError):
        StateVector(2, np.ones(3))


def test_cz_examples():
    assert apply_cz(StateVector.basis([1, 1]), 0, 1).amplitudes[3] == -1
    assert apply_cz(StateVector.basis([0, 0]), 0, 1).amplitudes[0] == 1
    np.testing.assert_allclose(apply_cz(plus_state(2), 0, 1).amplitudes, np.array([1, 1, 1, -1]) / 2)


def test_cz_errors():
    with pytest.raises(InputError):
        apply_cz(plus_state(2), 0, 0)
    with pytest.raises(InputError):
        apply_cz(plus_state(2), 0, 2)


@given(states, st.data())
def test_cz_involution_and_commutes_with_diagonal(state, data):
    n = state.n_qubits
    if n < 2:
        return
    a, b = data.draw(st.permutations(range(n)))[:2]
    twice = apply_cz(apply_cz(state, a, b), a, b)
    np.testing.assert_allclose(twice.amplitudes, state.amplitudes, atol=1e-15)
    q = data.draw(st.integers(0, n - 1))
    d = random_op(data.draw(st.integers(0, 1000)), diagonal=True)
    left = apply_local(apply_cz(state, a, b), q, d)
    right = apply_cz(apply_local(state, q, d), a, b)
    np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-13)


def test_cluster_examples():
    np.testing.assert_allclose(cluster_state(LatticeGraph(1, 2)).amplitudes, np.array([1, 1, 1, -1]) / 2)
    np.testing.assert_allclose(cluster_state(LatticeGraph(1, 1)).amplitudes, KET_PLUS)


@pytest.mark.parametrize("shape", [(1, 3), (2, 2), (2, 3), (3, 3)])
def test_cluster_matches_closed_form(shape):
    np.testing.assert_allclose(cluster_state(LatticeGraph(*shape)).amplitudes, cluster_oracle(*shape), atol=1e-15)


@pytest.mark.parametrize("shape", [(1, 2), (2, 2), (2, 3), (3, 3)])
def test_cluster_single_qubit_marginals_are_maximally_mixed(shape):
    state = cluster_state(LatticeGraph(*shape))
    for q in range(state.n_qubits):
        np.testing.assert_allclose(partial_trace(state, [q]), np.eye(2) / 2, atol=1e-12)


def test_lattice_geometry():
    lat = LatticeGraph(3, 3)
    assert lat.neighbors(4) == (1, 3, 5, 7)
    assert lat.neighbors(0) == (1, 3)
    assert len(lat.edges) == 12
    with pytest.raises(InputError):
        LatticeGraph(0, 2)


def test_dense_cap(monkeypatch):
    monkeypatch.setenv("CLUSTERTHERM_DENSE_CAP", "4")
    with pytest.raises(ResourceError):
        cluster_state(LatticeGraph(1, 5))


# --- local operators ---------------------------------------------------------------


def test_apply_local_examples():
    s = random_state(3, 3)
    np.testing.assert_allclose(apply_local(s, 1, np.eye(2)).amplitudes, s.amplitudes)
    x = 0.8
    out = apply_local(StateVector(1, KET_PLUS), 0, SingleQubitOp.diag(math.exp(-x / 2), math.exp(x / 2)))
    np.testing.assert_allclose(out.amplitudes, np.array([math.exp(-x / 2), math.exp(x / 2)]) / math.sqrt(2))
    np.testing.assert_allclose(apply_local(StateVector(1, KET_0), 0, X).amplitudes, KET_1)


@given(states, st.integers(0, 1000), st.data())
def test_apply_local_norm_bound(state, seed, data):
    q = data.draw(st.integers(0, state.n_qubits - 1))
    op = random_op(seed)
    assert apply_local(state, q, op).norm() <= op.operator_norm() * state.norm() * (1 + 1e-12)


@given(states, st.integers(0, 1000))
def test_apply_locals_matches_sequential(state, seed):
    ops = {q: random_op(seed + q, diagonal=q % 2 == 0) for q in range(state.n_qubits)}
    seq = state
    for q, op in ops.items():
        seq = apply_local(seq, q, op)
    np.testing.assert_allclose(apply_locals(state, ops).amplitudes, seq.amplitudes, atol=1e-12)


def test_operations_do_not_mutate_input():
    s = random_state(5, 3)
    before = s.amplitudes.copy()
    apply_local(s, 0, X)
    apply_cz(s, 0, 1)
    apply_locals(s, {1: Z})
    np.testing.assert_array_equal(s.amplitudes, before)


def test_single_qubit_op_properties():
    assert Z.is_diagonal and not X.is_diagonal
    assert not SingleQubitOp(np.zeros((2, 2))).is_invertible
    with pytest.raises(InputError):
        SingleQubitOp(np.zeros((2, 2))).inverse()
    with pytest.raises(InputError):
        SingleQubitOp(np.eye(3))
    op = random_op(11)
    np.testing.assert_allclose(op.matrix @ op.inverse().matrix, np.eye(2), atol=1e-12)


# --- fidelity and marginals -------------------------------------------------------------


def test_fidelity_examples():
    s = random_state(1, 2)
    assert fidelity(s, s) == pytest.approx(1.0)
    assert fidelity(StateVector.basis([0]), StateVector.basis([1])) == 0.0
    assert fidelity(StateVector(1, KET_0), StateVector(1, KET_PLUS)) == pytest.approx(0.5)
    with pytest.raises(InputError):
        fidelity(StateVector(1, [0, 0]), s)


def test_basis_marginal_examples():
    s = random_state(2, 3)
    np.testing.assert_allclose(basis_marginal(s, [0, 1, 2]), np.abs(s.amplitudes) ** 2)
    bell = StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    np.testing.assert_allclose(basis_marginal(bell, [0]), [0.5, 0.5])
    prod = StateVector.product([KET_0, KET_PLUS])
    np.testing.assert_allclose(basis_marginal(prod, [1]), [0.5, 0.5])


def test_basis_marginal_keep_order():
    s = StateVector.basis([1, 0, 1])
    assert basis_marginal(s, [1, 0])[1] == 1.0  # (q1=0, q0=1)
    with pytest.raises(InputError):
        basis_marginal(StateVector(1, [1.0, 1.0]), [0])


def test_partial_trace_examples():
    s = random_state(4, 2)
    np.testing.assert_allclose(partial_trace(s, [0, 1]), np.outer(s.amplitudes, s.amplitudes.conj()), atol=1e-15)
    bell = StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    np.testing.assert_allclose(partial_trace(bell, [0]), np.eye(2) / 2, atol=1e-15)
    prod = StateVector.product([KET_0, KET_PLUS])
    np.testing.assert_allclose(partial_trace(prod, [1]), np.outer(KET_PLUS, KET_PLUS), atol=1e-15)


@given(st.integers(0, 10**6), st.integers(1, 10), st.data())
def test_marginal_equals_partial_trace_diagonal(seed, n, data):
    s = random_state(seed, n)
    keep = data.draw(st.permutations(range(n)))[: data.draw(st.integers(1, min(n, 6)))]
    rho = partial_trace(s, keep)
    np.testing.assert_allclose(np.diag(rho).real, basis_marginal(s, keep), atol=1e-12)
    assert abs(np.trace(rho) - 1) < 1e-12
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_dump_round_trip(tmp_path):
    s = random_state(9, 4)
    path = tmp_path / "s.bin"
    dump_state(s, path)
    raw = path.read_bytes()
    assert raw[:4] == (4).to_bytes(4, "little") and len(raw) == 4 + 16 * 16
    np.testing.assert_array_equal(load_state(path).amplitudes, s.amplitudes)
    path.write_bytes(raw[:-1])
    with pytest.raises(InputError):
        load_state(path)
