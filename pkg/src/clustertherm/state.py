"""Dense state vectors.

Bit order is fixed everywhere in the package: qubit 0 is the most
significant bit of the amplitude index, so ``amplitudes.reshape([2] * n)``
puts qubit ``q`` on axis ``q``.  Operations return fresh states and never
renormalize implicitly; call :meth:`StateVector.normalized` when needed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import limits
from .errors import InputError, ResourceError

INVERTIBLE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise InputError(f"{amps.size} amplitudes do not describe {self.n_qubits} qubits")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits: Sequence[int]) -> "StateVector":
        n = len(bits)
        amps = np.zeros(1 << n, dtype=np.complex128)
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        amps[idx] = 1.0
        return cls(n, amps)

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "StateVector":
        amps = np.ones(1, dtype=np.complex128)
        for f in factors:
            amps = np.kron(amps, np.asarray(f, dtype=np.complex128))
        return cls(len(factors), amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape([2] * self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise InputError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amplitudes / nrm)

    def inner(self, other: "StateVector") -> complex:
        _same_size(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class SingleQubitOp:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise InputError(f"single-qubit operator must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("single-qubit operator has non-finite entries")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @cached_property
    def is_diagonal(self) -> bool:
        return self.matrix[0, 1] == 0 and self.matrix[1, 0] == 0

    @cached_property
    def is_invertible(self) -> bool:
        return abs(np.linalg.det(self.matrix)) > INVERTIBLE_TOL

    @cached_property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=1e-14))

    @classmethod
    def diag(cls, a: complex, b: complex) -> "SingleQubitOp":
        return cls(np.diag([a, b]))

    def inverse(self) -> "SingleQubitOp":
        if not self.is_invertible:
            raise InputError("operator is not invertible")
        return SingleQubitOp(np.linalg.inv(self.matrix))

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


I2 = SingleQubitOp(np.eye(2))
X = SingleQubitOp([[0, 1], [1, 0]])
Y = SingleQubitOp([[0, -1j], [1j, 0]])
Z = SingleQubitOp([[1, 0], [0, -1]])
H = SingleQubitOp(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET_0 = np.array([1.0, 0.0], dtype=np.complex128)
KET_1 = np.array([0.0, 1.0], dtype=np.complex128)
KET_PLUS = np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2)
KET_MINUS = np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2)


@dataclass(frozen=True)
class LatticeGraph:
    """Rectangular nearest-neighbour lattice; qubit index is ``row * cols + col``."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError("lattice needs at least one row and one column")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def index(self, row: int, col: int) -> int:
        return row * self.cols + col

    def position(self, q: int) -> tuple[int, int]:
        return divmod(q, self.cols)

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        out = set()
        for r in range(self.rows):
            for c in range(self.cols):
                q = self.index(r, c)
                if c + 1 < self.cols:
                    out.add((q, q + 1))
                if r + 1 < self.rows:
                    out.add((q, q + self.cols))
        return frozenset(out)

    def neighbors(self, q: int) -> tuple[int, ...]:
        r, c = self.position(q)
        out = []
        for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < self.rows and 0 <= cc < self.cols:
                out.append(self.index(rr, cc))
        return tuple(out)


def _check_dense(n: int) -> None:
    cap = limits.dense_cap()
    if n > cap:
        raise ResourceError(f"{n} qubits exceeds the dense state-vector cap of {cap}")


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.n_qubits:
        raise InputError(f"qubit {q} out of range for {state.n_qubits} qubits")


def _same_size(a: StateVector, b: StateVector) -> None:
    if a.n_qubits != b.n_qubits:
        raise InputError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def plus_state(n: int) -> StateVector:
    _check_dense(n)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def apply_cz(state: StateVector, a: int, b: int) -> StateVector:
    _check_qubit(state, a)
    _check_qubit(state, b)
    if a == b:
        raise InputError("controlled-phase needs two distinct qubits")
    t = state.tensor().copy()
    idx = [slice(None)] * state.n_qubits
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return StateVector(state.n_qubits, t.reshape(-1))


def cluster_state(lat: LatticeGraph) -> StateVector:
    _check_dense(lat.size)
    n = lat.size
    t = plus_state(n).tensor().copy()
    for a, b in sorted(lat.edges):
        idx = [slice(None)] * n
        idx[a] = 1
        idx[b] = 1
        t[tuple(idx)] *= -1
    return StateVector(n, t.reshape(-1))


def apply_local(state: StateVector, q: int, op: SingleQubitOp | np.ndarray) -> StateVector:
    _check_qubit(state, q)
    m = op.matrix if isinstance(op, SingleQubitOp) else np.asarray(op, dtype=np.complex128)
    t = np.tensordot(m, state.tensor(), axes=([1], [q]))
    t = np.moveaxis(t, 0, q)
    return StateVector(state.n_qubits, np.ascontiguousarray(t).reshape(-1))


def apply_locals(state: StateVector, ops: dict[int, SingleQubitOp]) -> StateVector:
    """Apply several single-qubit operators; diagonal ones are applied by broadcasting."""
    t = state.tensor().copy()
    n = state.n_qubits
    for q, op in sorted(ops.items()):
        if not 0 <= q < n:
            raise InputError(f"qubit {q} out of range for {n} qubits")
        if op.is_diagonal:
            shape = [1] * n
            shape[q] = 2
            t = t * np.diag(op.matrix).reshape(shape)
        else:
            t = np.moveaxis(np.tensordot(op.matrix, t, axes=([1], [q])), 0, q)
    return StateVector(n, np.ascontiguousarray(t).reshape(-1))


def fidelity(a: StateVector, b: StateVector) -> float:
    _same_size(a, b)
    na = np.vdot(a.amplitudes, a.amplitudes).real
    nb = np.vdot(b.amplitudes, b.amplitudes).real
    if na == 0.0 or nb == 0.0:
        raise InputError("fidelity is undefined for a zero vector")
    ov = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, abs(ov) ** 2 / (na * nb)))


def _check_keep(state: StateVector, keep: Sequence[int]) -> list[int]:
    keep = [int(k) for k in keep]
    for k in keep:
        _check_qubit(state, k)
    if len(set(keep)) != len(keep):
        raise InputError("repeated qubit in keep set")
    return keep


def _check_normalized(state: StateVector) -> None:
    if abs(state.norm() - 1.0) > 1e-10:
        raise InputError(f"state is not normalized (norm {state.norm():.3e})")


def basis_marginal(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Computational-basis distribution of ``keep`` (``keep[0]`` most significant)."""
    keep = _check_keep(state, keep)
    _check_normalized(state)
    p = np.abs(state.tensor()) ** 2
    drop = tuple(q for q in range(state.n_qubits) if q not in keep)
    p = p.sum(axis=drop) if drop else p
    remaining = [q for q in range(state.n_qubits) if q in keep]
    p = np.transpose(p, [remaining.index(k) for k in keep]) if keep else p
    return np.asarray(p).reshape(-1)


def partial_trace(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    keep = _check_keep(state, keep)
    if len(keep) > limits.PARTIAL_TRACE_CAP:
        raise ResourceError(f"reduced density matrix on {len(keep)} qubits exceeds the cap of {limits.PARTIAL_TRACE_CAP}")
    rest = [q for q in range(state.n_qubits) if q not in keep]
    m = np.transpose(state.tensor(), keep + rest).reshape(1 << len(keep), -1)
    return m @ m.conj().T


def dump_state(state: StateVector, path: str | Path) -> None:
    """Binary dump: u32 qubit count, then little-endian (real, imag) doubles."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", state.n_qubits))
        fh.write(state.amplitudes.astype("<c16").tobytes())


def load_state(path: str | Path) -> StateVector:
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise InputError("state dump is truncated")
    (n,) = struct.unpack("<I", raw[:4])
    _check_dense(n)
    body = raw[4:]
    if len(body) != 16 * (1 << n):
        raise InputError(f"state dump holds {len(body)} bytes, expected {16 * (1 << n)}")
    return StateVector(n, np.frombuffer(body, dtype="<c16").astype(np.complex128))
