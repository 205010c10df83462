"""Clique state of a spin model, its stabilizers, and the thermal deformation.

Qubit layout of a :class:`CliqueSystem`: one interaction qubit per term of
arity >= 2 (in model term order) followed by one vertex qubit per spin.
The clique state is the uniform superposition over spin configurations
``s`` of ``|parities(s)>|s>``.  Deforming it with positive diagonal factors
``diag(exp(-beta J / 2), exp(beta J / 2))`` weights each branch by
``exp(-beta H(s) / 2)``, so with ``n`` spins the squared norm of the
deformed (unnormalized) state is ``2**-n * Z`` where ``Z`` is the partition
function of the offset-free Hamiltonian.  Arity-1 couplings deform the vertex
qubit directly; constant offsets cancel in every probability and are left
out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from . import gf2, limits
from .errors import InputError, ResourceError, VerificationError
from .spin_model import Observable, SpinModel, bit_table
from .state import PAULI, SingleQubitOp, StateVector, _check_dense, apply_locals, basis_marginal

STABILIZER_TOL = 1e-12


@dataclass(frozen=True)
class CliqueSystem:
    model: SpinModel

    @property
    def n_interaction(self) -> int:
        return len(self.model.interaction_terms)

    @property
    def n_qubits(self) -> int:
        return self.n_interaction + self.model.n_spins

    @property
    def interaction_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_interaction))

    @property
    def vertex_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_interaction, self.n_qubits))

    def vertex_qubit(self, spin: int) -> int:
        return self.n_interaction + spin

    @cached_property
    def term_of_qubit(self) -> dict[int, tuple[int, ...]]:
        return {e: t.sites for e, t in enumerate(self.model.interaction_terms)}

    def incident(self, spin: int) -> tuple[int, ...]:
        return tuple(e for e, sites in self.term_of_qubit.items() if spin in sites)

    def couplings(self) -> np.ndarray:
        """Coupling routed to each qubit: term strength or arity-1 field."""
        out = [t.J for t in self.model.interaction_terms]
        out += [self.model.field(a) for a in range(self.model.n_spins)]
        return np.array(out, dtype=float)

    def labels(self) -> list[str]:
        names = ["e" + "_".join(map(str, sites)) for sites in self.term_of_qubit.values()]
        return names + [f"v{a}" for a in range(self.model.n_spins)]


@dataclass(frozen=True)
class PauliString:
    ops: str
    sign: int = 1

    def __post_init__(self):
        if set(self.ops) - set("IXYZ"):
            raise InputError(f"bad Pauli string {self.ops!r}")
        if self.sign not in (1, -1):
            raise InputError("Pauli sign must be +1 or -1")

    @classmethod
    def from_support(cls, n: int, support: dict[int, str], sign: int = 1) -> "PauliString":
        chars = ["I"] * n
        for q, p in support.items():
            chars[q] = p
        return cls("".join(chars), sign)

    def apply(self, state: StateVector) -> StateVector:
        ops = {q: PAULI[p] for q, p in enumerate(self.ops) if p != "I"}
        out = apply_locals(state, ops)
        return out if self.sign == 1 else StateVector(out.n_qubits, -out.amplitudes)

    def expectation(self, state: StateVector) -> float:
        return float(np.vdot(state.amplitudes, self.apply(state).amplitudes).real)

    def commutes(self, other: "PauliString") -> bool:
        clashes = sum(1 for a, b in zip(self.ops, other.ops) if a != "I" and b != "I" and a != b)
        return clashes % 2 == 0

    def symplectic(self) -> int:
        """Packed (x | z) bit vector."""
        n = len(self.ops)
        x = z = 0
        for q, p in enumerate(self.ops):
            if p in "XY":
                x |= 1 << q
            if p in "ZY":
                z |= 1 << q
        return (x << n) | z

    def __str__(self) -> str:
        return ("+" if self.sign == 1 else "-") + self.ops


@dataclass(frozen=True)
class StabilizerGenerators:
    generators: tuple[PauliString, ...]

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def mutually_commuting(self) -> bool:
        g = self.generators
        return all(g[i].commutes(g[j]) for i in range(len(g)) for j in range(i + 1, len(g)))

    def independent(self) -> bool:
        return gf2.rank(p.symplectic() for p in self.generators) == len(self.generators)


@dataclass(frozen=True, eq=False)
class LambdaDeformation:
    """Per-qubit positive diagonal factors for a :class:`CliqueSystem`."""

    beta: float
    couplings: np.ndarray

    @property
    def factors(self) -> dict[int, SingleQubitOp]:
        return {q: _lambda_op(self.beta * J) for q, J in enumerate(self.couplings)}

    def beta_J(self, qubit: int) -> float:
        return float(self.beta * self.couplings[qubit])


def _lambda_op(beta_J: float) -> SingleQubitOp:
    return SingleQubitOp.diag(math.exp(-beta_J / 2), math.exp(beta_J / 2))


def _check_overflow(beta: float, couplings: Iterable[float]) -> None:
    if not math.isfinite(beta):
        raise InputError("beta must be finite")
    cap = limits.overflow_cap()
    worst = max((abs(beta * J) for J in couplings), default=0.0)
    if worst > cap:
        raise ResourceError(f"|beta*J| = {worst:.4g} exceeds the overflow cap {cap:g}")


def lambda_deformation(sys: CliqueSystem, beta: float) -> LambdaDeformation:
    couplings = sys.couplings()
    _check_overflow(beta, couplings)
    return LambdaDeformation(float(beta), couplings)


def build_clique_state(model: SpinModel) -> tuple[CliqueSystem, StateVector]:
    sys = CliqueSystem(model)
    _check_dense(sys.n_qubits)
    n = model.n_spins
    configs = np.arange(1 << n, dtype=np.int64)
    index = configs.copy()
    for e, sites in sys.term_of_qubit.items():
        mask = sum(1 << (n - 1 - s) for s in sites)
        parity = np.bitwise_count(configs & mask) & 1
        index |= parity.astype(np.int64) << (n + sys.n_interaction - 1 - e)
    amps = np.zeros(1 << sys.n_qubits, dtype=np.complex128)
    amps[index] = 2.0 ** (-n / 2)
    return sys, StateVector(sys.n_qubits, amps)


def clique_stabilizers(sys: CliqueSystem, state: StateVector | None = None) -> StabilizerGenerators:
    """Generators ``Z_e prod_{a in T} Z_a`` per interaction and ``X_a prod_{e ni a} X_e`` per vertex.

    Each generator is checked to fix the clique state; a failure raises
    :class:`VerificationError`.
    """
    n = sys.n_qubits
    gens = []
    for e, sites in sys.term_of_qubit.items():
        support = {e: "Z"} | {sys.vertex_qubit(a): "Z" for a in sites}
        gens.append(PauliString.from_support(n, support))
    for a in range(sys.model.n_spins):
        support = {sys.vertex_qubit(a): "X"} | {e: "X" for e in sys.incident(a)}
        gens.append(PauliString.from_support(n, support))
    if state is None:
        if n > limits.dense_cap():
            return StabilizerGenerators(tuple(gens))
        state = build_clique_state(sys.model)[1]
    for g in gens:
        value = g.expectation(state)
        if abs(value - 1.0) > STABILIZER_TOL:
            raise VerificationError(f"generator {g} has expectation {value:.3e} on the clique state")
    return StabilizerGenerators(tuple(gens))


def apply_lambda(sys: CliqueSystem, state: StateVector, beta: float) -> tuple[StateVector, float]:
    """Deform ``state`` and return it normalized together with ``Z = 2**n * ||Lambda phi||**2``."""
    lam = lambda_deformation(sys, beta)
    out = apply_locals(state, lam.factors)
    sq = float(np.vdot(out.amplitudes, out.amplitudes).real)
    Z = (2.0 ** sys.model.n_spins) * sq
    return out.normalized(), Z


def thermal_readout(sys: CliqueSystem, deformed_state: StateVector) -> np.ndarray:
    """Vertex-qubit distribution, indexed like spin configurations."""
    return basis_marginal(deformed_state, sys.vertex_qubits)


def readout_observable(sys: CliqueSystem, deformed_state: StateVector, f: Observable) -> float:
    probs = thermal_readout(sys, deformed_state)
    n = sys.model.n_spins
    values = np.asarray(f(bit_table(np.arange(1 << n, dtype=np.int64), n)), dtype=float)
    return float(values @ probs)
