"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's own vectorized code
paths: thermal sums are plain Python loops, cluster amplitudes come from the
closed-form sign pattern, and Hamiltonian terms are built as full-register
Kronecker products.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache, reduce

import numpy as np

from clustertherm.clique import CliqueSystem
from clustertherm.mbqc import compile_layout
from clustertherm.spin_model import ParityTerm, SpinModel

FIXTURES = {
    "trivial": SpinModel(1, ()),
    "pair": SpinModel(2, (ParityTerm((0, 1), -1.0),)),
    "chain": SpinModel(3, (ParityTerm((0, 1), -1.0), ParityTerm((1, 2), 0.5))),
    "triangle": SpinModel(
        3, (ParityTerm((0, 1), -1.0), ParityTerm((1, 2), 0.5), ParityTerm((0, 2), 1.5))
    ),
}

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def compiled(name: str):
    sys = CliqueSystem(FIXTURES[name])
    return sys, compile_layout(sys)


# --- classical -----------------------------------------------------------------


def loop_energy(model: SpinModel, bits) -> float:
    e = model.offset
    for t in model.terms:
        e += t.J * (-1) ** (sum(bits[i] for i in t.sites) % 2)
    return e


def loop_thermal(model: SpinModel, beta: float) -> tuple[float, list[float]]:
    """Partition function and probabilities by explicit enumeration (spin 0 most significant)."""
    weights = [math.exp(-beta * loop_energy(model, bits)) for bits in itertools.product((0, 1), repeat=model.n_spins)]
    Z = math.fsum(weights)
    return Z, [w / Z for w in weights]


# --- states ----------------------------------------------------------------------


def cluster_oracle(rows: int, cols: int) -> np.ndarray:
    """Closed form: amplitude 2^{-n/2} (-1)^{sum over edges x_a x_b}."""
    n = rows * cols
    out = np.empty(1 << n)
    for idx, bits in enumerate(itertools.product((0, 1), repeat=n)):
        sign = 0
        for r in range(rows):
            for c in range(cols):
                q = r * cols + c
                if c + 1 < cols:
                    sign += bits[q] * bits[q + 1]
                if r + 1 < rows:
                    sign += bits[q] * bits[q + cols]
        out[idx] = (-1) ** sign
    return out * 2.0 ** (-n / 2)


def clique_oracle(model: SpinModel) -> np.ndarray:
    """Enumerate the branches: interaction parities (sorted term order) then spins."""
    pairs = [t for t in model.terms if len(t.sites) >= 2]
    n_q = len(pairs) + model.n_spins
    out = np.zeros(1 << n_q)
    for s in itertools.product((0, 1), repeat=model.n_spins):
        y = [sum(s[i] for i in t.sites) % 2 for t in pairs]
        idx = int("".join(map(str, y + list(s))) or "0", 2)
        out[idx] = 2.0 ** (-model.n_spins / 2)
    return out


# --- operators -------------------------------------------------------------------

I2 = np.eye(2)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.diag([1.0, -1.0]).astype(complex)


def full_operator(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [ops.get(q, I2) for q in range(n)])


def lattice_neighbors(rows: int, cols: int, q: int) -> list[int]:
    r, c = divmod(q, cols)
    out = []
    for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if 0 <= rr < rows and 0 <= cc < cols:
            out.append(rr * cols + cc)
    return out


def dense_parent_hamiltonian(layout, omega, lam) -> np.ndarray:
    """Full-register oracle for the assembled Hamiltonian."""
    rows, cols = layout.lattice.rows, layout.lattice.cols
    n = rows * cols
    H = np.zeros((1 << n, 1 << n), dtype=complex)
    for q in range(n):
        nb = lattice_neighbors(rows, cols, q)
        K = full_operator(n, {q: PX} | {b: PZ for b in nb})
        if layout.roles[q] == "A":
            h = np.eye(1 << n) - K
        else:
            x = 0.0 if lam is None else lam.beta * lam.couplings[layout.target_map[q]]
            g = -math.sinh(x)
            h = -K - g * full_operator(n, {q: PZ}) + math.cosh(x) * np.eye(1 << n)
        inv = {}
        if omega is not None:
            for b in [q] + nb:
                if b in omega.inverses:
                    inv[b] = np.linalg.inv(omega.ops[b].matrix)
        W = full_operator(n, inv)
        H += W.conj().T @ h @ W
    return H
