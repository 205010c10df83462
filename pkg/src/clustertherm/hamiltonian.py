"""Local parent Hamiltonian of the deformed cluster state and its ground-state analysis.

For an A qubit ``i`` the term is ``W^-dag (I - K_i) W^-1`` and for a B/C
qubit ``k`` it is ``W^-dag (-K_k - gamma_k Z_k - E_k) W^-1``, where ``K`` is
the cluster stabilizer centred on the qubit and ``W`` collects the smoothed
projectors on every A qubit inside the stabilizer's support.  The B/C field
``gamma_k`` and offset ``E_k`` make the deformed ``|+>`` the ground state of
``-X - gamma_k Z`` with energy ``E_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import limits
from .clique import LambdaDeformation, _check_overflow
from .errors import ConvergenceError, InputError, ResourceError
from .mbqc import ClusterLayout, OmegaDeformation
from .state import I2, X, Z, StateVector

PSD_FLOOR = -1e-10
DEGENERACY_TOL = 1e-8
GAP_FLOOR = 1e-6
EIGEN_TOL = 1e-10
EIGEN_MAXITER = 5000
DENSE_AUTO_CAP = 2**10
SPARSE_FACTOR_CAP = 2**20
# shift-invert pole; the operator is PSD so any negative shift keeps H - sigma definite
SHIFT = -1.0


def gamma_energy(beta_J: float) -> tuple[float, float]:
    """Field and ground energy for which ``(e^{-x/2}, e^{x/2})`` is the ground state of ``-X - gamma Z``."""
    _check_overflow(1.0, [beta_J])
    return -math.sinh(beta_J), -math.cosh(beta_J)


@dataclass(frozen=True)
class SingleQubitGroundData:
    """Field and ground energy of ``-X - gamma Z`` for one B/C qubit."""

    qubit: int
    beta_J: float
    gamma: float
    E: float

    def ground_vector(self) -> np.ndarray:
        v = np.array([math.exp(-self.beta_J / 2), math.exp(self.beta_J / 2)])
        return v / np.linalg.norm(v)


def single_qubit_ground_data(layout: ClusterLayout, lam: LambdaDeformation | None) -> list[SingleQubitGroundData]:
    out = []
    for k in layout.output_qubits:
        x = q_field_strength(lam, layout, k)
        out.append(SingleQubitGroundData(k, x, *gamma_energy(x)))
    return out


@dataclass(frozen=True)
class ClusterStabilizer:
    center: int
    support: tuple[int, ...]

    @property
    def paulis(self) -> str:
        return "".join("X" if q == self.center else "Z" for q in self.support)

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, [(X if q == self.center else Z).matrix for q in self.support])


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """Hermitian block on ``support`` (first support qubit most significant).

    Every term has the form ``G^dag G`` with ``G = sqrt(c) Pi W^-1`` for a
    projector ``Pi``; ``factor`` stores ``G`` so the spectrum can be read off
    its singular values, which stays accurate when ``W^-1`` is badly
    conditioned.
    """

    support: tuple[int, ...]
    block: np.ndarray = field(repr=False)
    kind: str
    center: int
    factor: np.ndarray | None = field(default=None, repr=False)

    def eigenvalues(self) -> np.ndarray:
        if self.factor is None:
            return np.linalg.eigvalsh(self.block)
        return np.sort(np.linalg.svd(self.factor, compute_uv=False) ** 2)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def norm(self) -> float:
        return float(self.eigenvalues()[-1])

    def block_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the stored block itself (limited by rounding at ``eps * norm``)."""
        return float(np.linalg.eigvalsh(self.block)[0])

    def hermiticity_error(self) -> float:
        return float(np.abs(self.block - self.block.conj().T).max())


def build_K(layout: ClusterLayout, a: int) -> ClusterStabilizer:
    lat = layout.lattice
    if not 0 <= a < lat.size:
        raise InputError(f"qubit {a} is not on the lattice")
    return ClusterStabilizer(a, tuple(sorted((a,) + lat.neighbors(a))))


def _inverse_factor(layout: ClusterLayout, omega: OmegaDeformation | None, support) -> np.ndarray:
    mats = []
    for q in support:
        if omega is not None and q in omega.inverses:
            mats.append(omega.inverses[q].matrix)
        else:
            mats.append(I2.matrix)
    return reduce(np.kron, mats)


def _term(kind: str, center: int, support, h: np.ndarray, scale: float, w_inv: np.ndarray) -> LocalTerm:
    # h = scale * Pi with Pi a projector, so the term is G^dag G with G = sqrt(scale) Pi W^-1
    block = w_inv.conj().T @ h @ w_inv
    block = (block + block.conj().T) / 2
    factor = math.sqrt(scale) * (h / scale) @ w_inv
    return LocalTerm(tuple(support), block, kind, center, factor)


def build_P(layout: ClusterLayout, omega: OmegaDeformation | None, i: int) -> LocalTerm:
    if layout.roles[i] != "A":
        raise InputError(f"qubit {i} is not in group A")
    K = build_K(layout, i)
    h = np.eye(1 << len(K.support)) - K.matrix()
    return _term("P", i, K.support, h, 2.0, _inverse_factor(layout, omega, K.support))


def q_field_strength(lam: LambdaDeformation | None, layout: ClusterLayout, k: int) -> float:
    return 0.0 if lam is None else lam.beta_J(layout.target_map[k])


def build_Q(
    layout: ClusterLayout, omega: OmegaDeformation | None, lam: LambdaDeformation | None, k: int
) -> LocalTerm:
    if layout.roles[k] == "A":
        raise InputError(f"qubit {k} is in group A")
    K = build_K(layout, k)
    gamma, E = gamma_energy(q_field_strength(lam, layout, k))
    dim = 1 << len(K.support)
    z_k = reduce(np.kron, [(Z if q == k else I2).matrix for q in K.support])
    # K and Z_k anticommute, so -K - gamma Z_k has eigenvalues +-cosh and h = 2 cosh * projector
    h = -K.matrix() - gamma * z_k - E * np.eye(dim)
    return _term("Q", k, K.support, h, -2.0 * E, _inverse_factor(layout, omega, K.support))


@dataclass(eq=False)
class SparseOperator:
    """Sum of local terms on ``n_qubits`` lattice qubits (qubit 0 most significant)."""

    n_qubits: int
    terms: list[LocalTerm]
    _csr: scipy.sparse.csr_matrix | None = field(default=None, repr=False)
    matvec_count: int = 0

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free application of the sum of terms."""
        self.matvec_count += 1
        n = self.n_qubits
        psi = np.asarray(vec, dtype=complex).reshape([2] * n)
        out = np.zeros_like(psi)
        for term in self.terms:
            k = len(term.support)
            rest = [q for q in range(n) if q not in term.support]
            perm = list(term.support) + rest
            moved = np.transpose(psi, perm).reshape(1 << k, -1)
            res = (term.block @ moved).reshape([2] * n)
            out += np.transpose(res, np.argsort(perm))
        return out.reshape(-1)

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        """Explicitly assembled CSR matrix (memoized)."""
        if self._csr is not None:
            return self._csr
        n = self.n_qubits
        dim = self.dimension
        idx = np.arange(dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for term in self.terms:
            k = len(term.support)
            shifts = np.array([n - 1 - q for q in term.support], dtype=np.int64)
            bits = (idx[:, None] >> shifts) & 1
            sub = (bits << np.arange(k - 1, -1, -1)).sum(axis=1)
            cleared = idx & ~np.bitwise_or.reduce(np.int64(1) << shifts)
            for s_col in range(1 << k):
                j = cleared.copy()
                for b in range(k):
                    if s_col >> (k - 1 - b) & 1:
                        j |= np.int64(1) << shifts[b]
                v = term.block[sub, s_col]
                keep = v != 0
                rows.append(idx[keep])
                cols.append(j[keep])
                vals.append(v[keep])
        mat = scipy.sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        ).tocsr()
        mat.sum_duplicates()
        self._csr = mat
        return mat

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def as_linear_operator(self) -> scipy.sparse.linalg.LinearOperator:
        return scipy.sparse.linalg.LinearOperator(
            (self.dimension, self.dimension), matvec=self.matvec, dtype=complex
        )

    def expectation(self, state: StateVector) -> float:
        v = state.amplitudes
        return float(np.vdot(v, self.matvec(v)).real / np.vdot(v, v).real)

    def max_term_norm(self) -> float:
        return max((t.norm() for t in self.terms), default=0.0)

    def term_dump(self) -> list[dict]:
        return [
            {
                "support": list(t.support),
                "kind": t.kind,
                "block": [[[float(z.real), float(z.imag)] for z in row] for row in t.block],
            }
            for t in self.terms
        ]


def assemble(
    layout: ClusterLayout, omega: OmegaDeformation | None, lam: LambdaDeformation | None
) -> SparseOperator:
    n = layout.lattice.size
    if (1 << n) > limits.eigen_dim_cap():
        raise ResourceError(f"{n} lattice qubits exceeds the diagonalization budget")
    terms = []
    for q in range(n):
        if layout.roles[q] == "A":
            terms.append(build_P(layout, omega, q))
        else:
            terms.append(build_Q(layout, omega, lam, q))
    return SparseOperator(n, terms)


@dataclass(frozen=True)
class GroundReport:
    E0: float
    E1: float
    gap: float
    fidelity: float
    degeneracy_flag: bool
    norm: float
    residual: float
    iterations: int
    method: str
    ground_state: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "E0": self.E0,
            "E1": self.E1,
            "gap": self.gap,
            "fidelity": self.fidelity,
            "degeneracy_flag": self.degeneracy_flag,
            "norm": self.norm,
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
        }


def ground_analysis(
    H: SparseOperator, reference: StateVector | None = None, method: str = "auto", seed: int = 0
) -> GroundReport:
    """Two lowest eigenvalues of ``H`` and the overlap of its ground vector with ``reference``.

    ``method`` is ``"dense"`` (full diagonalization, dimension <= 2**13),
    ``"shift-invert"`` (Lanczos on ``(H - sigma)^-1`` through a sparse LU
    factorization), ``"lanczos"`` (implicitly restarted Lanczos on the
    matrix-free operator) or ``"auto"``.  Plain Lanczos converges at a rate
    set by gap / norm, which the smoothing makes tiny, so ``"auto"`` prefers
    the factorization whenever the explicit matrix fits.  ``seed`` fixes the Lanczos start vector.
    """
    dim = H.dimension
    if dim > limits.eigen_dim_cap():
        raise ResourceError(f"dimension {dim} exceeds the eigensolver budget")
    if method == "auto":
        if dim <= DENSE_AUTO_CAP:
            method = "dense"
        else:
            method = "shift-invert" if dim <= SPARSE_FACTOR_CAP else "lanczos"
    if method == "dense" and dim > limits.DENSE_EIGEN_CAP:
        raise ResourceError(f"dense diagonalization is limited to dimension {limits.DENSE_EIGEN_CAP}")
    if dim < 4 and method != "dense":
        method = "dense"

    start = H.matvec_count
    if method == "dense":
        evals, evecs = scipy.linalg.eigh(H.to_dense())
        E0, E1 = float(evals[0]), float(evals[1]) if dim > 1 else math.inf
        v0 = evecs[:, 0]
        norm = float(max(abs(evals[0]), abs(evals[-1])))
        iterations = 0
    elif method in ("lanczos", "shift-invert"):
        op = H.as_linear_operator()
        rng = np.random.default_rng(seed)
        guess = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        try:
            if method == "lanczos":
                evals, evecs = scipy.sparse.linalg.eigsh(
                    op, k=2, which="SA", tol=EIGEN_TOL, maxiter=EIGEN_MAXITER, v0=guess
                )
            else:
                shifted = (H.to_sparse() - SHIFT * scipy.sparse.identity(dim, format="csr")).tocsc()
                lu = scipy.sparse.linalg.splu(shifted)
                solves = [0]

                def solve(x):
                    solves[0] += 1
                    return lu.solve(np.asarray(x, dtype=complex).reshape(-1))

                inv = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=solve, dtype=complex)
                evals, evecs = scipy.sparse.linalg.eigsh(
                    H.to_sparse(), k=2, sigma=SHIFT, which="LM", OPinv=inv, tol=EIGEN_TOL,
                    maxiter=EIGEN_MAXITER, v0=guess,
                )
            iterations = H.matvec_count - start if method == "lanczos" else solves[0]
            top = scipy.sparse.linalg.eigsh(op, k=1, which="LA", tol=1e-6, maxiter=EIGEN_MAXITER, v0=guess)[0]
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"{method} did not converge after {H.matvec_count - start} matrix-vector products",
                iterations=H.matvec_count - start,
            ) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        E0, E1 = float(evals[0]), float(evals[1])
        v0 = evecs[:, 0]
        norm = float(max(abs(top[0]), abs(E0)))
    else:
        raise InputError(f"unknown eigensolver method {method!r}")

    residual = float(np.linalg.norm(H.matvec(v0) - E0 * v0))
    if method != "dense" and residual > max(EIGEN_TOL * norm, 1e-8):
        raise ConvergenceError(f"ground vector residual {residual:.3e} too large", residual, iterations)
    fid = math.nan
    if reference is not None:
        ref = reference.amplitudes
        fid = float(abs(np.vdot(ref, v0)) ** 2 / (np.vdot(ref, ref).real * np.vdot(v0, v0).real))
    gap = E1 - E0
    return GroundReport(E0, E1, gap, fid, bool(gap < DEGENERACY_TOL), norm, residual, iterations, method, v0)
