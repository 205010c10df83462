"""Carving clique states out of a 2D cluster state.

Projecting a cluster qubit onto ``|0>`` removes it from the graph; projecting
it onto ``|+>`` sums over its bit and leaves the constraint that the XOR of
its surviving neighbours vanishes.  When the surviving qubits split into
*variables* (outputs plus summed copies) and *checks* (summed, adjacent only
to variables) the projected state is a uniform superposition over the
solutions of a parity-check system.  The clique state is exactly such a
superposition (``y_T = xor_{a in T} s_a`` for every interaction qubit), so a
layout is a placement of a suitable check system on the lattice as an induced
subgraph.  Two placements are tried:

* a backtracking search for a compact embedding, trying several bases of
  the check space on lattices of increasing area;
* a general fallback that runs one wire per spin down the lattice and
  builds each parity with nearest-neighbour XOR gadgets.

Every layout is checked over GF(2) and, within the dense cap, by projecting
the cluster state numerically.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import gf2, limits
from .clique import CliqueSystem, LambdaDeformation, build_clique_state
from .errors import CarvingError, EmbeddingError, InputError
from .spin_model import SpinModel
from .state import (
    KET_0,
    KET_PLUS,
    LatticeGraph,
    SingleQubitOp,
    StateVector,
    _check_dense,
    apply_locals,
    cluster_state,
)

FIDELITY_TOL = 1e-10
NORM_TOL = 1e-10
OMEGA_NORM_TOL = 1e-12
DEFAULT_EPSILON = 0.05
DEFAULT_MAX_AREA = 20
DEFAULT_SEARCH_BUDGET = 200_000
MAX_BASES = 64

_PAULI_STATES = {
    "Z+": KET_0,
    "Z-": np.array([0, 1], dtype=complex),
    "X+": KET_PLUS,
    "X-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "Y+": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "Y-": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def orthogonal(omega: np.ndarray) -> np.ndarray:
    a, b = omega
    return np.array([-np.conj(b), np.conj(a)], dtype=complex)


def pauli_label(omega: np.ndarray) -> str | None:
    """Name of the Pauli eigenstate equal to ``omega`` up to phase, if any."""
    for name, ket in _PAULI_STATES.items():
        if abs(abs(np.vdot(ket, omega)) - 1.0) < 1e-12:
            return name
    return None


@dataclass(frozen=True, eq=False)
class ClusterLayout:
    """Lattice, A/B/C roles, projection states on A and the output map.

    ``target_map`` sends every B or C lattice qubit to the clique-system
    qubit it carries; ``omega`` holds the projection state of every A qubit.
    """

    lattice: LatticeGraph
    roles: str
    target_map: dict[int, int]
    omega: dict[int, np.ndarray] = field(repr=False)
    model: SpinModel | None = None
    status: str = "unverified"

    def __post_init__(self):
        n = self.lattice.size
        if len(self.roles) != n or set(self.roles) - set("ABC"):
            raise InputError(f"roles must be {n} characters from 'ABC'")
        omega = {}
        for q, vec in self.omega.items():
            vec = np.asarray(vec, dtype=complex).reshape(2)
            if abs(np.linalg.norm(vec) - 1.0) > OMEGA_NORM_TOL:
                raise InputError(f"omega on qubit {q} is not normalized")
            omega[int(q)] = vec
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "target_map", {int(k): int(v) for k, v in self.target_map.items()})
        a_set = {q for q, r in enumerate(self.roles) if r == "A"}
        if set(omega) != a_set:
            raise InputError("omega must be given for exactly the A qubits")
        if set(self.target_map) != set(range(n)) - a_set:
            raise InputError("target_map must cover exactly the B and C qubits")
        if len(set(self.target_map.values())) != len(self.target_map):
            raise InputError("target_map is not injective")
        if self.model is not None:
            sys = CliqueSystem(self.model)
            if sorted(self.target_map.values()) != list(range(sys.n_qubits)):
                raise InputError("target_map does not cover the clique system")
            for q, t in self.target_map.items():
                want = "B" if t < sys.n_interaction else "C"
                if self.roles[q] != want:
                    raise InputError(f"lattice qubit {q} carries clique qubit {t} but has role {self.roles[q]}")

    @property
    def a_qubits(self) -> list[int]:
        return [q for q, r in enumerate(self.roles) if r == "A"]

    @property
    def output_qubits(self) -> list[int]:
        return [q for q, r in enumerate(self.roles) if r != "A"]

    @property
    def is_pauli_pattern(self) -> bool:
        return all(pauli_label(v) is not None for v in self.omega.values())

    def with_omega(self, qubit: int, vector: np.ndarray) -> "ClusterLayout":
        omega = dict(self.omega)
        omega[qubit] = np.asarray(vector, dtype=complex)
        return replace(self, omega=omega, status="unverified")

    def one_a_neighbor_report(self) -> dict[int, int]:
        """Number of A neighbours of every B/C qubit."""
        a = set(self.a_qubits)
        return {k: sum(1 for b in self.lattice.neighbors(k) if b in a) for k in self.output_qubits}

    def satisfies_one_a_neighbor(self) -> bool:
        return all(v == 1 for v in self.one_a_neighbor_report().values())

    def render(self) -> str:
        rows = []
        for r in range(self.lattice.rows):
            cells = []
            for c in range(self.lattice.cols):
                q = self.lattice.index(r, c)
                if self.roles[q] == "A":
                    label = pauli_label(self.omega[q]) or "w"
                    cells.append({"Z+": ".", "X+": "+"}.get(label, label[0].lower()))
                else:
                    cells.append(self.roles[q])
            rows.append(" ".join(cells))
        return "\n".join(rows)

    def to_dict(self) -> dict:
        data = {
            "rows": self.lattice.rows,
            "cols": self.lattice.cols,
            "roles": self.roles,
            "omega": [
                {"qubit": q, "amplitudes": [[float(z.real), float(z.imag)] for z in self.omega[q]]}
                for q in sorted(self.omega)
            ],
            "target_map": {str(k): v for k, v in sorted(self.target_map.items())},
            "status": self.status,
        }
        if self.model is not None:
            data["model"] = self.model.to_dict()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterLayout":
        try:
            lattice = LatticeGraph(int(data["rows"]), int(data["cols"]))
            omega = {
                int(e["qubit"]): np.array([complex(re, im) for re, im in e["amplitudes"]])
                for e in data["omega"]
            }
            target_map = {int(k): int(v) for k, v in data["target_map"].items()}
            model = SpinModel.from_dict(data["model"]) if "model" in data else None
            return cls(lattice, str(data["roles"]), target_map, omega, model, data.get("status", "unverified"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed layout: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ClusterLayout":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise InputError(f"layout file is not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class CarvingCertificate:
    achieved_fidelity: float
    branch_norm: float
    expected_branch_norm: float | None
    local_corrections: dict[int, str]
    pauli_pattern: bool
    algebraic_check: bool | None
    valid: bool

    def to_dict(self) -> dict:
        return {
            "achieved_fidelity": self.achieved_fidelity,
            "branch_norm": self.branch_norm,
            "expected_branch_norm": self.expected_branch_norm,
            "local_corrections": {str(k): v for k, v in self.local_corrections.items()},
            "pauli_pattern": self.pauli_pattern,
            "algebraic_check": self.algebraic_check,
            "valid": self.valid,
        }


@dataclass(frozen=True, eq=False)
class OmegaDeformation:
    epsilon: float
    ops: dict[int, SingleQubitOp]
    inverses: dict[int, SingleQubitOp]


# ---------------------------------------------------------------------------
# dense projection helpers


def _project(tensor: np.ndarray, bras: dict[int, np.ndarray]) -> np.ndarray:
    """Contract the listed axes with ``<bra|``; remaining axes keep their order."""
    for q in sorted(bras, reverse=True):
        tensor = np.tensordot(tensor, np.conj(bras[q]), axes=([q], [0]))
    return tensor


def _to_clique_order(tensor: np.ndarray, layout: ClusterLayout) -> np.ndarray:
    outputs = layout.output_qubits
    clique_of_axis = [layout.target_map[q] for q in outputs]
    perm = [clique_of_axis.index(t) for t in range(len(outputs))]
    return np.transpose(tensor, perm) if perm else tensor


def carved_state(layout: ClusterLayout, lam: LambdaDeformation | None = None) -> StateVector:
    """``(prod_A <omega_a|) Lambda |C>`` in clique-qubit order, unnormalized."""
    _check_dense(layout.lattice.size)
    state = cluster_state(layout.lattice)
    if lam is not None:
        state = apply_locals(state, _routed_lambda(layout, lam))
    t = _project(state.tensor(), layout.omega)
    t = _to_clique_order(np.asarray(t), layout)
    return StateVector(len(layout.output_qubits), np.asarray(t).reshape(-1))


def exact_deformed_state(layout: ClusterLayout, lam: LambdaDeformation | None) -> StateVector:
    """Exact-projection route to the deformed clique state, normalized."""
    return carved_state(layout, lam).normalized()


def verify_carving(layout: ClusterLayout, sys: CliqueSystem, strict: bool = True) -> CarvingCertificate:
    """Project the A qubits of the cluster and compare with the clique state."""
    if sorted(layout.target_map.values()) != list(range(sys.n_qubits)):
        raise InputError("layout outputs do not match the clique system")
    carved = carved_state(layout)
    target = build_clique_state(sys.model)[1]
    norm = carved.norm()
    fid = 0.0 if norm == 0.0 else abs(np.vdot(target.amplitudes, carved.amplitudes)) ** 2 / norm**2
    fid = float(min(1.0, fid))
    pauli = layout.is_pauli_pattern
    expected = 2.0 ** (-len(layout.a_qubits) / 2) if pauli else None
    algebraic = tanner_check(layout, sys) if pauli else None
    ok = fid >= 1.0 - FIDELITY_TOL and (expected is None or abs(norm - expected) <= NORM_TOL)
    cert = CarvingCertificate(
        achieved_fidelity=fid,
        branch_norm=norm,
        expected_branch_norm=expected,
        local_corrections={q: "I" for q in layout.output_qubits},
        pauli_pattern=pauli,
        algebraic_check=algebraic,
        valid=ok,
    )
    if strict and not ok:
        raise CarvingError(
            f"projected state does not reproduce the clique state: fidelity {fid:.3e}, "
            f"branch norm {norm:.6e} (expected {expected})",
            cert,
        )
    return cert


def branch_norm_census(layout: ClusterLayout) -> np.ndarray:
    """Squared norms of all ``omega`` / ``omega-perp`` projection branches.

    Entry ``b`` has bit ``j`` (most significant first, over A qubits in
    increasing lattice order) set when the j-th A qubit is projected onto
    the orthogonal state.
    """
    a_qubits = layout.a_qubits
    if len(a_qubits) > 20:
        raise InputError(f"census over {len(a_qubits)} A qubits exceeds the limit of 20")
    _check_dense(layout.lattice.size)
    t = cluster_state(layout.lattice).tensor()
    for q in a_qubits:
        w = layout.omega[q]
        basis = np.array([np.conj(w), np.conj(orthogonal(w))])
        t = np.moveaxis(np.tensordot(basis, t, axes=([1], [q])), 0, q)
    rest = layout.output_qubits
    t = np.transpose(t, a_qubits + rest).reshape(1 << len(a_qubits), -1)
    return (np.abs(t) ** 2).sum(axis=1)


def smooth(layout: ClusterLayout, epsilon: float) -> OmegaDeformation:
    """Invertible ``(1-eps)|w><w| + eps|w_perp><w_perp|`` on every A qubit."""
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.5:
        raise InputError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    ops, inverses = {}, {}
    for q, w in layout.omega.items():
        wp = orthogonal(w)
        pw, pp = np.outer(w, w.conj()), np.outer(wp, wp.conj())
        ops[q] = SingleQubitOp((1 - epsilon) * pw + epsilon * pp)
        inverses[q] = SingleQubitOp(pw / (1 - epsilon) + pp / epsilon)
    return OmegaDeformation(epsilon, ops, inverses)


def _routed_lambda(layout: ClusterLayout, lam: LambdaDeformation) -> dict[int, SingleQubitOp]:
    factors = lam.factors
    return {q: factors[t] for q, t in layout.target_map.items()}


def build_deformed_cluster(
    layout: ClusterLayout,
    omega: OmegaDeformation | None,
    lam: LambdaDeformation | None,
) -> StateVector:
    """Normalized ``Omega (x) Lambda |C>`` on the full lattice."""
    _check_dense(layout.lattice.size)
    ops = {}
    if omega is not None:
        ops.update(omega.ops)
    if lam is not None:
        ops.update(_routed_lambda(layout, lam))
    return apply_locals(cluster_state(layout.lattice), ops).normalized()


def embed_target(layout: ClusterLayout, clique_state: StateVector) -> StateVector:
    """``(x)_A |omega_a> (x) clique_state`` laid out in lattice order."""
    outputs = layout.output_qubits
    t = clique_state.tensor()
    t = np.transpose(t, [layout.target_map[q] for q in outputs]) if outputs else t
    for q in layout.a_qubits:
        t = np.moveaxis(np.tensordot(t, layout.omega[q], axes=0), -1, q)
    return StateVector(layout.lattice.size, np.ascontiguousarray(t).reshape(-1))


def fidelity_bound(epsilon: float, n_a: int) -> float:
    return (1.0 - epsilon) ** n_a


# ---------------------------------------------------------------------------
# GF(2) check of |0>/|+> patterns


def tanner_check(layout: ClusterLayout, sys: CliqueSystem) -> bool | None:
    """Algebraic certificate for patterns built from ``|0>`` and ``|+>`` only.

    Returns ``None`` when the pattern is outside that class or the surviving
    graph is not a variable/check bipartition, otherwise whether the parity
    system projects exactly onto the clique code with a unique completion
    (which is what makes every branch norm equal).
    """
    lat = layout.lattice
    deleted, summed = set(), set()
    for q, w in layout.omega.items():
        label = pauli_label(w)
        if label == "Z+":
            deleted.add(q)
        elif label == "X+":
            summed.add(q)
        else:
            return None
    outputs = set(layout.output_qubits)
    alive = outputs | summed
    colour: dict[int, int] = {}
    for start in sorted(alive, key=lambda q: (q not in outputs, q)):
        if start in colour:
            continue
        colour[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in lat.neighbors(u):
                if v not in alive:
                    continue
                if v not in colour:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    return None
    if any(colour[q] != 0 for q in outputs):
        return None
    variables = sorted(q for q in alive if colour[q] == 0)
    checks = sorted(q for q in alive if colour[q] == 1)
    pos = {q: i for i, q in enumerate(variables)}
    rows = []
    for c in checks:
        row = 0
        for v in lat.neighbors(c):
            if v in pos:
                row |= 1 << pos[v]
        rows.append(row)
    if gf2.rank(rows) != len(rows):
        return False
    solutions = gf2.nullspace(rows, len(variables))
    if len(solutions) != sys.model.n_spins:
        return False
    out_pos = [pos[q] for q in sorted(outputs, key=lambda q: layout.target_map[q])]

    def project(x: int) -> int:
        return sum(((x >> p) & 1) << i for i, p in enumerate(out_pos))

    projected = [project(x) for x in solutions]
    if gf2.rank(projected) != sys.model.n_spins:
        return False
    target = _clique_code(sys)
    basis = gf2.reduce_rows(target)
    return all(gf2.in_span(v, basis) for v in projected)


def _clique_code(sys: CliqueSystem) -> list[int]:
    """Generators of the clique code, bit ``t`` standing for clique qubit ``t``."""
    out = []
    for a in range(sys.model.n_spins):
        vec = 1 << sys.vertex_qubit(a)
        for e in sys.incident(a):
            vec |= 1 << e
        out.append(vec)
    return out


def _clique_checks(sys: CliqueSystem) -> list[int]:
    out = []
    for e, sites in sys.term_of_qubit.items():
        vec = 1 << e
        for a in sites:
            vec |= 1 << sys.vertex_qubit(a)
        out.append(vec)
    return out


# ---------------------------------------------------------------------------
# compact embedding search


def _candidate_bases(sys: CliqueSystem) -> list[list[int]]:
    natural = _clique_checks(sys)
    k = len(natural)
    if k == 0:
        return [[]]
    bases = [natural]
    if k > 8:
        return bases
    dual = []
    for mask in range(1, 1 << k):
        v = 0
        for i in range(k):
            if mask >> i & 1:
                v ^= natural[i]
        if v.bit_count() <= 4:
            dual.append(v)
    dual.sort(key=lambda v: (v.bit_count(), v))
    scored = []
    for combo in itertools.combinations(dual, k):
        if gf2.rank(combo) == k:
            scored.append((sum(v.bit_count() for v in combo), combo))
        if len(scored) > 4 * MAX_BASES:
            break
    scored.sort(key=lambda sc: sc[0])
    for _, combo in scored:
        if sorted(combo) != sorted(natural):
            bases.append(list(combo))
        if len(bases) >= MAX_BASES:
            break
    return bases


class _Budget:
    def __init__(self, steps: int):
        self.left = steps

    def spend(self) -> bool:
        self.left -= 1
        return self.left > 0


def _embed(n_vars: int, checks: list[int], lat: LatticeGraph, budget: _Budget) -> dict[int, int] | None:
    """Induced embedding of the Tanner graph into the lattice.

    Nodes ``0..n_vars-1`` are variables, ``n_vars + j`` is check ``j``.
    Returns node -> lattice site, or ``None``.
    """
    n_nodes = n_vars + len(checks)
    adj = [set() for _ in range(n_nodes)]
    for j, row in enumerate(checks):
        for v in range(n_vars):
            if row >> v & 1:
                adj[n_vars + j].add(v)
                adj[v].add(n_vars + j)
    if any(len(a) > 4 for a in adj):
        return None
    order: list[int] = []
    seen: set[int] = set()
    for root in sorted(range(n_nodes), key=lambda u: -len(adj[u])):
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in sorted(adj[u], key=lambda w: -len(adj[w])):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    nbrs = [set(lat.neighbors(q)) for q in range(lat.size)]
    site_of: dict[int, int] = {}
    used: dict[int, int] = {}

    def consistent(u: int, x: int) -> bool:
        if len(nbrs[x]) < len(adj[u]):
            return False
        for w, y in site_of.items():
            if (y in nbrs[x]) != (w in adj[u]):
                return False
        return True

    def place(i: int) -> bool:
        if i == len(order):
            return True
        if not budget.spend():
            return False
        u = order[i]
        anchors = [site_of[w] for w in adj[u] if w in site_of]
        if anchors:
            candidates = sorted(nbrs[anchors[0]])
        else:
            candidates = range(lat.size)
        for x in candidates:
            if x in used or not consistent(u, x):
                continue
            site_of[u] = x
            used[x] = u
            if place(i + 1):
                return True
            del site_of[u]
            del used[x]
        return False

    return dict(site_of) if place(0) else None


def _layout_from_embedding(
    sys: CliqueSystem, lat: LatticeGraph, placement: dict[int, int], n_vars: int
) -> ClusterLayout:
    roles = ["A"] * lat.size
    target_map = {}
    for node, site in placement.items():
        if node < n_vars:
            roles[site] = "B" if node < sys.n_interaction else "C"
            target_map[site] = node
    omega = {}
    for q in range(lat.size):
        if roles[q] == "A":
            node = next((u for u, s in placement.items() if s == q), None)
            omega[q] = KET_PLUS if node is not None else KET_0
    return ClusterLayout(lat, "".join(roles), target_map, omega, sys.model)


def _shapes(max_area: int):
    shapes = [(r, c) for r in range(1, max_area + 1) for c in range(r, max_area + 1) if r * c <= max_area]
    shapes.sort(key=lambda rc: (rc[0] * rc[1], rc[1] - rc[0]))
    return shapes


def search_layout(
    sys: CliqueSystem, max_area: int = DEFAULT_MAX_AREA, budget: int = DEFAULT_SEARCH_BUDGET
) -> ClusterLayout | None:
    """Smallest-area compact embedding found within the step budget."""
    n_vars = sys.n_qubits
    bases = _candidate_bases(sys)
    min_nodes = n_vars + len(bases[0])
    steps = _Budget(budget)
    for rows, cols in _shapes(max_area):
        if rows * cols < min_nodes:
            continue
        lat = LatticeGraph(rows, cols)
        for checks in bases:
            if steps.left <= 0:
                return None
            placement = _embed(n_vars, checks, lat, steps)
            if placement is not None:
                return _layout_from_embedding(sys, lat, placement, n_vars)
    return None


# ---------------------------------------------------------------------------
# general wire layout


def _lane_program(sys: CliqueSystem) -> list[tuple[int, int, int | None]]:
    """Nearest-neighbour XOR gates ``(control, target, emitted interaction qubit)``.

    Lane values are tracked as spin bitmasks; each term is accumulated into
    the lane of its largest spin, emitted, then undone.
    """
    n = sys.model.n_spins
    lanes = [1 << a for a in range(n)]
    gates: list[tuple[int, int, int | None]] = []

    def cx(c: int, t: int, emit: int | None = None):
        lanes[t] ^= lanes[c]
        gates.append((c, t, emit))

    def swap(i: int):
        cx(i, i + 1)
        cx(i + 1, i)
        cx(i, i + 1)

    terms = list(sys.term_of_qubit.items())
    for idx, (e, sites) in enumerate(terms):
        t = max(sites)
        sources = sorted(sites)[:-1]
        start = len(gates)
        for j, a in enumerate(reversed(sources)):
            for i in range(a, t - 1):
                swap(i)
            cx(t - 1, t, e if j == len(sources) - 1 else None)
            for i in reversed(range(a, t - 1)):
                swap(i)
        want = 0
        for a in sites:
            want |= 1 << a
        if lanes[t] != want:
            raise EmbeddingError("internal error: lane program produced the wrong parity")
        if idx < len(terms) - 1:
            for c, tt, _ in list(gates[start:]):
                cx(c, tt)
    return gates


def lane_layout(sys: CliqueSystem) -> ClusterLayout:
    """General construction: one vertical wire per spin, XOR gadgets between neighbours."""
    n = sys.model.n_spins
    gates = _lane_program(sys)
    col = [3 * i for i in range(n)]
    gate_rows = []
    row = 2
    for c, t, _ in gates:
        if gate_rows:
            row = max(row, gate_rows[-1] + 2)
        if row % 2 != c % 2:
            row += 1
        gate_rows.append(row)
    n_rows = (gate_rows[-1] + 2) if gate_rows else 2
    n_cols = col[-1] + 1
    lat = LatticeGraph(n_rows, n_cols)
    kind: dict[int, str] = {}
    target_map: dict[int, int] = {}
    for i in range(n):
        top = i % 2
        bottom = n_rows - 1 if (n_rows - 1) % 2 == i % 2 else n_rows - 2
        for r in range(top, bottom + 1):
            kind[lat.index(r, col[i])] = "var" if r % 2 == i % 2 else "check"
        target_map[lat.index(top, col[i])] = sys.vertex_qubit(i)
    for (c, t, emit), r in zip(gates, gate_rows):
        step = 1 if t > c else -1
        kind[lat.index(r, col[c] + step)] = "check"
        kind[lat.index(r, col[c] + 2 * step)] = "var"
        if emit is not None:
            target_map[lat.index(r + 1, col[t])] = emit
    roles, omega = [], {}
    for q in range(lat.size):
        if q in target_map:
            roles.append("B" if target_map[q] < sys.n_interaction else "C")
        else:
            roles.append("A")
            omega[q] = KET_PLUS if q in kind else KET_0
    return ClusterLayout(lat, "".join(roles), target_map, omega, sys.model)


def compile_layout(
    sys: CliqueSystem,
    verify: bool = True,
    max_area: int = DEFAULT_MAX_AREA,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> ClusterLayout:
    """Lattice layout whose projection yields the clique state.

    Within the dense cap the layout is verified by projection and returned
    with status ``"verified"``; larger layouts are returned ``"unverified"``
    after the GF(2) check.  A layout that fails either check is never
    returned.
    """
    layout = search_layout(sys, max_area=max_area, budget=budget)
    if layout is None:
        layout = lane_layout(sys)
    if tanner_check(layout, sys) is not True:
        raise EmbeddingError("no embedding found: candidate layout failed the parity-check certificate")
    if verify and layout.lattice.size <= limits.dense_cap():
        verify_carving(layout, sys)
        return replace(layout, status="verified")
    return replace(layout, status="unverified")
