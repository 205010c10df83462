"""Classical Ising-type spin models and their brute-force thermal oracle.

A configuration of ``n`` spins is an integer in ``[0, 2**n)`` whose most
significant bit is spin 0; :func:`config_bits` and :func:`config_index`
convert between that integer and an explicit bit tuple.  Every term of a
:class:`SpinModel` contributes ``J * (-1) ** (xor of its spins)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import limits
from .errors import InputError, ResourceError, UnsupportedEncodingError

DEFAULT_MAX_ARITY = 3
ZERO_COEFFICIENT_TOL = 1e-12
_CHUNK = 1 << 20

SpinConfig = tuple[int, ...]
Observable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParityTerm:
    sites: tuple[int, ...]
    J: float

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise InputError("a parity term needs at least one site")
        if len(set(sites)) != len(sites):
            raise InputError(f"duplicate site in term {sites}")
        if any(s < 0 for s in sites):
            raise InputError(f"negative site index in term {sites}")
        J = float(self.J)
        if not math.isfinite(J):
            raise InputError(f"coupling of term {sites} is not finite")
        object.__setattr__(self, "sites", tuple(sorted(sites)))
        object.__setattr__(self, "J", J)

    @property
    def arity(self) -> int:
        return len(self.sites)


@dataclass(frozen=True)
class SpinModel:
    """Classical Hamiltonian ``offset + sum_T J_T (-1)^{xor_{i in T} s_i}``.

    Terms on identical site sets are merged by adding couplings, and the
    term list is kept sorted by ``(arity, sites)``.  Zero couplings are kept:
    a pair term with ``J = 0`` still owns an interaction qubit downstream.
    """

    n_spins: int
    terms: tuple[ParityTerm, ...] = ()
    offset: float = 0.0
    max_arity: int = DEFAULT_MAX_ARITY

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise InputError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        if not math.isfinite(float(self.offset)):
            raise InputError("offset is not finite")
        object.__setattr__(self, "offset", float(self.offset))
        merged: dict[tuple[int, ...], float] = {}
        for term in self.terms:
            if not isinstance(term, ParityTerm):
                term = ParityTerm(*term)
            if term.sites[-1] >= self.n_spins:
                raise InputError(f"term {term.sites} references a spin >= n_spins={self.n_spins}")
            if term.arity > self.max_arity:
                raise InputError(f"term {term.sites} has arity {term.arity} > max_arity={self.max_arity}")
            merged[term.sites] = merged.get(term.sites, 0.0) + term.J
        ordered = sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
        object.__setattr__(self, "terms", tuple(ParityTerm(s, J) for s, J in ordered))

    def field(self, spin: int) -> float:
        """Arity-1 parity coefficient acting on ``spin`` (0 when absent)."""
        for term in self.terms:
            if term.sites == (spin,):
                return term.J
        return 0.0

    @property
    def interaction_terms(self) -> tuple[ParityTerm, ...]:
        return tuple(t for t in self.terms if t.arity >= 2)

    def masks(self) -> np.ndarray:
        n = self.n_spins
        return np.array([sum(1 << (n - 1 - s) for s in t.sites) for t in self.terms], dtype=np.int64)

    def couplings(self) -> np.ndarray:
        return np.array([t.J for t in self.terms], dtype=float)

    def without_offset(self) -> "SpinModel":
        return SpinModel(self.n_spins, self.terms, 0.0, self.max_arity)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "offset": self.offset,
            "terms": [{"sites": list(t.sites), "J": t.J} for t in self.terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict, max_arity: int | None = None) -> "SpinModel":
        if not isinstance(data, dict):
            raise InputError("model must be a JSON object")
        unknown = set(data) - {"n_spins", "offset", "terms"}
        if unknown:
            raise InputError(f"unknown model keys: {sorted(unknown)}")
        try:
            n = data["n_spins"]
            raw_terms = data.get("terms", [])
            offset = data.get("offset", 0.0)
            if isinstance(n, bool) or not isinstance(n, int):
                raise InputError("n_spins must be an integer")
            terms = []
            for t in raw_terms:
                if set(t) != {"sites", "J"}:
                    raise InputError(f"term entries need exactly 'sites' and 'J', got {sorted(t)}")
                if not all(isinstance(s, int) and not isinstance(s, bool) for s in t["sites"]):
                    raise InputError(f"sites must be integers: {t['sites']}")
                if isinstance(t["J"], bool) or not isinstance(t["J"], (int, float)):
                    raise InputError(f"J must be a number: {t['J']!r}")
                terms.append(ParityTerm(tuple(t["sites"]), t["J"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed model: {exc}") from exc
        if max_arity is None:
            max_arity = max([DEFAULT_MAX_ARITY] + [t.arity for t in terms])
        return cls(n, tuple(terms), offset, max_arity)

    @classmethod
    def from_json(cls, text: str, max_arity: int | None = None) -> "SpinModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"model file is not valid JSON: {exc}") from exc
        return cls.from_dict(data, max_arity=max_arity)


@dataclass(frozen=True, eq=False)
class GeneralModel:
    """q-level sites with arbitrary k-body energy tables.

    Each table is stored row-major over its site list, the first listed
    site being the most significant digit.
    """

    n_sites: int
    q: int
    interactions: tuple[tuple[tuple[int, ...], np.ndarray], ...] = field(default=())

    def __post_init__(self):
        if self.n_sites < 1:
            raise InputError("n_sites must be positive")
        if self.q < 2:
            raise InputError("q must be at least 2")
        cleaned = []
        for sites, table in self.interactions:
            sites = tuple(int(s) for s in sites)
            table = np.asarray(table, dtype=float).reshape(-1)
            if not sites or len(set(sites)) != len(sites):
                raise InputError(f"interaction sites must be nonempty and distinct: {sites}")
            if min(sites) < 0 or max(sites) >= self.n_sites:
                raise InputError(f"interaction sites {sites} out of range for n_sites={self.n_sites}")
            if table.size != self.q ** len(sites):
                raise InputError(f"table for {sites} has {table.size} entries, expected {self.q ** len(sites)}")
            if not np.all(np.isfinite(table)):
                raise InputError(f"table for {sites} has non-finite entries")
            cleaned.append((sites, table))
        object.__setattr__(self, "interactions", tuple(cleaned))

    @property
    def bits_per_site(self) -> int:
        return int(self.q).bit_length() - 1

    def energy(self, values: Sequence[int]) -> float:
        total = 0.0
        for sites, table in self.interactions:
            idx = 0
            for s in sites:
                idx = idx * self.q + int(values[s])
            total += table[idx]
        return total

    @classmethod
    def from_dict(cls, data: dict) -> "GeneralModel":
        try:
            q = data["q"]
            inter = [(tuple(it["sites"]), it["table"]) for it in data["interactions"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed general model: {exc}") from exc
        n_sites = data.get("n_sites")
        if n_sites is None:
            n_sites = 1 + max((max(s) for s, _ in inter if s), default=0)
        return cls(int(n_sites), int(q), tuple(inter))

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "q": self.q,
            "interactions": [{"sites": list(s), "table": t.tolist()} for s, t in self.interactions],
        }


@dataclass(frozen=True, eq=False)
class ThermalSummary:
    beta: float
    Z: float
    log_Z: float
    probabilities: np.ndarray = field(repr=False)

    def probability(self, config: SpinConfig) -> float:
        return float(self.probabilities[config_index(config)])


def config_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise InputError(f"spin values must be 0 or 1, got {b!r}")
        idx = (idx << 1) | int(b)
    return idx


def config_bits(index: int, n: int) -> SpinConfig:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def bit_table(indices: np.ndarray, n: int) -> np.ndarray:
    """Rows of spin values (spin 0 first) for an array of configuration indices."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.int8)


def _parities(indices: np.ndarray, masks: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(indices[:, None] & masks[None, :]) & 1).astype(np.int8)


def _energies(model: SpinModel, indices: np.ndarray) -> np.ndarray:
    if not model.terms:
        return np.full(indices.shape, model.offset)
    signs = 1 - 2 * _parities(indices, model.masks()).astype(float)
    return model.offset + signs @ model.couplings()


def energy(model: SpinModel, s: Sequence[int]) -> float:
    if len(s) != model.n_spins:
        raise InputError(f"configuration has {len(s)} spins, model has {model.n_spins}")
    config_index(s)  # validates 0/1 entries
    total = model.offset
    for term in model.terms:
        parity = sum(s[i] for i in term.sites) & 1
        total += -term.J if parity else term.J
    return float(total)


def all_energies(model: SpinModel) -> np.ndarray:
    _check_brute_force(model)
    n = model.n_spins
    out = np.empty(1 << n)
    for start in range(0, 1 << n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        out[start : start + idx.size] = _energies(model, idx)
    return out


def _check_brute_force(model: SpinModel) -> None:
    cap = limits.brute_force_cap()
    if model.n_spins > cap:
        raise ResourceError(
            f"brute-force thermal sums are capped at {cap} spins; model has {model.n_spins}"
        )


def partition_function(model: SpinModel, beta: float) -> ThermalSummary:
    """Exact Boltzmann distribution by enumerating all ``2**n`` configurations."""
    beta = float(beta)
    if not math.isfinite(beta):
        raise InputError("beta must be finite")
    E = all_energies(model)
    exponent = -beta * E
    shift = exponent.max()
    weights = np.exp(exponent - shift)
    total = weights.sum()
    log_Z = float(shift + math.log(total))
    Z = math.exp(log_Z) if log_Z < 709.0 else math.inf
    return ThermalSummary(beta, Z, log_Z, weights / total)


def observable_expectation(model: SpinModel, beta: float, f: Observable) -> float:
    """Boltzmann average of ``f``.

    ``f`` receives a ``(N, n_spins)`` array of 0/1 spin values and returns
    ``N`` reals, so one call evaluates a whole batch of configurations.
    """
    probs = partition_function(model, beta).probabilities
    n = model.n_spins
    total = 0.0
    for start in range(0, 1 << n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        values = np.asarray(f(bit_table(idx, n)), dtype=float).reshape(-1)
        total += float(values @ probs[start : start + idx.size])
    return total


def energy_observable(model: SpinModel) -> Observable:
    n = model.n_spins
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)

    def f(bits: np.ndarray) -> np.ndarray:
        idx = (bits.astype(np.int64) << shifts).sum(axis=1)
        return _energies(model, idx)

    return f


def parity_observable(sites: Iterable[int]) -> Observable:
    """``(-1)^{xor of the given spins}``."""
    sites = list(sites)

    def f(bits: np.ndarray) -> np.ndarray:
        return 1.0 - 2.0 * (bits[:, sites].sum(axis=1) & 1)

    return f


def parse_observable(spec: str, model: SpinModel) -> Observable:
    """``"energy"`` or ``"parity:i,j,..."``."""
    if spec == "energy":
        return energy_observable(model)
    if spec.startswith("parity:"):
        try:
            sites = [int(tok) for tok in spec[len("parity:") :].split(",") if tok.strip()]
        except ValueError as exc:
            raise InputError(f"bad parity observable {spec!r}") from exc
        if not sites or any(s < 0 or s >= model.n_spins for s in sites):
            raise InputError(f"parity observable sites out of range: {spec!r}")
        return parity_observable(sites)
    raise InputError(f"unknown observable {spec!r}; use 'energy' or 'parity:<sites>'")


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (length must be a power of two).

    Applying it twice multiplies by the length, so ``wht(wht(v)) / len(v) == v``.
    """
    a = np.array(values, dtype=float)
    n = a.size
    if n & (n - 1):
        raise InputError("transform length must be a power of two")
    h = 1
    while h < n:
        view = a.reshape(-1, 2, h)
        x = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = x - view[:, 1, :]
        h *= 2
    return a


def encode_general(gm: GeneralModel, max_arity: int = DEFAULT_MAX_ARITY) -> SpinModel:
    """Rewrite a q-level model as an equivalent Ising-type :class:`SpinModel`.

    Site ``x`` becomes spins ``x*b .. x*b+b-1`` (``b = log2 q``, most
    significant bit first).  Each energy table over ``m`` bits is expanded in
    the parity basis: coefficient ``c_S = 2**-m * sum_x E(x) (-1)^{S.x}``,
    the constant ``c_0`` going to the offset.
    """
    q = gm.q
    if q & (q - 1):
        raise UnsupportedEncodingError(
            f"q={q} is not a power of two; surplus encoded states would need an unspecified treatment"
        )
    b = gm.bits_per_site
    offset = 0.0
    couplings: dict[tuple[int, ...], float] = {}
    for sites, table in gm.interactions:
        m = b * len(sites)
        bit_spins = [s * b + j for s in sites for j in range(b)]
        coeffs = walsh_hadamard(table) / (1 << m)
        offset += coeffs[0]
        for S in range(1, 1 << m):
            c = coeffs[S]
            if abs(c) <= ZERO_COEFFICIENT_TOL:
                continue
            spins = tuple(sorted(bit_spins[j] for j in range(m) if (S >> (m - 1 - j)) & 1))
            couplings[spins] = couplings.get(spins, 0.0) + c
    terms = []
    for spins, J in couplings.items():
        if abs(J) <= ZERO_COEFFICIENT_TOL:
            continue
        if len(spins) > max_arity:
            raise InputError(
                f"encoding needs a {len(spins)}-body term, above max_arity={max_arity}; raise the cap"
            )
        terms.append(ParityTerm(spins, J))
    return SpinModel(gm.n_sites * b, tuple(terms), offset, max_arity)


def encode_values(gm: GeneralModel, values: Sequence[int]) -> SpinConfig:
    """Spin configuration encoding the q-level site values."""
    b = gm.bits_per_site
    bits: list[int] = []
    for v in values:
        if not 0 <= v < gm.q:
            raise InputError(f"site value {v} outside [0, {gm.q})")
        bits.extend((v >> (b - 1 - j)) & 1 for j in range(b))
    return tuple(bits)


def random_model(
    rng: np.random.Generator,
    max_spins: int,
    max_arity: int = DEFAULT_MAX_ARITY,
    coupling_range: float = 2.0,
    max_terms: int | None = None,
) -> SpinModel:
    """Random Ising-type model with couplings uniform in ``[-range, range]``."""
    n = int(rng.integers(1, max_spins + 1))
    top = min(max_arity, n)
    if max_terms is None:
        max_terms = 2 * n
    count = int(rng.integers(0, max_terms + 1))
    terms: dict[tuple[int, ...], float] = {}
    for _ in range(count):
        k = int(rng.integers(1, top + 1))
        sites = tuple(sorted(int(x) for x in rng.choice(n, size=k, replace=False)))
        J = float(rng.uniform(-coupling_range, coupling_range))
        # a repeated site set is dropped so every coupling stays in range
        terms.setdefault(sites, J)
    return SpinModel(n, tuple(ParityTerm(s, J) for s, J in terms.items()), 0.0, max_arity)
