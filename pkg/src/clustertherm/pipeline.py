"""End-to-end driver: classical oracle, clique state, carving, parent Hamiltonian.

Stages run in a fixed order and a stage selector runs every stage up to and
including the named one.  Each numeric comparison is recorded as a
:class:`Check` carrying its tolerance; the run passes iff every check does.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__, limits
from .clique import (
    CliqueSystem,
    apply_lambda,
    build_clique_state,
    clique_stabilizers,
    lambda_deformation,
    thermal_readout,
)
from .errors import ClusterThermError, InputError
from .hamiltonian import GAP_FLOOR, PSD_FLOOR, assemble, ground_analysis
from .mbqc import (
    DEFAULT_EPSILON,
    ClusterLayout,
    branch_norm_census,
    build_deformed_cluster,
    compile_layout,
    embed_target,
    exact_deformed_state,
    fidelity_bound,
    smooth,
    verify_carving,
)
from .spin_model import SpinModel, partition_function, random_model
from .state import fidelity

STAGES = ("classical", "clique", "compile", "hamiltonian")
STAGE_CHOICES = STAGES + ("full",)

# tolerances attached to pipeline checks
PROB_TOL = 1e-10
Z_REL_TOL = 1e-10
CARVE_TOL = 1e-10
BOUND_TOL = 1e-10
READOUT_TOL = 1e-9
ZERO_ENERGY_TOL = 1e-8
MEMBERSHIP_TOL = 1e-10
GROUND_FID_TOL = 1e-8
MAX_SUPPORT = 5
# raw block eigenvalues are resolved only to about eps * ||term||
BLOCK_REL_FLOOR = -1e-12


@dataclass
class PipelineConfig:
    model_path: str
    beta: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    stage: str = "full"
    output: str | None = None
    verbosity: int = 0
    dense_cap: int | None = None
    eigen_dim_cap: int | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.stage not in STAGE_CHOICES:
            raise InputError(f"unknown stage {self.stage!r}; choose from {', '.join(STAGE_CHOICES)}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InputError(f"beta must be finite and non-negative, got {self.beta}")
        if not 0.0 < self.epsilon < 0.5:
            raise InputError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.dense_cap is not None and not 1 <= self.dense_cap <= 26:
            raise InputError("dense cap must lie in [1, 26]")
        if self.eigen_dim_cap is not None and not 1 <= self.eigen_dim_cap <= 2**24:
            raise InputError("eigensolver budget must lie in [1, 2**24]")

    @property
    def stages(self) -> tuple[str, ...]:
        if self.stage == "full":
            return STAGES
        return STAGES[: STAGES.index(self.stage) + 1]


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str

    @classmethod
    def at_most(cls, name: str, value: float, tol: float) -> "Check":
        return cls(name, float(value), tol, bool(value <= tol), "<=")

    @classmethod
    def at_least(cls, name: str, value: float, tol: float) -> "Check":
        return cls(name, float(value), tol, bool(value >= tol), ">=")


@dataclass
class RunReport:
    provenance: dict
    stages: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    error: dict | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return int(self.error["exit_code"])
        return 0 if self.passed else 3

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "exit_code": self.exit_code,
            "provenance": self.provenance,
            "stages": self.stages,
            "checks": [asdict(c) for c in self.checks],
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def load_model(path: str | Path) -> tuple[SpinModel, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from exc
    try:
        return SpinModel.from_json(raw.decode("utf-8")), raw
    except UnicodeDecodeError as exc:
        raise InputError(f"model file {path} is not UTF-8") from exc


def _classical(model: SpinModel, beta: float, report: RunReport) -> np.ndarray:
    thermal = partition_function(model, beta)
    probs = thermal.probabilities
    report.stages["classical"] = {
        "Z": thermal.Z,
        "log_Z": thermal.log_Z,
        "probabilities": probs.tolist(),
    }
    report.checks.append(Check.at_most("classical.normalization", abs(probs.sum() - 1.0), PROB_TOL))
    return probs


def _clique(model: SpinModel, beta: float, oracle: np.ndarray, report: RunReport) -> None:
    sys, state = build_clique_state(model)
    gens = clique_stabilizers(sys, state)
    deformed, Z_q = apply_lambda(sys, state, beta)
    probs = thermal_readout(sys, deformed)
    Z_o = partition_function(model.without_offset(), beta).Z
    dev = float(np.abs(probs - oracle).max())
    report.stages["clique"] = {
        "n_qubits": sys.n_qubits,
        "stabilizers": [str(g) for g in gens],
        "Z_quantum": Z_q,
        "Z_oracle": Z_o,
        "max_abs_deviation": dev,
    }
    report.checks.append(Check.at_most("clique.generator_count", abs(len(gens) - sys.n_qubits), 0))
    report.checks.append(Check.at_most("clique.Z_relative_error", abs(Z_q - Z_o) / Z_o, Z_REL_TOL))
    report.checks.append(Check.at_most("clique.readout_deviation", dev, PROB_TOL))


def _compile(model: SpinModel, config: PipelineConfig, oracle: np.ndarray, report: RunReport) -> ClusterLayout:
    sys = CliqueSystem(model)
    layout = compile_layout(sys)
    n_a = len(layout.a_qubits)
    out = {
        "rows": layout.lattice.rows,
        "cols": layout.lattice.cols,
        "n_a": n_a,
        "status": layout.status,
        "layout": layout.to_dict(),
        "one_a_neighbor": layout.satisfies_one_a_neighbor(),
    }
    report.stages["compile"] = out
    if layout.status != "verified":
        return layout
    cert = verify_carving(layout, sys)
    out["certificate"] = cert.to_dict()
    report.checks.append(Check.at_least("compile.carving_fidelity", cert.achieved_fidelity, 1 - CARVE_TOL))
    if cert.expected_branch_norm is not None:
        report.checks.append(
            Check.at_most("compile.branch_norm", abs(cert.branch_norm - cert.expected_branch_norm), CARVE_TOL)
        )
        if n_a <= 20:
            census = branch_norm_census(layout)
            spread = float(np.abs(census - census.mean()).max())
            out["census_spread"] = spread
            report.checks.append(Check.at_most("compile.census_uniform", spread, CARVE_TOL))

    lam = lambda_deformation(sys, config.beta)
    readout = thermal_readout(sys, exact_deformed_state(layout, lam))
    dev = float(np.abs(readout - oracle).max())
    out["projected_readout_deviation"] = dev
    report.checks.append(Check.at_most("compile.projected_readout", dev, READOUT_TOL))

    target = embed_target(layout, apply_lambda(sys, build_clique_state(model)[1], config.beta)[0])
    smoothed = build_deformed_cluster(layout, smooth(layout, config.epsilon), lam)
    F = fidelity(smoothed, target)
    bound = fidelity_bound(config.epsilon, n_a)
    out["smoothed_fidelity"] = F
    out["fidelity_bound"] = bound
    report.checks.append(Check.at_least("compile.fidelity_bound_margin", F - bound, -BOUND_TOL))
    return layout


def _hamiltonian(layout: ClusterLayout, config: PipelineConfig, report: RunReport) -> None:
    sys = CliqueSystem(layout.model)
    lam = lambda_deformation(sys, config.beta)
    omega = smooth(layout, config.epsilon)
    H = assemble(layout, omega, lam)
    ref = build_deformed_cluster(layout, omega, lam)
    g = ground_analysis(H, ref, seed=config.seed)
    min_eig = min(t.min_eigenvalue() for t in H.terms)
    block_rel = min(t.block_min_eigenvalue() / max(1.0, t.norm()) for t in H.terms)
    support = max(len(t.support) for t in H.terms)
    membership = H.expectation(ref) / g.norm
    out = g.to_dict() | {
        "term_count": len(H.terms),
        "max_term_norm": H.max_term_norm(),
        "min_term_eigenvalue": min_eig,
        "min_block_eigenvalue_relative": block_rel,
        "max_support": support,
        "reference_energy_ratio": membership,
    }
    report.stages["hamiltonian"] = out
    report.checks += [
        Check.at_least("hamiltonian.term_psd", min_eig, PSD_FLOOR),
        Check.at_least("hamiltonian.block_psd_relative", block_rel, BLOCK_REL_FLOOR),
        Check.at_most("hamiltonian.max_support", support, MAX_SUPPORT),
        Check.at_most("hamiltonian.reference_energy", abs(membership), MEMBERSHIP_TOL),
        Check.at_most("hamiltonian.ground_energy", abs(g.E0) / g.norm, ZERO_ENERGY_TOL),
        Check.at_least("hamiltonian.gap", g.gap, GAP_FLOOR),
        Check.at_least("hamiltonian.ground_fidelity", g.fidelity, 1 - GROUND_FID_TOL),
    ]


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Run the configured stages.

    Input problems (bad config, unreadable or malformed model) raise
    :class:`InputError` before any report exists.  Later failures are
    recorded in the report's ``error`` block and set its exit code.
    """
    config.validate()
    model, raw = load_model(config.model_path)
    report = RunReport(
        provenance={
            "input_sha256": hashlib.sha256(raw).hexdigest(),
            "model_path": str(config.model_path),
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "seed": config.seed,
            "config": asdict(config),
            "started": _now(),
        }
    )
    try:
        with limits.override(dense_cap=config.dense_cap, eigen_dim_cap=config.eigen_dim_cap):
            oracle = _classical(model, config.beta, report)
            if "clique" in config.stages:
                _clique(model, config.beta, oracle, report)
            if "compile" in config.stages:
                layout = _compile(model, config, oracle, report)
                if "hamiltonian" in config.stages:
                    _hamiltonian(layout, config, report)
    except ClusterThermError as exc:
        report.error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
    report.provenance["finished"] = _now()
    return report


def fixture_generate(
    seed: int,
    count: int,
    max_spins: int = 4,
    max_arity: int = 3,
    outdir: str | Path = "fixtures",
) -> list[Path]:
    """Write ``count`` random model files; the same arguments give byte-identical files."""
    if count < 0 or max_spins < 1 or max_arity < 1:
        raise InputError("count must be >= 0 and max_spins, max_arity >= 1")
    rng = np.random.default_rng(seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        model = random_model(rng, max_spins, max_arity=max_arity)
        path = outdir / f"model_{i:03d}.json"
        path.write_text(model.to_json())
        paths.append(path)
    return paths
