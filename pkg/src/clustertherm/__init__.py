"""Thermal states of classical spin models as ground states of local cluster-lattice Hamiltonians."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .clique import (
    CliqueSystem,
    LambdaDeformation,
    PauliString,
    StabilizerGenerators,
    apply_lambda,
    build_clique_state,
    clique_stabilizers,
    lambda_deformation,
    thermal_readout,
)
from .errors import (
    CarvingError,
    ClusterThermError,
    ConvergenceError,
    EmbeddingError,
    InputError,
    ResourceError,
    UnsupportedEncodingError,
    VerificationError,
)
from .hamiltonian import (
    ClusterStabilizer,
    LocalTerm,
    SparseOperator,
    assemble,
    build_K,
    build_P,
    build_Q,
    gamma_energy,
    ground_analysis,
)
from .mbqc import (
    CarvingCertificate,
    ClusterLayout,
    OmegaDeformation,
    branch_norm_census,
    build_deformed_cluster,
    compile_layout,
    smooth,
    verify_carving,
)
from .spin_model import (
    GeneralModel,
    ParityTerm,
    SpinModel,
    encode_general,
    energy,
    observable_expectation,
    partition_function,
)
from .state import LatticeGraph, SingleQubitOp, StateVector, cluster_state

__all__ = [
    "CarvingCertificate",
    "CarvingError",
    "CliqueSystem",
    "ClusterLayout",
    "ClusterStabilizer",
    "ClusterThermError",
    "ConvergenceError",
    "EmbeddingError",
    "GeneralModel",
    "InputError",
    "LambdaDeformation",
    "LatticeGraph",
    "LocalTerm",
    "OmegaDeformation",
    "ParityTerm",
    "PauliString",
    "ResourceError",
    "SingleQubitOp",
    "SparseOperator",
    "SpinModel",
    "StabilizerGenerators",
    "StateVector",
    "UnsupportedEncodingError",
    "VerificationError",
    "apply_lambda",
    "assemble",
    "branch_norm_census",
    "build_K",
    "build_P",
    "build_Q",
    "build_clique_state",
    "build_deformed_cluster",
    "clique_stabilizers",
    "cluster_state",
    "compile_layout",
    "encode_general",
    "energy",
    "gamma_energy",
    "ground_analysis",
    "lambda_deformation",
    "observable_expectation",
    "partition_function",
    "smooth",
    "thermal_readout",
    "verify_carving",
]
