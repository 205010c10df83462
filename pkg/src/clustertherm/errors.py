"""Exception hierarchy. Each class carries the CLI exit code for its failure class."""

from __future__ import annotations


class ClusterThermError(Exception):
    exit_code = 1


class InputError(ClusterThermError, ValueError):
    """Malformed or out-of-range input (exit code 1)."""

    exit_code = 1


class UnsupportedEncodingError(InputError):
    pass


class ResourceError(ClusterThermError):
    """A size or numeric-range cap was exceeded (exit code 2)."""

    exit_code = 2


class VerificationError(ClusterThermError):
    """A numerical check failed (exit code 3)."""

    exit_code = 3


class CarvingError(VerificationError):
    """Projection of the cluster did not produce the target state.

    The failed certificate is attached so callers can inspect the
    measured fidelity and branch norm.
    """

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate

    @property
    def fidelity(self) -> float | None:
        return None if self.certificate is None else self.certificate.achieved_fidelity


class EmbeddingError(VerificationError):
    """No lattice embedding was found for a clique system."""


class ConvergenceError(ClusterThermError):
    """Iterative eigensolver failed to converge (exit code 4)."""

    exit_code = 4

    def __init__(self, message: str, residual: float | None = None, iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
