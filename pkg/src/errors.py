"""Exceptions raised by the reconstruction pipeline.

Two families exist: ``DataError`` for bad inputs (files, configs, shapes) and
``NumericError`` for failures of the numerical stages. The command line maps
them to exit codes 3 and 4.
"""
from typing import Optional


class ReconError(Exception):
    """Base class of every pipeline error."""

    stage: str = "recon"


class DataError(ReconError):
    """Input data, file or configuration problem."""

    stage = "data"


class ValidationError(DataError):
    """Dataset violates one or more invariants."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(self.findings) or "invalid dataset")


class MissingEntryError(DataError, KeyError):
    """Required entry is absent from a container file."""

    def __init__(self, entry: str, path: Optional[str] = None) -> None:
        self.entry = entry
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing entry '{entry}'{where}")

    def __str__(self) -> str:
        return self.args[0]


class InputFileError(DataError):
    """Input path is missing or unreadable."""

    def __init__(self, path: str, reason: str = "cannot be read") -> None:
        self.path = path
        super().__init__(f"'{path}': {reason}")


class DataTypeError(DataError, TypeError):
    """Array has the wrong dtype (e.g. real where complex is required)."""


class ConfigError(DataError):
    """Run configuration cannot be parsed or holds an invalid value."""

    stage = "config"


class ShapeError(DataError, ValueError):
    """Array shapes are incompatible."""


class RangeError(DataError, ValueError):
    """Parameter outside the admissible range of the data."""


class NumericError(ReconError):
    """Failure of a numerical stage."""

    stage = "numeric"


class DegenerateGeometryError(NumericError):
    """Trajectory does not span any k-space extent."""


class ParameterError(NumericError, ValueError):
    """Numerical parameter outside its valid domain."""


class FactorizationError(NumericError):
    """Noise covariance is not positive definite."""

    def __init__(self, eigenvalue: float) -> None:
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"noise covariance is not positive definite "
            f"(smallest eigenvalue {self.eigenvalue:.3e})"
        )


class OperatorNotPSDError(NumericError):
    """Normal operator returned a non-positive curvature p^H A p."""

    def __init__(self, iteration: int, curvature: float) -> None:
        self.iteration = iteration
        self.curvature = float(curvature)
        super().__init__(
            f"operator is not positive definite at iteration {iteration} "
            f"(p^H A p = {self.curvature:.3e})"
        )


class MetricError(NumericError):
    """Image comparison cannot be evaluated."""
