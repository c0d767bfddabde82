"""Custom exceptions for the nodal solver"""

from typing import Any, Optional


class NodalSolverException(Exception):
    """Base exception for solver operations"""
    pass


class ConfigurationError(NodalSolverException):
    """Error in configuration or setup"""
    pass


class ValidationError(NodalSolverException):
    """Error during input validation (parameters, grids, run configs)"""
    pass


class PotentialConditionError(ValidationError):
    """The potential violates one of the hypotheses (A1)-(A4)"""

    def __init__(self, message: str, failed_conditions: Optional[list] = None):
        super().__init__(message)
        self.failed_conditions = failed_conditions or []


class SymmetryError(NodalSolverException):
    """Error while building or applying the dihedral group"""
    pass


class FiberingError(NodalSolverException):
    """The fibering map has no admissible maximizer"""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class SolveError(NodalSolverException):
    """Base for failures of a minimization run"""

    def __init__(self, message: str, iteration: int = 0, report: Any = None):
        super().__init__(message)
        self.iteration = iteration
        self.report = report


class CouplingCollapseError(SolveError):
    """The coupling integral fell below the configured floor"""
    pass


class NonConvergenceError(SolveError):
    """The solver reached max_iter without meeting a stopping criterion"""
    pass


class DiagnosticsError(NodalSolverException):
    """A re-verification or audit check failed"""
    pass


class StorageError(NodalSolverException):
    """Error during file storage operations"""
    pass
