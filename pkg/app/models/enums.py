from enum import Enum


class PotentialKind(str, Enum):
    """Supported models of the potential A(x)"""
    CONSTANT = "constant"      # A(x) = A0 everywhere
    RATIONAL = "rational"      # A_inf - (A_inf - A0) / (1 + |x|^2 / l^2)
    HARMONIC = "harmonic"      # A0 + kappa |x|^2, unbounded
    TABULATED = "tabulated"    # QSSFIELD table on a grid


class Component(str, Enum):
    """Components of a field pair"""
    U = "u"
    V = "v"


class CheckStatus(str, Enum):
    """Outcome of a single verification check"""
    PASS = "PASS"
    FAIL = "FAIL"
    WARN = "WARN"      # advisory check out of range; does not fail the summary


class SolveStatus(str, Enum):
    """Terminal state of a minimization run"""
    CONVERGED = "converged"
    NON_CONVERGED = "non-converged"
    COUPLING_COLLAPSE = "coupling-collapse"
    FIBERING_FAILURE = "fibering-failure"


class StopReason(str, Enum):
    """Which rule ended a run"""
    STEP = "tol_dx"
    GRADIENT = "tol_grad"
    STALLED = "line-search-exhausted"
    STAGNATED = "step-below-tol_dx"


class SeedShape(str, Enum):
    """Angular factor of the initial seed"""
    HARMONIC = "harmonic"  # (r / w)^s sin(s theta), smooth at the y3 axis
    SECTOR = "sector"      # sin(s theta) alone


class Descent(str, Enum):
    """Search direction of the projected-gradient loop"""
    STEEPEST = "steepest"
    CONJUGATE = "conjugate"


class Preconditioner(str, Enum):
    """Metric used for the descent direction"""
    H1 = "h1"
    NONE = "none"


class FieldFormat(str, Enum):
    """QSSFIELD v1 dump variants"""
    TEXT = "text"
    RAW = "raw"


class Subcommand(str, Enum):
    """CLI subcommands"""
    SOLVE = "solve"
    FIBER_SCAN = "fiber-scan"
    CHECK_POTENTIAL = "check-potential"
    NODAL_COUNT = "nodal-count"
    GRADCHECK = "gradcheck"
    DIAGNOSE = "diagnose"


# Constants
FIELD_MAGIC = "QSSFIELD"
FIELD_VERSION = "v1"
DEFAULT_HALF_EXTENT = 8.0
DEFAULT_POINTS_PER_AXIS = 65
DEFAULT_NODAL_EPS_FACTOR = 1e-3
DEFAULT_T_RANGE = (1e-6, 1e6)
CONDITION_TOLERANCE = 1e-10
DECAY_MASS_THRESHOLD = 0.99
STEP_STOP_GRADIENT_FACTOR = 10.0
