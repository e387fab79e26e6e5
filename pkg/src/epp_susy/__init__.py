"""Eigen-phase preserving second-order SUSY transformations for coupled channels."""

from .errors import (
    AccuracyError,
    ContractViolation,
    DegenerateBError,
    DomainError,
    EppError,
    EppNotExistent,
    IllConditionedError,
    MatchingError,
    PoleError,
    ShapeError,
    SingularWronskianError,
)
from .matrix_core import (
    ComplexOrthogonal,
    complex_orthogonal_2x2,
    complex_orthogonal_general,
    eigenphases_symmetric_unitary,
    wronskian,
)
from .oracle import RadialGrid, ScatterReport, oracle_s_matrix, verify_epp
from .reference_model import ChannelModel
from .transform import (
    TransformSpec,
    omega,
    rs_matrix,
    s2_matrix,
    transform_grid,
    u_infinity,
    validate_spec,
)

__version__ = "0.1.0"
