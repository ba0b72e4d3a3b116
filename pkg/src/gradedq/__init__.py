"""Exact symbolic engine for graded supercommutative algebras and brackets."""

from .superpoly import (
    Chart,
    ChartMismatchError,
    EVEN,
    GradedError,
    HomogeneityError,
    LiftKindError,
    MIXED,
    ODD,
    ParityMismatchError,
    SuperPolynomial,
    UnknownVariableError,
    VariableDecl,
    ZERO,
    make_chart,
)
from .geometry import (
    GradingSystem,
    VectorField,
    anticotangent_lift,
    apply,
    commutator,
    cotangent_lift,
    hamiltonian_lift_p,
    hamiltonian_vector_field,
    multivector_lift_theta,
    promote,
    restrict_to_base,
)
from .brackets import (
    canonical_bracket,
    canonical_poisson,
    canonical_schouten,
    derived_bracket,
    lie_derivative,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
