"""Symbolic algebra for matrix-valued gauge and ghost fields."""

from .canon import coefficient_of, normal_form
from .coeff import ONE, ZERO, Coeff, I, as_coeff, param
from .expr import (
    DIM,
    ContractViolation,
    Expression,
    IndexStructureError,
    Level,
    Monomial,
    commutator,
    field,
    fresh,
    gamma,
    metric,
    scalar,
    unit,
)
from .fields import (
    ANTIGHOST,
    AUX,
    GAUGE,
    GHOST,
    DerivedField,
    FieldKind,
    FieldSymbol,
    generic,
)
from .ops import (
    ANTIHERMITIAN,
    HERMITIAN,
    A,
    Convention,
    InhomogeneousOrderError,
    SpinorStructureError,
    clifford_contract,
    covariant_derivative,
    covariant_laplacian,
    curvature,
    derivation,
    equal_mod_total_derivative,
    form_factor_op,
    laplacian,
    linearize,
    order,
    substitute,
    vary,
)
from .textio import to_text

__all__ = [name for name in dir() if not name.startswith("_")]
