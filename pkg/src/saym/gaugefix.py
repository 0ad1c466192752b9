"""Higher-derivative gauge-fixing and ghost functionals with a formal form factor.

``φ(Δ) = Σ_{k≤K} φ_k Δ^k`` carries symbolic coefficients ``phi[k]`` so that
identities proven here hold coefficient by coefficient.
"""

from __future__ import annotations

from .symfield import (
    ANTIGHOST,
    AUX,
    GHOST,
    HERMITIAN,
    A,
    Convention,
    Expression,
    covariant_derivative,
    field,
    form_factor_op,
    param,
)
from .symfield.coeff import Coeff


def div_A() -> Expression:
    return A("nu").d("nu")


def gauge_fixing_term(degree: int, xi: Coeff | None = None, phi: str = "phi") -> Expression:
    """``−(1/2ξ) ∫ tr ∂_μA^μ φ(Δ)(∂_νA^ν)``."""
    xi = param("xi") if xi is None else xi
    body = (div_A() * form_factor_op(div_A(), degree, phi)).tr().integrate()
    return body * (-(xi * 2).inverse())


def ghost_term(degree: int, convention: Convention = HERMITIAN, phi: str = "phi") -> Expression:
    """``−∫ tr ∂_μC̄ φ(Δ)(D_μC)`` with ``D_μC = ∂_μC + κ[A_μ, C]``."""
    dc = covariant_derivative(field(GHOST), "mu", convention)
    body = (field(ANTIGHOST).d("mu") * form_factor_op(dc, degree, phi)).tr().integrate()
    return -body


def gauge_fixing_fermion_functional(degree: int, xi: Coeff | None = None,
                                    phi: str = "phi") -> Expression:
    """``Ψ = −∫ tr φ(Δ)(C̄) (½ξh + ∂_μA^μ)``."""
    xi = param("xi") if xi is None else xi
    inner = field(AUX) * (xi / 2) + div_A()
    return -(form_factor_op(field(ANTIGHOST), degree, phi) * inner).tr().integrate()
