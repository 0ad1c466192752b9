"""Gauge-theory operations on expressions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .canon import canonical_monomials, collect, normal_form
from .coeff import ONE, Coeff, I, as_coeff, param
from .expr import (
    ContractViolation,
    Expression,
    Level,
    Monomial,
    field,
    fresh,
    fresh_labels,
    gamma,
    leibniz,
    mono_product,
    rename_clashing_dummies,
)
from .fields import GAUGE, DerivedField, FieldSymbol


class InhomogeneousOrderError(ValueError):
    pass


@dataclass(frozen=True)
class Convention:
    """How the gauge potential enters covariant objects.

    With ``kappa`` the commutator weight, ``F = ∂A − ∂A + κ[A, A]``,
    ``D_μ X = ∂_μ X + κ[A_μ, X]`` and ``sA = ∂C + κ[A, C]``.  Hermitian
    potentials use ``κ = −i``; anti-Hermitian ones ``κ = 1``.  A coupling
    constant can be folded in as ``κ = −i g``.
    """

    name: str
    kappa: Coeff

    def with_coupling(self, g: Coeff | None = None) -> "Convention":
        g = param("g") if g is None else as_coeff(g)
        return Convention(f"{self.name}+coupling", self.kappa * g)


HERMITIAN = Convention("hermitian", -I)
ANTIHERMITIAN = Convention("antihermitian", ONE)


def A(mu: str) -> Expression:
    return field(GAUGE, mu)


# --------------------------------------------------------------------------
# derivations and substitutions
# --------------------------------------------------------------------------

Rule = Callable[[tuple[str, ...]], Expression]


def _splice(m: Monomial, j: int, image: Expression, sign: int) -> list[Monomial]:
    """Replace factor ``j`` of ``m`` by the (density, untraced) ``image``."""
    out = []
    left, right = m.factors[:j], m.factors[j + 1:]
    shell = Monomial(m.coeff * sign, left + right, m.gammas, m.metrics, False)
    avoid = set(shell.label_counts())
    for t in image.terms:
        if t.traced:
            raise ContractViolation("substitution images must be untraced densities")
        t = rename_clashing_dummies(t, avoid)
        out.append(
            Monomial(
                shell.coeff * t.coeff,
                left + t.factors + right,
                m.gammas + t.gammas,
                m.metrics + t.metrics,
                m.traced,
            )
        )
    return out


def _image(f: DerivedField, rule: Rule, avoid: set[str]) -> Expression:
    img = rule(f.indices)
    if f.derivs:
        # keep the rule's internal dummies clear of the derivative labels
        img = Expression(
            (rename_clashing_dummies(t, set(f.derivs) | avoid) for t in img.terms), img.level
        )
        img = img.d(*f.derivs)
    return img


def derivation(e: Expression, rules: Mapping[str, Rule], odd: bool) -> Expression:
    """Apply a (graded, left-acting) derivation defined on base species.

    ``rules[name](indices)`` gives the image of the underived field; species
    without a rule are annihilated.  Derivatives commute with the derivation.
    """
    out = []
    for m in e.terms:
        parity = 0
        for j, f in enumerate(m.factors):
            rule = rules.get(f.base.name)
            if rule is not None:
                sign = -1 if (odd and parity) else 1
                img = _image(f, rule, set())
                out.extend(_splice(m, j, img, sign))
            parity ^= f.odd
    return Expression(out, e.level)


def substitute(e: Expression, rules: Mapping[str, Rule]) -> Expression:
    """Replace every occurrence of the named species simultaneously."""
    out = []
    for m in e.terms:
        partial = [m]
        # walk right-to-left so that factor positions stay valid
        for j in range(len(m.factors) - 1, -1, -1):
            f = m.factors[j]
            rule = rules.get(f.base.name)
            if rule is None:
                continue
            nxt = []
            for p in partial:
                img = _image(p.factors[j], rule, set(p.label_counts()))
                nxt.extend(_splice(p, j, img, 1))
            partial = nxt
        out.extend(partial)
    return Expression(out, e.level)


def vary(e: Expression, species: FieldSymbol, delta: Rule) -> Expression:
    """First-order variation of ``e`` under ``species → species + delta``."""
    return derivation(e, {species.name: delta}, odd=False)


# --------------------------------------------------------------------------
# curvature, covariant derivatives, Laplacians
# --------------------------------------------------------------------------


def curvature(mu: str = "mu", nu: str = "nu", convention: Convention = HERMITIAN,
              abelian: bool = False) -> Expression:
    """``F_{μν} = ∂_μA_ν − ∂_νA_μ + κ[A_μ, A_ν]`` (commutator dropped if ``abelian``)."""
    f = A(nu).d(mu) - A(mu).d(nu)
    if not abelian:
        f = f + convention.kappa * (A(mu) * A(nu) - A(nu) * A(mu))
    return f


def covariant_derivative(x: Expression, mu: str, convention: Convention = HERMITIAN,
                         adjoint: bool = True) -> Expression:
    """``D_μ x``; adjoint action ``κ[A_μ, x]`` or fundamental ``κA_μ x``."""
    k = convention.kappa
    if adjoint:
        return x.d(mu) + k * (A(mu) * x - x * A(mu))
    return x.d(mu) + k * (A(mu) * x)


def laplacian(x: Expression, power: int = 1) -> Expression:
    """Flat ``Δ^power x`` with ``Δ = −∂^μ∂_μ``."""
    for _ in range(power):
        (mu,) = fresh(x)
        x = -x.d(mu, mu)
    return x


def covariant_laplacian(x: Expression, power: int = 1, convention: Convention = HERMITIAN,
                        adjoint: bool = True, normalize: bool = True) -> Expression:
    """``Δ_A^power x`` with ``Δ_A = −D^μ D_μ``; normalised after each power."""
    for _ in range(power):
        (mu,) = fresh(x)
        x = -covariant_derivative(covariant_derivative(x, mu, convention, adjoint), mu,
                                  convention, adjoint)
        if normalize:
            x = normal_form(x)
    return x


def form_factor_op(x: Expression, degree: int, name: str = "phi") -> Expression:
    """Formal ``φ(Δ) x = Σ_k φ_k Δ^k x`` with symbolic coefficients ``name[k]``."""
    out = Expression.zero(x.level)
    term = x
    for k in range(degree + 1):
        if k:
            term = laplacian(term)
        out = out + param(f"{name}[{k}]") * term
    return out


# --------------------------------------------------------------------------
# grading
# --------------------------------------------------------------------------


def linearize(e: Expression, species: FieldSymbol | str, degree: int) -> Expression:
    """Part of ``e`` homogeneous of the given degree in one species."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    return Expression((t for t in e.terms if t.degree_in(species) == degree), e.level)


def order(e: Expression) -> int:
    """Common derivative order of all monomials (``ord A_{μ1;μ2…μk} = k``)."""
    orders = sorted({t.order for t in normal_form(e, ibp=False).terms})
    if not orders:
        raise InhomogeneousOrderError("order of the zero expression is undefined")
    if len(orders) > 1:
        raise InhomogeneousOrderError(f"expression mixes orders {orders}")
    return orders[0]


ord_ = order


# --------------------------------------------------------------------------
# Clifford algebra and boundary terms
# --------------------------------------------------------------------------


class SpinorStructureError(ValueError):
    pass


def clifford_contract(e: Expression, expect_scalar: bool = False) -> Expression:
    """Reduce gamma products to the antisymmetrised basis (density normal form).

    With ``expect_scalar`` any surviving gamma block is an error.
    """
    out = normal_form(e, ibp=False)
    if expect_scalar:
        left = [t for t in out.terms if t.gammas]
        if left:
            raise SpinorStructureError(f"{len(left)} terms keep a spinor structure, e.g. {left[0]}")
    return out


def equal_mod_total_derivative(e1: Expression, e2: Expression | int) -> bool:
    if isinstance(e2, int) and e2 == 0:
        e2 = Expression.zero(Level.INTEGRATED)
    if e1.level is not Level.INTEGRATED or e2.level is not Level.INTEGRATED:
        raise ContractViolation("both arguments must be integrated functionals")
    return not normal_form(e1 - e2, ibp=True).terms

