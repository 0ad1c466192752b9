"""The BRST differential as a graded left derivation, and the auxiliary-field
(Nakanishi–Lautrup) extension with its gauge-fixing fermion.

Generator rules (``κ`` from the :class:`Convention`)::

    s A_μ = ∂_μ C + κ[A_μ, C]      s C = −κ C C   (= −½κ[C, C] graded)
    s C̄ = ξ⁻¹ ∂_μ A^μ   (minimal)   or   s C̄ = σ h,  s h = 0   (extended)

With ``κ = 1`` these are the anti-Hermitian rules written without ``i``.
The extended sign ``σ`` is fixed by :func:`determine_aux_sign`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field, replace

from . import gaugefix
from .symfield import (
    ANTIGHOST,
    AUX,
    GAUGE,
    GHOST,
    HERMITIAN,
    A,
    Coeff,
    ContractViolation,
    Convention,
    Expression,
    Level,
    derivation,
    equal_mod_total_derivative,
    field,
    laplacian,
    normal_form,
    param,
    substitute,
)
from .symfield.canon import _rotations
from .symfield.expr import Monomial, leibniz


class Variant(enum.Enum):
    MINIMAL = "minimal"
    EXTENDED = "extended"


# sC̄ = AUX_SIGN * h reproduces S_gf + S_gh after eliminating h
AUX_SIGN = -1


@dataclass(frozen=True)
class BRSTConfig:
    variant: Variant = Variant.MINIMAL
    xi: Coeff = dc_field(default_factory=lambda: param("xi"))
    convention: Convention = HERMITIAN
    aux_sign: int = AUX_SIGN

    @classmethod
    def extended(cls, **kw) -> "BRSTConfig":
        return cls(Variant.EXTENDED, **kw)


class UnsupportedError(ValueError):
    pass


def _rules(cfg: BRSTConfig):
    k = cfg.convention.kappa
    C = field(GHOST)

    def s_A(idx):
        (mu,) = idx
        return C.d(mu) + k * (A(mu) * C - C * A(mu))

    def s_C(idx):
        return -k * (C * C)

    if cfg.variant is Variant.MINIMAL:
        def s_Cbar(idx):
            return gaugefix.div_A() * cfg.xi.inverse()
    else:
        def s_Cbar(idx):
            return field(AUX) * cfg.aux_sign

    return {GAUGE.name: s_A, GHOST.name: s_C, ANTIGHOST.name: s_Cbar}


def brst(e: Expression, cfg: BRSTConfig = BRSTConfig()) -> Expression:
    """Apply ``s``; raises ghost number by one on homogeneous input."""
    return derivation(e, _rules(cfg), odd=True)


def check_invariance(s_total: Expression, cfg: BRSTConfig = BRSTConfig()) -> bool:
    if s_total.level is not Level.INTEGRATED:
        raise ContractViolation("BRST invariance is checked on integrated functionals")
    # collecting like terms first keeps the image of s small
    collected = normal_form(s_total, ibp=False)
    return equal_mod_total_derivative(brst(collected, cfg), 0)


def generators(cfg: BRSTConfig) -> dict[str, Expression]:
    gens = {"A": A("mu"), "C": field(GHOST), "Cbar": field(ANTIGHOST)}
    if cfg.variant is Variant.EXTENDED:
        gens["h"] = field(AUX)
    return gens


def nilpotency_report(cfg: BRSTConfig = BRSTConfig()) -> dict[str, Expression]:
    """``s²`` of every generator, in density normal form."""
    return {name: normal_form(brst(brst(g, cfg), cfg)) for name, g in generators(cfg).items()}


def gauge_fixing_fermion(cfg: BRSTConfig, degree: int) -> Expression:
    """``Ψ = −∫ tr φ(Δ)(C̄)(½ξh + ∂_μA^μ)``; ghost number −1."""
    if cfg.variant is not Variant.EXTENDED:
        raise UnsupportedError("the gauge-fixing fermion needs the auxiliary field")
    return gaugefix.gauge_fixing_fermion_functional(degree, cfg.xi)


# --------------------------------------------------------------------------
# elimination of the auxiliary field
# --------------------------------------------------------------------------


def _h_first(m: Monomial, name: str) -> list[tuple[Coeff, Monomial]]:
    """Rotate an h to the front and integrate its derivatives by parts."""
    if not m.traced:
        raise UnsupportedError("auxiliary elimination expects traced functionals")
    for rot, sign in _rotations(m.factors, True):
        if rot[0].base.name == name:
            break
    else:  # pragma: no cover - caller guarantees an h is present
        raise AssertionError
    first, rest = rot[0], rot[1:]
    alpha = first.derivs
    bare = replace(first, derivs=())
    sgn = sign * (-1 if len(alpha) % 2 else 1)
    out = []
    for new_rest in leibniz(rest, alpha):
        out.append(Monomial(m.coeff * sgn, (bare,) + new_rest, m.gammas, m.metrics, True))
    return out


def _deriv_count(m: Monomial) -> int:
    return sum(len(f.derivs) for f in m.factors)


def _kernel(quadratic: list[Monomial], name: str) -> dict[int, Coeff]:
    """Read ``∫ tr h P(Δ) h`` off the h-quadratic terms; returns ``{k: a_k}``."""
    poly: dict[int, Coeff] = {}
    for m in quadratic:
        for t in _h_first(m, name):
            if len(t.factors) != 2 or t.gammas or t.metrics:
                raise UnsupportedError("the h-quadratic kernel must not involve other fields")
            beta = t.factors[1].derivs
            if any(beta.count(l) != 2 for l in beta):
                raise UnsupportedError("the h-quadratic kernel must be a polynomial in Δ")
            k = len(beta) // 2
            # (∂·∂)^k = (−Δ)^k
            c = t.coeff * (-1 if k % 2 else 1)
            poly[k] = poly.get(k, Coeff()) + c
    return {k: c for k, c in poly.items() if not c.is_zero()}


def _apply_poly(poly: dict[int, Coeff], y: Expression) -> Expression:
    out = Expression.zero()
    for k, c in poly.items():
        out = out + laplacian(y, k) * c
    return out


def _divide(poly: dict[int, Coeff], j: Expression) -> Expression:
    """Solve ``P(Δ) Y = J`` by matching derivative degrees from below."""
    a0 = poly.get(0)
    if a0 is None or not a0.is_monomial():
        raise UnsupportedError("kernel needs an invertible constant term")
    a0_inv = a0.inverse()
    rem = normal_form(j, ibp=False)
    if not rem.terms:
        return rem
    top = max(_deriv_count(m) for m in rem.terms)
    y = Expression.zero()
    while rem.terms:
        d0 = min(_deriv_count(m) for m in rem.terms)
        if d0 > top:
            raise UnsupportedError("source term is not in the image of the kernel")
        part = Expression([m for m in rem.terms if _deriv_count(m) == d0]) * a0_inv
        y = y + part
        rem = normal_form(rem - _apply_poly(poly, part), ibp=False)
    return normal_form(y, ibp=False)


def eliminate_auxiliary(e: Expression, aux=AUX) -> Expression:
    """Substitute the stationary value of the auxiliary field.

    Writes the h-dependence as ``∫ tr(h P(Δ) h) + ∫ tr(h J)``; the algebraic
    equation of motion gives ``h = −½ P(Δ)⁻¹ J``.
    """
    if e.level is not Level.INTEGRATED:
        raise ContractViolation("auxiliary elimination acts on integrated functionals")
    e = normal_form(e, ibp=False)
    name = aux.name
    by_deg: dict[int, list[Monomial]] = {}
    for m in e.terms:
        by_deg.setdefault(m.degree_in(name), []).append(m)
    if max(by_deg, default=0) > 2:
        raise UnsupportedError("expression is more than quadratic in the auxiliary field")
    if 1 not in by_deg and 2 not in by_deg:
        return e
    poly = _kernel(by_deg.get(2, []), name)
    if not poly:
        raise UnsupportedError("no quadratic term: the stationarity condition is degenerate")
    source = []
    for m in by_deg.get(1, []):
        for t in _h_first(m, name):
            source.append(Monomial(t.coeff, t.factors[1:], t.gammas, t.metrics, False))
    y = _divide(poly, Expression(source))
    h_star = y * Coeff.const(-1) / 2
    return normal_form(substitute(e, {name: lambda idx: h_star}))


def determine_aux_sign(degree: int = 2, convention: Convention = HERMITIAN) -> dict:
    """Find the sign σ in ``sC̄ = σh`` for which ``sΨ`` reproduces ``S_gf + S_gh``."""
    target = gaugefix.gauge_fixing_term(degree) + gaugefix.ghost_term(degree, convention)
    results = {}
    for sigma in (1, -1):
        cfg = BRSTConfig(Variant.EXTENDED, convention=convention, aux_sign=sigma)
        s_psi = brst(gauge_fixing_fermion(cfg, degree), cfg)
        results[sigma] = equal_mod_total_derivative(eliminate_auxiliary(s_psi), target)
    good = [s for s, ok in results.items() if ok]
    return {"sign": good[0] if len(good) == 1 else None, "trials": results}


def fermion_roundtrip(degree: int = 2, cfg: BRSTConfig | None = None) -> bool:
    cfg = cfg or BRSTConfig.extended()
    target = gaugefix.gauge_fixing_term(degree, cfg.xi) + gaugefix.ghost_term(degree, cfg.convention)
    s_psi = brst(gauge_fixing_fermion(cfg, degree), cfg)
    return equal_mod_total_derivative(eliminate_auxiliary(s_psi), target)
