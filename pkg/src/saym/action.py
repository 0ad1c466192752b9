"""Truncated spectral action for the Yang–Mills system, its gauge fixing, and
counterterm bookkeeping.

Coefficients stay formal: ``Lambda``, ``f[-2k]``, ``c[k]``, ``phi[k]``, ``xi``
and ``g`` are parameters of :class:`~saym.symfield.Coeff`.  The invariant part
is the template ``Σ_k Λ^{−2k} f_{−2k} c_k ∫ tr F Δ_A^k F`` for
``k = 0..n/2−2``; the constant term and the boundary-only term ``a_2`` of flat
space are dropped.  The gauge-fixing form factor is
``φ_k = Λ^{−2k} f_{−2k} c_k / (f_0 c_0) = −4 Λ^{−2k} f_{−2k} c_k``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

from . import gaugefix
from .brst import BRSTConfig, Variant, brst, check_invariance, gauge_fixing_fermion
from .symfield import (
    GAUGE,
    HERMITIAN,
    A,
    Coeff,
    Convention,
    Expression,
    Level,
    clifford_contract,
    coefficient_of,
    covariant_derivative,
    covariant_laplacian,
    curvature,
    equal_mod_total_derivative,
    field,
    gamma,
    generic,
    laplacian,
    linearize,
    normal_form,
    order,
    param,
)
from .symfield.coeff import as_coeff


class ActionError(ValueError):
    pass


def f_name(k: int) -> str:
    return f"f[{-2 * k}]"


def check_truncation(n: int) -> None:
    if n % 2 or n < 8:
        raise ActionError(f"truncation order must be even and at least 8, got {n}")


def template_degree(n: int) -> int:
    return n // 2 - 2


def template_coeff(k: int) -> Coeff:
    """``Λ^{−2k} f_{−2k} c_k``."""
    return param("Lambda", -2 * k) * param(f_name(k)) * param(f"c[{k}]")


def phi_values(degree: int) -> dict[str, Coeff]:
    """Express ``phi[k]`` through the action coefficients (uses ``f_0 c_0 = −1/4``)."""
    return {f"phi[{k}]": template_coeff(k) * -4 for k in range(degree + 1)}


def invariant_term(k: int, convention: Convention = HERMITIAN) -> Expression:
    """``∫ tr F_{μν} Δ_A^k F^{μν}``."""
    lhs = curvature("mu", "nu", convention)
    rhs = covariant_laplacian(curvature("mu", "nu", convention), k, convention)
    return (lhs * rhs).tr().integrate()


def abelian_term(k: int) -> Expression:
    """``∫ tr F̂_{μν} Δ^k F̂^{μν}``."""
    fh = curvature("mu", "nu", abelian=True)
    return (fh * laplacian(curvature("mu", "nu", abelian=True), k)).tr().integrate()


@dataclass
class SpectralActionExpansion:
    n: int
    invariant: Expression
    gauge_fixing: Expression
    ghost: Expression
    # (m, moment parameter, a_m) for the retained heat-kernel orders
    terms: list = dc_field(default_factory=list)
    convention: Convention = HERMITIAN

    @property
    def total(self) -> Expression:
        return self.invariant + self.gauge_fixing + self.ghost


def build_action(n: int, convention: Convention = HERMITIAN, coupling: bool = False,
                 remainders: Mapping[int, Expression] | None = None) -> SpectralActionExpansion:
    """Assemble ``S``, ``S_gf`` and ``S_gh`` with formal coefficients.

    ``coupling`` switches to the canonical normalisation with ``g`` in every
    commutator.  ``remainders`` maps ``k`` to extra gauge-invariant densities of
    ord ``4+2k`` (at least cubic in F), added with the same coefficient.
    """
    check_truncation(n)
    conv = convention.with_coupling(param("g")) if coupling else convention
    K = template_degree(n)
    remainders = dict(remainders or {})
    bad = set(remainders) - set(range(K + 1))
    if bad:
        raise ActionError(f"remainders given for absent orders k={sorted(bad)}")
    inv = Expression.zero(Level.INTEGRATED)
    terms = []
    for k in range(K + 1):
        a = invariant_term(k, conv)
        if k in remainders:
            extra = remainders[k]
            if extra.level is not Level.INTEGRATED or order(extra) != 4 + 2 * k:
                raise ActionError(f"remainder for k={k} must be an integrated functional of ord {4 + 2 * k}")
            a = a + extra
        terms.append((4 + 2 * k, f_name(k), a))
        inv = inv + a * template_coeff(k)
    gf = gaugefix.gauge_fixing_term(K)
    gh = gaugefix.ghost_term(K, conv)
    return SpectralActionExpansion(n, inv, gf, gh, terms, conv)


def numeric_parameters(moments: Mapping[int, float], c: Sequence[float], Lambda: float,
                       n: int) -> dict[str, Fraction]:
    """Values for ``f[-2k]``, ``c[k]`` and ``Lambda`` from a moment table."""
    K = template_degree(n)
    vals = {"Lambda": Fraction(Lambda)}
    for k in range(K + 1):
        if -2 * k not in moments:
            raise ActionError(f"missing moment f_{-2 * k}")
        vals[f_name(k)] = Fraction(moments[-2 * k])
        vals[f"c[{k}]"] = Fraction(c[k])
    return vals


def gauge_fixed_action(exp: SpectralActionExpansion, cfg: BRSTConfig) -> Expression:
    """``S + S_gf + S_gh`` for the minimal variant, ``S + sΨ`` for the extended one."""
    if cfg.variant is Variant.MINIMAL:
        return exp.total
    psi = gauge_fixing_fermion(cfg, template_degree(exp.n))
    return exp.invariant + brst(psi, cfg)


def check_sector_invariance(exp: SpectralActionExpansion,
                            variant: Variant = Variant.MINIMAL) -> dict:
    cfg = BRSTConfig(variant, convention=exp.convention)
    per_term = {m: check_invariance(a, cfg) for m, _, a in exp.terms}
    total = check_invariance(gauge_fixed_action(exp, cfg), cfg)
    return {"per_term": per_term, "total": total}


# --------------------------------------------------------------------------
# quadratic part
# --------------------------------------------------------------------------


def quadratic_part(S: Expression) -> Expression:
    """Terms of ``S`` quadratic in the gauge field."""
    return normal_form(linearize(normal_form(S), GAUGE, 2))


def quadratic_coefficients(S: Expression, degree: int) -> dict[int, Coeff]:
    """Write the quadratic part as ``Σ_k C_k ∫ tr F̂ Δ^k F̂`` and return ``{k: C_k}``.

    Raises if the quadratic part is not of that form.
    """
    q = quadratic_part(S)
    out = {}
    rebuilt = Expression.zero(Level.INTEGRATED)
    for k in range(degree + 1):
        t = abelian_term(k)
        ck = coefficient_of(q, t)
        out[k] = ck
        rebuilt = rebuilt + t * ck
    if not equal_mod_total_derivative(q, rebuilt):
        raise ActionError("quadratic part is not a combination of ∫ tr F̂ Δ^k F̂")
    return out


# --------------------------------------------------------------------------
# Weitzenböck formula
# --------------------------------------------------------------------------


def _dirac(x: Expression, mu: str, convention: Convention) -> Expression:
    return gamma(mu) * covariant_derivative(x, mu, convention, adjoint=False) * as_coeff(1j)


def weitzenbock_remainder(abelian: bool = False, zero_field: bool = False) -> Expression:
    """``D_A² ψ − (−D_μD^μ + ½ i γ^μγ^ν F_{μν}) ψ`` in Clifford normal form.

    ``D_A = iγ^μ(∂_μ − iA_μ)`` acts on a test spinor ψ.  With ``abelian`` the
    curvature is replaced by ``∂_μA_ν − ∂_νA_μ``; the remainder is then the
    commutator term alone.  ``zero_field`` keeps only the A-independent part.
    """
    conv = HERMITIAN
    x = field(generic("psi"))
    lhs = _dirac(_dirac(x, "mu", conv), "nu", conv)
    dd = covariant_derivative(covariant_derivative(x, "mu", conv, adjoint=False), "mu", conv,
                              adjoint=False)
    F = curvature("mu", "nu", conv, abelian=abelian)
    rhs = -dd + gamma("mu") * gamma("nu") * F * x * as_coeff(0.5j)
    diff = lhs - rhs
    if zero_field:
        diff = linearize(diff, GAUGE, 0)
    return clifford_contract(diff)


def weitzenbock_check(abelian: bool = False, zero_field: bool = False) -> bool:
    """True when the squared Dirac operator matches the Weitzenböck form.

    In the abelian case the remainder must equal ``½ i γ^μγ^ν κ[A_μ, A_ν] ψ``,
    which vanishes for commuting fields.
    """
    rem = weitzenbock_remainder(abelian, zero_field)
    if abelian and not zero_field:
        k = HERMITIAN.kappa
        x = field(generic("psi"))
        comm = gamma("mu") * gamma("nu") * (A("mu") * A("nu") - A("nu") * A("mu")) * x
        rem = clifford_contract(rem - comm * (k * as_coeff(0.5j)))
    return not rem.terms


# --------------------------------------------------------------------------
# counterterm absorption
# --------------------------------------------------------------------------


class Mode(enum.Enum):
    FIELD_AND_COUPLING = "fieldAndCoupling"
    CUTOFF_SHIFT = "cutoffShift"


@dataclass(frozen=True)
class RenormalizationStep:
    delta_z: Fraction | Coeff
    mode: Mode = Mode.FIELD_AND_COUPLING

    def __post_init__(self):
        dz = self.delta_z
        if not isinstance(dz, Coeff) and dz <= -1:
            raise ActionError("δZ ≤ −1 gives a degenerate rescaling")


_SZ = "sqrtZ"


def _rescale_fields(S: Expression) -> Expression:
    """``A → √Z A``, ``g → g/√Z`` with ``√Z`` the parameter ``sqrtZ``."""
    sz = param(_SZ)

    def per_term(t):
        c = t.coeff.subs({"g": param("g") / sz}) if "g" in t.coeff.params() else t.coeff
        return c * sz ** t.degree_in(GAUGE)

    from dataclasses import replace

    return Expression((replace(t, coeff=per_term(t)) for t in S.terms), S.level)


def _eliminate_sqrt(c: Coeff, z: Coeff) -> Coeff:
    out = Coeff()
    for e, rest in c.by_param_power(_SZ).items():
        if e % 2 or e < 0:
            raise ActionError("odd or negative power of √Z survives the rescaling")
        out = out + rest * z ** (e // 2)
    return out


def absorb_counterterm(step: RenormalizationStep, exp: SpectralActionExpansion) -> dict:
    """Apply one absorption mode and report the bookkeeping identities."""
    dz = as_coeff(step.delta_z)
    z = dz + 1
    S = exp.invariant
    K = template_degree(exp.n)
    if step.mode is Mode.FIELD_AND_COUPLING:
        scaled = _rescale_fields(normal_form(S))
        S_new = scaled.map_coeffs(lambda c: _eliminate_sqrt(c, z))
    else:
        S_new = S.subs_params({f_name(0): param(f_name(0)) * z})
    # g_0 A_0 = g A: one field times one coupling is weight-neutral
    probe = _rescale_fields((A("mu") * param("g")).integrate())
    ga_ok = all(t.coeff.by_param_power(_SZ).keys() == {0} for t in probe.terms)
    before = quadratic_coefficients(S, K)
    after = quadratic_coefficients(S_new, K)
    return {"action": S_new, "before": before, "after": after, "gA_invariant": ga_ok}


def compare_modes(delta_z, n: int = 8) -> dict:
    exp = build_action(n, coupling=True)
    a = absorb_counterterm(RenormalizationStep(delta_z, Mode.FIELD_AND_COUPLING), exp)
    b = absorb_counterterm(RenormalizationStep(delta_z, Mode.CUTOFF_SHIFT), exp)
    K = template_degree(n)
    agree = {k: a["after"][k] == b["after"][k] for k in range(K + 1)}
    return {
        "fieldAndCoupling": a,
        "cutoffShift": b,
        "agree_per_k": agree,
        "gA_invariant": a["gA_invariant"],
        "consistent": a["gA_invariant"] and agree[0],
    }
