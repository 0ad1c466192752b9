"""Monomials and expressions over Lie-algebra valued fields.

A :class:`Monomial` is an ordered (noncommutative) product of derived fields,
times a product of gamma-matrix blocks, flat metrics and an exact coefficient,
optionally under a colour trace.  Lorentz labels appearing twice are summed
(Euclidean metric, so upper and lower positions coincide); labels appearing
once are free.  An :class:`Expression` is an immutable sum of monomials at
either density or integrated-functional level.
"""

from __future__ import annotations

import enum
import itertools
import re
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

from .coeff import ONE, Coeff, as_coeff
from .fields import DerivedField, FieldSymbol

DIM = 4

_DUMMY_RE = re.compile(r"~(\d+)$")


class IndexStructureError(ValueError):
    """A Lorentz label occurs three or more times in one monomial."""


class ContractViolation(ValueError):
    """An operation received an expression at the wrong level or of the wrong shape."""


class Level(enum.Enum):
    DENSITY = "density"
    INTEGRATED = "integratedFunctional"


@dataclass(frozen=True, slots=True)
class Monomial:
    coeff: Coeff
    factors: tuple[DerivedField, ...] = ()
    # product of antisymmetrised gamma blocks γ^{[a b ...]}
    gammas: tuple[tuple[str, ...], ...] = ()
    # unordered flat-metric pairs δ_{ab}
    metrics: tuple[tuple[str, str], ...] = ()
    traced: bool = False

    # -- bookkeeping ---------------------------------------------------------
    def label_counts(self) -> Counter:
        c: Counter = Counter()
        for f in self.factors:
            c.update(f.indices)
            c.update(f.derivs)
        for blk in self.gammas:
            c.update(blk)
        for a, b in self.metrics:
            c[a] += 1
            c[b] += 1
        return c

    def free_labels(self) -> set[str]:
        return {l for l, n in self.label_counts().items() if n == 1}

    def dummy_labels(self) -> set[str]:
        return {l for l, n in self.label_counts().items() if n == 2}

    def check_indices(self) -> None:
        bad = {l: n for l, n in self.label_counts().items() if n > 2}
        if bad:
            raise IndexStructureError(f"labels {sorted(bad)} occur more than twice in {self}")

    @property
    def ghost_number(self) -> int:
        return sum(f.base.ghost_number for f in self.factors)

    @property
    def odd(self) -> bool:
        return bool(sum(f.odd for f in self.factors) % 2)

    @property
    def order(self) -> int:
        return sum(f.order for f in self.factors)

    def degree_in(self, species: FieldSymbol | str) -> int:
        name = species if isinstance(species, str) else species.name
        return sum(1 for f in self.factors if f.base.name == name)

    # -- transformations -----------------------------------------------------
    def relabel(self, mapping: dict[str, str]) -> "Monomial":
        if not mapping:
            return self
        g = mapping.get
        return Monomial(
            self.coeff,
            tuple(f.relabel(mapping) for f in self.factors),
            tuple(tuple(g(l, l) for l in blk) for blk in self.gammas),
            tuple((g(a, a), g(b, b)) for a, b in self.metrics),
            self.traced,
        )

    def scale(self, c) -> "Monomial":
        return replace(self, coeff=self.coeff * c)

    def __str__(self) -> str:
        body = " ".join(str(f) for f in self.factors) or "1"
        if self.traced:
            body = f"tr({body})"
        extra = "".join(f"γ[{''.join(b)}]" for b in self.gammas)
        extra += "".join(f"δ({a},{b})" for a, b in self.metrics)
        return f"({self.coeff}) {extra}{body}"


def _max_dummy_number(labels: Iterable[str]) -> int:
    top = -1
    for l in labels:
        m = _DUMMY_RE.match(l)
        if m:
            top = max(top, int(m.group(1)))
    return top


def fresh_labels(avoid: Iterable[str], count: int) -> list[str]:
    start = _max_dummy_number(avoid) + 1
    return [f"~{start + j}" for j in range(count)]


def rename_clashing_dummies(m: Monomial, avoid: set[str]) -> Monomial:
    """Rename the summed labels of ``m`` that collide with ``avoid``."""
    clash = sorted(m.dummy_labels() & avoid)
    if not clash:
        return m
    new = fresh_labels(avoid | set(m.label_counts()), len(clash))
    return m.relabel(dict(zip(clash, new)))


def mono_product(a: Monomial, b: Monomial) -> Monomial:
    # metrics, gammas and scalars sit outside the colour trace
    if (a.traced and (b.traced or b.factors)) or (b.traced and a.factors):
        raise ContractViolation("cannot multiply traced monomials as matrices")
    traced = a.traced or b.traced
    a = rename_clashing_dummies(a, set(b.label_counts()))
    b = rename_clashing_dummies(b, set(a.label_counts()))
    return Monomial(
        a.coeff * b.coeff,
        a.factors + b.factors,
        a.gammas + b.gammas,
        a.metrics + b.metrics,
        traced,
    )


def mono_derivative(m: Monomial, mu: str) -> list[Monomial]:
    if mu in m.dummy_labels():
        m = rename_clashing_dummies(m, {mu})
    out = []
    for j, f in enumerate(m.factors):
        facs = m.factors[:j] + (f.differentiate(mu),) + m.factors[j + 1:]
        out.append(replace(m, factors=facs))
    return out


def leibniz(factors: tuple[DerivedField, ...], labels: tuple[str, ...]) -> Iterator[tuple[DerivedField, ...]]:
    """All ways of distributing the derivative labels over ``factors``."""
    if not labels:
        yield factors
        return
    n = len(factors)
    for choice in itertools.product(range(n), repeat=len(labels)):
        extra: list[list[str]] = [[] for _ in range(n)]
        for lab, j in zip(labels, choice):
            extra[j].append(lab)
        yield tuple(
            DerivedField(f.base, f.indices, tuple(sorted(f.derivs + tuple(e)))) if e else f
            for f, e in zip(factors, extra)
        )


class Expression:
    """Immutable sum of monomials.

    Arithmetic does not normalise; call :func:`normal_form` (or the
    ``.normal_form()`` method) to collect terms.
    """

    __slots__ = ("terms", "level")

    def __init__(self, terms: Iterable[Monomial] = (), level: Level = Level.DENSITY):
        self.terms = tuple(t for t in terms if not t.coeff.is_zero())
        self.level = level

    # -- constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, level: Level = Level.DENSITY) -> "Expression":
        return cls((), level)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "Expression":
        if isinstance(other, Expression):
            return other
        if other == 0:
            return Expression.zero(self.level)
        return scalar(other)

    def __add__(self, other) -> "Expression":
        other = self._coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return Expression(other.terms, other.level)
        if other.level is not self.level:
            raise ContractViolation("cannot add density and integrated expressions")
        return Expression(self.terms + other.terms, self.level)

    __radd__ = __add__

    def __neg__(self) -> "Expression":
        return Expression((t.scale(-1) for t in self.terms), self.level)

    def __sub__(self, other) -> "Expression":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Expression":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Expression":
        if isinstance(other, Expression):
            if self.level is Level.INTEGRATED or other.level is Level.INTEGRATED:
                raise ContractViolation("products are formed at density level")
            return Expression(
                (mono_product(a, b) for a in self.terms for b in other.terms),
                Level.DENSITY,
            )
        c = as_coeff(other)
        return Expression((t.scale(c) for t in self.terms), self.level)

    def __rmul__(self, other) -> "Expression":
        if isinstance(other, Expression):
            return other.__mul__(self)
        return self.__mul__(other)

    def __truediv__(self, other) -> "Expression":
        return self * as_coeff(other).inverse()

    # -- structural operations -------------------------------------------------
    def d(self, *mus: str) -> "Expression":
        """Partial derivatives ∂_{mu1}∂_{mu2}… (all commuting)."""
        if self.level is Level.INTEGRATED:
            raise ContractViolation("differentiate densities, not functionals")
        out = self
        for mu in mus:
            out = Expression(
                (m2 for m in out.terms for m2 in mono_derivative(m, mu)), Level.DENSITY
            )
        return out

    def tr(self) -> "Expression":
        if any(t.traced for t in self.terms):
            raise ContractViolation("expression is already traced")
        return Expression((replace(t, traced=True) for t in self.terms), self.level)

    def integrate(self) -> "Expression":
        return Expression(self.terms, Level.INTEGRATED)

    def density(self) -> "Expression":
        return Expression(self.terms, Level.DENSITY)

    def relabel(self, mapping: dict[str, str]) -> "Expression":
        return Expression((t.relabel(mapping) for t in self.terms), self.level)

    def map_coeffs(self, fn) -> "Expression":
        return Expression((replace(t, coeff=fn(t.coeff)) for t in self.terms), self.level)

    def subs_params(self, values) -> "Expression":
        return self.map_coeffs(lambda c: c.subs(values))

    def normal_form(self, ibp: bool | None = None) -> "Expression":
        from .canon import normal_form

        return normal_form(self, ibp=ibp)

    # -- queries ------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.normal_form().terms

    def labels(self) -> set[str]:
        out: set[str] = set()
        for t in self.terms:
            out |= set(t.label_counts())
        return out

    def free_labels(self) -> set[str]:
        out: set[str] = set()
        for t in self.terms:
            out |= t.free_labels()
        return out

    @property
    def ghost_numbers(self) -> set[int]:
        return {t.ghost_number for t in self.terms}

    @property
    def ghost_number(self) -> int:
        gh = self.ghost_numbers
        if len(gh) != 1:
            raise ValueError(f"expression is not homogeneous in ghost number: {sorted(gh)}")
        return gh.pop()

    @property
    def odd(self) -> bool:
        par = {t.odd for t in self.terms}
        if len(par) != 1:
            raise ValueError("expression is not homogeneous in Grassmann parity")
        return par.pop()

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expression):
            if other == 0:
                return self.is_zero()
            return NotImplemented
        if other.level is not self.level:
            return False
        a, b = self.normal_form(), other.normal_form()
        return a.terms == b.terms

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        body = "\n".join(str(t) for t in self.terms)
        return f"∫[\n{body}\n]" if self.level is Level.INTEGRATED else body

    def __repr__(self) -> str:
        return f"Expression({len(self.terms)} terms, {self.level.value})"


# -- leaf constructors -----------------------------------------------------------

def field(symbol: FieldSymbol, *indices: str) -> Expression:
    return Expression([Monomial(ONE, (DerivedField(symbol, tuple(indices)),))])


def gamma(mu: str) -> Expression:
    return Expression([Monomial(ONE, (), ((mu,),))])


def metric(mu: str, nu: str) -> Expression:
    return Expression([Monomial(ONE, (), (), ((mu, nu),))])


def scalar(c) -> Expression:
    return Expression([Monomial(as_coeff(c))])


def unit() -> Expression:
    return scalar(1)


def commutator(x: Expression, y: Expression) -> Expression:
    """Plain matrix commutator ``xy − yx``."""
    return x * y - y * x


def fresh(e: Expression, count: int = 1, extra: Iterable[str] = ()) -> list[str]:
    return fresh_labels(e.labels() | set(extra), count)
