"""Hypothesis strategies for random well-formed expressions."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from saym.symfield import ANTIGHOST, AUX, GAUGE, GHOST, Coeff, DerivedField, Expression, Monomial
from saym.symfield.fields import generic

X = generic("X")
Y = generic("Y")

EVEN = [GAUGE, X, Y]
ALL = [GAUGE, X, GHOST, ANTIGHOST, AUX]


@st.composite
def monomials(draw, species=ALL, max_factors=4, max_derivs=2, traced=None, free=()):
    """A monomial whose labels are all contracted, apart from ``free``."""
    k = draw(st.integers(1, max_factors))
    syms = [draw(st.sampled_from(species)) for _ in range(k)]
    nder = [draw(st.integers(0, max_derivs)) for _ in range(k)]
    slots = []
    for j, s in enumerate(syms):
        slots += [("i", j, q) for q in range(s.n_indices)]
        slots += [("d", j, q) for q in range(nder[j])]
    if (len(slots) - len(free)) % 2:
        # even out by one more derivative on the first factor
        nder[0] += 1
        slots.append(("d", 0, nder[0] - 1))
    order = draw(st.permutations(range(len(slots))))
    labels: dict = {}
    free_slots = [slots[i] for i in order[: len(free)]]
    for s, name in zip(free_slots, free):
        labels[s] = name
    rest = [slots[i] for i in order[len(free):]]
    for p in range(0, len(rest), 2):
        labels[rest[p]] = labels[rest[p + 1]] = f"l{p // 2}"
    factors = []
    for j, s in enumerate(syms):
        idx = tuple(labels[("i", j, q)] for q in range(s.n_indices))
        der = tuple(labels[("d", j, q)] for q in range(nder[j]))
        factors.append(DerivedField(s, idx, der))
    num = draw(st.integers(-4, 4).filter(bool))
    den = draw(st.integers(1, 3))
    tr = draw(st.booleans()) if traced is None else traced
    return Monomial(Coeff.const(Fraction(num, den)), tuple(factors), (), (), tr)


@st.composite
def expressions(draw, species=ALL, max_terms=3, traced=None, **kw):
    tr = draw(st.booleans()) if traced is None else traced
    terms = draw(st.lists(monomials(species=species, traced=tr, **kw), min_size=1, max_size=max_terms))
    return Expression(terms)


def homogeneous(draw_list, ghost: int):
    return [m for m in draw_list if m.ghost_number == ghost]
