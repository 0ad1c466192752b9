"""Canonical forms.

Density level: gamma strings are reduced to a single antisymmetrised block
(Euclidean Clifford algebra, ``{γ^a, γ^b} = 2δ^{ab}``, four dimensions),
metrics are contracted, summed labels are renamed by first appearance along a
fixed traversal (branching only where commuting slots leave a choice), and
traced words are rotated with their Grassmann sign.  The lexicographically
smallest candidate wins; if the minimal candidates disagree in sign the
monomial equals its own negative and is dropped.

Integrated level: additionally every monomial is projected onto the
complement of total derivatives by moving all derivatives off a
distinguished factor, namely the first factor of a rotation whose word of
species is minimal (averaged over all such rotations, which keeps the map
linear and hence independent of how a monomial is written).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

from .coeff import Coeff
from .expr import (
    DIM,
    Expression,
    IndexStructureError,
    Level,
    Monomial,
    leibniz,
)
from .fields import DerivedField

# --------------------------------------------------------------------------
# gamma matrices and metrics
# --------------------------------------------------------------------------


def _perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (all entries distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _expand_block(block: tuple[str, ...]):
    """γ^{[a1…ak]} as (1/k!) Σ_σ sgn σ γ^{aσ1}…γ^{aσk}."""
    k = len(block)
    if k <= 1:
        return [(Fraction(1), block)]
    w = Fraction(1, math.factorial(k))
    out = []
    for perm in itertools.permutations(range(k)):
        out.append((w * _perm_sign(perm), tuple(block[p] for p in perm)))
    return out


def _times_gamma(coef, block, mets, b):
    """γ^{[A]} γ^b = γ^{[A b]} + Σ_j (−1)^{k−1−j} δ^{a_j b} γ^{[A∖a_j]}."""
    k = len(block)
    out = []
    if b not in block and k < DIM:
        out.append((coef, block + (b,), mets))
    for j, a in enumerate(block):
        sign = -1 if (k - 1 - j) % 2 else 1
        out.append((coef * sign, block[:j] + block[j + 1:], mets + ((a, b),)))
    return out


@lru_cache(maxsize=None)
def reduce_gammas(blocks: tuple[tuple[str, ...], ...]):
    """Reduce a product of gamma blocks to ``[(coef, block, extra_metrics)]``."""
    state = [(Fraction(1), (), ())]
    for blk in blocks:
        if len(set(blk)) != len(blk) or len(blk) > DIM:
            return []
        new = []
        for coef, cur, mets in state:
            for c2, raw in _expand_block(blk):
                partial = [(coef * c2, cur, mets)]
                for b in raw:
                    partial = [t for p in partial for t in _times_gamma(*p, b)]
                new.extend(partial)
        state = new
    return state


def _contract(factors, block, metrics):
    """Contract metrics against other slots; returns (multiplier, factors, block, metrics) or None."""
    factors = list(factors)
    block = list(block)
    metrics = list(metrics)
    mult = 1
    changed = True
    while changed:
        changed = False
        for mi, (x, y) in enumerate(metrics):
            if x == y:
                mult *= DIM
                del metrics[mi]
                changed = True
                break
            for old, new in ((x, y), (y, x)):
                if _occurs_elsewhere(old, mi, factors, block, metrics):
                    del metrics[mi]
                    _rename(old, new, factors, block, metrics)
                    changed = True
                    break
            if changed:
                break
    if len(set(block)) != len(block):
        return None
    return mult, tuple(factors), tuple(block), tuple(metrics)


def _occurs_elsewhere(label, mi, factors, block, metrics) -> bool:
    if label in block:
        return True
    for f in factors:
        if label in f.indices or label in f.derivs:
            return True
    for j, (a, b) in enumerate(metrics):
        if j != mi and label in (a, b):
            return True
    return False


def _rename(old, new, factors, block, metrics):
    mapping = {old: new}
    for j, f in enumerate(factors):
        if old in f.indices or old in f.derivs:
            factors[j] = f.relabel(mapping)
    for j, l in enumerate(block):
        if l == old:
            block[j] = new
    for j, (a, b) in enumerate(metrics):
        metrics[j] = (mapping.get(a, a), mapping.get(b, b))


# --------------------------------------------------------------------------
# canonical relabelling
# --------------------------------------------------------------------------


def _lkey(label, assign):
    """Sort key of a label: free labels before summed ones."""
    n = assign.get(label)
    return (0, label) if n is None else (1, n)


def _labelings(groups, dummies):
    """Enumerate first-appearance numberings of the summed labels."""
    states = [{}]
    for grp in groups:
        new_states = []
        for asg in states:
            todo = []
            for l in grp:
                if l in dummies and l not in asg and l not in todo:
                    todo.append(l)
            if not todo:
                new_states.append(asg)
                continue
            for perm in itertools.permutations(todo):
                a2 = dict(asg)
                for l in perm:
                    a2[l] = len(a2)
                new_states.append(a2)
        states = new_states
    return states


def _rotations(factors, traced):
    if not traced or len(factors) < 2:
        return [(factors, 1)]
    out = []
    n = len(factors)
    for r in range(n):
        head, tail = factors[:r], factors[r:]
        ph = sum(f.odd for f in head) % 2
        pt = sum(f.odd for f in tail) % 2
        out.append((tail + head, -1 if ph and pt else 1))
    return out


@lru_cache(maxsize=None)
def canonical_structure(factors, block, metrics, traced):
    """Return ``(sign, factors, block, metrics)`` in canonical labels, or None if zero."""
    counts: dict[str, int] = {}
    for f in factors:
        for l in f.indices + f.derivs:
            counts[l] = counts.get(l, 0) + 1
    for l in block:
        counts[l] = counts.get(l, 0) + 1
    for a, b in metrics:
        counts[a] = counts.get(a, 0) + 1
        counts[b] = counts.get(b, 0) + 1
    bad = sorted(l for l, c in counts.items() if c > 2)
    if bad:
        raise IndexStructureError(f"labels {bad} occur more than twice")
    dummies = {l for l, c in counts.items() if c == 2}
    met_key = tuple(sorted(tuple(sorted(p)) for p in metrics))

    best = None
    best_signs: set[int] = set()
    best_data = None
    rots = _rotations(factors, traced)
    if len(rots) > 1:
        # the species word leads the key, so only minimal words compete
        wmin = min(_species_word(r) for r, _ in rots)
        rots = [(r, s) for r, s in rots if _species_word(r) == wmin]
    for rot, rsign in rots:
        groups = [block]
        for f in rot:
            for l in f.indices:
                groups.append((l,))
            groups.append(f.derivs)
        for asg in _labelings(groups, dummies):
            bkeys = [_lkey(l, asg) for l in block]
            bsign = _perm_sign(bkeys)
            fkey = tuple(
                (
                    f.base.rank,
                    tuple(_lkey(l, asg) for l in f.indices),
                    tuple(sorted(_lkey(l, asg) for l in f.derivs)),
                )
                for f in rot
            )
            key = (tuple(sorted(bkeys)), fkey)
            sign = rsign * bsign
            if best is None or key < best:
                best, best_signs, best_data = key, {sign}, (rot, asg)
            elif key == best:
                best_signs.add(sign)
    if len(best_signs) > 1:
        return None
    rot, asg = best_data
    names = {l: f"~{n}" for l, n in asg.items()}
    new_factors = tuple(f.relabel(names) for f in rot)
    new_block = tuple(names.get(l, l) for l in sorted(block, key=lambda l: _lkey(l, asg)))
    return best_signs.pop(), new_factors, new_block, met_key


def sort_key(m: Monomial):
    def lk(l):
        return (1, int(l[1:])) if l.startswith("~") else (0, l)

    return (
        m.traced,
        tuple(sorted(lk(l) for l in (m.gammas[0] if m.gammas else ()))),
        m.metrics,
        tuple((f.base.rank, tuple(lk(l) for l in f.indices), tuple(lk(l) for l in f.derivs))
              for f in m.factors),
    )


def canonical_monomials(m: Monomial) -> list[Monomial]:
    """Density-level canonical form of one monomial (possibly several terms, or none)."""
    out = []
    for gcoef, block, gmets in reduce_gammas(m.gammas):
        c = _contract(m.factors, block, m.metrics + gmets)
        if c is None:
            continue
        mult, factors, blk, mets = c
        res = canonical_structure(factors, blk, mets, m.traced)
        if res is None:
            continue
        sign, f2, b2, m2 = res
        coef = m.coeff * (gcoef * mult * sign)
        out.append(Monomial(coef, f2, (b2,) if b2 else (), m2, m.traced))
    return out


def collect(monos) -> list[Monomial]:
    acc: dict = {}
    for m in monos:
        key = (m.factors, m.gammas, m.metrics, m.traced)
        prev = acc.get(key)
        acc[key] = m.coeff if prev is None else prev + m.coeff
    out = [Monomial(c, *k) for k, c in acc.items() if not c.is_zero()]
    out.sort(key=sort_key)
    return out


# --------------------------------------------------------------------------
# integration by parts
# --------------------------------------------------------------------------


def _species_word(factors):
    return tuple(f.base.rank for f in factors)


@lru_cache(maxsize=None)
def _ibp_structure(factors, block, metrics, traced):
    """Project one canonical structure; returns [(Fraction, factors)]."""
    if not factors:
        return [(Fraction(1), factors)]
    rots = _rotations(factors, traced)
    words = [_species_word(r) for r, _ in rots]
    wmin = min(words)
    chosen = [(r, s) for (r, s), w in zip(rots, words) if w == wmin]
    weight = Fraction(1, len(chosen))
    out = []
    for rot, rsign in chosen:
        first = rot[0]
        alpha = first.derivs
        if not alpha:
            out.append((weight * rsign, rot))
            continue
        rest = rot[1:]
        if not rest:
            # a pure total derivative
            continue
        bare = DerivedField(first.base, first.indices, ())
        sign = rsign * (-1 if len(alpha) % 2 else 1)
        for new_rest in leibniz(rest, alpha):
            out.append((weight * sign, (bare,) + new_rest))
    return out


def ibp_project(monos) -> list[Monomial]:
    out = []
    for m in monos:
        blk = m.gammas[0] if m.gammas else ()
        for w, facs in _ibp_structure(m.factors, blk, m.metrics, m.traced):
            out.extend(canonical_monomials(Monomial(m.coeff * w, facs, m.gammas, m.metrics, m.traced)))
    return out


def normal_form(e: Expression, ibp: bool | None = None) -> Expression:
    """Canonical form; ``ibp`` defaults to True for integrated functionals."""
    if ibp is None:
        ibp = e.level is Level.INTEGRATED
    for m in e.terms:
        m.check_indices()
    terms = collect(m2 for m in e.terms for m2 in canonical_monomials(m))
    if ibp:
        terms = collect(ibp_project(terms))
    return Expression(terms, e.level)


def coefficient_of(e: Expression, template: Expression) -> Coeff:
    """Coefficient ``c`` such that ``e`` contains ``c * template``.

    Read off the first canonical monomial of ``template``; callers that need
    ``e`` to be an exact multiple must check the remainder themselves.
    """
    t = normal_form(template)
    if not t.terms:
        raise ValueError("template normalises to zero")
    tm = t.terms[0]
    key = (tm.factors, tm.gammas, tm.metrics, tm.traced)
    for m in normal_form(e).terms:
        if (m.factors, m.gammas, m.metrics, m.traced) == key:
            return m.coeff / tm.coeff
    return Coeff()
