"""Exact coefficients: Gaussian rationals times Laurent monomials in formal parameters.

A coefficient is a finite sum ``sum_j q_j * i^{e_j} * prod_p p^{a_jp}`` with
``q_j`` a :class:`fractions.Fraction`, the imaginary unit kept as a reserved
parameter ``"i"`` reduced modulo ``i**2 = -1``, and integer (possibly negative)
exponents on named parameters such as ``xi``, ``Lambda``, ``phi[2]``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

__all__ = ["Coeff", "I", "ONE", "ZERO", "as_coeff", "param"]

# A parameter monomial: sorted tuple of (name, exponent), exponents nonzero.
PowerKey = tuple

Scalar = Union[int, Fraction, "Coeff"]

_IMAG = "i"


def _mul_keys(a: PowerKey, b: PowerKey) -> tuple[int, PowerKey]:
    """Multiply two parameter monomials; returns (sign, key)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    exps = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    sign = 1
    ie = exps.pop(_IMAG, 0) % 4
    if ie >= 2:
        sign = -1
        ie -= 2
    if ie:
        exps[_IMAG] = 1
    key = tuple(sorted((k, v) for k, v in exps.items() if v))
    return sign, key


class Coeff:
    """Immutable exact coefficient."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[PowerKey, Fraction] | None = None):
        self._terms = {k: v for k, v in (terms or {}).items() if v}
        self._hash = None

    # -- constructors --------------------------------------------------------
    @classmethod
    def const(cls, value: int | Fraction | str) -> "Coeff":
        return cls({(): Fraction(value)})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "Coeff":
        if name == _IMAG:
            return I**power
        return cls({((name, power),): Fraction(1)}) if power else ONE

    # -- queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._terms

    def items(self):
        return self._terms.items()

    def params(self) -> set[str]:
        return {n for k in self._terms for n, _ in k if n != _IMAG}

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def as_fraction(self) -> Fraction:
        """Return the value if this is a pure rational constant."""
        if not self._terms:
            return Fraction(0)
        if set(self._terms) != {()}:
            raise ValueError(f"coefficient {self} is not a rational constant")
        return self._terms[()]

    def coefficient_of(self, **powers: int) -> Fraction:
        key = tuple(sorted((k, v) for k, v in powers.items() if v))
        return self._terms.get(key, Fraction(0))

    def by_param_power(self, name: str) -> dict[int, "Coeff"]:
        """Split into ``{exponent of name: remaining coefficient}``."""
        out: dict[int, dict] = {}
        for key, val in self._terms.items():
            e = 0
            rest = []
            for n, p in key:
                if n == name:
                    e = p
                else:
                    rest.append((n, p))
            out.setdefault(e, {})[tuple(rest)] = val
        return {e: Coeff(t) for e, t in out.items()}

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other: Scalar) -> "Coeff":
        if not _scalar_like(other):
            return NotImplemented
        other = as_coeff(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0) + v
        return Coeff(terms)

    __radd__ = __add__

    def __neg__(self) -> "Coeff":
        return Coeff({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: Scalar) -> "Coeff":
        return self + (-as_coeff(other))

    def __rsub__(self, other: Scalar) -> "Coeff":
        return as_coeff(other) - self

    def __mul__(self, other: Scalar) -> "Coeff":
        if isinstance(other, (int, Fraction)):
            if other == 1:
                return self
            return Coeff({k: v * other for k, v in self._terms.items()})
        if not _scalar_like(other):
            return NotImplemented
        other = as_coeff(other)
        terms: dict = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                sign, key = _mul_keys(ka, kb)
                terms[key] = terms.get(key, 0) + sign * va * vb
        return Coeff(terms)

    __rmul__ = __mul__

    def inverse(self) -> "Coeff":
        if len(self._terms) != 1:
            raise ZeroDivisionError(f"cannot invert non-monomial coefficient {self}")
        (key, val), = self._terms.items()
        inv = Coeff({tuple((n, -e) for n, e in key if n != _IMAG): 1 / val})
        # 1/i = -i
        return inv * -I if (_IMAG, 1) in key else inv

    def __truediv__(self, other: Scalar) -> "Coeff":
        if not _scalar_like(other):
            return NotImplemented
        return self * as_coeff(other).inverse()

    def __rtruediv__(self, other: Scalar) -> "Coeff":
        return as_coeff(other) * self.inverse()

    def __pow__(self, n: int) -> "Coeff":
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    # -- substitution ---------------------------------------------------------
    def subs(self, values: Mapping[str, Scalar]) -> "Coeff":
        """Substitute parameters by coefficients (negative powers need invertible values)."""
        vals = {k: as_coeff(v) for k, v in values.items()}
        out = ZERO
        for key, val in self._terms.items():
            term = Coeff({(): val})
            rest = []
            for n, e in key:
                if n in vals:
                    term = term * vals[n] ** e
                else:
                    rest.append((n, e))
            out = out + term * Coeff({tuple(rest): Fraction(1)})
        return out

    def evaluate(self, values: Mapping[str, complex] | None = None) -> complex:
        values = values or {}
        total = 0j
        for key, val in self._terms.items():
            term = complex(val)
            for n, e in key:
                if n == _IMAG:
                    term *= 1j**e
                elif n in values:
                    term *= complex(values[n]) ** e
                else:
                    raise KeyError(f"no value for parameter {n!r}")
            total += term
        return total

    # -- comparison / display -------------------------------------------------
    def _sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Coeff.const(other)
        if not isinstance(other, Coeff):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key, val in self._sorted_items():
            imag = any(n == _IMAG for n, _ in key)
            syms = [n if e == 1 else f"{n}^{e}" for n, e in key if n != _IMAG]
            num = str(val)
            if imag:
                num = f"{num}*i"
            if syms and num in ("1", "-1"):
                parts.append(("-" if num == "-1" else "") + "*".join(syms))
            else:
                parts.append("*".join([num] + syms))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Coeff({self})"


ZERO = Coeff()
ONE = Coeff({(): Fraction(1)})
I = Coeff({((_IMAG, 1),): Fraction(1)})


def _scalar_like(x) -> bool:
    return isinstance(x, (Coeff, int, Rational, complex, float)) and not isinstance(x, bool)


def as_coeff(x: Scalar | complex) -> Coeff:
    if isinstance(x, Coeff):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, (int, Rational)):
        return Coeff({(): Fraction(x)})
    if isinstance(x, complex):
        re, im = Fraction(x.real), Fraction(x.imag)
        return Coeff({(): re, ((_IMAG, 1),): im})
    if isinstance(x, float):
        return Coeff({(): Fraction(x)})
    raise TypeError(f"cannot convert {type(x).__name__} to a coefficient")


def param(name: str, power: int = 1) -> Coeff:
    """Shorthand for a formal parameter ``name**power``."""
    return Coeff.symbol(name, power)


def coeff_sum(items: Iterable[Coeff]) -> Coeff:
    terms: dict = {}
    for c in items:
        for k, v in c._terms.items():
            terms[k] = terms.get(k, 0) + v
    return Coeff(terms)
