"""Field symbols and derived fields (a base field with commuting partial derivatives)."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class FieldKind(enum.Enum):
    GAUGE_A = "GaugeA"
    GHOST_C = "GhostC"
    ANTIGHOST_CBAR = "AntighostCbar"
    AUX_H = "AuxH"
    GAMMA_MATRIX = "GammaMatrix"
    COUPLING_G = "CouplingG"
    UNIT = "Unit"
    GENERIC = "Generic"


# ordering used for canonical factor comparison and IBP rotation choice
_KIND_RANK = {
    FieldKind.GAUGE_A: 0,
    FieldKind.GHOST_C: 1,
    FieldKind.ANTIGHOST_CBAR: 2,
    FieldKind.AUX_H: 3,
    FieldKind.GENERIC: 4,
}

_FIXED = {
    # kind: (number of Lorentz indices, ghost number)
    FieldKind.GAUGE_A: (1, 0),
    FieldKind.GHOST_C: (0, 1),
    FieldKind.ANTIGHOST_CBAR: (0, -1),
    FieldKind.AUX_H: (0, 0),
}


@dataclass(frozen=True, slots=True)
class FieldSymbol:
    """A Lie-algebra (matrix) valued field species.

    ``weight`` is the contribution of the bare field to the derivative order
    (1 for the gauge potential, whose single Lorentz slot counts once).
    """

    name: str
    kind: FieldKind = FieldKind.GENERIC
    n_indices: int = 0
    ghost_number: int = 0
    odd: bool = False
    weight: int = 0

    def __post_init__(self):
        if self.kind in (FieldKind.GAMMA_MATRIX, FieldKind.COUPLING_G, FieldKind.UNIT):
            raise ValueError(
                f"{self.kind.value} is not a matrix field; use gamma(), param('g') or unit()"
            )
        if self.kind in _FIXED:
            n_idx, gh = _FIXED[self.kind]
            if self.n_indices != n_idx or self.ghost_number != gh:
                raise ValueError(f"{self.kind.value} must carry {n_idx} indices and ghost number {gh}")
        if self.kind is not FieldKind.GENERIC and self.odd != bool(self.ghost_number % 2):
            raise ValueError("Grassmann parity must match ghost number parity")

    @property
    def rank(self) -> tuple[int, str]:
        return (_KIND_RANK[self.kind], self.name)

    def __str__(self) -> str:
        return self.name


GAUGE = FieldSymbol("A", FieldKind.GAUGE_A, 1, 0, False, 1)
GHOST = FieldSymbol("C", FieldKind.GHOST_C, 0, 1, True)
ANTIGHOST = FieldSymbol("Cbar", FieldKind.ANTIGHOST_CBAR, 0, -1, True)
AUX = FieldSymbol("h", FieldKind.AUX_H, 0, 0, False)


def generic(name: str, n_indices: int = 0, *, ghost_number: int = 0,
            odd: bool | None = None, weight: int = 0) -> FieldSymbol:
    """A test/auxiliary species; parity defaults to ghost-number parity."""
    if odd is None:
        odd = bool(ghost_number % 2)
    return FieldSymbol(name, FieldKind.GENERIC, n_indices, ghost_number, odd, weight)


@dataclass(frozen=True, slots=True)
class DerivedField:
    """``∂_{d1}…∂_{dk} X_{i1…}``; derivative labels are kept sorted."""

    base: FieldSymbol
    indices: tuple[str, ...] = ()
    derivs: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.indices) != self.base.n_indices:
            raise ValueError(
                f"{self.base.name} takes {self.base.n_indices} indices, got {self.indices}"
            )
        if list(self.derivs) != sorted(self.derivs):
            object.__setattr__(self, "derivs", tuple(sorted(self.derivs)))

    @property
    def odd(self) -> bool:
        return self.base.odd

    @property
    def order(self) -> int:
        return self.base.weight + len(self.derivs)

    def labels(self) -> tuple[str, ...]:
        return self.indices + self.derivs

    def differentiate(self, mu: str) -> "DerivedField":
        return replace(self, derivs=tuple(sorted(self.derivs + (mu,))))

    def relabel(self, mapping: dict[str, str]) -> "DerivedField":
        return DerivedField(
            self.base,
            tuple(mapping.get(l, l) for l in self.indices),
            tuple(sorted(mapping.get(l, l) for l in self.derivs)),
        )

    def __str__(self) -> str:
        d = "".join(f"∂{l}" for l in self.derivs)
        idx = f"_{''.join(self.indices)}" if self.indices else ""
        return f"{d}{self.base.name}{idx}"
