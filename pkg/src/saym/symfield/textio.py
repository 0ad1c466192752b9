"""Deterministic text form of expressions, one monomial per line.

Each line has tab-separated fields::

    coefficient  tr|mat  factors  gamma  metrics  pairing

``factors`` is a space-separated list ``Name(indices;derivatives)``; the
pairing lists each summed label with its two slots, e.g. ``~0=f0.i0/f1.d1``
(factor 0 index slot 0 and factor 1 derivative slot 1); gamma slots are
``g<k>`` and metric slots ``m<k>.<0|1>``.
"""

from __future__ import annotations

from .canon import normal_form
from .expr import Expression, Monomial


def _slots(m: Monomial) -> dict[str, list[str]]:
    where: dict[str, list[str]] = {}
    for j, f in enumerate(m.factors):
        for k, l in enumerate(f.indices):
            where.setdefault(l, []).append(f"f{j}.i{k}")
        for k, l in enumerate(f.derivs):
            where.setdefault(l, []).append(f"f{j}.d{k}")
    for j, blk in enumerate(m.gammas):
        for k, l in enumerate(blk):
            where.setdefault(l, []).append(f"g{j}.{k}")
    for j, (a, b) in enumerate(m.metrics):
        where.setdefault(a, []).append(f"m{j}.0")
        where.setdefault(b, []).append(f"m{j}.1")
    return where


def monomial_line(m: Monomial) -> str:
    facs = " ".join(
        f"{f.base.name}({','.join(f.indices)};{','.join(f.derivs)})" for f in m.factors
    ) or "1"
    gam = "|".join(",".join(b) for b in m.gammas) or "-"
    mets = " ".join(f"{a},{b}" for a, b in m.metrics) or "-"
    pairs = [f"{l}={'/'.join(s)}" for l, s in sorted(_slots(m).items()) if len(s) == 2]
    return "\t".join(
        [str(m.coeff), "tr" if m.traced else "mat", facs, gam, mets, " ".join(pairs) or "-"]
    )


def to_text(e: Expression, normalize: bool = True, ibp: bool | None = None) -> str:
    if normalize:
        e = normal_form(e, ibp=ibp)
    lines = [f"# level={e.level.value} terms={len(e.terms)}"]
    lines.extend(monomial_line(m) for m in e.terms)
    return "\n".join(lines) + "\n"
