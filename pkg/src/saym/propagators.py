"""Momentum-space gauge and ghost propagators with a polynomial form factor.

``D_{μν}(p) = [δ_{μν} − (1−ξ) p_μp_ν/(p²+iη)] / ((p²+iη) φ(p²))`` times the
colour delta, ``D̃(p) = 1/((p²+iη) φ(p²))``.  The quadratic kernel of the
kinetic plus gauge-fixing terms is ``K = φ(p²)[p²δ − pp] + ξ^{−1} φ(p²) pp``,
normalised so that ``K·D = 1``.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .cutoff import FormFactor


class PoleError(ArithmeticError):
    pass


class FormFactorZeroError(ArithmeticError):
    pass


class SingularKernelError(ArithmeticError):
    pass


class Signature(enum.Enum):
    EUCLIDEAN = "euclidean"
    LORENTZIAN = "lorentzian"


_LORENTZ_METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class Momentum:
    components: tuple[float, float, float, float]
    signature: Signature = Signature.EUCLIDEAN
    eta: float = 1e-9

    def __post_init__(self):
        if len(self.components) != 4:
            raise ValueError("momenta have four components")
        if self.signature is Signature.LORENTZIAN and not self.eta > 0:
            raise ValueError("the iη prescription needs η > 0")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    @property
    def metric(self) -> np.ndarray:
        return np.eye(4) if self.signature is Signature.EUCLIDEAN else _LORENTZ_METRIC

    @property
    def lowered(self) -> np.ndarray:
        return self.metric @ self.vector

    @property
    def psq(self) -> complex:
        """``p²`` (plus ``iη`` in the Lorentzian mode)."""
        v = self.vector
        sq = float(v @ self.metric @ v)
        if self.signature is Signature.EUCLIDEAN:
            return complex(sq)
        return complex(sq, self.eta)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class ColorDelta:
    """The colour factor ``δ^{ab}``, kept apart from the Lorentz tensor."""

    def __str__(self) -> str:
        return "δ^{ab}"

    def __call__(self, a: int, b: int) -> int:
        return int(a == b)


DELTA = ColorDelta()


@dataclass(frozen=True)
class PropagatorValue:
    tensor: np.ndarray
    color: ColorDelta = DELTA

    def component(self, mu: int, nu: int, a: int = 0, b: int = 0) -> complex:
        return self.tensor[mu, nu] * self.color(a, b)

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.tensor)))


def _denominator(p: Momentum, phi: FormFactor) -> tuple[complex, complex]:
    psq = p.psq
    if psq == 0:
        raise PoleError("propagator pole at p² = 0")
    ph = complex(phi(psq))
    if abs(ph) < 1e-300:
        raise FormFactorZeroError(f"form factor vanishes at p² = {psq}")
    return psq, ph


def gauge_propagator(p: Momentum, xi: float, phi: FormFactor) -> PropagatorValue:
    psq, ph = _denominator(p, phi)
    pl = p.lowered
    t = (p.metric - (1 - xi) * np.outer(pl, pl) / psq) / (psq * ph)
    if p.signature is Signature.EUCLIDEAN:
        t = t.real
    return PropagatorValue(t)


def ghost_propagator(p: Momentum, phi: FormFactor) -> complex:
    psq, ph = _denominator(p, phi)
    val = 1 / (psq * ph)
    return val.real if p.signature is Signature.EUCLIDEAN else val


def kernel(p: Momentum, xi: float, phi: FormFactor) -> np.ndarray:
    """Quadratic kernel of kinetic plus gauge-fixing terms (Euclidean)."""
    if p.signature is not Signature.EUCLIDEAN:
        raise ValueError("the kernel is built in the Euclidean signature")
    if math.isinf(xi):
        raise SingularKernelError("without gauge fixing the kernel annihilates p and is singular")
    v = p.vector
    psq = float(v @ v)
    ph = float(np.real(phi(psq)))
    pp = np.outer(v, v)
    return ph * (psq * np.eye(4) - pp) + ph * pp / xi


def inversion_check(p: Momentum, xi: float, phi: FormFactor) -> float:
    """``‖K·D − 1‖_max``."""
    if p.signature is not Signature.EUCLIDEAN:
        raise ValueError("inversion is checked in the Euclidean signature")
    if p.norm == 0:
        raise PoleError("p = 0")
    K = kernel(p, xi, phi)
    D = gauge_propagator(p, xi, phi).tensor
    return float(np.max(np.abs(K @ D - np.eye(4))))


def _direction(seed: int = 0) -> np.ndarray:
    v = np.random.default_rng(seed).normal(size=4)
    return v / np.linalg.norm(v)


def uv_scaling_exponent(phi: FormFactor, xi: float = 1.0, which: str = "gauge",
                        points: int = 41, seed: int = 0) -> float:
    """Least-squares slope of ``log‖D‖`` against ``log|p|`` for ``|p| ∈ [10²Λ, 10³Λ]``."""
    lam = phi.Lambda if math.isfinite(phi.Lambda) else 1.0
    mags = np.logspace(2, 3, points) * lam
    u = _direction(seed)
    logs = []
    for m in mags:
        p = Momentum(tuple(m * u))
        if which == "gauge":
            val = gauge_propagator(p, xi, phi).norm
        elif which == "ghost":
            val = abs(ghost_propagator(p, phi))
        else:
            raise ValueError(f"unknown propagator {which!r}")
        logs.append(math.log(val))
    slope, _ = np.polyfit(np.log(mags), np.array(logs), 1)
    return float(slope)


def scan_csv(phi: FormFactor, xi: float, lo: float, hi: float, points: int = 50,
             seed: int = 0) -> str:
    """CSV rows ``|p|, ‖D‖, |D̃|`` along a fixed direction, log-spaced."""
    u = _direction(seed)
    out = io.StringIO()
    out.write("p,gauge_norm,ghost_abs\n")
    for m in np.logspace(math.log10(lo), math.log10(hi), points):
        p = Momentum(tuple(m * u))
        out.write(f"{m:.10g},{gauge_propagator(p, xi, phi).norm:.10g},"
                  f"{abs(ghost_propagator(p, phi)):.10g}\n")
    return out.getvalue()
