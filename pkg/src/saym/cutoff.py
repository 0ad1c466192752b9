"""Cutoff functions given as Laplace transforms, their moments and derivatives
at zero, and the truncated form factor built from them.

A cutoff is ``f(x) = ∫_{t>0} e^{−t x²} g(t) dt`` for a positive density ``g``;
its moments are ``f_k = ∫ t^{−k/2} g(t) dt``.  Point-mass densities are
handled in closed form, smooth densities by adaptive quadrature (moments) and
Richardson-extrapolated central differences on a high-precision evaluation of
``f`` (derivatives), tabulated densities by the trapezoidal rule.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from scipy import integrate


class DivergenceError(ArithmeticError):
    def __init__(self, endpoint: str, k: int):
        super().__init__(f"moment f_{k} diverges at the endpoint {endpoint}")
        self.endpoint = endpoint
        self.k = k


class AccuracyError(ArithmeticError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Moment:
    value: float
    error: float

    def as_dict(self) -> dict:
        return {"value": self.value, "error": self.error}


# --------------------------------------------------------------------------
# cutoff functions
# --------------------------------------------------------------------------


class CutoffFunction:
    """Base class; subclasses give ``moment`` and ``derivative_at_zero``."""

    label = "cutoff"

    def f(self, x: float) -> float:
        raise NotImplementedError

    def moment(self, k: int) -> Moment:
        raise NotImplementedError

    def derivative_at_zero(self, m: int) -> Moment:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(CutoffFunction):
    """``g = Σ w_i δ(t − t_i)`` so that ``f(x) = Σ w_i e^{−t_i x²}``."""

    weights: tuple[float, ...]
    times: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.times) or not self.weights:
            raise DomainError("point masses need matching non-empty weights and times")
        if any(w <= 0 for w in self.weights) or any(t <= 0 for t in self.times):
            raise DomainError("point-mass weights and times must be positive")

    @property
    def label(self) -> str:
        return "pointmass:" + ",".join(f"{w:g}@{t:g}" for w, t in zip(self.weights, self.times))

    def f(self, x):
        return sum(w * math.exp(-t * x * x) for w, t in zip(self.weights, self.times))

    def moment(self, k: int) -> Moment:
        return Moment(math.fsum(w * t ** (-k / 2) for w, t in zip(self.weights, self.times)), 0.0)

    def derivative_at_zero(self, m: int) -> Moment:
        if m % 2:
            return Moment(0.0, 0.0)
        k = m // 2
        # e^{−t x²} = Σ_k (−t)^k x^{2k}/k!
        scale = math.factorial(2 * k) / math.factorial(k)
        return Moment(math.fsum(w * (-t) ** k * scale for w, t in zip(self.weights, self.times)), 0.0)


GAUSS = PointMass((1.0,), (1.0,))


def _richardson_derivative(f: Callable, m: int, h0, levels: int = 8):
    """``f^{(m)}(0)`` from central differences at ``h0/2^j`` and Richardson
    extrapolation in ``h²``; returns ``(value, error estimate)`` as mpf."""
    binom = [mpmath.binomial(m, j) for j in range(m + 1)]

    def central(h):
        s = mpmath.mpf(0)
        for j in range(m + 1):
            s += (-1) ** j * binom[j] * f((mpmath.mpf(m) / 2 - j) * h)
        return s / h**m

    table = []
    for j in range(levels):
        row = [central(h0 / 2**j)]
        for i in range(1, j + 1):
            r = 4**i
            row.append((r * row[i - 1] - table[j - 1][i - 1]) / (r - 1))
        table.append(row)
    best = table[-1][-1]
    err = abs(best - table[-2][-2])
    return best, err


@dataclass(frozen=True)
class ClosedForm(CutoffFunction):
    """Smooth density ``g`` on ``t > 0``.

    ``small_t_power`` is the exponent ``a`` of ``g ~ t^a`` as ``t → 0``;
    ``large_t`` is ``"exp"`` for exponential decay or a number ``b`` for
    ``g ~ t^{−b}``.  ``g`` must accept mpmath numbers; ``laplace`` optionally
    gives ``f`` in closed form.
    """

    name: str
    g: Callable
    small_t_power: float = 0.0
    large_t: object = "exp"
    laplace: Callable | None = None
    dps: int = 60

    @property
    def label(self) -> str:
        return self.name

    def _check(self, k: int) -> None:
        if self.small_t_power - k / 2 <= -1:
            raise DivergenceError("t->0", k)
        if self.large_t != "exp" and -float(self.large_t) - k / 2 >= -1:
            raise DivergenceError("t->inf", k)

    def moment(self, k: int) -> Moment:
        self._check(k)

        def integrand(t):
            return t ** (-k / 2) * float(self.g(mpmath.mpf(t)))

        lo, e1 = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=400)
        hi, e2 = integrate.quad(integrand, 1.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=400)
        val = lo + hi
        # quad's estimate plus the floating floor of the sum
        return Moment(val, float(e1 + e2 + 4 * np.finfo(float).eps * abs(val)))

    def _f_mp(self, x):
        if self.laplace is not None:
            return self.laplace(x)
        return mpmath.quad(lambda t: mpmath.exp(-t * x * x) * self.g(t), [0, 1, mpmath.inf])

    def f(self, x):
        with mpmath.workdps(30):
            return float(self._f_mp(mpmath.mpf(x)))

    def derivative_at_zero(self, m: int) -> Moment:
        if m % 2:
            return Moment(0.0, 0.0)
        with mpmath.workdps(self.dps):
            h0 = mpmath.mpf(1) / (4 * max(m, 1))
            val, err = _richardson_derivative(self._f_mp, m, h0)
            return Moment(float(val), float(err) + 4 * np.finfo(float).eps * abs(float(val)))


def exp_density() -> ClosedForm:
    """``g(t) = e^{−t}``, ``f(x) = 1/(1 + x²)``."""
    return ClosedForm("density:exp", lambda t: mpmath.exp(-t), 0.0, "exp",
                      lambda x: 1 / (1 + x * x))


def gamma_density(a: float) -> ClosedForm:
    """``g(t) = t^{a−1} e^{−t}/Γ(a)``, ``f(x) = (1 + x²)^{−a}``."""
    if a <= 0:
        raise DomainError("gamma density needs a > 0")
    a_mp = mpmath.mpf(a)
    return ClosedForm(
        f"density:gamma:{a:g}",
        lambda t: t ** (a_mp - 1) * mpmath.exp(-t) / mpmath.gamma(a_mp),
        a - 1.0,
        "exp",
        lambda x: (1 + x * x) ** (-a_mp),
    )


@dataclass(frozen=True)
class Tabulated(CutoffFunction):
    """Samples ``(t_i, g_i)`` with piecewise-linear interpolation, zero outside."""

    t: tuple[float, ...]
    g: tuple[float, ...]
    source: str = "table"
    rtol: float = 1e-6

    def __post_init__(self):
        t = np.asarray(self.t)
        if len(t) < 3 or len(t) != len(self.g):
            raise DomainError("a table needs at least three (t, g) rows")
        if np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise DomainError("table abscissae must be positive and increasing")

    @property
    def label(self) -> str:
        return f"table:{self.source}"

    @classmethod
    def from_file(cls, path: str | Path) -> "Tabulated":
        data = np.loadtxt(path, ndmin=2)
        return cls(tuple(data[:, 0]), tuple(data[:, 1]), str(path))

    def _trap(self, values: np.ndarray, stride: int = 1) -> float:
        t = np.asarray(self.t)[::stride]
        return float(np.trapezoid(values[::stride], t))

    def moment(self, k: int) -> Moment:
        t = np.asarray(self.t)
        vals = t ** (-k / 2) * np.asarray(self.g)
        full = self._trap(vals)
        if len(t) % 2 == 1:
            coarse = self._trap(vals, 2)
            # the h² Richardson estimate is asymptotic; a factor 2 keeps it an upper bound
            err = 2 * abs(full - coarse) / 3
        else:
            err = abs(full - self._trap(vals[:-1]))
        return Moment(full, float(err))

    def f(self, x):
        t = np.asarray(self.t)
        return self._trap(np.exp(-t * x * x) * np.asarray(self.g))

    def derivative_at_zero(self, m: int) -> Moment:
        if m % 2:
            return Moment(0.0, 0.0)
        g = [mpmath.mpf(v) for v in self.g]
        ts = [mpmath.mpf(v) for v in self.t]
        w = [(ts[i + 1] - ts[i]) / 2 for i in range(len(ts) - 1)]

        def f_mp(x):
            vals = [mpmath.exp(-tt * x * x) * gg for tt, gg in zip(ts, g)]
            return mpmath.fsum(w[i] * (vals[i] + vals[i + 1]) for i in range(len(w)))

        with mpmath.workdps(40):
            tmax = max(ts)
            h0 = 1 / (4 * max(m, 1) * mpmath.sqrt(tmax))
            val, err = _richardson_derivative(f_mp, m, h0, levels=6)
        val, err = float(val), float(err)
        # the table's own discretisation error bounds what the derivative can resolve
        k = m // 2
        disc = self.moment(-m).error * math.factorial(m) / math.factorial(k)
        err = err + disc
        if err > self.rtol * max(abs(val), 1e-300):
            raise AccuracyError(
                f"table resolution gives f^({m})(0) only to relative {err / abs(val):.2e}"
            )
        return Moment(val, err)


# --------------------------------------------------------------------------
# Hermite polynomials and the moment identity
# --------------------------------------------------------------------------


def hermite(m: int, x: float) -> float:
    """Probabilists' Hermite polynomial ``He_m(x)`` by the three-term recurrence."""
    if m < 0:
        raise DomainError("Hermite degree must be non-negative")
    h0, h1 = 1.0, x
    if m == 0:
        return h0
    for j in range(1, m):
        h0, h1 = h1, x * h1 - j * h0
    return h1


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def moment(g: CutoffFunction, k: int) -> Moment:
    return g.moment(k)


def derivative_at_zero(g: CutoffFunction, m: int) -> Moment:
    if m < 0:
        raise DomainError("derivative order must be non-negative")
    return g.derivative_at_zero(m)


def double_factorial_rhs(deriv: float, k: int) -> float:
    """``(−1)^k f^{(2k)}(0)/(2k−1)!!``."""
    return (-1) ** k * deriv / double_factorial(2 * k - 1)


def corrected_relation_rhs(deriv: float, k: int) -> float:
    """``(−1)^k f^{(2k)}(0) k!/(2k)!``, the relation implied by the moment integrals."""
    return (-1) ** k * deriv * math.factorial(k) / math.factorial(2 * k)


@dataclass
class LemmaRow:
    k: int
    moment: Moment
    derivative: Moment
    double_factorial_rhs: float
    ratio: float
    hermite_rhs: float
    corrected_rhs: float
    corrected_residual: float
    tolerance: float
    law_deviation: float = 0.0
    flagged: bool = False

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "f_neg": self.moment.value,
            "f_neg_error": self.moment.error,
            "derivative": self.derivative.value,
            "derivative_error": self.derivative.error,
            "double_factorial_rhs": self.double_factorial_rhs,
            "ratio": self.ratio,
            "hermite_rhs": self.hermite_rhs,
            "corrected_rhs": self.corrected_rhs,
            "corrected_residual": self.corrected_residual,
            "tolerance": self.tolerance,
            "law_deviation": self.law_deviation,
            "flagged": self.flagged,
        }


@dataclass
class LemmaReport:
    cutoff: str
    rows: list[LemmaRow]
    fitted_base: float
    corrected_ok: bool
    flag_threshold: float = 1e-8

    @property
    def ratios(self) -> dict[int, float]:
        return {r.k: r.ratio for r in self.rows}

    @property
    def ok(self) -> bool:
        return self.corrected_ok and not any(r.flagged for r in self.rows)

    def as_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "fitted_base": self.fitted_base,
            "fitted_law": "ratio_k = base**k",
            "corrected_ok": self.corrected_ok,
            "rows": [r.as_dict() for r in self.rows],
        }


def verify_moment_lemma(g: CutoffFunction, kmax: int, flag_threshold: float = 1e-8) -> LemmaReport:
    """Compare ``f_{−2k}`` from the moment integral with the derivative route.

    For each ``k`` the double-factorial relation ``(−1)^k f^{(2k)}(0)/(2k−1)!!`` is
    divided by the moment; the ratios are fitted to ``base^k``.  The Hermite
    form ``∫ H_{2k}(0) t^k g`` and the corrected relation are reported too.
    """
    if kmax < 1:
        raise DomainError("kmax must be at least 1")
    rows = []
    corrected_ok = True
    for k in range(1, kmax + 1):
        mom = g.moment(-2 * k)
        der = g.derivative_at_zero(2 * k)
        rhs = double_factorial_rhs(der.value, k)
        herm = hermite(2 * k, 0.0) * mom.value
        corr = corrected_relation_rhs(der.value, k)
        corr_err = der.error * math.factorial(k) / math.factorial(2 * k)
        tol = max(mom.error + corr_err, 1e-10 * abs(mom.value)) if mom.error or der.error \
            else 1e-10 * abs(mom.value)
        resid = abs(corr - mom.value)
        corrected_ok &= resid <= tol
        rows.append(LemmaRow(k, mom, der, rhs, rhs / mom.value, herm, corr, resid, tol))
    ks = np.array([r.k for r in rows], dtype=float)
    logs = np.log2(np.array([r.ratio for r in rows]))
    slope = float(np.dot(ks, logs) / np.dot(ks, ks))
    base = 2.0**slope
    for r in rows:
        r.law_deviation = abs(r.ratio / base**r.k - 1)
        r.flagged = r.law_deviation > flag_threshold
    return LemmaReport(g.label, rows, base, corrected_ok, flag_threshold)


# --------------------------------------------------------------------------
# moment tables and the form factor
# --------------------------------------------------------------------------


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SAYM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class MomentTable:
    cutoff: str
    entries: dict[int, Moment] = field(default_factory=dict)

    @classmethod
    def compute(cls, g: CutoffFunction, ks: Iterable[int]) -> "MomentTable":
        ks = sorted(set(ks))
        with ThreadPoolExecutor(worker_count()) as pool:
            vals = list(pool.map(g.moment, ks))
        return cls(g.label, dict(zip(ks, vals)))

    def __getitem__(self, k: int) -> Moment:
        return self.entries[k]

    def __contains__(self, k: int) -> bool:
        return k in self.entries

    def values(self) -> dict[int, float]:
        return {k: m.value for k, m in self.entries.items()}

    def as_dict(self) -> dict:
        return {str(k): m.as_dict() for k, m in sorted(self.entries.items())}


@dataclass(frozen=True)
class FormFactor:
    """``φ(p²) = (f_0 c_0)^{−1} Σ_k Λ^{−2k} f_{−2k} c_k p^{2k}``, constant term 1."""

    n: int
    Lambda: float
    c: tuple[float, ...]
    f_neg: tuple[float, ...]
    rescale: float = 1.0

    def __post_init__(self):
        if self.n % 2 or self.n < 4:
            raise DomainError("truncation order must be even and at least 4")
        if not self.Lambda > 0:
            raise DomainError("Lambda must be positive")
        if len(self.c) != self.degree + 1 or len(self.f_neg) != self.degree + 1:
            raise DomainError(f"need {self.degree + 1} coefficients c_k and moments f_-2k")
        if self.f_neg[0] * self.c[0] == 0:
            raise DomainError("f_0 c_0 must be nonzero")

    @classmethod
    def trivial(cls, Lambda: float = 1.0) -> "FormFactor":
        """``φ ≡ 1``: the formal ``n = 4`` case of an ordinary propagator."""
        return cls(4, Lambda, (-0.25,), (1.0,))

    @property
    def degree(self) -> int:
        return self.n // 2 - 2

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients of ``φ`` in powers of ``p²``."""
        norm = self.f_neg[0] * self.c[0]
        if math.isinf(self.Lambda):
            out = np.zeros(self.degree + 1)
            out[0] = 1.0
            return out
        return np.array([self.Lambda ** (-2 * k) * self.f_neg[k] * self.c[k] / norm
                         for k in range(self.degree + 1)])

    def __call__(self, psq):
        coeffs = self.coefficients
        acc = np.zeros_like(np.asarray(psq, dtype=complex)) if np.iscomplexobj(psq) else 0.0 * np.asarray(psq, dtype=float)
        for a in coeffs[::-1]:
            acc = acc * psq + a
        return acc

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "Lambda": self.Lambda,
            "c": list(self.c),
            "f_neg": list(self.f_neg),
            "rescale": self.rescale,
            "coefficients": [float(a) for a in self.coefficients],
        }


def build_form_factor(moments: MomentTable | dict, c: Sequence[float], n: int,
                      Lambda: float) -> FormFactor:
    """Form factor of truncation order ``n`` with ``f_0 c_0 = −1/4`` enforced.

    The whole vector ``c`` is rescaled by one factor, recorded in ``rescale``,
    so the ratios ``c_k/c_0`` and hence ``φ`` are unchanged.
    """
    if n % 2 or n < 8:
        raise DomainError(f"truncation order must be even and at least 8, got {n}")
    degree = n // 2 - 2
    vals = moments.values() if isinstance(moments, MomentTable) else dict(moments)
    missing = [-2 * k for k in range(degree + 1) if -2 * k not in vals]
    if missing:
        raise KeyError(f"missing moments f_k for k in {missing}")
    if len(c) < degree + 1:
        raise DomainError(f"need {degree + 1} constants c_k, got {len(c)}")
    f_neg = tuple(float(vals[-2 * k]) for k in range(degree + 1))
    c = tuple(float(x) for x in c[: degree + 1])
    if c[0] == 0 or f_neg[0] == 0:
        raise DomainError("f_0 c_0 must be nonzero")
    s = -0.25 / (f_neg[0] * c[0])
    return FormFactor(n, float(Lambda), tuple(x * s for x in c), f_neg, s)


def eval_form_factor(phi: FormFactor, psq):
    return phi(psq)


@dataclass
class PositivityReport:
    lo: float
    hi: float
    violations: list[tuple[float, float]]

    @property
    def positive(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"range": [self.lo, self.hi], "positive": self.positive,
                "violations": [list(v) for v in self.violations]}


def positivity_scan(phi: FormFactor, lo: float = 0.0, hi: float | None = None) -> PositivityReport:
    """Intervals of ``[lo, hi]`` in ``p²`` where ``φ ≤ 0``, from the real roots."""
    if hi is None:
        hi = 100.0 * phi.Lambda**2 if math.isfinite(phi.Lambda) else 1e6
    coeffs = phi.coefficients
    roots = np.roots(coeffs[::-1]) if len(coeffs) > 1 else np.array([])
    real = sorted(float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and lo < r.real < hi)
    cuts = [lo] + real + [hi]
    bad = []
    for a, b in zip(cuts, cuts[1:]):
        if b > a and phi(0.5 * (a + b)) <= 0:
            if bad and bad[-1][1] == a:
                bad[-1] = (bad[-1][0], b)
            else:
                bad.append((a, b))
    return PositivityReport(lo, hi, bad)


# --------------------------------------------------------------------------
# text grammar
# --------------------------------------------------------------------------


def parse_cutoff(spec: str) -> CutoffFunction:
    """``gauss`` | ``pointmass:w@t,...`` | ``density:exp`` | ``density:gamma:a`` | ``table:path``."""
    spec = spec.strip()
    if spec == "gauss":
        return GAUSS
    if spec.startswith("pointmass:"):
        ws, ts = [], []
        for item in spec.split(":", 1)[1].split(","):
            try:
                w, t = item.split("@")
                ws.append(float(w))
                ts.append(float(t))
            except ValueError as exc:
                raise DomainError(f"bad point mass {item!r}; expected w@t") from exc
        return PointMass(tuple(ws), tuple(ts))
    if spec == "density:exp":
        return exp_density()
    if spec.startswith("density:gamma:"):
        return gamma_density(float(spec.rsplit(":", 1)[1]))
    if spec.startswith("table:"):
        return Tabulated.from_file(spec.split(":", 1)[1])
    raise DomainError(f"unknown cutoff {spec!r}")
