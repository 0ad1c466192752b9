from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e

from saym.cutoff import (
    GAUSS,
    AccuracyError,
    ClosedForm,
    DivergenceError,
    DomainError,
    FormFactor,
    MomentTable,
    PointMass,
    Tabulated,
    build_form_factor,
    derivative_at_zero,
    double_factorial,
    eval_form_factor,
    exp_density,
    gamma_density,
    hermite,
    moment,
    parse_cutoff,
    positivity_scan,
    verify_moment_lemma,
)

TWO_MASSES = PointMass((0.5, 0.5), (1.0, 4.0))


def exact_pointmass_moment(ws, ts, k):
    # k even keeps t^{-k/2} rational
    return sum(Fraction(w) * Fraction(t) ** Fraction(-k // 2) for w, t in zip(ws, ts))


# --------------------------------------------------------------------------
# moments


@pytest.mark.parametrize("k", [-6, -4, -2, 0, 2, 4])
def test_unit_point_mass_has_unit_moments(k):
    m = moment(GAUSS, k)
    assert m.value == 1.0 and m.error == 0.0


def test_two_masses_negative_moment():
    assert moment(TWO_MASSES, -2).value == 2.5


def test_two_masses_positive_moment_from_definition():
    # ½·1^{−1} + ½·4^{−1}
    want = exact_pointmass_moment((Fraction(1, 2),) * 2, (1, 4), 2)
    assert want == Fraction(5, 8)
    assert moment(TWO_MASSES, 2).value == float(want)


@given(
    st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9)), min_size=1, max_size=4),
    st.sampled_from([-6, -4, -2, 0, 2, 4]),
)
def test_point_mass_moments_match_exact_arithmetic(pairs, k):
    ws = tuple(Fraction(w, 10) for w, _ in pairs)
    ts = tuple(Fraction(t, 2) for _, t in pairs)
    g = PointMass(tuple(map(float, ws)), tuple(map(float, ts)))
    want = float(exact_pointmass_moment(ws, ts, k))
    assert moment(g, k).value == pytest.approx(want, rel=1e-15, abs=0)


@pytest.mark.parametrize("k", [-6, -4, -2, 0, 1])
def test_exponential_density_moments(k):
    m = moment(exp_density(), k)
    want = math.gamma(1 - k / 2)
    assert abs(m.value - want) <= max(m.error, 1e-15)
    assert m.error < 1e-10


@pytest.mark.parametrize("a", [1.5, 2.5, 4.0])
@pytest.mark.parametrize("k", [-4, -2, 0, 2])
def test_gamma_density_moments(a, k):
    m = moment(gamma_density(a), k)
    want = math.gamma(a - k / 2) / math.gamma(a)
    assert abs(m.value - want) <= max(m.error, 2e-15 * want)


def test_divergence_at_small_t():
    with pytest.raises(DivergenceError) as exc:
        moment(exp_density(), 2)
    assert exc.value.endpoint == "t->0"
    with pytest.raises(DivergenceError):
        moment(gamma_density(0.5), 1)


def test_divergence_at_large_t():
    g = ClosedForm("power tail", lambda t: 1 / (1 + t) ** 3, 0.0, 3.0)
    assert moment(g, 0).value == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(DivergenceError) as exc:
        moment(g, -4)
    assert exc.value.endpoint == "t->inf"


def test_invalid_point_masses():
    with pytest.raises(DomainError):
        PointMass((1.0, -1.0), (1.0, 2.0))
    with pytest.raises(DomainError):
        PointMass((1.0,), (0.0,))
    with pytest.raises(DomainError):
        PointMass((), ())


# --------------------------------------------------------------------------
# derivatives at zero


@pytest.mark.parametrize("m,want", [(0, 1.0), (1, 0.0), (2, -2.0), (4, 12.0), (6, -120.0)])
def test_gaussian_derivatives(m, want):
    assert derivative_at_zero(GAUSS, m).value == want


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_exponential_density_derivatives(k):
    # 1/(1+x²) = Σ (−1)^k x^{2k}
    want = (-1) ** k * math.factorial(2 * k)
    d = derivative_at_zero(exp_density(), 2 * k)
    assert abs(d.value - want) <= max(d.error, 1e-12 * abs(want))
    assert d.error < 1e-9 * abs(want)


@pytest.mark.parametrize("a", [1.5, 2.5])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_gamma_density_derivatives(a, k):
    # (1+x²)^{−a} = Σ binom(−a, k) x^{2k}
    binom = math.prod(-a - j for j in range(k)) / math.factorial(k)
    want = binom * math.factorial(2 * k)
    d = derivative_at_zero(gamma_density(a), 2 * k)
    assert d.value == pytest.approx(want, rel=1e-10)


def test_odd_derivatives_vanish_everywhere():
    for g in (GAUSS, TWO_MASSES, exp_density()):
        assert derivative_at_zero(g, 3).value == 0.0


def test_negative_derivative_order_rejected():
    with pytest.raises(DomainError):
        derivative_at_zero(GAUSS, -2)


# --------------------------------------------------------------------------
# tabulated densities


def _exp_table(points, tmax=40.0, **kw):
    t = np.linspace(1e-9, tmax, points)
    return Tabulated(tuple(t), tuple(np.exp(-t)), "exp", **kw)


def test_table_moments_honour_error_estimate():
    for pts in (2001, 8001):
        m = _exp_table(pts).moment(-2)
        assert abs(m.value - 1.0) <= m.error + 1e-8


def test_table_moments_converge_under_refinement():
    errs = [abs(_exp_table(p).moment(0).value - 1.0) for p in (1001, 2001, 4001)]
    assert errs[0] > errs[1] > errs[2]
    # second-order rule
    assert errs[0] / errs[2] == pytest.approx(16, rel=0.1)


def test_coarse_table_derivative_is_an_accuracy_error():
    with pytest.raises(AccuracyError):
        _exp_table(4001).derivative_at_zero(2)


def test_table_derivative_with_relaxed_tolerance():
    d = _exp_table(4001, rtol=1e-4).derivative_at_zero(2)
    assert abs(d.value - (-2.0)) <= d.error


def test_table_from_file(tmp_path):
    t = np.linspace(0.01, 30, 3001)
    path = tmp_path / "g.txt"
    np.savetxt(path, np.column_stack([t, np.exp(-t)]))
    g = parse_cutoff(f"table:{path}")
    assert isinstance(g, Tabulated)
    assert g.moment(-2).value == pytest.approx(1.0, abs=1e-3)


def test_malformed_tables():
    with pytest.raises(DomainError):
        Tabulated((1.0, 2.0), (1.0, 1.0))
    with pytest.raises(DomainError):
        Tabulated((1.0, 3.0, 2.0), (1.0, 1.0, 1.0))


# --------------------------------------------------------------------------
# Hermite polynomials


@pytest.mark.parametrize("m,want", [(0, 1.0), (2, -1.0), (4, 3.0), (6, -15.0)])
def test_hermite_at_zero(m, want):
    assert hermite(m, 0.0) == want
    assert hermite(m, 0.0) == (-1) ** (m // 2) * double_factorial(m - 1)


@given(st.integers(0, 12), st.floats(-3, 3))
def test_hermite_matches_reference_and_recurrence(m, x):
    ref = hermite_e.hermeval(x, [0] * m + [1])
    assert hermite(m, x) == pytest.approx(ref, rel=1e-10, abs=1e-10)
    if m >= 1:
        assert hermite(m + 1, x) == pytest.approx(x * hermite(m, x) - m * hermite(m - 1, x),
                                                  rel=1e-10, abs=1e-9)


def test_hermite_rejects_negative_degree():
    with pytest.raises(DomainError):
        hermite(-1, 0.0)


# --------------------------------------------------------------------------
# the moment identity


def test_double_factorial_ratios_on_unit_mass():
    rep = verify_moment_lemma(GAUSS, 3)
    assert rep.ratios == {1: 2.0, 2: 4.0, 3: 8.0}
    assert rep.rows[0].double_factorial_rhs == 2.0
    assert rep.rows[1].double_factorial_rhs == 4.0


def test_corrected_relation_on_unit_mass():
    rep = verify_moment_lemma(GAUSS, 2)
    assert rep.rows[1].corrected_rhs == 1.0 == rep.rows[1].moment.value
    assert rep.corrected_ok


DENSITIES = [GAUSS, TWO_MASSES, PointMass((0.2, 0.3, 0.5), (0.5, 1.5, 3.0)),
             exp_density(), gamma_density(2.5)]


@pytest.mark.parametrize("g", DENSITIES, ids=lambda g: g.label)
def test_ratio_law_is_universal(g):
    rep = verify_moment_lemma(g, 4)
    assert rep.fitted_base == pytest.approx(2.0, rel=1e-10)
    for r in rep.rows:
        assert abs(r.ratio / 2.0**r.k - 1) <= 1e-8
        assert not r.flagged
    assert rep.corrected_ok and rep.ok


def test_ratios_agree_across_densities():
    reps = [verify_moment_lemma(g, 4) for g in DENSITIES]
    for k in range(1, 5):
        vals = [r.ratios[k] for r in reps]
        assert max(vals) - min(vals) <= 1e-8 * max(vals)


@pytest.mark.parametrize("g", DENSITIES[:3], ids=lambda g: g.label)
def test_corrected_relation_exact_for_point_masses(g):
    for r in verify_moment_lemma(g, 5).rows:
        assert r.corrected_residual <= 1e-10 * abs(r.moment.value)


def test_hermite_column_is_reported():
    rep = verify_moment_lemma(TWO_MASSES, 3)
    for r in rep.rows:
        assert r.hermite_rhs == hermite(2 * r.k, 0.0) * r.moment.value
    d = rep.as_dict()
    assert d["fitted_law"] == "ratio_k = base**k"
    assert len(d["rows"]) == 3


def test_lemma_needs_positive_kmax():
    with pytest.raises(DomainError):
        verify_moment_lemma(GAUSS, 0)


def test_moment_table_parallel_matches_serial(monkeypatch):
    ks = [0, -2, -4, -6]
    serial = MomentTable.compute(exp_density(), ks)
    monkeypatch.setenv("SAYM_THREADS", "4")
    par = MomentTable.compute(exp_density(), ks)
    assert serial.as_dict() == par.as_dict()
    assert -4 in par and par[-4].value == pytest.approx(2.0)


# --------------------------------------------------------------------------
# form factor


def test_unit_form_factor():
    phi = build_form_factor({0: 1, -2: 1, -4: 1}, [1, 1, 1], 8, 2.0)
    x = np.array([0.0, 1.0, 4.0, 10.0])
    assert np.allclose(phi(x), 1 + x / 4 + x**2 / 16, rtol=1e-15)
    assert phi.degree == 2


def test_form_factor_at_cutoff_scale():
    phi = build_form_factor({0: 1, -2: 1, -4: 1}, [1, 1, 1], 8, 1.0)
    assert eval_form_factor(phi, 1.0) == pytest.approx(3.0, rel=1e-15)
    assert eval_form_factor(phi, 0.0) == 1.0


def test_normalisation_is_enforced_by_uniform_rescale():
    phi = build_form_factor({0: 2.0, -2: 1, -4: 1}, [3.0, 1.5, 6.0], 8, 1.0)
    assert phi.f_neg[0] * phi.c[0] == pytest.approx(-0.25)
    assert phi.rescale == pytest.approx(-0.25 / 6.0)
    # ratios c_k/c_0 survive
    assert phi.c[1] / phi.c[0] == pytest.approx(0.5)


def test_infinite_cutoff_scale():
    phi = FormFactor(8, math.inf, (-0.25, 1.0, 1.0), (1.0, 1.0, 1.0))
    assert phi(123.0) == 1.0


def test_form_factor_domain_errors():
    mom = {0: 1, -2: 1, -4: 1, -6: 1}
    for n in (6, 7, 9):
        with pytest.raises(DomainError):
            build_form_factor(mom, [1, 1, 1, 1], n, 1.0)
    with pytest.raises(KeyError):
        build_form_factor({0: 1, -2: 1}, [1, 1, 1], 8, 1.0)
    with pytest.raises(DomainError):
        build_form_factor(mom, [1, 1], 8, 1.0)
    with pytest.raises(DomainError):
        build_form_factor(mom, [1, 1, 1], 8, -1.0)


@settings(max_examples=60)
@given(
    st.sampled_from([8, 10, 12]),
    st.lists(st.floats(0.1, 10), min_size=5, max_size=5),
    st.lists(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), min_size=5, max_size=5),
    st.floats(0.1, 100),
)
def test_form_factor_starts_at_one(n, fs, cs, lam):
    mom = {-2 * k: f for k, f in enumerate(fs)}
    phi = build_form_factor(mom, cs, n, lam)
    assert phi(0.0) == pytest.approx(1.0, rel=1e-14)
    assert len(phi.coefficients) == n // 2 - 1


def test_positivity_violation_interval():
    phi = build_form_factor({0: 1, -2: 1, -4: 1}, [1, -3, 1], 8, 1.0)
    rep = positivity_scan(phi, 0.0, 10.0)
    assert not rep.positive
    (lo, hi), = rep.violations
    assert lo == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-12)
    assert hi == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-12)


def test_positive_form_factor_scan():
    phi = build_form_factor({0: 1, -2: 1, -4: 1}, [1, 1, 1], 8, 1.0)
    assert positivity_scan(phi).positive


# --------------------------------------------------------------------------
# text grammar


def test_cutoff_grammar():
    assert parse_cutoff("gauss") is GAUSS
    g = parse_cutoff("pointmass:0.5@1,0.5@4")
    assert g == TWO_MASSES
    assert parse_cutoff("density:exp").label == "density:exp"
    assert parse_cutoff("density:gamma:2.5").moment(0).value == pytest.approx(1.0)
    for bad in ("laplace", "pointmass:1", "pointmass:-1@1"):
        with pytest.raises(DomainError):
            parse_cutoff(bad)
