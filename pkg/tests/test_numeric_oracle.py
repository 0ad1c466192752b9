"""Symbolic rewriting checked against brute-force numeric evaluation."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from saym.action import _dirac
from saym.symfield import (
    GAUGE,
    HERMITIAN,
    Expression,
    clifford_contract,
    covariant_derivative,
    covariant_laplacian,
    curvature,
    field,
    gamma,
    generic,
    linearize,
    normal_form,
)
from saym.symfield.coeff import as_coeff

from oracles import GAMMAS, TorusFields, evaluate
from strategies import EVEN, expressions

FIELDS = TorusFields(seed=3)
slow = settings(max_examples=25, suppress_health_check=[HealthCheck.too_slow], deadline=None)


def close(a, b, tol=1e-9):
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) <= tol * scale


def test_gamma_matrices_satisfy_clifford_relation():
    for a, b in itertools.product(range(4), repeat=2):
        anti = GAMMAS[a] @ GAMMAS[b] + GAMMAS[b] @ GAMMAS[a]
        assert np.allclose(anti, 2 * (a == b) * np.eye(4))


def test_oracle_integrates_total_derivatives_to_zero():
    X = field(generic("X"))
    e = (X.d("mu") * field(generic("Y")).d("mu")).d("nu").d("nu").tr().integrate()
    assert abs(evaluate(e, FIELDS)).max() < 1e-10


@slow
@given(expressions(species=EVEN, traced=False, max_factors=3))
def test_density_normal_form_preserves_value(e):
    assert close(evaluate(e, FIELDS), evaluate(normal_form(e), FIELDS))


@slow
@given(expressions(species=EVEN, traced=True, max_factors=3))
def test_trace_normal_form_preserves_value(e):
    assert close(evaluate(e, FIELDS), evaluate(normal_form(e), FIELDS))


@slow
@given(expressions(species=EVEN, traced=True, max_factors=3))
def test_integrated_normal_form_preserves_integral(e):
    s = e.integrate()
    assert close(evaluate(s, FIELDS), evaluate(normal_form(s), FIELDS))


def test_curvature_square_normal_form_numerically():
    S = (curvature() * curvature()).tr().integrate()
    assert close(evaluate(S, FIELDS), evaluate(normal_form(S), FIELDS))


def test_covariant_laplacian_numerically():
    X = field(generic("X"))
    raw = covariant_laplacian(X, 1, normalize=False)
    raw = covariant_laplacian(raw, 1, normalize=False)
    assert close(evaluate(raw, FIELDS), evaluate(normal_form(raw), FIELDS))


@pytest.mark.parametrize("abelian", [False, True])
def test_squared_dirac_operator_numerically(abelian):
    # the oracle multiplies explicit gamma matrices, bypassing the Clifford reduction
    psi = field(generic("psi"))
    lhs = _dirac(_dirac(psi, "mu", HERMITIAN), "nu", HERMITIAN)
    dd = covariant_derivative(covariant_derivative(psi, "mu", adjoint=False), "mu", adjoint=False)
    F = curvature("mu", "nu", abelian=abelian)
    rhs = -dd + gamma("mu") * gamma("nu") * F * psi * as_coeff(0.5j)
    diff = evaluate(lhs - rhs, FIELDS)
    if abelian:
        # only the commutator part of F is missing
        comm = gamma("mu") * gamma("nu") * linearize(curvature("mu", "nu"), GAUGE, 2) * psi
        assert close(diff, evaluate(comm * as_coeff(0.5j), FIELDS))
    else:
        assert np.abs(diff).max() < 1e-9


def test_clifford_reduction_numerically():
    e = gamma("a") * gamma("b") * gamma("a") * gamma("c") * field(GAUGE, "b") * field(GAUGE, "c")
    assert close(evaluate(e, FIELDS), evaluate(clifford_contract(e), FIELDS))


def test_oracle_rejects_odd_fields():
    from saym.symfield import GHOST

    with pytest.raises(ValueError):
        evaluate(field(GHOST) * field(GHOST), FIELDS)


def test_random_configurations_differ():
    other = TorusFields(seed=4)
    S = (curvature() * curvature()).tr().integrate()
    assert not np.allclose(evaluate(S, FIELDS), evaluate(S, other))
    assert isinstance(S, Expression)
