from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saym.cutoff import FormFactor, build_form_factor
from saym.propagators import (
    DELTA,
    FormFactorZeroError,
    Momentum,
    PoleError,
    Signature,
    SingularKernelError,
    gauge_propagator,
    ghost_propagator,
    inversion_check,
    kernel,
    scan_csv,
    uv_scaling_exponent,
)


def toy(n, Lambda=1.0, c=None):
    deg = n // 2 - 2
    c = c or [1.0] * (deg + 1)
    return build_form_factor({-2 * k: 1.0 for k in range(deg + 1)}, c, n, Lambda)


PHI8 = toy(8)
vectors = st.lists(st.floats(-10, 10), min_size=4, max_size=4).filter(
    lambda v: 1e-3 < sum(x * x for x in v))


def test_unit_direction_example():
    p = Momentum((1.0, 0.0, 0.0, 0.0))
    assert PHI8(1.0) == 3.0
    D = gauge_propagator(p, 1.0, PHI8)
    assert D.tensor[0, 0] == pytest.approx(1 / 3, rel=1e-15)
    assert D.component(0, 0, 2, 2) == D.tensor[0, 0]
    assert D.component(0, 0, 1, 2) == 0


@given(vectors)
def test_feynman_gauge_is_proportional_to_metric(v):
    p = Momentum(tuple(v))
    D = gauge_propagator(p, 1.0, PHI8).tensor
    psq = sum(x * x for x in v)
    assert np.allclose(D, np.eye(4) / (psq * PHI8(psq)), rtol=1e-13, atol=0)


@given(vectors, st.floats(0.1, 5))
def test_transversality_and_symmetry(v, xi):
    p = Momentum(tuple(v))
    D0 = gauge_propagator(p, 0.0, PHI8).tensor
    scale = np.abs(D0).max() * np.linalg.norm(v)
    assert np.abs(p.vector @ D0).max() <= 1e-13 * scale
    D = gauge_propagator(p, xi, PHI8).tensor
    assert np.array_equal(D, D.T)


def test_ghost_propagator_values():
    p = Momentum((2.0, 0.0, 0.0, 0.0))
    assert ghost_propagator(p, FormFactor.trivial()) == 0.25
    q = Momentum((0.3, -1.2, 0.5, 2.0))
    assert ghost_propagator(q, PHI8) == pytest.approx(gauge_propagator(q, 1.0, PHI8).tensor[1, 1], rel=1e-15)


def test_infinite_scale_gives_ordinary_ghost():
    phi = FormFactor(8, math.inf, (-0.25, 1.0, 1.0), (1.0, 1.0, 1.0))
    p = Momentum((1.0, 2.0, 0.0, -1.0))
    assert ghost_propagator(p, phi) == pytest.approx(1 / 6, rel=1e-15)


def test_pole_and_form_factor_zero():
    with pytest.raises(PoleError):
        gauge_propagator(Momentum((0.0, 0.0, 0.0, 0.0)), 1.0, PHI8)
    with pytest.raises(PoleError):
        inversion_check(Momentum((0.0, 0.0, 0.0, 0.0)), 1.0, PHI8)
    # φ(x) = 1 − 2x + x² vanishes at x = 1
    phi = toy(8, c=[1.0, -2.0, 1.0])
    with pytest.raises(FormFactorZeroError):
        ghost_propagator(Momentum((1.0, 0.0, 0.0, 0.0)), phi)


def test_lorentzian_prescription():
    p = Momentum((1.0, 1.0, 0.0, 0.0), Signature.LORENTZIAN, eta=1e-6)
    assert p.psq == complex(0.0, 1e-6)
    val = ghost_propagator(p, FormFactor.trivial())
    assert val == pytest.approx(1 / complex(0, 1e-6))
    D = gauge_propagator(p, 1.0, FormFactor.trivial())
    assert D.tensor[1, 1] == pytest.approx(-1 / complex(0, 1e-6))
    with pytest.raises(ValueError):
        Momentum((1.0, 0.0, 0.0, 0.0), Signature.LORENTZIAN, eta=0.0)
    with pytest.raises(ValueError):
        kernel(p, 1.0, PHI8)


def test_colour_factor_is_separate():
    assert str(DELTA) == "δ^{ab}"
    assert DELTA(1, 1) == 1 and DELTA(0, 3) == 0


@pytest.mark.parametrize("n", [8, 10, 12])
@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_inversion_on_random_momenta(n, xi):
    rng = np.random.default_rng(n * 10 + int(xi * 2))
    phi = toy(n, Lambda=1.5, c=list(rng.uniform(0.5, 2.0, n // 2 - 1)))
    for _ in range(100):
        p = Momentum(tuple(rng.normal(size=4) * rng.uniform(0.2, 3.0)))
        assert inversion_check(p, xi, phi) < 1e-12
        # independent route: numerical inverse of the kernel
        Kinv = np.linalg.inv(kernel(p, xi, phi))
        D = gauge_propagator(p, xi, phi).tensor
        assert np.allclose(Kinv, D, rtol=1e-10, atol=0)


def test_kernel_without_gauge_fixing_is_singular():
    with pytest.raises(SingularKernelError):
        kernel(Momentum((1.0, 2.0, 3.0, 4.0)), math.inf, PHI8)
    # the transverse part alone annihilates p
    p = Momentum((1.0, 2.0, 3.0, 4.0))
    K = kernel(p, 1e300, PHI8)
    assert np.abs(K @ p.vector).max() < 1e-200


@pytest.mark.parametrize("n", [8, 10, 12])
@pytest.mark.parametrize("which", ["gauge", "ghost"])
def test_uv_exponent(n, which):
    slope = uv_scaling_exponent(toy(n, Lambda=2.0), 1.0, which)
    assert abs(slope + (n - 2)) <= 0.05


def test_uv_exponent_ordinary_propagator():
    assert abs(uv_scaling_exponent(FormFactor.trivial()) + 2) <= 0.05
    with pytest.raises(ValueError):
        uv_scaling_exponent(PHI8, which="photon")


def test_scan_output():
    text = scan_csv(PHI8, 1.0, 1.0, 100.0, points=5)
    rows = text.strip().splitlines()
    assert rows[0] == "p,gauge_norm,ghost_abs"
    assert len(rows) == 6
    first = [float(x) for x in rows[1].split(",")]
    assert first[0] == pytest.approx(1.0)
    assert first[1] == pytest.approx(first[2])
