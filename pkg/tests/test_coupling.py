import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predissoc.coupling import (airy_overlap, consistency_residuals, crossing_coeffs_airy,
                                crossing_coeffs_exact, mu12, muAB, mu_functions,
                                mu_sum_closed_form, nested_integral, quantization_F)
from predissoc.model import Interaction, action_derivs

from conftest import config, reference_pair, solutions

HS = (0.04, 0.02, 0.01, 0.005)
MU0 = 2 ** (-1 / 3) * 0.3550280538878172 / 2


def mp_overlap(t, second=mpmath.airyai):
    f = lambda y: mpmath.airyai(y - t) * second(-y - t)
    return float(mpmath.quad(f, [0, 2, 5, 10, mpmath.inf]))


def test_mu_at_zero_closed_form():
    mu1, mu2 = mu12(0.0)
    assert mu1 == pytest.approx(MU0, abs=1e-12)
    assert mu2 == pytest.approx(MU0, abs=1e-12)


@pytest.mark.parametrize("t", [-2.0, -0.5, 0.0, 1.0, 2.5])
def test_mu_against_mpmath(t):
    ma, mb = muAB(t)
    assert ma == pytest.approx(mp_overlap(t), abs=1e-10)
    assert mb == pytest.approx(mp_overlap(t, mpmath.airybi), abs=1e-10)


@pytest.mark.parametrize("t", [-2.0, -1.0, 0.0, 1.0, 2.0])
def test_mu_identity_unit_slopes(t):
    assert mu_functions(t).identity_residual <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0.5, 1.0, 2.0]))
def test_mu_identity_general_slopes(t, tau1, tau2):
    mu1, mu2 = mu12(t, tau1, tau2)
    assert abs(mu1 + mu2 - mu_sum_closed_form(t, tau1, tau2)) <= 1e-8


def test_mu_sum_unequal_slopes_example():
    for t in (-1.0, 0.0, 1.5):
        mu1, mu2 = mu12(t, 1.0, 2.0)
        expect = 3 ** (-1 / 3) * float(mpmath.airyai(-(1.5 ** (2 / 3)) * t))
        assert mu1 + mu2 == pytest.approx(expect, abs=1e-8)


def test_muA_equals_mu1_at_unit_slopes():
    for t in np.linspace(-3, 3, 7):
        mu = mu_functions(t)
        assert mu.muA == pytest.approx(mu.mu1, abs=1e-8)
        assert mu.mu1 == pytest.approx(mu.mu2, abs=1e-8)
        assert isinstance(mu.muA, float)


def test_error_bound_follows_tolerance():
    a = airy_overlap(0.3, 1.0, 1.0, "ai", 1e-8)
    b = airy_overlap(0.3, 1.0, 1.0, "ai", 0.5e-8)
    assert b.error_bound == pytest.approx(0.5 * a.error_bound)
    assert abs(a.value - b.value) <= a.error_bound


def test_nested_integral_polynomial():
    # int_0^1 t int_0^t s ds dt = 1/8
    f = lambda x: np.atleast_2d(x)
    got = nested_integral(f, f, 0.0, 0.0, 1.0)
    assert got[0] == pytest.approx(1 / 8, rel=1e-12)


def test_decoupled_coefficients_vanish():
    zero = Interaction.constant(0.0)
    ex = crossing_coeffs_exact(reference_pair(), zero, 0.0, config(0.02), solutions(0.02))
    assert all(v == 0 for v in ex.as_dict().values())
    assert ex.b0 == 0
    ai = crossing_coeffs_airy(0.0, zero, 1.0, 1.0, 0.02, 1.3)
    assert all(v == 0 for v in ai.as_dict().values())


def test_alpha_exact_vs_airy_order():
    pair = reference_pair()
    inter = Interaction.constant(1.0)
    errs = []
    for h in HS:
        ex = crossing_coeffs_exact(pair, inter, 0.0, config(h), solutions(h))
        ai = crossing_coeffs_airy(0.0, inter, 1.0, 1.0, h, ex.phase)
        errs.append([abs(ex.as_dict()[k] - ai.as_dict()[k])
                     for k in ("alpha_1L", "alpha_2L", "alpha_1R", "alpha_2R")])
        # identical leading forms for the two channels
        assert abs(ex.alpha_1L - ex.alpha_2L) <= 0.1 * h ** (2 / 3)
        assert abs(ex.beta_1L.imag) <= h
        assert abs(ex.beta_2L) <= h ** (2 / 3) and abs(ex.beta_2R) <= h ** (2 / 3)
        assert max(consistency_residuals(ex).values()) <= 1e-12
    eps = np.array(HS) ** (1 / 3)
    for col in np.array(errs).T:
        assert np.polyfit(np.log(eps), np.log(col), 1)[0] >= 1.8


def test_im_beta_1R_limit():
    mu = mu_functions(0.0)
    target = math.pi ** 2 * (mu.muA ** 2 + mu.muB ** 2)
    for h in (0.01, 0.005):
        ex = crossing_coeffs_exact(reference_pair(), Interaction.constant(1.0), 0.0,
                                   config(h), solutions(h))
        assert ex.beta_1R.imag / h ** (2 / 3) == pytest.approx(target, abs=0.1 * h ** (2 / 3))


def test_alpha_left_at_sine_node():
    # sin(A/h) = 0 leaves the mu_B cos term only
    ai = crossing_coeffs_airy(0.0, Interaction.constant(1.0), 1.0, 1.0, 0.01, 7 * math.pi)
    mu = ai.details["mu"]
    assert ai.alpha_1L == pytest.approx(2 * 0.01 ** (1 / 3) * math.pi * mu.muB_left, rel=1e-12)


def test_b0_bounded_over_phase_period():
    pair = reference_pair()
    inter = Interaction.constant(1.0)
    a1, _ = action_derivs(pair)
    peaks = []
    for h in (0.04, 0.02, 0.01):
        es = (np.arange(8) - 4) * 2 * math.pi * h / (8 * a1)
        peaks.append(max(abs(crossing_coeffs_exact(pair, inter, E, config(h),
                                                   solutions(h, E)).b0) for E in es))
    assert max(peaks) < 10
    for a, b in zip(peaks, peaks[1:]):
        assert abs(b / a - 1) <= 0.2


def test_b0_exact_vs_airy():
    pair = reference_pair()
    inter = Interaction.constant(1.0)
    for h in (0.02, 0.005):
        ex = crossing_coeffs_exact(pair, inter, 0.0, config(h), solutions(h))
        ai = crossing_coeffs_airy(0.0, inter, 1.0, 1.0, h, ex.phase)
        assert abs(ex.b0 - ai.b0) <= 1.5 * h ** (1 / 3)


def test_F_imaginary_part_sign():
    ai = crossing_coeffs_airy(0.0, Interaction.constant(1.0), 1.0, 1.0, 0.01, 0.5 * math.pi)
    F = quantization_F(ai, ai.details["mu"], 0.5 * math.pi)
    mu = ai.details["mu"]
    assert F.imag == pytest.approx(4 * math.pi ** 2 * mu.muA ** 2, rel=1e-12)
