import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predissoc.quadrature import (adaptive_gauss_legendre, fixed_gauss_legendre, gauss_legendre,
                                  sqrt_endpoint_segment)


def test_nodes_on_unit_interval():
    x, w = gauss_legendre(12)
    assert np.all((x > 0) & (x < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 * 8 - 1), st.floats(-2, 2), st.floats(0.1, 3))
def test_fixed_rule_exact_for_polynomials(p, a, length):
    b = a + length
    got = fixed_gauss_legendre(lambda t: t ** p, a, b, 8)
    exact = (b ** (p + 1) - a ** (p + 1)) / (p + 1)
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_complex_segment():
    a, b = 0.0, 1.0 + 1.0j
    got = fixed_gauss_legendre(np.exp, a, b, 20)
    assert got == pytest.approx(np.exp(b) - 1, rel=1e-14)


def test_adaptive_peaked_integrand():
    f = lambda t: 1.0 / (1e-4 + t * t)
    got = adaptive_gauss_legendre(f, -1.0, 1.0, tol=1e-10)
    assert got == pytest.approx(2e2 * math.atan(1e2), rel=1e-10)


def test_sqrt_endpoints():
    # int_a^b sqrt((x-a)(b-x)) = pi (b-a)^2 / 8
    f = lambda t: np.sqrt((t + 1) * (0.5 - t))
    assert sqrt_endpoint_segment(f, -1.0, 0.5) == pytest.approx(math.pi * 1.5 ** 2 / 8, rel=1e-13)
    g = lambda t: 1 / np.sqrt((t + 1) * (0.5 - t))
    assert sqrt_endpoint_segment(g, -1.0, 0.5) == pytest.approx(math.pi, rel=1e-13)


def test_single_sided_substitution():
    assert sqrt_endpoint_segment(lambda t: 1 / np.sqrt(t), 0.0, 1.0, ends="left") \
        == pytest.approx(2.0, rel=1e-14)
    assert sqrt_endpoint_segment(lambda t: 1 / np.sqrt(1 - t), 0.0, 1.0, ends="right") \
        == pytest.approx(2.0, rel=1e-14)
