import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predissoc import solver
from predissoc.model import Interaction
from predissoc.operators import (apply_w, apply_w_star, cumulative_hermite,
                                 cumulative_hermite_to_end, fundamental, integrate)
from predissoc.scalar import Sampled, channel

from conftest import reference_pair, solutions

HS = (0.04, 0.02, 0.01, 0.005)


def segment_residual(w, v, V, E, h):
    """Integrated form of (P - E) w = v on each grid segment.

    -h^2 (w'_{n+1} - w'_n) + int_n^{n+1} ((V - E) w - v), with the
    Hermite segment rule, divided by the segment length.
    """
    z = w.z
    dz = np.diff(z)
    g = (V(z) - E) * w.f - v.f
    dV = (V(z + 1e-6) - V(z - 1e-6)) / 2e-6
    dg = dV * w.f + (V(z) - E) * w.d1 - v.d1
    seg = 0.5 * dz * (g[:-1] + g[1:]) + dz * dz / 12 * (dg[:-1] - dg[1:])
    return (-h * h * (w.d1[1:] - w.d1[:-1]) + seg) / dz


def bump(z, side, h, k=0.5):
    e2 = h ** (2 / 3)
    return solver._bump(z, (-1 if side == "L" else 1) * e2, e2, k / e2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.01, 0.5))
def test_hermite_rule_exact_on_cubics(c, dz):
    z = np.arange(0, 12) * dz
    p = np.polynomial.Polynomial(c)
    got = cumulative_hermite(z, p(z), p.deriv()(z))
    exact = p.integ()(z) - p.integ()(0)
    np.testing.assert_allclose(got.real, exact, rtol=1e-10, atol=1e-10)
    back = cumulative_hermite_to_end(z, p(z), p.deriv()(z))
    np.testing.assert_allclose(back.real, exact[-1] - exact, rtol=1e-10, atol=1e-10)


def test_integrate_product():
    z = np.linspace(0, 1, 101)
    a = Sampled(z, np.exp(z), np.exp(z))
    b = Sampled(z, np.cos(z), -np.sin(z))
    exact = 0.5 * (np.e * (np.cos(1) + np.sin(1)) - 1)
    assert integrate(a, b) == pytest.approx(exact, rel=1e-9)


def test_w_on_plane_wave():
    h, k = 0.01, 30.0
    z = np.linspace(-1, 1, 11)
    g = Sampled(z, np.exp(1j * k * z), 1j * k * np.exp(1j * k * z), -k * k * np.exp(1j * k * z))
    inter = Interaction.constant(0.7, 0.3 - 0.2j)
    wg = apply_w(inter, g, h)
    np.testing.assert_allclose(wg.f, (0.7 + (0.3 - 0.2j) * h * k) * g.f, rtol=1e-14)
    ws = apply_w_star(inter, g, h)
    np.testing.assert_allclose(ws.f, (0.7 + (0.3 + 0.2j) * h * k) * g.f, rtol=1e-14)


def test_w_star_is_formal_adjoint():
    h = 0.05
    z = np.linspace(-8, 8, 4001)

    def gauss(c, k):
        f = np.exp(-(z - c) ** 2 + 1j * k * z)
        d1 = (-2 * (z - c) + 1j * k) * f
        d2 = ((-2 * (z - c) + 1j * k) ** 2 - 2) * f
        return Sampled(z, f, d1, d2)

    f, g = gauss(0.3, 2.0), gauss(-0.4, -1.0)
    inter = Interaction.constant(0.5 + 0.1j, 0.8 - 0.3j)
    wf, wsg = apply_w(inter, f, h), apply_w_star(inter, g, h)
    lhs = integrate(Sampled(z, np.conj(wf.f), np.conj(wf.d1)), g)
    rhs = integrate(Sampled(z, np.conj(f.f), np.conj(f.d1)), wsg)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_zero_forcing_gives_zero():
    sol = solutions(0.02)
    for j in (1, 2):
        for side in "LR":
            b = sol.basis(j, side)
            w = fundamental(b, Sampled.zeros(b.z), channel(reference_pair(), j)[0], 0.0, 0.02)
            assert np.all(w.f == 0)


@pytest.mark.parametrize("h", HS)
@pytest.mark.parametrize("j,side", [(1, "L"), (2, "L"), (1, "R"), (2, "R")])
def test_fundamental_residual(h, j, side):
    pair = reference_pair()
    b = solutions(h).basis(j, side)
    V = channel(pair, j)[0]
    v = bump(b.z, side, h)
    w = fundamental(b, v, V, 0.0, h)
    res = segment_residual(w, v, V, 0.0, h)
    assert np.max(np.abs(res)) <= 1e-6 * np.max(np.abs(v.f))


def test_k2_w_star_norm_scales_like_cube_root():
    pair = reference_pair()
    inter = Interaction.constant(1.0)
    ratios = []
    for h in HS:
        sol = solutions(h)
        ops = solver._Ops("L", sol, pair, inter, 0j, h)
        z = sol.b1L.z
        nrm = 0.0
        for c, w, k in solver.test_functions("L", h):
            f = solver._bump(z, c, w, k)
            nrm = max(nrm, solver._sup(ops.k2ws(f)) / solver._sup(f))
        ratios.append(nrm / h ** (1 / 3))
    # bounded by C h^(1/3) with C consistent under halving
    assert max(ratios) / min(ratios) <= 1.2
