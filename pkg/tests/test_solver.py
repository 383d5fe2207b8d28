import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predissoc import solver
from predissoc.coupling import crossing_coeffs_exact, mu12
from predissoc.model import Interaction, action, make_quadratic_pair
from predissoc.solver import (Actions, DivergenceError, W0Oracle, asym_formulas, bs_solve,
                              cauchy_riemann_residual, convergence_study, find_resonances,
                              integrate_coupled, k_nearest, k_range, lambda_k, neumann_solve,
                              singular_ratio, solution_matrix, w0_determinant, wronskian_W0)

from conftest import config, grids, reference_pair, solutions

ONE = Interaction.constant(1.0)
ZERO = Interaction.constant(0.0)
X_RES = -1.8  # reference well used for the resonance checks


def coupled_residual(w, pair, r0, E, h):
    """Segment-integrated residual of the coupled system with W = r0
    (constant), per channel, relative to the size of its terms."""
    z = w.z
    dz = np.diff(z)
    sc = h ** (2 / 3)
    out = []
    for u, du, V, other, dother, c in ((w.u1, w.du1, pair.v1, w.u2, w.du2, r0),
                                       (w.u2, w.du2, pair.v2, w.u1, w.du1, np.conj(r0))):
        d1, do = du / sc, dother / sc
        g = (V(z) - E) * u + h * c * other
        dV = (V(z + 1e-6) - V(z - 1e-6)) / 2e-6
        dg = dV * u + (V(z) - E) * d1 + h * c * do
        seg = 0.5 * dz * (g[:-1] + g[1:]) + dz * dz / 12 * (dg[:-1] - dg[1:])
        r = (-h * h * (d1[1:] - d1[:-1]) + seg) / dz
        scale = np.max(np.abs((V(z) - E) * u)) + np.max(np.abs(h * c * other))
        out.append(np.max(np.abs(r)) / scale)
    return max(out)


def span_residual(ode_pair, w):
    q = np.column_stack([o.at_zero() for o in ode_pair])
    v = w.at_zero()
    c, *_ = np.linalg.lstsq(q, v, rcond=None)
    return np.linalg.norm(q @ c - v) / np.linalg.norm(v)


def neumann_four(h, E=0.0, inter=ONE, x_star=-1.0):
    pair = reference_pair(x_star)
    sol = solutions(h, E, x_star)
    return [neumann_solve(S, j, E, config(h), pair, inter, sol)
            for S, j in (("L", 1), ("L", 2), ("R", 1), ("R", 2))]


@lru_cache(maxsize=None)
def resonance_run(h):
    pair = reference_pair(X_RES)
    acts = Actions.of(pair)
    k0 = k_nearest(h, acts)
    oracle = W0Oracle(pair, ONE, config(h), grids(h, X_RES))
    recs = find_resonances(range(k0 - 2, k0 + 3), pair, ONE, config(h),
                           ("oracle", "bs", "asym"), oracle)
    return acts, oracle, recs


# ---------------------------------------------------------------------------
# constructions

def test_decoupled_neumann_is_one_term():
    h = 0.02
    sol = solutions(h)
    w = neumann_solve("L", 1, 0.0, config(h), reference_pair(), ZERO, sol)
    assert w.iterations == 1
    np.testing.assert_array_equal(w.u1, sol.b1L.minus.f)
    assert np.all(w.u2 == 0)
    w = neumann_solve("R", 2, 0.0, config(h), reference_pair(), ZERO, sol)
    np.testing.assert_array_equal(w.u2, sol.b2R.minus.f)
    assert np.all(w.u1 == 0)


def test_decoupled_ode_spans_scalar_solutions():
    h = 0.02
    pair = reference_pair()
    for S in "LR":
        ode = integrate_coupled(S, 0.0, config(h), pair, ZERO, grids(h))
        for w in neumann_four(h, inter=ZERO):
            if w.side == S:
                assert span_residual(ode, w) <= 1e-8


@pytest.mark.parametrize("h", (0.02, 0.01))
def test_coupled_residual_and_decay(h):
    pair = reference_pair()
    for w in neumann_four(h):
        assert coupled_residual(w, pair, 1.0, 0.0, h) <= 1e-6
        assert w.boundary_ratio() <= 1e-8
        assert w.contraction < 0.5
    for S in "LR":
        for w in integrate_coupled(S, 0.0, config(h), pair, ONE, grids(h)):
            assert coupled_residual(w, pair, 1.0, 0.0, h) <= 1e-6
            assert w.boundary_ratio() <= 1e-8


def test_neumann_span_matches_ode():
    h = 0.02
    pair = reference_pair()
    for S in "LR":
        ode = integrate_coupled(S, 0.0, config(h), pair, ONE, grids(h))
        for w in neumann_four(h):
            if w.side == S:
                assert span_residual(ode, w) <= h


def test_neumann_second_component_structure():
    # w_{1,L}(0) second channel = alpha_{1,L} u_{2,L}^+(0) + O(h)
    h = 0.01
    pair = reference_pair()
    sol = solutions(h)
    cc = crossing_coeffs_exact(pair, ONE, 0.0, config(h), sol)
    w = neumann_solve("L", 1, 0.0, config(h), pair, ONE, sol)
    assert abs(w.u2[-1] - cc.alpha_1L * sol.b2L.plus.f[-1]) <= h


def test_contraction_decreases_with_h():
    pair = reference_pair()
    norms = [solver.contraction_norm("L", 0.0, config(h), pair, ONE, solutions(h))
             for h in (0.04, 0.02, 0.01)]
    assert norms[0] > norms[1] > norms[2]


def test_strong_coupling_diverges():
    h = 0.04
    with pytest.raises(DivergenceError):
        neumann_solve("L", 1, 0.0, config(h), reference_pair(), Interaction.constant(40.0),
                      solutions(h))


# ---------------------------------------------------------------------------
# W0 and the crossing expansion

def test_decoupled_w0_factorizes():
    h = 0.02
    ws = neumann_four(h, inter=ZERO)
    sol = solutions(h)

    def wt(f, g):
        f0, df = f.at_zero()
        g0, dg = g.at_zero()
        return f0 * dg - df * g0

    expect = wt(sol.b1L.minus, sol.b1R.minus) * wt(sol.b2L.minus, sol.b2R.minus)
    assert w0_determinant(*ws) == pytest.approx(expect, rel=1e-12)


def test_decoupled_w0_vanishes_at_bound_state():
    h = 0.02
    pair = reference_pair(X_RES)
    acts = Actions.of(pair)
    k = k_nearest(h, acts)
    oracle = W0Oracle(pair, ZERO, config(h), grids(h, X_RES))
    (rec,) = find_resonances([k], pair, ZERO, config(h), ("oracle",), oracle)
    assert rec.w0_residual <= config(h).tol_root
    assert abs(rec.E_oracle.imag) <= 1e-10


def test_scaled_rows_identity():
    h = 0.02
    ws = neumann_four(h)
    m = solution_matrix(*ws)
    plain = m.copy()
    plain[[1, 3]] /= h ** (2 / 3)
    assert np.linalg.det(m) == pytest.approx(h ** (4 / 3) * np.linalg.det(plain), rel=1e-12)


@pytest.mark.parametrize("E", [0.0, 0.02, -0.03 - 0.005j])
def test_expansion_at_sample_energies(E):
    h = 0.01
    pair = reference_pair()
    ws = neumann_four(h, E)
    state = wronskian_W0(E, ws, pair, ONE, config(h),
                         crossing_coeffs_exact(pair, ONE, E, config(h), solutions(h, E)))
    assert state.expansion_error <= 20 * h ** (2 / 3)
    assert abs(state.expansion_lhs) > 0


# ---------------------------------------------------------------------------
# asymptotic formulas

def test_lambda_example_quadratic():
    q = make_quadratic_pair(-1.0)
    acts = Actions(math.pi / 8, math.pi / 2, 0.0)
    assert lambda_k(12, 0.01, acts) == pytest.approx(0.0, abs=1e-13)
    assert Actions.of(q).a0 == pytest.approx(math.pi / 8, rel=1e-12)


def test_width_coefficient_quadratic_action():
    acts = Actions(math.pi / 8, math.pi / 2, 0.0)
    lam, E = asym_formulas(12, 0.01, acts)
    assert E.real == pytest.approx(0.0, abs=1e-15)
    m1, m2 = mu12(0.0)
    expect = -2 * math.pi ** 2 * (m1 ** 2 + m2 ** 2) / (math.pi / 2)
    assert E.imag / 0.01 ** (5 / 3) == pytest.approx(expect, rel=1e-10)
    assert expect == pytest.approx(-0.499, abs=1e-3)


def test_asym_spacing():
    acts = Actions.of(reference_pair())
    h = 0.01
    e = [asym_formulas(k, h, acts, mu=lambda t: (0.1, 0.1))[1].real for k in k_range(h, acts, 1.0)]
    np.testing.assert_allclose(np.diff(e), math.pi * h / acts.a1, rtol=0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 60), st.floats(0.003, 0.05), st.floats(-1, 1), st.floats(-1, 1))
def test_asym_imaginary_part_nonpositive(k, h, m1, m2):
    acts = Actions(0.7, 3.0, 5.0)
    _, E = asym_formulas(k, h, acts, mu=lambda t: (m1, m2))
    assert E.imag <= 0


def test_k_range_matches_window():
    acts = Actions.of(reference_pair(X_RES))
    h = 0.02
    ks = k_range(h, acts, 1.0)
    assert all(abs(lambda_k(k, h, acts)) <= 1.0 for k in ks)
    assert abs(lambda_k(ks.start - 1, h, acts)) > 1.0
    assert abs(lambda_k(ks.stop, h, acts)) > 1.0


# ---------------------------------------------------------------------------
# resonances

def test_roots_are_linear_dependence_points():
    acts, oracle, recs = resonance_run(0.02)
    for r in recs:
        assert r.converged and r.message == ""
        assert r.condition <= 1e-8
        assert r.w0_residual <= 1e-8
        assert r.E_oracle.imag < 0


def test_root_separation():
    acts, _, recs = resonance_run(0.02)
    gaps = np.diff([r.E_oracle.real for r in recs])
    np.testing.assert_allclose(gaps, acts.spacing(0.02), rtol=0.2)


def test_bs_closer_than_asym():
    _, _, recs = resonance_run(0.02)
    for r in recs:
        assert abs(r.E_bs - r.E_oracle) <= 5 * abs(r.E_asym - r.E_oracle)


def test_cauchy_riemann():
    acts, oracle, recs = resonance_run(0.02)
    E = recs[2].E_oracle
    assert cauchy_riemann_residual(oracle, E) <= 1e-6
    assert cauchy_riemann_residual(oracle, E + 0.3 * acts.spacing(0.02)) <= 1e-6


def test_decoupled_bohr_sommerfeld_h_squared():
    pair = reference_pair(X_RES)
    acts = Actions.of(pair)
    offsets = []
    for h in (0.02, 0.01):
        k = k_nearest(h, acts)
        E, F = bs_solve(k, pair, ZERO, config(h))
        assert F == 0 and E.imag == 0
        oracle = W0Oracle(pair, ZERO, config(h), grids(h, X_RES))
        (rec,) = find_resonances([k], pair, ZERO, config(h), ("oracle",), oracle)
        assert abs(rec.E_oracle.imag) <= 1e-10
        offsets.append((action(pair, rec.E_oracle.real) - (k + 0.5) * math.pi * h) / h ** 2)
    # next quantization term is O(h^2) with an h-independent coefficient
    assert offsets[0] == pytest.approx(offsets[1], rel=0.05)
    assert abs(offsets[0]) < 1


def test_outside_window_is_flagged():
    pair = reference_pair(X_RES)
    acts = Actions.of(pair)
    h = 0.02
    k = max(k_range(h, acts, 1.0)) + 4
    (rec,) = find_resonances([k], pair, ONE, config(h), ("oracle",),
                             W0Oracle(pair, ONE, config(h), grids(h, X_RES)))
    assert "outside" in rec.message


def test_convergence_study_needs_three_h():
    with pytest.raises(ValueError):
        convergence_study([0.02, 0.01], reference_pair(X_RES), ONE, config(0.02))


def test_singular_ratio_of_rank_deficient_matrix():
    m = np.outer([1, 2, 3, 4], [1, 0, 1, 0]) + np.eye(4) * 0
    assert singular_ratio(m) <= 1e-15
    assert singular_ratio(np.eye(4)) == 1.0
