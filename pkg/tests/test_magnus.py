import math

import numpy as np
import pytest
from scipy.linalg import expm

from predissoc.magnus import (IntegrationError, expm_traceless2, magnus_generators,
                              propagate_both, propagate_subspace, rescale, step_matrices,
                              subspace_solutions)


def oscillator(omega):
    def afun(z):
        z = np.asarray(z)
        out = np.zeros(z.shape + (2, 2), dtype=complex)
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = -omega ** 2
        return out
    return afun


def airy_system(z):
    z = np.asarray(z)
    out = np.zeros(z.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = 1.0
    out[..., 1, 0] = z
    return out


def test_traceless_exponential_matches_expm():
    rng = np.random.default_rng(7)
    om = rng.normal(size=(20, 2, 2)) + 1j * rng.normal(size=(20, 2, 2))
    om[:, 1, 1] = -om[:, 0, 0]
    om[0] *= 1e-6
    got = expm_traceless2(om)
    for k in range(20):
        np.testing.assert_allclose(got[k], expm(om[k]), rtol=1e-12, atol=1e-14)


def test_constant_system_is_exact():
    z = np.linspace(0, 3, 31)
    vals, logs = propagate_both(oscillator(2.0), z, 0, [1.0, 0.0])
    np.testing.assert_allclose(vals[:, 0].real, np.cos(2 * z), atol=1e-12)


def test_fourth_order_on_airy_equation():
    from predissoc.airy import airy_eval
    errs = []
    for n in (50, 100, 200):
        z = np.linspace(-4, 0, n + 1)
        q0 = airy_eval(-4.0)
        vals, _ = propagate_both(airy_system, z, 0, [q0.ai, q0.ai_prime])
        errs.append(abs(vals[-1, 0] - airy_eval(0.0).ai))
    order = math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])
    assert min(order) > 3.7


def test_both_directions_from_interior():
    from predissoc.airy import airy_eval
    z = np.linspace(-3, 1, 401)
    q = airy_eval(-1.0)
    vals, logs = propagate_both(airy_system, z, 200, [q.ai, q.ai_prime])
    np.testing.assert_allclose(rescale(vals, logs)[:, 0].real, airy_eval(z).ai, atol=1e-9)


def test_renormalization_tracks_log_scale():
    z = np.linspace(0, 30, 3001)
    vals, logs = propagate_both(oscillator(10j), z, 0, [1.0, 10.0], limit=1e10)
    # y = exp(10 z); the stored mantissa stays bounded
    assert np.max(np.abs(vals)) <= 1e10 * 11
    assert logs[-1] + math.log(abs(vals[-1, 0])) == pytest.approx(300.0, rel=1e-9)
    rescale(vals, logs)
    far = np.linspace(0, 80, 8001)
    vals, logs = propagate_both(oscillator(10j), far, 0, [1.0, 10.0], limit=1e10)
    with pytest.raises(IntegrationError):
        rescale(vals, logs)


def test_subspace_pair_spans_direct_solutions():
    rng = np.random.default_rng(3)
    z = np.linspace(0, 2, 81)

    def afun(x):
        x = np.asarray(x)
        a = np.zeros(x.shape + (4, 4), dtype=complex)
        a[..., 0, 1] = a[..., 2, 3] = 1.0
        a[..., 1, 0] = 4 + x
        a[..., 3, 2] = -1 + 0.5 * x
        a[..., 1, 2] = a[..., 3, 0] = 0.3
        return a

    mats = step_matrices(afun, z)
    y0 = rng.normal(size=(4, 2)) + 0j
    qs, rs, logdet = propagate_subspace(mats, y0)
    direct = [y0]
    for m in mats:
        direct.append(m @ direct[-1])
    direct = np.array(direct)
    t_end = qs[-1].conj().T @ direct[-1]
    assert logdet == pytest.approx(math.log(abs(np.linalg.det(t_end))), rel=1e-12)
    z_pair = subspace_solutions(qs, rs)
    expect = direct @ np.linalg.inv(t_end)
    np.testing.assert_allclose(z_pair, expect, rtol=1e-10, atol=1e-12)


def test_generators_shape():
    om = magnus_generators(airy_system, np.linspace(0, 1, 11))
    assert om.shape == (10, 2, 2)
