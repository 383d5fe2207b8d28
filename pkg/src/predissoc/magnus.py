"""Fourth-order Magnus propagation of linear systems y' = A(z) y along a
polygonal complex path, with magnitude renormalization."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

_R3 = math.sqrt(3.0)


class IntegrationError(RuntimeError):
    pass


def magnus_generators(afun, z):
    """Omega_n for every segment [z_n, z_{n+1}], shape (N, d, d).

    ``afun`` maps an array of points to stacked matrices (..., d, d).
    """
    z = np.asarray(z, dtype=complex)
    dz = z[1:] - z[:-1]
    mid = 0.5 * (z[1:] + z[:-1])
    off = (_R3 / 6.0) * dz
    a1 = afun(mid - off)
    a2 = afun(mid + off)
    d = dz[:, None, None]
    comm = a2 @ a1 - a1 @ a2
    return 0.5 * d * (a1 + a2) + (_R3 / 12.0) * d * d * comm


def expm_traceless2(om):
    """exp of stacked traceless 2x2 matrices: cosh(q) I + sinh(q)/q Omega."""
    a = om[:, 0, 0]
    q2 = a * a + om[:, 0, 1] * om[:, 1, 0]
    q = np.sqrt(q2)
    small = np.abs(q2) < 1e-8
    c = np.where(small, 1 + q2 / 2 + q2 * q2 / 24, np.cosh(q))
    qs = np.where(small, 1.0, q)
    s = np.where(small, 1 + q2 / 6 + q2 * q2 / 120, np.sinh(q) / qs)
    out = s[:, None, None] * om
    out[:, 0, 0] += c
    out[:, 1, 1] += c
    return out


def step_matrices(afun, z, backward: bool = False):
    om = magnus_generators(afun, z)
    if backward:
        om = -om
    if om.shape[-1] == 2:
        return expm_traceless2(om)
    return expm(om)


def _run(mats, y0, limit):
    n = len(mats)
    y = np.array(y0, dtype=complex)
    out = np.empty((n + 1,) + y.shape, dtype=complex)
    logs = np.zeros(n + 1)
    out[0] = y
    ls = 0.0
    for k in range(n):
        y = mats[k] @ y
        m = np.max(np.abs(y))
        if m > limit:
            y = y / m
            ls += math.log(m)
        out[k + 1] = y
        logs[k + 1] = ls
    return out, logs


def propagate_both(afun, z, start: int, y0, limit: float = 1e40,
                   forward=None, backward=None):
    """Integrate from node ``start`` to both ends of the node list ``z``.

    Returns (values, log_scale) on every node. Precomputed forward/backward
    step matrices may be passed to share work between several seeds.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    y0 = np.asarray(y0, dtype=complex)
    vals = np.empty((n,) + y0.shape, dtype=complex)
    logs = np.zeros(n)
    if start < n - 1:
        if forward is None:
            forward = step_matrices(afun, z)
        v, l = _run(forward[start:], y0, limit)
        vals[start:] = v
        logs[start:] = l
    else:
        vals[start] = y0
    if start > 0:
        if backward is None:
            backward = step_matrices(afun, z, backward=True)
        v, l = _run(backward[:start][::-1], y0, limit)
        vals[:start + 1] = v[::-1]
        logs[:start + 1] = l[::-1]
    return vals, logs


def rescale(vals, logs):
    """True values from renormalized ones; raises if they do not fit a double."""
    if logs.size and np.max(np.abs(logs)) > 700:
        raise IntegrationError("solution magnitude exceeds double range; "
                               "shrink the truncation box")
    shape = (-1,) + (1,) * (vals.ndim - 1)
    return vals * np.exp(logs).reshape(shape)


def propagate_subspace(mats, y0):
    """Carry a d x 2 solution pair through ``mats`` keeping it orthonormal.

    Y_k = Q_k T_k with T_k upper triangular; T is never formed. Returns
    Q on every node, the step factors R_k (R_0 from the seed) and
    log det T_end = sum log(R_k[0,0] R_k[1,1]) (real, since the
    Gram-Schmidt diagonal is positive).
    """
    y = np.array(y0, dtype=complex)
    n = len(mats)
    qs = np.empty((n + 1,) + y.shape, dtype=complex)
    rs = np.empty((n + 1, 2, 2), dtype=complex)
    logdet = 0.0
    for k in range(n + 1):
        if k:
            y = mats[k - 1] @ y
        a, b = y[:, 0], y[:, 1]
        r11 = np.linalg.norm(a)
        q1 = a / r11
        r12 = np.vdot(q1, b)
        b = b - r12 * q1
        r22 = np.linalg.norm(b)
        y = np.column_stack([q1, b / r22])
        qs[k] = y
        rs[k] = ((r11, r12), (0.0, r22))
        logdet += math.log(r11) + math.log(r22)
    return qs, rs, logdet


def subspace_solutions(qs, rs):
    """The pair normalized to Q at the last node: Z_k = Q_k T_k T_end^{-1},
    built backwards as G_k = R_{k+1}^{-1} G_{k+1}."""
    n = len(qs)
    out = np.empty_like(qs)
    g = np.eye(2, dtype=complex)
    out[-1] = qs[-1]
    for k in range(n - 2, -1, -1):
        r = rs[k + 1]
        rinv = np.array([[1 / r[0, 0], -r[0, 1] / (r[0, 0] * r[1, 1])],
                         [0.0, 1 / r[1, 1]]])
        g = rinv @ g
        out[k] = qs[k] @ g
    return out
