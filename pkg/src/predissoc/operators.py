"""
The interaction W = r0 + r1 h D_x (D_x = -i d/dx), its formal adjoint
W* f = conj(r0) f + h D_x(conj(r1) f), the fundamental solutions K_{j,S}
and Hermite-corrected cumulative quadrature on sampled functions.
"""

from __future__ import annotations

import numpy as np

from .model import Interaction
from .scalar import ConditioningError, Sampled, ScalarBasis


def apply_w(inter: Interaction, g: Sampled, h: float) -> Sampled:
    """W g with its first derivative; needs g, g', g''."""
    z = g.z
    r0, dr0 = inter.r0(z), inter.dr0(z)
    r1, dr1 = inter.r1(z), inter.dr1(z)
    f = r0 * g.f - 1j * h * r1 * g.d1
    d1 = dr0 * g.f + r0 * g.d1 - 1j * h * (dr1 * g.d1 + r1 * g.d2)
    return Sampled(z, f, d1)


def apply_w_star(inter: Interaction, g: Sampled, h: float) -> Sampled:
    """W* g = conj(r0) g - i h (conj(r1) g)' with its first derivative."""
    z = g.z
    st = inter.star
    r0, dr0 = st(inter.r0)(z), st(inter.dr0)(z)
    r1, dr1, d2r1 = st(inter.r1)(z), st(inter.dr1)(z), st(inter.d2r1)(z)
    f = r0 * g.f - 1j * h * (dr1 * g.f + r1 * g.d1)
    d1 = dr0 * g.f + r0 * g.d1 - 1j * h * (d2r1 * g.f + 2 * dr1 * g.d1 + r1 * g.d2)
    return Sampled(z, f, d1)


def product(a: Sampled, b: Sampled) -> tuple[np.ndarray, np.ndarray]:
    return a.f * b.f, a.d1 * b.f + a.f * b.d1


def _segments(z, f, df):
    dz = np.diff(z)
    return 0.5 * dz * (f[:-1] + f[1:]) + dz * dz / 12.0 * (df[:-1] - df[1:])


def cumulative_hermite(z, f, df) -> np.ndarray:
    """Running integral from z[0]: trapezoid plus the endpoint-derivative
    correction dz^2/12 (f'_n - f'_{n+1}); fourth order on smooth data."""
    out = np.zeros(len(z), dtype=complex)
    np.cumsum(_segments(z, f, df), out=out[1:])
    return out


def cumulative_hermite_to_end(z, f, df) -> np.ndarray:
    """int_{z_n}^{z_last}, accumulated from the last node so that integrands
    that are large at the far end do not cancel."""
    out = np.zeros(len(z), dtype=complex)
    out[:-1] = np.cumsum(_segments(z, f, df)[::-1])[::-1]
    return out


def integrate(a: Sampled, b: Sampled) -> complex:
    """int a b dz over the whole node list."""
    f, df = product(a, b)
    return complex(cumulative_hermite(a.z, f, df)[-1])


def plain_wronskian(f: Sampled, g: Sampled, index: int) -> complex:
    return complex(f.f[index] * g.d1[index] - f.d1[index] * g.f[index])


def fundamental(basis: ScalarBasis, v: Sampled, V, E: complex, h: float) -> Sampled:
    """K_{j,S}[v] for the basis' channel and side.

    Left:  [u+ int_{-inf}^x u- v + u- int_x^0 u+ v] / (h^2 W[u+, u-])
    Right: [u- int_0^x u+ v + u+ int_x^inf u- v] / (h^2 W[u-, u+])
    W is the plain Wronskian. The result solves (P_j - E) w = v; its second
    derivative is taken from that equation.
    """
    um, up = basis.minus, basis.plus
    z = basis.z
    wr = plain_wronskian(up, um, -1) if basis.side == "L" else plain_wronskian(um, up, 0)
    if abs(wr) == 0 or not np.isfinite(wr):
        raise ConditioningError("fundamental solution: vanishing Wronskian")
    fa, dfa = product(um, v)
    fb, dfb = product(up, v)
    d = h * h * wr
    if basis.side == "L":
        i_minus = cumulative_hermite(z, fa, dfa)         # int_{x_left}^x u- v
        i_plus = cumulative_hermite_to_end(z, fb, dfb)   # int_x^0 u+ v
        w = (up.f * i_minus + um.f * i_plus) / d
        w1 = (up.d1 * i_minus + um.d1 * i_plus) / d
    else:
        i_plus = cumulative_hermite(z, fb, dfb)          # int_0^x u+ v
        i_minus = cumulative_hermite_to_end(z, fa, dfa)  # int_x^end u- v
        w = (um.f * i_plus + up.f * i_minus) / d
        w1 = (um.d1 * i_plus + up.d1 * i_minus) / d
    w2 = ((V(z) - E) * w - v.f) / (h * h)
    return Sampled(z, w, w1, w2)
