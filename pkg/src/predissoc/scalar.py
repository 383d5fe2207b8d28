"""
Scalar channels P_j - E = -h^2 d^2/dx^2 + V_j - E.

Solutions are produced by Magnus integration from seeds with the standard
normalizations:

* decaying solutions u^- start from their WKB form
  h^(1/6)/sqrt(pi) |V - E|^(-1/4) exp(-|phase|/h) at the far end of the box,
* growing or oscillating solutions u^+ start from the uniform Airy form
  (xi')^(-1/2) Bi(+-h^(-2/3) xi) at the grid node nearest the turning point,
* the outgoing channel-2 solution on the right is seeded by the outgoing
  WKB wave at the end of the complex path.

All Wronskians use the scaled derivative d~ = h^(2/3) d/dx.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .airy import airy_eval
from .magnus import propagate_both, rescale, step_matrices
from .model import (
    Grids,
    PotentialPair,
    SemiclassicalConfig,
    action,
    build_grids,
    march_nodes,
    turning_points,
)
from .quadrature import adaptive_gauss_legendre, gauss_legendre, sqrt_endpoint_segment

SQRT_PI = math.sqrt(math.pi)
E_IPI4 = cmath.exp(0.25j * math.pi)


class ConditioningError(ArithmeticError):
    pass


class MapError(ValueError):
    pass


def channel(pair: PotentialPair, j: int):
    if j == 1:
        return pair.v1, pair.dv1, pair.d2v1
    if j == 2:
        return pair.v2, pair.dv2, pair.d2v2
    raise ValueError("channel must be 1 or 2")


# ---------------------------------------------------------------------------
# sampled functions

@dataclass(frozen=True)
class Sampled:
    """Values and the first two z-derivatives of a function on nodes z."""

    z: np.ndarray
    f: np.ndarray
    d1: np.ndarray
    d2: np.ndarray | None = None

    def __add__(self, other: "Sampled") -> "Sampled":
        d2 = None if self.d2 is None or other.d2 is None else self.d2 + other.d2
        return Sampled(self.z, self.f + other.f, self.d1 + other.d1, d2)

    def scale(self, c) -> "Sampled":
        return Sampled(self.z, c * self.f, c * self.d1,
                       None if self.d2 is None else c * self.d2)

    @classmethod
    def zeros(cls, z) -> "Sampled":
        zero = np.zeros(len(z), dtype=complex)
        return cls(np.asarray(z), zero, zero.copy(), zero.copy())


@dataclass(frozen=True)
class ScalarColumn(Sampled):
    channel: int = 1
    side: str = "L"
    kind: str = "minus"
    h: float = 1.0

    @property
    def du(self) -> np.ndarray:
        """Scaled derivative h^(2/3) u'."""
        return self.h ** (2 / 3) * self.d1

    def at_zero(self) -> tuple[complex, complex]:
        k = -1 if self.side == "L" else 0
        return complex(self.f[k]), complex(self.du[k])


def wronskian_scaled(f: ScalarColumn, g: ScalarColumn, index=None):
    """W~[f, g] = f d~g - (d~f) g, on every node or at one index."""
    if index is None:
        return f.f * g.du - f.du * g.f
    return complex(f.f[index] * g.du[index] - f.du[index] * g.f[index])


def _column(pair, E, j, z, u, d1, side, kind, h) -> ScalarColumn:
    v = channel(pair, j)[0]
    d2 = (v(z) - E) * u / h ** 2
    return ScalarColumn(np.asarray(z), u, d1, d2, channel=j, side=side, kind=kind, h=h)


@dataclass(frozen=True)
class ScalarBasis:
    channel: int
    side: str
    z: np.ndarray
    minus: ScalarColumn
    plus: ScalarColumn
    normalization: str = "minus: 2 Ai / WKB, plus: Bi"

    def wronskian(self) -> np.ndarray:
        return wronskian_scaled(self.minus, self.plus)

    def wronskian_drift(self) -> float:
        w = self.wronskian()
        return float(np.max(np.abs(w - w[w.size // 2])) / abs(w[w.size // 2]))


# ---------------------------------------------------------------------------
# Langer maps

@dataclass(frozen=True)
class LangerMap:
    """xi with (xi')^2 xi = Q, Q = sign (V_j - E), xi(x_turn) = 0, xi' ~ Q'(x_turn)^(1/3).

    ``airy_sign`` is +1 when Q = V - E (plain Ai/Bi, forbidden side xi > 0)
    and -1 when Q = E - V (reflected Ai/Bi, forbidden side xi < 0).
    """

    channel: int
    x_turn: complex
    airy_sign: int
    z: np.ndarray
    xi: np.ndarray
    xi_prime: np.ndarray
    xi_second: np.ndarray
    xi_third: np.ndarray
    q: np.ndarray
    nu1: np.ndarray | None = None

    @property
    def langer_potential(self) -> np.ndarray:
        """[(xi')^(-1/2)]'' (xi')^(-3/2)."""
        x1, x2, x3 = self.xi_prime, self.xi_second, self.xi_third
        return 0.75 * x2 ** 2 / x1 ** 4 - 0.5 * x3 / x1 ** 3


_SERIES_RADIUS = 0.25
_CIRCLE_RADIUS = 0.3
_N_SERIES = 40


def _series_pow(a, alpha, n):
    """Coefficients of (sum a_k x^k)^alpha with a_0 = 1 (Miller recurrence)."""
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    for m in range(1, n):
        k = np.arange(1, min(m, len(a) - 1) + 1)
        b[m] = np.sum(((alpha + 1) * k - m) * a[k] * b[m - k]) / m
    return b


def _taylor_at(fn, x0, radius, n):
    m = 2 * n
    w = np.exp(2j * np.pi * np.arange(m) / m)
    vals = fn(x0 + radius * w)
    c = np.fft.fft(vals) / m
    return c[:n] / radius ** np.arange(n)


def _xi_series(qfun, xt):
    """Taylor coefficients of xi about the turning point, plus q1 = Q'(xt)."""
    qc = _taylor_at(qfun, xt, _CIRCLE_RADIUS, _N_SERIES + 2)
    q1 = qc[1]
    g = qc[1:] / q1                      # G(s) = Q / (q1 s) as a series
    a = _series_pow(g, 0.5, _N_SERIES)   # sqrt(G)
    k = np.arange(_N_SERIES)
    inner = 1.5 * a / (k + 1.5)          # (3/2) int_0^1 sqrt(t) sqrt(G(t s)) dt
    j = _series_pow(inner, 2.0 / 3.0, _N_SERIES)
    c1 = q1 ** (1.0 / 3.0)
    coeffs = np.concatenate([[0.0], c1 * j])   # xi = sum coeffs[m] s^m
    return coeffs, q1, qc


def _poly_derivs(coeffs, s):
    p = np.polynomial.polynomial
    out = [p.polyval(s, coeffs)]
    c = coeffs
    for _ in range(3):
        c = p.polyder(c)
        out.append(p.polyval(s, c))
    return out


def langer_map(pair: PotentialPair, E: complex, j: int, grid,
               turning: str | None = None) -> LangerMap:
    """Langer variable for channel j on ``grid``.

    ``turning`` selects the turning point: "x1" (channel 1, right well edge,
    Q = V1 - E), "x1_star" (channel 1, left edge, Q = E - V1) or "x2"
    (channel 2, Q = E - V2). Near the turning point xi comes from its Taylor
    series; elsewhere from xi = q1^(1/3) s J(s), with J given by a smooth
    Gauss integral, and the derivatives from (xi')^2 xi = Q.
    """
    turning = turning or ("x1" if j == 1 else "x2")
    x1s, x1, x2 = turning_points(pair, E)
    v, dv, d2v = channel(pair, j)
    if turning == "x1" and j == 1:
        xt, sgn = x1, 1
    elif turning == "x1_star" and j == 1:
        xt, sgn = x1s, -1
    elif turning == "x2" and j == 2:
        xt, sgn = x2, -1
    else:
        raise MapError(f"turning point {turning} does not belong to channel {j}")
    E = complex(E)
    Q = lambda t: sgn * (v(t) - E)
    dQ = lambda t: sgn * dv(t)
    d2Q = lambda t: sgn * d2v(t)
    z = np.asarray(grid, dtype=complex)
    coeffs, q1, qc = _xi_series(Q, xt)
    if abs(q1) == 0:
        raise MapError("degenerate turning point")
    c1 = q1 ** (1.0 / 3.0)
    s = z - xt
    xi = np.empty_like(s)
    x1d = np.empty_like(s)
    x2d = np.empty_like(s)
    x3d = np.empty_like(s)

    near = np.abs(s) <= _SERIES_RADIUS
    if near.any():
        xi[near], x1d[near], x2d[near], x3d[near] = _poly_derivs(coeffs, s[near])
    far = ~near
    if far.any():
        sf = s[far]
        sig, wts = gauss_legendre(48)
        tau = sig[:, None] ** 2
        ts = tau * sf[None, :]
        gpoly = np.polynomial.polynomial.polyval(ts, qc[1:] / q1)
        gdir = Q(xt + ts) / (q1 * np.where(ts == 0, 1, ts))
        G = np.where(np.abs(ts) < 0.05, gpoly, gdir)
        if np.any((G.real <= 0) & (np.abs(G.imag) < 1e-3 * np.abs(G))):
            raise MapError("grid crosses a second turning point")
        integral = np.sum((wts * 2 * sig ** 2)[:, None] * np.sqrt(G), axis=0)
        J = (1.5 * integral) ** (2.0 / 3.0)
        xi_f = c1 * sf * J
        g1 = Q(z[far]) / (q1 * sf)
        xp = c1 * np.sqrt(g1 / J)
        xpp = (dQ(z[far]) - xp ** 3) / (2 * xp * xi_f)
        xppp = (d2Q(z[far]) - 2 * xpp ** 2 * xi_f - 5 * xp ** 2 * xpp) / (2 * xp * xi_f)
        xi[far], x1d[far], x2d[far], x3d[far] = xi_f, xp, xpp, xppp

    nu1 = None
    if j == 1 and turning == "x1":
        well = (z.real < xt.real) & (z.real > x1s.real)
        nu1 = np.full(z.shape, np.nan, dtype=complex)
        for k in np.nonzero(well)[0]:
            nu1[k] = sqrt_endpoint_segment(lambda t: np.sqrt(E - v(t)), xt, z[k], 48, "left")
    return LangerMap(j, xt, 1 if sgn > 0 else -1, z, xi, x1d, x2d, x3d, Q(z), nu1)


def uniform_solution(lmap: LangerMap, kind: str, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform Airy approximation and its x-derivative on the map's nodes.

    minus: 2 (xi')^(-1/2) Ai(s h^(-2/3) xi); plus: (xi')^(-1/2) Bi(s h^(-2/3) xi),
    with s = ``lmap.airy_sign``.
    """
    sgn = lmap.airy_sign
    y = sgn * lmap.xi * h ** (-2 / 3)
    quad = airy_eval(y)
    if kind == "minus":
        pref, F, Fp = 2.0, quad.ai, quad.ai_prime
    elif kind == "plus":
        pref, F, Fp = 1.0, quad.bi, quad.bi_prime
    else:
        raise ValueError("kind must be 'minus' or 'plus'")
    xp, xpp = lmap.xi_prime, lmap.xi_second
    u = pref * xp ** -0.5 * F
    du = pref * (-0.5 * xpp * xp ** -1.5 * F + xp ** 0.5 * sgn * h ** (-2 / 3) * Fp)
    return u, du


# ---------------------------------------------------------------------------
# WKB seeds

def phase_integral(fn, xt, z, tol: float = 1e-13) -> complex:
    """int_{xt}^{z} fn(t) dt on the straight segment, fn ~ sqrt(t - xt) at xt."""
    d = z - xt
    if abs(d) == 0:
        return 0j
    near = xt + d * min(1.0, 0.1 / abs(d))
    val = sqrt_endpoint_segment(fn, xt, near, 32, "left")
    if near != z:
        val += adaptive_gauss_legendre(fn, near, z, tol=tol, n=16)
    return complex(val)


def _wkb_seed(pair, j, E, xt, ze, h, mode, direction, split=False):
    """Second-order WKB data (u, u') at ``ze``, normalized at infinity.

    mode "decay": h^(1/6)/sqrt(pi) (V-E)^(-1/4) exp(-|int_xt^ze sqrt(V-E)|/h);
    mode "out"/"in": h^(1/6)/sqrt(pi) (E-V)^(-1/4) exp(+-i int_xt^ze sqrt(E-V)/h).
    With u'/u = y0/h + y1 + h y2 the Riccati expansion of h^2 u'' = (V-E) u,
    the amplitude carries exp(-h int_ze^inf y2) so the seeded solution has
    the leading WKB form at infinity up to O(h^2). ``direction`` is the unit
    step from ``ze`` towards infinity. With ``split`` the real part of the
    exponent is returned separately as a third value instead of applied.
    """
    v, dv, d2v = channel(pair, j)
    E = complex(E)
    if mode == "decay":
        sgn = -1.0 if direction.real > 0 else 1.0
        root = lambda t: np.sqrt(v(t) - E)
        y0fun = lambda t: sgn * root(t)
        amp_q = complex(v(ze)) - E
    else:
        sgn = 1.0 if mode == "out" else -1.0
        root = lambda t: np.sqrt(E - v(t))
        y0fun = lambda t: 1j * sgn * root(t)
        amp_q = E - complex(v(ze))

    def terms(t):
        Q = v(t) - E
        Q1, Q2 = dv(t), d2v(t)
        y0 = y0fun(t)
        y1 = -Q1 / (4 * Q)
        y2 = -(-Q2 / (4 * Q) + Q1 ** 2 / (4 * Q ** 2) + y1 ** 2) / (2 * y0)
        return y0, y1, y2

    phi = phase_integral(root, xt, ze)
    tail = adaptive_gauss_legendre(lambda t: terms(ze + direction * t)[2] * direction,
                                   0.0, 1e3, tol=1e-12, n=16)
    y0, y1, y2 = (complex(c) for c in terms(np.asarray(ze)))
    expo = sgn * phi / h if mode == "decay" else 1j * sgn * phi / h
    expo = expo - h * tail
    log_scale = expo.real if split else 0.0
    u = h ** (1 / 6) / SQRT_PI * amp_q ** -0.25 * cmath.exp(expo - log_scale)
    if split:
        return u, u * (y0 / h + y1 + h * y2), log_scale
    return u, u * (y0 / h + y1 + h * y2)


# ---------------------------------------------------------------------------
# integration

class _Propagator:
    """Shared Magnus step matrices for one (channel, energy, node list)."""

    def __init__(self, pair, E, j, z, h):
        self.pair, self.E, self.j, self.h = pair, complex(E), j, h
        self.z = np.asarray(z, dtype=complex)
        v = channel(pair, j)[0]

        def afun(t):
            a = np.zeros(t.shape + (2, 2), dtype=complex)
            a[..., 0, 1] = 1.0 / h
            a[..., 1, 0] = (v(t) - self.E) / h
            return a

        self.afun = afun
        self._fwd = None
        self._bwd = None

    def run(self, start, u0, d0):
        n = self.z.size
        if start < n - 1 and self._fwd is None:
            self._fwd = step_matrices(self.afun, self.z)
        if start > 0 and self._bwd is None:
            self._bwd = step_matrices(self.afun, self.z, backward=True)
        vals, logs = propagate_both(self.afun, self.z, start, [u0, self.h * d0],
                                    forward=self._fwd, backward=self._bwd)
        y = rescale(vals, logs)
        return y[:, 0], y[:, 1] / self.h


def _ray(z):
    d = z[-1] - z[-2]
    return d / abs(d)


def _nearest(z, xt):
    return int(np.argmin(np.abs(np.asarray(z) - xt)))


def _langer_seed(pair, E, j, turning, node, kind, h):
    lm = langer_map(pair, E, j, np.array([node]), turning)
    u, du = uniform_solution(lm, kind, h)
    return complex(u[0]), complex(du[0])


@dataclass(frozen=True)
class ScalarSolutions:
    """The eight scalar solutions of both channels on both sides."""

    E: complex
    h: float
    grids: Grids
    b1L: ScalarBasis
    b2L: ScalarBasis
    b1R: ScalarBasis
    b2R: ScalarBasis
    a2_minus: complex
    a2_plus: complex
    turning: tuple

    def basis(self, j: int, side: str) -> ScalarBasis:
        return {(1, "L"): self.b1L, (2, "L"): self.b2L,
                (1, "R"): self.b1R, (2, "R"): self.b2R}[(j, side)]


def _left_basis(pair, E, j, z, h, turns):
    x1s, x1, x2 = turns
    v, dv, _ = channel(pair, j)
    prop = _Propagator(pair, E, j, z, h)
    xt = x1s if j == 1 else x2
    um0, dm0 = _wkb_seed(pair, j, E, xt, complex(z[0]), h, "decay", -1 + 0j)
    um, dm = prop.run(0, um0, dm0)
    k = _nearest(z, xt)
    up0, dp0 = _langer_seed(pair, E, j, "x1_star" if j == 1 else "x2", z[k], "plus", h)
    up, dp = prop.run(k, up0, dp0)
    minus = _column(pair, E, j, z, um, dm, "L", "minus", h)
    plus = _column(pair, E, j, z, up, dp, "L", "plus", h)
    return ScalarBasis(j, "L", z, minus, plus)


def _right_ch1(pair, E, z, h, turns):
    x1 = turns[1]
    prop = _Propagator(pair, E, 1, z, h)
    um0, dm0 = _wkb_seed(pair, 1, E, x1, complex(z[-1]), h, "decay", _ray(z))
    um, dm = prop.run(z.size - 1, um0, dm0)
    up0, dp0 = _langer_seed(pair, E, 1, "x1", z[0], "plus", h)
    up, dp = prop.run(0, up0, dp0)
    minus = _column(pair, E, 1, z, um, dm, "R", "minus", h)
    plus = _column(pair, E, 1, z, up, dp, "R", "plus", h)
    return ScalarBasis(1, "R", z, minus, plus)


def outgoing_solution(pair, E, z, h, turns, prop=None):
    """v_- = exp(-i pi/4) x outgoing WKB wave at the path end, integrated
    back to 0. With exact a2 it equals a2^-/2 u2L^- - i a2^+ u2L^+."""
    x2 = turns[2]
    prop = prop or _Propagator(pair, E, 2, z, h)
    u0, d0 = _wkb_seed(pair, 2, E, x2, complex(z[-1]), h, "out", _ray(z))
    c = 1 / E_IPI4
    return prop.run(z.size - 1, c * u0, c * d0)


def incoming_solution_real(pair, E, h, x_far: float, density: float, turns):
    """v_+ = exp(i pi/4) x incoming WKB wave seeded at real x_far, integrated
    along the real axis to 0. Returns (u(0), u'(0))."""
    x2 = turns[2]
    z = march_nodes(pair, h, density, 0.0, x_far, +1).astype(complex)
    prop = _Propagator(pair, E, 2, z, h)
    u0, d0 = _wkb_seed(pair, 2, E, x2, complex(z[-1]), h, "in", 1 + 0j)
    u, d = prop.run(z.size - 1, E_IPI4 * u0, E_IPI4 * d0)
    return complex(u[0]), complex(d[0])


def _solve_in_basis(b2L: ScalarBasis, u0, d0):
    m = np.array([[b2L.minus.f[-1], b2L.plus.f[-1]],
                  [b2L.minus.d1[-1], b2L.plus.d1[-1]]])
    if abs(np.linalg.det(m)) < 1e-14 * np.max(np.abs(m)) ** 2:
        raise ConditioningError("channel-2 left basis is degenerate at 0")
    return np.linalg.solve(m, np.array([u0, d0]))


def u2R_combine(b2L: ScalarBasis, a2_minus: complex, a2_plus: complex, index: int = -1):
    """Values and x-derivatives of u2R^-, u2R^+ at a left-grid node.

    u2R^(+-) = 2^(+-1/2) e^(i pi/4) (a2^-/2 u2L^- +- i a2^+ u2L^+).
    """
    um, up = b2L.minus, b2L.plus
    out = []
    for s in (-1, +1):
        c = 2 ** (s / 2) * E_IPI4
        f = c * (0.5 * a2_minus * um.f[index] + s * 1j * a2_plus * up.f[index])
        d = c * (0.5 * a2_minus * um.d1[index] + s * 1j * a2_plus * up.d1[index])
        out.append((complex(f), complex(d)))
    return tuple(out)


def _a2_from(b2L, v0, dv0, sign):
    c = _solve_in_basis(b2L, v0, dv0)
    # v_(sign) = c[0] u^- + c[1] u^+ = a^-/2 u^- + sign i a^+ u^+
    return complex(2 * c[0]), complex(c[1] / (sign * 1j))


def _right_ch2(pair, E, z, h, turns, b2L):
    prop = _Propagator(pair, E, 2, z, h)
    vm, dvm = outgoing_solution(pair, E, z, h, turns, prop)
    a2m, a2p = _a2_from(b2L, vm[0], dvm[0], -1)
    # u2R^- = 2^(-1/2) e^(i pi/4) v_-
    um = 2 ** -0.5 * E_IPI4 * vm
    dm = 2 ** -0.5 * E_IPI4 * dvm
    (_, _), (p0, pd0) = u2R_combine(b2L, a2m, a2p)
    up, dp = prop.run(0, p0, pd0)
    minus = _column(pair, E, 2, z, um, dm, "R", "minus", h)
    plus = _column(pair, E, 2, z, up, dp, "R", "plus", h)
    return ScalarBasis(2, "R", z, minus, plus), a2m, a2p


def scalar_solutions(pair: PotentialPair, E: complex, config: SemiclassicalConfig,
                     grids: Grids | None = None) -> ScalarSolutions:
    grids = grids or build_grids(pair, config)
    h, E = config.h, complex(E)
    turns = turning_points(pair, E)
    zl = grids.left.astype(complex)
    zr = grids.right
    b1L = _left_basis(pair, E, 1, zl, h, turns)
    b2L = _left_basis(pair, E, 2, zl, h, turns)
    b1R = _right_ch1(pair, E, zr, h, turns)
    b2R, a2m, a2p = _right_ch2(pair, E, zr, h, turns, b2L)
    return ScalarSolutions(E, h, grids, b1L, b2L, b1R, b2R, a2m, a2p, turns)


def integrate_scalar(pair: PotentialPair, E: complex, j: int, S: str, kind: str,
                     config: SemiclassicalConfig, grids: Grids | None = None) -> ScalarColumn:
    """One numerically exact scalar solution on the side's nodes."""
    sol = scalar_solutions(pair, E, config, grids)
    b = sol.basis(j, S)
    return b.minus if kind == "minus" else b.plus


def determine_a2(pair: PotentialPair, E: complex, config: SemiclassicalConfig,
                 grids: Grids | None = None, x_far: float = 12.0):
    """(a2^-, a2^+) from the outgoing solution on the path, and the same pair
    recomputed from the incoming solution integrated along the real axis.

    Returns a dict with keys a2_minus, a2_plus, a2_minus_in, a2_plus_in.
    """
    grids = grids or build_grids(pair, config)
    h, E = config.h, complex(E)
    turns = turning_points(pair, E)
    b2L = _left_basis(pair, E, 2, grids.left.astype(complex), h, turns)
    vm, dvm = outgoing_solution(pair, E, grids.right, h, turns)
    a2m, a2p = _a2_from(b2L, vm[0], dvm[0], -1)
    vp0, dvp0 = incoming_solution_real(pair, E, h, x_far, config.grid_density, turns)
    a2m_in, a2p_in = _a2_from(b2L, vp0, dvp0, +1)
    return {"a2_minus": a2m, "a2_plus": a2p,
            "a2_minus_in": a2m_in, "a2_plus_in": a2p_in}


# ---------------------------------------------------------------------------
# connection coefficients and the Wronskian table

@dataclass(frozen=True)
class ConnectionCoeffs:
    a_minus: complex
    b_minus: complex
    a_plus: complex
    b_plus: complex
    a2_minus: complex
    a2_plus: complex


def connection_coeffs(pair: PotentialPair, E: complex, config: SemiclassicalConfig,
                      sol: ScalarSolutions | None = None) -> ConnectionCoeffs:
    """u1L^(+-) = a_(+-) u1R^- + b_(+-) u1R^+, from Wronskians at x = 0.

    Both sides are exact solutions, so the Wronskian ratios do not depend on
    where they are evaluated; x = 0 is the node shared by both grids.
    """
    sol = sol or scalar_solutions(pair, E, config)
    rm, rp = sol.b1R.minus, sol.b1R.plus
    lm, lp = sol.b1L.minus, sol.b1L.plus
    W = lambda f, g: f.at_zero()[0] * g.at_zero()[1] - f.at_zero()[1] * g.at_zero()[0]
    wrr = W(rm, rp)
    if abs(wrr) < 1e-12:
        raise ConditioningError("right channel-1 basis is degenerate")
    return ConnectionCoeffs(
        a_minus=W(lm, rp) / wrr, b_minus=W(lm, rm) / -wrr,
        a_plus=W(lp, rp) / wrr, b_plus=W(lp, rm) / -wrr,
        a2_minus=sol.a2_minus, a2_plus=sol.a2_plus)


@dataclass(frozen=True)
class WronskianEntry:
    name: str
    predicted: complex
    measured: complex
    h: float

    @property
    def abs_err(self) -> float:
        return abs(self.measured - self.predicted)


def wronskian_table(pair: PotentialPair, E: complex, config: SemiclassicalConfig,
                    sol: ScalarSolutions | None = None) -> list[WronskianEntry]:
    """Scaled Wronskians at x = 0 next to their leading-order values."""
    sol = sol or scalar_solutions(pair, E, config)
    h = config.h
    A = action(pair, E)
    c, s = cmath.cos(A / h), cmath.sin(A / h)
    r2 = math.sqrt(2)

    def W(f, g):
        f0, df0 = f.at_zero()
        g0, dg0 = g.at_zero()
        return f0 * dg0 - df0 * g0

    u = {
        "u1L-": sol.b1L.minus, "u1L+": sol.b1L.plus,
        "u2L-": sol.b2L.minus, "u2L+": sol.b2L.plus,
        "u1R-": sol.b1R.minus, "u1R+": sol.b1R.plus,
        "u2R-": sol.b2R.minus, "u2R+": sol.b2R.plus,
    }
    spec = [
        ("u1L-", "u1L+", -2 / math.pi),
        ("u2L-", "u2L+", -2 / math.pi),
        ("u1R-", "u1R+", 2 / math.pi),
        ("u2R-", "u2R+", 2 / math.pi),
        ("u1L-", "u1R-", -4 / math.pi * c),
        ("u2L-", "u2R-", 1j * r2 / math.pi * E_IPI4),
        ("u1L+", "u1R-", 2 / math.pi * s),
        ("u1L-", "u1R+", 2 / math.pi * s),
        ("u2L-", "u2R+", -2j * r2 / math.pi * E_IPI4),
        ("u2L+", "u2R-", E_IPI4 / (math.pi * r2)),
    ]
    return [WronskianEntry(f"W({a},{b})", complex(p), W(u[a], u[b]), h)
            for a, b, p in spec]
