"""
Airy overlap functions and the crossing coefficients.

Overlaps
--------
Every overlap used here has the form

    I(t) = int_0^inf Ai(a^{-2/3}(a y - t)) G(-b^{-2/3}(b y + t)) dy,   G in {Ai, Bi}

with a, b the crossing slopes. mu1 = I(t; tau1, tau2, Ai), mu2 swaps the
slopes, mu_B uses G = Bi. The first factor decays superexponentially, which
gives a certified truncation bound; the second is bounded by the Airy modulus
function on the negative axis.

Crossing coefficients
---------------------
alpha_{j,S}, beta_{j,S} are computed two ways: from their defining integrals
over the numerically exact scalar bases, and from their Airy-limit leading
forms. With general slopes the leading forms carry (tau1 tau2)^(-1/6) per
alpha and (tau1 tau2)^(-1/3) per beta, from the (xi')^(-1/2) prefactors of
the uniform approximations at the crossing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .airy import airy_eval
from .model import Interaction, PotentialPair, SemiclassicalConfig, action
from .operators import apply_w, apply_w_star, fundamental, integrate, plain_wronskian
from .quadrature import gauss_legendre
from .scalar import E_IPI4, ScalarSolutions, channel, scalar_solutions

# Panel quadrature settings for the overlaps and the triangular integrals.
_PANEL = 0.5
_N_LO, _N_HI = 20, 30
_TRI_PANEL = 0.25
_TRI_N = 16

# Truncation of the Airy-limit double integrals.
BETA_T = 30.0


@dataclass(frozen=True)
class OverlapResult:
    value: float
    error_bound: float
    estimate: float
    cutoff: float


def _tail_bounds(a, b):
    """Bound on int_{a}^inf Ai(s) |G(x)| ds for a > 0 with x <= b <= 0.

    int_a^inf Ai <= Ai(a)/sqrt(a) because -Ai'/Ai >= sqrt(s); |G| is bounded
    by the Airy modulus sqrt(Ai^2 + Bi^2), which decreases along the
    negative axis, so its value at b bounds it.
    """
    qa = airy_eval(a, scaled=True)
    qb = airy_eval(b)
    return qa.ai * np.exp(-qa.log_scale) / np.sqrt(a) * np.hypot(qb.ai, qb.bi)


def airy_overlap(t: float, ta: float, tb: float, second: str = "ai",
                 quad_tol: float = 1e-10) -> OverlapResult:
    """int_0^inf Ai(ta^{-2/3}(ta y - t)) G(-tb^{-2/3}(tb y + t)) dy.

    The reported ``error_bound`` is the certified target ``quad_tol``: the
    tail bound plus the panel error estimate is checked against it.
    """
    if ta <= 0 or tb <= 0:
        raise ValueError("slopes must be positive")
    if second not in ("ai", "bi"):
        raise ValueError("second factor must be 'ai' or 'bi'")
    sa, sb = ta ** (1 / 3), tb ** (1 / 3)
    oa, ob = t / ta ** (2 / 3), t / tb ** (2 / 3)

    def arg_a(y):
        return sa * y - oa

    def arg_b(y):
        return -(sb * y + ob)

    # cutoff: first factor below quad_tol * 1e-2 and second factor oscillatory
    y0 = max(0.0, -ob / sb, (oa + 1.0) / sa)
    cand = y0 + 0.5 * np.arange(1, 400)
    tails = _tail_bounds(arg_a(cand), np.minimum(arg_b(cand), 0.0)) / sa
    ok = np.nonzero(tails <= 1e-2 * quad_tol)[0]
    if ok.size == 0:
        raise ArithmeticError("overlap cutoff not found")
    y_cut, tail = float(cand[ok[0]]), float(tails[ok[0]])

    def integrand(y):
        qa = airy_eval(arg_a(y))
        qb = airy_eval(arg_b(y))
        return qa.ai * (qb.ai if second == "ai" else qb.bi)

    n_pan = max(1, int(math.ceil(y_cut / _PANEL)))
    while True:
        edges = np.linspace(0.0, y_cut, n_pan + 1)
        lo = _panel_sum(integrand, edges, _N_LO)
        hi = _panel_sum(integrand, edges, _N_HI)
        est = float(np.sum(np.abs(hi - lo)))
        if est + tail <= 0.5 * quad_tol or n_pan > 4096:
            break
        n_pan *= 2
    if est + tail > quad_tol:
        raise ArithmeticError("overlap quadrature did not reach quad_tol")
    return OverlapResult(float(np.sum(hi)), quad_tol, est + tail, y_cut)


def _panel_sum(f, edges, n):
    x, w = gauss_legendre(n)
    a, b = edges[:-1], edges[1:]
    pts = a[:, None] + (b - a)[:, None] * x[None, :]
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    return (b - a) * (vals @ w)


def mu12(t: float, tau1: float = 1.0, tau2: float = 1.0,
         quad_tol: float = 1e-10) -> tuple[float, float]:
    mu1 = airy_overlap(t, tau1, tau2, "ai", quad_tol).value
    mu2 = airy_overlap(t, tau2, tau1, "ai", quad_tol).value
    return mu1, mu2


def muAB(t: float, quad_tol: float = 1e-10, tau1: float = 1.0,
         tau2: float = 1.0) -> tuple[float, float]:
    """Right-side (mu_A, mu_B); with unit slopes these are the plain
    int_0^inf Ai(y - t) Ai(-y - t) dy and the same with Bi(-y - t)."""
    ma = airy_overlap(t, tau1, tau2, "ai", quad_tol).value
    mb = airy_overlap(t, tau1, tau2, "bi", quad_tol).value
    return ma, mb


def muAB_left(t: float, tau1: float = 1.0, tau2: float = 1.0,
              quad_tol: float = 1e-10) -> tuple[float, float]:
    """Left-side overlaps: after y -> -y these are the right-side ones with
    the slopes exchanged, so the A-part equals mu2."""
    ma = airy_overlap(t, tau2, tau1, "ai", quad_tol).value
    mb = airy_overlap(t, tau2, tau1, "bi", quad_tol).value
    return ma, mb


def mu_sum_closed_form(t: float, tau1: float = 1.0, tau2: float = 1.0) -> float:
    """(tau1 + tau2)^(-1/3) Ai(-(1/tau1 + 1/tau2)^(2/3) t): the full-line
    convolution that mu1 + mu2 must equal."""
    c = (1 / tau1 + 1 / tau2) ** (2 / 3)
    return float((tau1 + tau2) ** (-1 / 3) * airy_eval(-c * t).ai)


@dataclass(frozen=True)
class MuFunctions:
    t: float
    mu1: float
    mu2: float
    muA: float
    muB: float
    tau1: float = 1.0
    tau2: float = 1.0
    muA_left: float = 0.0
    muB_left: float = 0.0

    @property
    def identity_residual(self) -> float:
        return abs(self.mu1 + self.mu2 - mu_sum_closed_form(self.t, self.tau1, self.tau2))


def mu_functions(t: float, tau1: float = 1.0, tau2: float = 1.0,
                 quad_tol: float = 1e-10) -> MuFunctions:
    mu1, mu2 = mu12(t, tau1, tau2, quad_tol)
    _, mb = muAB(t, quad_tol, tau1, tau2)
    _, mbl = muAB_left(t, tau1, tau2, quad_tol)
    # the A-parts coincide with mu1 (right) and mu2 (left)
    return MuFunctions(t, mu1, mu2, mu1, mb, tau1, tau2, mu2, mbl)


# ---------------------------------------------------------------------------
# triangular double integrals

def nested_integral(f, g, a_in: float, a_out: float, b: float,
                    panel: float = _TRI_PANEL, n: int = _TRI_N) -> np.ndarray:
    """int_{a_out}^b f(t) int_{a_in}^t g(s) ds dt for a_in <= a_out.

    ``f`` and ``g`` return arrays of shape (m, N) so m separable pairs share
    the nodes; the result has shape (m,). Each node's inner integral is the
    sum over completed panels plus a Gauss rule on the partial one.
    """
    x, w = gauss_legendre(n)
    n_pan = max(1, int(math.ceil((b - a_in) / panel)))
    edges = np.linspace(a_in, b, n_pan + 1)
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    nodes = (lo[:, None] + width[:, None] * x[None, :]).ravel()
    wts = (width[:, None] * w[None, :]).ravel()
    gv = np.atleast_2d(g(nodes))
    full = (gv.reshape(gv.shape[0], n_pan, n) * w).sum(axis=2) * width
    before = np.concatenate([np.zeros((gv.shape[0], 1)), np.cumsum(full, axis=1)[:, :-1]],
                            axis=1)
    start = np.repeat(lo, n)
    part_len = nodes - start
    sub = (start[:, None] + part_len[:, None] * x[None, :]).ravel()
    gs = np.atleast_2d(g(sub)).reshape(gv.shape[0], nodes.size, n)
    inner = np.repeat(before, n, axis=1) + (gs @ w) * part_len
    keep = nodes >= a_out
    fv = np.atleast_2d(f(nodes[keep]))
    return (fv * inner[:, keep]) @ wts[keep]


def _scaled_args(y, rho, tau1, tau2):
    y = np.asarray(y, dtype=float)
    a1 = (tau1 * y - rho) / tau1 ** (2 / 3)
    a2 = -(tau2 * y + rho) / tau2 ** (2 / 3)
    return airy_eval(a1), airy_eval(a2)


def beta1R_double_integral(rho: float, tau1: float = 1.0, tau2: float = 1.0,
                           T: float = BETA_T) -> float:
    """iint_{0<=s<=t<=T} Ai(t)Ai(s) [Aic(t)Bic(s) - Aic(s)Bic(t)] in the
    slope-rescaled arguments. The Ai(t - rho) factor makes the remainder past
    T smaller than Ai(T - rho) ~ 1e-50.

    Re beta_{1,R} is -2 eps^2 pi^2 |r0|^2 times this. The sign follows from
    u2R^-(t) u2R^+(s) = i(Aic Aic + Bic Bic) - (Aic(t)Bic(s) - Bic(t)Aic(s))
    and is confirmed by the exact quadrature of the defining integral.
    """
    def f(t):
        q1, q2 = _scaled_args(t, rho, tau1, tau2)
        return np.stack([q1.ai * q2.ai, q1.ai * q2.bi])

    def g(s):
        q1, q2 = _scaled_args(s, rho, tau1, tau2)
        return np.stack([q1.ai * q2.bi, q1.ai * q2.ai])

    v = nested_integral(f, g, 0.0, 0.0, T)
    return float(v[0] - v[1])


@dataclass(frozen=True)
class Beta1LParts:
    """Airy-limit pieces of beta_{1,L}: iint_{s<y<0} P(y) Bic(y) Q(s) Aic(s)
    for P, Q in {Ai, Bi}, each including its analytic tail past -T."""

    aa: float
    ab: float
    ba: float
    bb: float
    tail: float

    def combine(self, phase: float) -> float:
        s, c = math.sin(phase), math.cos(phase)
        return 4 * (s * s * self.aa + s * c * (self.ab + self.ba) + c * c * self.bb)


def beta1L_parts(rho: float, tau1: float = 1.0, tau2: float = 1.0,
                 T: float = BETA_T) -> Beta1LParts:
    """The left-side integrand decays only like |y|^(-3/2), so the part past
    -T is added from its oscillation average: with decay rate
    a = sqrt(tau2 |y|) and oscillation rate b = sqrt(tau1 |y|) the averaged
    integrand is c |y|^(-3/2) with c = sqrt(tau2)/(4 pi^2 (tau1 tau2)^(1/6)
    (tau1 + tau2)) for the AA and BB parts and -+ sqrt(tau1)/(same) for AB
    and BA."""
    def f(y):
        q1, q2 = _scaled_args(y, rho, tau1, tau2)
        return np.stack([q1.ai * q2.bi, q1.ai * q2.bi, q1.bi * q2.bi, q1.bi * q2.bi])

    def g(s):
        q1, q2 = _scaled_args(s, rho, tau1, tau2)
        return np.stack([q1.ai * q2.ai, q1.bi * q2.ai, q1.ai * q2.ai, q1.bi * q2.ai])

    # inner integrals start 10 units further out; the Aic factor there is
    # exp(-60) below its value at -T relative to Bic(-T)
    v = nested_integral(f, g, -T - 10.0, -T, 0.0)
    den = 4 * math.pi ** 2 * (tau1 * tau2) ** (1 / 6) * (tau1 + tau2)
    two_over_root = 2 / math.sqrt(T)
    t_diag = math.sqrt(tau2) / den * two_over_root
    t_off = math.sqrt(tau1) / den * two_over_root
    return Beta1LParts(v[0] + t_diag, v[1] - t_off, v[2] + t_off, v[3] + t_diag, t_diag)


# ---------------------------------------------------------------------------
# crossing coefficients

@dataclass(frozen=True)
class CrossingCoeffs:
    alpha_1L: complex
    alpha_2L: complex
    alpha_1R: complex
    alpha_2R: complex
    beta_1L: complex
    beta_2L: complex
    beta_1R: complex
    beta_2R: complex
    b0: float
    rho: complex
    h: float
    r0: complex
    phase: float
    method: str
    details: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def eps(self) -> float:
        return self.h ** (1 / 3)

    def as_dict(self) -> dict:
        names = ("alpha_1L", "alpha_2L", "alpha_1R", "alpha_2R",
                 "beta_1L", "beta_2L", "beta_1R", "beta_2R")
        return {k: getattr(self, k) for k in names}


def b0(coeffs: CrossingCoeffs, mu: MuFunctions) -> float:
    """(1/(2 eps^2)) Re(beta_{1,L} + beta_{1,R}) + pi^2 |r0|^2 g^2 (mu_A mu_B + 2 mu~_A mu_B),
    g = (tau1 tau2)^(-1/6); at unit slopes the last factor is 3 mu_A mu_B."""
    eps2 = coeffs.eps ** 2
    g2 = (mu.tau1 * mu.tau2) ** (-1 / 3)
    r2 = abs(coeffs.r0) ** 2
    return float((coeffs.beta_1L + coeffs.beta_1R).real / (2 * eps2)
                 + math.pi ** 2 * r2 * g2 * (mu.muA * mu.muB + 2 * mu.muA_left * mu.muB))


def quantization_F(coeffs: CrossingCoeffs, mu: MuFunctions, phase: complex) -> complex:
    """F(E, eps) with cos(A/h) = eps^2 F the quantization condition:
    sin(A/h) [b0 + i pi^2 |r0|^2 g^2 (mu_A^2 + 2 mu~_A mu_A + sin^2(A/h) mu~_A^2)].
    At unit slopes this is (b0 + i pi^2 r0^2 (3 + sin^2) mu_A^2) sin. ``phase``
    is A(E)/h and may be complex off the real axis."""
    s = cmath.sin(phase)
    g2 = (mu.tau1 * mu.tau2) ** (-1 / 3)
    r2 = abs(coeffs.r0) ** 2
    bracket = math.pi ** 2 * r2 * g2 * (mu.muA ** 2 + 2 * mu.muA_left * mu.muA
                                        + s * s * mu.muA_left ** 2)
    return s * (b0(coeffs, mu) + 1j * bracket)


def crossing_coeffs_airy(rho: complex, interaction: Interaction, tau1: float,
                         tau2: float, h: float, phase: float,
                         quad_tol: float = 1e-10, T: float = BETA_T) -> CrossingCoeffs:
    """Leading Airy-limit forms; ``phase`` is A(E)/h. Evaluated at Re rho."""
    r0 = complex(interaction.r0_at_zero)
    eps = h ** (1 / 3)
    t = float(np.real(rho))
    mu = mu_functions(t, tau1, tau2, quad_tol)
    g = (tau1 * tau2) ** (-1 / 6)
    s, c = math.sin(phase), math.cos(phase)
    r0c = r0.conjugate()
    r2 = abs(r0) ** 2
    pi = math.pi

    left = -2 * eps * pi * g * (mu.muA_left * s + mu.muB_left * c)
    right = -(eps * pi * g * E_IPI4 / math.sqrt(2)) * (mu.muA - 1j * mu.muB)
    if r0 == 0:
        zero = 0j
        coeffs = CrossingCoeffs(zero, zero, zero, zero, zero, zero, zero, zero,
                                0.0, rho, h, r0, phase, "airy", {"mu": mu})
        return coeffs
    im_b1r = pi ** 2 * r2 * eps ** 2 * g ** 2 * (mu.muA ** 2 + mu.muB ** 2)
    re_b1r = -2 * eps ** 2 * pi ** 2 * r2 * g ** 2 * beta1R_double_integral(t, tau1, tau2, T)
    parts = beta1L_parts(t, tau1, tau2, T)
    b1l = pi ** 2 * eps ** 2 * r2 * g ** 2 * parts.combine(phase)
    out = CrossingCoeffs(
        alpha_1L=r0c * left, alpha_2L=r0 * left,
        alpha_1R=r0c * right, alpha_2R=r0 * right,
        beta_1L=complex(b1l), beta_2L=0j,
        beta_1R=complex(re_b1r, im_b1r), beta_2R=0j,
        b0=0.0, rho=rho, h=h, r0=r0, phase=phase, method="airy",
        details={"mu": mu, "beta1L_parts": parts},
    )
    return _with_b0(out, mu)


def _with_b0(coeffs: CrossingCoeffs, mu: MuFunctions) -> CrossingCoeffs:
    return replace(coeffs, b0=b0(coeffs, mu))


def crossing_coeffs_exact(pair: PotentialPair, interaction: Interaction, E: complex,
                          config: SemiclassicalConfig, sol: ScalarSolutions | None = None,
                          quad_tol: float = 1e-10) -> CrossingCoeffs:
    """All eight coefficients from their defining integrals over the exact
    scalar bases: left integrals over the truncated box, right integrals
    along the distortion path."""
    sol = sol or scalar_solutions(pair, E, config)
    h = config.h
    eps = h ** (1 / 3)
    rho = E / eps ** 2
    phase = float(np.real(action(pair, E))) / h
    V1, V2 = channel(pair, 1)[0], channel(pair, 2)[0]
    b1L, b2L, b1R, b2R = sol.b1L, sol.b2L, sol.b1R, sol.b2R

    def K(basis, V, v):
        return fundamental(basis, v, V, E, h)

    wr_1L = plain_wronskian(b1L.plus, b1L.minus, -1)
    wr_2L = plain_wronskian(b2L.plus, b2L.minus, -1)
    wr_1R = plain_wronskian(b1R.minus, b1R.plus, 0)
    wr_2R = plain_wronskian(b2R.minus, b2R.plus, 0)

    ws_u1L = apply_w_star(interaction, b1L.minus, h)
    w_u2L = apply_w(interaction, b2L.minus, h)
    ws_u1R = apply_w_star(interaction, b1R.minus, h)
    w_u2R = apply_w(interaction, b2R.minus, h)

    alpha_1L = -integrate(b2L.minus, ws_u1L) / (h * wr_2L)
    alpha_2L = -integrate(b1L.minus, w_u2L) / (h * wr_1L)
    alpha_1R = -integrate(b2R.minus, ws_u1R) / (h * wr_2R)
    alpha_2R = -integrate(b1R.minus, w_u2R) / (h * wr_1R)

    r1L = K(b2L, V2, ws_u1L).scale(h)
    r2L = K(b1L, V1, w_u2L).scale(h)
    r1R = K(b2R, V2, ws_u1R).scale(h)
    r2R = K(b1R, V1, w_u2R).scale(h)

    beta_1L = integrate(b1L.minus, apply_w(interaction, r1L, h)) / (h * wr_1L)
    beta_2L = integrate(b2L.minus, apply_w_star(interaction, r2L, h)) / (h * wr_2L)
    beta_1R = integrate(b1R.minus, apply_w(interaction, r1R, h)) / (h * wr_1R)
    beta_2R = integrate(b2R.minus, apply_w_star(interaction, r2R, h)) / (h * wr_2R)

    mu = mu_functions(float(np.real(rho)), pair.tau1, pair.tau2, quad_tol)
    out = CrossingCoeffs(
        alpha_1L, alpha_2L, alpha_1R, alpha_2R,
        beta_1L, beta_2L, beta_1R, beta_2R,
        0.0, rho, h, complex(interaction.r0_at_zero), phase, "exact",
        details={"mu": mu, "r1L": r1L, "r2L": r2L, "r1R": r1R, "r2R": r2R,
                 "solutions": sol},
    )
    return _with_b0(out, mu)


def consistency_residuals(coeffs: CrossingCoeffs) -> dict[str, float]:
    """r_{1,S}(0) = -alpha_{1,S} u_{2,S}^+(0) (and the channel-2 analogue),
    which holds exactly for the fundamental-solution construction."""
    d = coeffs.details
    sol: ScalarSolutions = d["solutions"]
    out = {}
    for name, r, alpha, basis, idx in (
        ("1L", d["r1L"], coeffs.alpha_1L, sol.b2L, -1),
        ("2L", d["r2L"], coeffs.alpha_2L, sol.b1L, -1),
        ("1R", d["r1R"], coeffs.alpha_1R, sol.b2R, 0),
        ("2R", d["r2R"], coeffs.alpha_2R, sol.b1R, 0),
    ):
        lhs = r.f[idx]
        rhs = -alpha * basis.plus.f[idx]
        out[name] = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return out
