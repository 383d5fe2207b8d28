"""
Airy functions on the real line and a strip around it.

Evaluation
----------
- |y| <= SWITCH_RADIUS: Taylor re-expansion about integer nodes on the real
  axis. Node values come from the Maclaurin series summed in 60-digit decimal
  arithmetic at import, so the series cancellation for y > 0 costs nothing.
- |y| > SWITCH_RADIUS: the classical asymptotic expansions, truncated at the
  smallest term. At |y| = 8 the truncation error is about 3e-15.

Also provides the inhomogeneous-Airy kernel K(y, z) and the particular
solutions of -u'' + (y - rho) u = f and -u'' - (y + rho) u = f obtained by
integrating f against that kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext
from typing import Callable, Literal

import numpy as np

from .quadrature import adaptive_gauss_legendre

SWITCH_RADIUS = 8.0
STRIP_HALF_WIDTH = 2.0
SCALED_THRESHOLD = 30.0

# Ai(0) and -Ai'(0) to 45 digits.
_AI0 = "0.355028053887817239260063186004183176397979174"
_MAI1 = "0.258819403792806798405183560189203963479091138"

_N_TAYLOR = 64


class AiryDomainError(ValueError):
    """Argument outside the supported strip |Im y| <= STRIP_HALF_WIDTH."""


@dataclass(frozen=True)
class AiryQuad:
    """Ai, Ai', Bi, Bi' at one argument (or an array of arguments).

    When ``log_scale`` is nonzero the values are scaled: ``ai`` and
    ``ai_prime`` carry a factor exp(+log_scale) and ``bi``, ``bi_prime``
    carry exp(-log_scale), with log_scale = (2/3) y^(3/2).
    """

    ai: np.ndarray | complex
    ai_prime: np.ndarray | complex
    bi: np.ndarray | complex
    bi_prime: np.ndarray | complex
    log_scale: np.ndarray | float = 0.0

    def wronskian(self):
        """Ai Bi' - Ai' Bi, which equals 1/pi (scale factors cancel)."""
        return self.ai * self.bi_prime - self.ai_prime * self.bi


@dataclass(frozen=True)
class AiryKernelSample:
    y: complex
    z: complex
    value: complex


# ---------------------------------------------------------------------------
# node tables

def _maclaurin_at(c: int, prec: int = 60):
    """Ai, Ai', Bi, Bi' at the integer c from the Maclaurin series."""
    getcontext().prec = prec
    x = Decimal(c)
    x3 = x * x * x
    tol = Decimal(10) ** (-prec)

    def series(first, ratio):
        total = first
        term = first
        k = 1
        while True:
            term = term * x3 * ratio(k)
            total += term
            if abs(term) < tol and k > 4:
                return total
            k += 1

    f = series(Decimal(1), lambda k: Decimal(1) / ((3 * k - 1) * (3 * k)))
    g = series(x, lambda k: Decimal(1) / ((3 * k) * (3 * k + 1)))
    fp = series(x * x / 2, lambda k: Decimal(1) / ((3 * k) * (3 * k + 2)))
    gp = series(Decimal(1), lambda k: Decimal(1) / ((3 * k - 2) * (3 * k)))
    c1 = Decimal(_AI0)
    c2 = Decimal(_MAI1)
    s3 = Decimal(3).sqrt()
    return (c1 * f - c2 * g, c1 * fp - c2 * gp,
            s3 * (c1 * f + c2 * g), s3 * (c1 * fp + c2 * gp))


def _taylor_coeffs(c: int, u0: Decimal, u1: Decimal, n: int) -> np.ndarray:
    """Taylor coefficients of a solution of u'' = y u about y = c."""
    getcontext().prec = 60
    a = [u0, u1]
    cd = Decimal(c)
    for m in range(0, n - 2):
        prev = a[m - 1] if m >= 1 else Decimal(0)
        a.append((cd * a[m] + prev) / ((m + 1) * (m + 2)))
    return np.array([float(v) for v in a])


def _build_tables():
    nodes = np.arange(-int(SWITCH_RADIUS), int(SWITCH_RADIUS) + 1)
    ai_tab = np.empty((nodes.size, _N_TAYLOR))
    bi_tab = np.empty((nodes.size, _N_TAYLOR))
    for i, c in enumerate(nodes):
        ai, aip, bi, bip = _maclaurin_at(int(c))
        ai_tab[i] = _taylor_coeffs(int(c), ai, aip, _N_TAYLOR)
        bi_tab[i] = _taylor_coeffs(int(c), bi, bip, _N_TAYLOR)
    return nodes, ai_tab, bi_tab


_NODES, _AI_TAB, _BI_TAB = _build_tables()
_DERIV_FACTOR = np.arange(1, _N_TAYLOR)


def _horner(coeffs: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Evaluate sum_k coeffs[:, k] d^k row-wise."""
    out = np.zeros(d.shape, dtype=complex)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        out = out * d + coeffs[:, k]
    return out


def _eval_taylor(y: np.ndarray):
    idx = np.clip(np.rint(y.real).astype(int), _NODES[0], _NODES[-1]) - _NODES[0]
    d = y - _NODES[idx]
    ca = _AI_TAB[idx]
    cb = _BI_TAB[idx]
    ai = _horner(ca, d)
    bi = _horner(cb, d)
    aip = _horner(ca[:, 1:] * _DERIV_FACTOR, d)
    bip = _horner(cb[:, 1:] * _DERIV_FACTOR, d)
    return ai, aip, bi, bip


# ---------------------------------------------------------------------------
# asymptotic region

def _uv_coeffs(n: int):
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        num = 1.0
        for j in range(2 * k + 1, 6 * k, 2):
            num *= j
        u[k] = num / (216.0 ** k * math.factorial(k))
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _uv_coeffs(40)


def _truncated_sum(coef: np.ndarray, alt: bool, zeta: np.ndarray,
                   parity: int | None = None):
    """Sum coef[k] (+-1)^k zeta^-k, stopping at the smallest term.

    With parity given, only k of that parity are kept, with the sign
    (-1)^(k//2); this builds the P, Q, R, S series of the oscillatory forms.
    """
    total = np.zeros(zeta.shape, dtype=complex)
    last = np.full(zeta.shape, np.inf)
    active = np.ones(zeta.shape, dtype=bool)
    inv = 1.0 / zeta
    power = np.ones(zeta.shape, dtype=complex)
    for k in range(coef.size):
        term_mag = abs(coef[k]) * np.abs(power)
        stop = term_mag > last
        active &= ~stop
        if parity is None:
            sign = (-1.0) ** k if alt else 1.0
            contrib = sign * coef[k] * power
        elif k % 2 == parity:
            contrib = (-1.0) ** (k // 2) * coef[k] * power
        else:
            contrib = 0.0
        total = np.where(active, total + contrib, total)
        last = np.where(active, term_mag, last)
        power = power * inv
    return total


def _eval_asym_right(z: np.ndarray, scaled: np.ndarray):
    zeta = (2.0 / 3.0) * z ** 1.5
    z14 = z ** 0.25
    sp = 1.0 / math.sqrt(math.pi)
    zs = np.where(scaled, 0.0, zeta)
    # unscaled Bi past y ~ 104 overflows to inf, which is the honest answer
    with np.errstate(over="ignore", invalid="ignore"):
        ea = np.exp(-zs)
        eb = np.exp(zs)
        ai = 0.5 * sp / z14 * ea * _truncated_sum(_U, True, zeta)
        aip = -0.5 * sp * z14 * ea * _truncated_sum(_V, True, zeta)
        bi = sp / z14 * eb * _truncated_sum(_U, False, zeta)
        bip = sp * z14 * eb * _truncated_sum(_V, False, zeta)
    return ai, aip, bi, bip, np.where(scaled, zeta.real, 0.0)


def _eval_asym_left(y: np.ndarray):
    z = -y
    zeta = (2.0 / 3.0) * z ** 1.5
    z14 = z ** 0.25
    sp = 1.0 / math.sqrt(math.pi)
    p = _truncated_sum(_U, False, zeta, parity=0)
    q = _truncated_sum(_U, False, zeta, parity=1)
    r = _truncated_sum(_V, False, zeta, parity=0)
    s = _truncated_sum(_V, False, zeta, parity=1)
    ph = zeta - 0.25 * math.pi
    c, sn = np.cos(ph), np.sin(ph)
    ai = sp / z14 * (c * p + sn * q)
    bi = sp / z14 * (-sn * p + c * q)
    aip = sp * z14 * (sn * r - c * s)
    bip = sp * z14 * (c * r + sn * s)
    return ai, aip, bi, bip


# ---------------------------------------------------------------------------
# public API

def airy_eval(y, scaled: bool = False) -> AiryQuad:
    """Ai, Ai', Bi, Bi' for real or strip-complex arguments.

    Parameters
    ----------
    y : scalar or array
        Arguments with |Im y| <= 2.
    scaled : bool
        If true, arguments with Re y > 30 come back scaled by
        exp(-+(2/3) y^(3/2)) and the exponent is reported in ``log_scale``.
    """
    arr = np.asarray(y, dtype=complex)
    scalar = arr.ndim == 0
    yv = np.atleast_1d(arr).ravel()
    if np.any(np.abs(yv.imag) > STRIP_HALF_WIDTH + 1e-12):
        raise AiryDomainError("airy_eval supports |Im y| <= %g" % STRIP_HALF_WIDTH)

    ai = np.empty(yv.shape, dtype=complex)
    aip = np.empty_like(ai)
    bi = np.empty_like(ai)
    bip = np.empty_like(ai)
    logs = np.zeros(yv.shape)

    inner = np.abs(yv) <= SWITCH_RADIUS
    right = ~inner & (yv.real > 0)
    left = ~inner & (yv.real <= 0)
    if inner.any():
        ai[inner], aip[inner], bi[inner], bip[inner] = _eval_taylor(yv[inner])
    if right.any():
        zr = yv[right]
        sc = np.full(zr.shape, False) if not scaled else zr.real > SCALED_THRESHOLD
        ai[right], aip[right], bi[right], bip[right], logs[right] = \
            _eval_asym_right(zr, sc)
    if left.any():
        ai[left], aip[left], bi[left], bip[left] = _eval_asym_left(yv[left])

    if np.all(yv.imag == 0):
        ai, aip, bi, bip = ai.real, aip.real, bi.real, bip.real
    shape = arr.shape
    if scalar:
        return AiryQuad(ai[0], aip[0], bi[0], bip[0], float(logs[0]))
    return AiryQuad(ai.reshape(shape), aip.reshape(shape), bi.reshape(shape),
                    bip.reshape(shape), logs.reshape(shape))


def ai(y):
    return airy_eval(y).ai


def bi(y):
    return airy_eval(y).bi


def ai_check(y):
    """Reflected Airy function Ai(-y)."""
    return airy_eval(-np.asarray(y)).ai


def bi_check(y):
    """Reflected Airy function Bi(-y)."""
    return airy_eval(-np.asarray(y)).bi


def airy_outgoing(y):
    """Return (Ai - iBi, Ai + iBi): outgoing and incoming as y -> -inf."""
    q = airy_eval(y)
    return q.ai - 1j * q.bi, q.ai + 1j * q.bi


def kernel_value(y, z):
    """K(y, z) = -pi (Ai(y) Bi(z) - Ai(z) Bi(y)), vectorised."""
    qy = airy_eval(y)
    qz = airy_eval(z)
    return -math.pi * (qy.ai * qz.bi - qz.ai * qy.bi)


def airy_kernel(y, z) -> AiryKernelSample:
    return AiryKernelSample(y, z, kernel_value(y, z))


def inhom_airy_solve(f: Callable[[np.ndarray], np.ndarray], grid,
                     rho: complex = 0.0,
                     variant: Literal["plus", "minus"] = "plus",
                     tol: float = 1e-10) -> np.ndarray:
    """Particular solution of an inhomogeneous Airy equation on ``grid``.

    variant "plus" returns u(y) = int_y^0 K(y - rho, z - rho) f(z) dz, which
    solves -u'' + (y - rho) u = f. Variant "minus" returns
    u(y) = int_0^y K(-y - rho, -z - rho) f(z) dz, solving
    -u'' - (y + rho) u = f.

    Both reduce to two running integrals of f against Ai and Bi, done with
    adaptive Gauss-Legendre panels between consecutive grid points.
    """
    y = np.asarray(grid, dtype=float)
    if not (y.min() <= 0.0 <= y.max()):
        raise ValueError("the grid must contain the anchor point 0")
    sgn = 1.0 if variant == "plus" else -1.0
    if variant not in ("plus", "minus"):
        raise ValueError("variant must be 'plus' or 'minus'")

    def arg(t):
        return sgn * np.asarray(t) - rho

    def fa(t):
        return airy_eval(arg(t)).ai * f(t)

    def fb(t):
        return airy_eval(arg(t)).bi * f(t)

    order = np.argsort(y)
    ys = y[order]
    pts = np.unique(np.concatenate([ys, [0.0]]))
    k0 = int(np.searchsorted(pts, 0.0))
    ia = np.zeros(pts.size, dtype=complex)
    ib = np.zeros(pts.size, dtype=complex)
    for k in range(k0 + 1, pts.size):
        ia[k] = ia[k - 1] + adaptive_gauss_legendre(fa, pts[k - 1], pts[k], tol)
        ib[k] = ib[k - 1] + adaptive_gauss_legendre(fb, pts[k - 1], pts[k], tol)
    for k in range(k0 - 1, -1, -1):
        ia[k] = ia[k + 1] - adaptive_gauss_legendre(fa, pts[k], pts[k + 1], tol)
        ib[k] = ib[k + 1] - adaptive_gauss_legendre(fb, pts[k], pts[k + 1], tol)
    # ia(y) = int_0^y Ai(arg) f ; likewise ib
    ia_y = np.interp(ys, pts, ia.real) + 1j * np.interp(ys, pts, ia.imag)
    ib_y = np.interp(ys, pts, ib.real) + 1j * np.interp(ys, pts, ib.imag)
    q = airy_eval(arg(ys))
    if variant == "plus":
        # int_y^0 = -int_0^y
        u = -math.pi * (q.ai * (-ib_y) - q.bi * (-ia_y))
    else:
        u = -math.pi * (q.ai * ib_y - q.bi * ia_y)
    out = np.empty_like(u)
    out[order] = u
    return out
