"""Gauss-Legendre rules: fixed, composite and adaptive."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def fixed_gauss_legendre(f, a, b, n: int = 16):
    """n-point rule on the straight segment [a, b] (a, b may be complex)."""
    x, w = gauss_legendre(n)
    t = a + (b - a) * x
    return (b - a) * np.dot(w, f(t))


def adaptive_gauss_legendre(f, a, b, tol: float = 1e-10, n: int = 10,
                            max_depth: int = 40):
    """Adaptive panel splitting with an n-point rule per panel.

    A panel is accepted when the rule on it agrees with the sum over its two
    halves to within the share of ``tol`` proportional to its length.
    """
    total_len = abs(b - a)
    if total_len == 0:
        return 0.0
    result = 0.0
    stack = [(a, b, fixed_gauss_legendre(f, a, b, n), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = fixed_gauss_legendre(f, lo, mid, n)
        right = fixed_gauss_legendre(f, mid, hi, n)
        share = tol * abs(hi - lo) / total_len
        if abs(left + right - whole) <= max(share, 1e-15 * abs(whole)) \
                or depth >= max_depth:
            result += left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return result


def sqrt_endpoint_segment(f, a, b, n: int = 48, ends: str = "both"):
    """Integral of f over the segment [a, b] with sqrt-type endpoint behaviour.

    The substitution w = s^2 at a singular end removes an inverse square root
    or square-root cusp there. ``ends`` selects "left", "right" or "both".
    """
    x, w = gauss_legendre(n)
    d = b - a
    if ends == "left":
        s = x
        t = a + d * s * s
        return d * np.dot(w * 2.0 * s, f(t))
    if ends == "right":
        s = x
        t = b - d * s * s
        return d * np.dot(w * 2.0 * s, f(t))
    half = sqrt_endpoint_segment(f, a, 0.5 * (a + b), n, "left")
    return half + sqrt_endpoint_segment(f, b, 0.5 * (a + b), n, "left") * -1.0
