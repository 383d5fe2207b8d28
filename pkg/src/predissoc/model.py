"""
Potentials, semiclassical configuration, turning points, the well action
A(E) and the complex distortion path used on the right half-line.

Reference family
----------------
    V1(x) = tau1 * x (x - x_star) / (|x_star| (1 + x^2))
    V2(x) = -tau2 * x / sqrt(1 + x^2)

V1 is bounded, vanishes at x_star < 0 and at 0, has slope tau1 at 0 and
tends to tau1/|x_star| at both infinities. V2 is positive on the left,
negative on the right, with slope -tau2 at the crossing. The quadratic
family V1(x) = x (x - x_star) (with the same V2) is kept for action tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .quadrature import gauss_legendre, sqrt_endpoint_segment

Fn = Callable[[np.ndarray], np.ndarray]


class ModelError(ValueError):
    pass


class RootError(ModelError):
    pass


class PathError(ModelError):
    pass


# ---------------------------------------------------------------------------
# potentials

@dataclass(frozen=True)
class PotentialPair:
    """Two analytic potentials crossing transversally at x = 0."""

    family: str
    v1: Fn
    dv1: Fn
    d2v1: Fn
    v2: Fn
    dv2: Fn
    d2v2: Fn
    tau1: float
    tau2: float
    tau0: float
    x_star: float
    delta0: float
    v1_limits: tuple[float, float]
    v2_limits: tuple[float, float]


def _reference_v1(x_star: float, tau1: float):
    c = tau1 / abs(x_star)

    def v(x):
        x = np.asarray(x)
        return c * x * (x - x_star) / (1.0 + x * x)

    def dv(x):
        x = np.asarray(x)
        d = 1.0 + x * x
        num = (2 * x - x_star) * d - x * (x - x_star) * 2 * x
        return c * num / d ** 2

    def d2v(x):
        x = np.asarray(x)
        # numerator of v: n = x^2 - x_star x, v = c n / d with d = 1 + x^2
        n = x * x - x_star * x
        n1 = 2 * x - x_star
        d = 1.0 + x * x
        d1 = 2 * x
        return c * (2.0 / d - 2 * n1 * d1 / d ** 2 - n * 2.0 / d ** 2
                    + 2 * n * d1 ** 2 / d ** 3)

    return v, dv, d2v


def _reference_v2(tau2: float):
    def v(x):
        x = np.asarray(x)
        return -tau2 * x / np.sqrt(1.0 + x * x)

    def dv(x):
        x = np.asarray(x)
        return -tau2 * (1.0 + x * x) ** -1.5

    def d2v(x):
        x = np.asarray(x)
        return 3.0 * tau2 * x * (1.0 + x * x) ** -2.5

    return v, dv, d2v


def make_reference_pair(x_star: float = -1.0, tau1: float = 1.0,
                        tau2: float = 1.0, validate: bool = True) -> PotentialPair:
    """Bounded rational/algebraic pair with the prescribed crossing data."""
    if not x_star < 0:
        raise ModelError("x_star must be negative")
    if tau1 <= 0 or tau2 <= 0:
        raise ModelError("tau1 and tau2 must be positive")
    v1, dv1, d2v1 = _reference_v1(x_star, tau1)
    v2, dv2, d2v2 = _reference_v2(tau2)
    lim = tau1 / abs(x_star)
    pair = PotentialPair(
        family="reference", v1=v1, dv1=dv1, d2v1=d2v1, v2=v2, dv2=dv2,
        d2v2=d2v2, tau1=tau1, tau2=tau2, tau0=float(-dv1(x_star)),
        x_star=x_star, delta0=1.0, v1_limits=(lim, lim),
        v2_limits=(tau2, -tau2))
    if validate:
        report = validate_assumptions(pair, np.linspace(-12.0, 12.0, 4001))
        if not report.ok:
            raise ModelError("reference pair violates: " + ", ".join(report.failures()))
    return pair


def make_quadratic_pair(x_star: float = -1.0, tau2: float = 1.0) -> PotentialPair:
    """Unbounded test well V1 = x (x - x_star); only for action checks."""

    def v1(x):
        x = np.asarray(x)
        return x * (x - x_star)

    def dv1(x):
        return 2 * np.asarray(x) - x_star

    def d2v1(x):
        return 2.0 + 0 * np.asarray(x)

    v2, dv2, d2v2 = _reference_v2(tau2)
    return PotentialPair(
        family="quadratic", v1=v1, dv1=dv1, d2v1=d2v1, v2=v2, dv2=dv2,
        d2v2=d2v2, tau1=-x_star, tau2=tau2, tau0=-x_star, x_star=x_star,
        delta0=math.inf, v1_limits=(math.inf, math.inf), v2_limits=(tau2, -tau2))


@dataclass
class AssumptionReport:
    clauses: dict[str, bool] = field(default_factory=dict)
    tau0: float = math.nan
    tau1: float = math.nan
    tau2: float = math.nan

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.clauses.items() if not v]


def validate_assumptions(pair: PotentialPair, grid) -> AssumptionReport:
    """Check the sign pattern and limit conditions on a sample grid.

    The slopes are measured with centred differences, independent of the
    analytic derivatives carried by the pair.
    """
    x = np.asarray(grid, dtype=float)
    xs = pair.x_star
    v1 = np.asarray(pair.v1(x)).real
    v2 = np.asarray(pair.v2(x)).real
    tol = 1e-12
    left = x < xs - 1e-9
    well = (x > xs + 1e-9) & (x < -1e-9)
    right = x > 1e-9
    rep = AssumptionReport()
    rep.clauses["signs on (-inf, x*)"] = bool(np.all(v1[left] > 0) and np.all(v2[left] > 0))
    rep.clauses["signs on (x*, 0)"] = bool(np.all(v1[well] < 0) and np.all(v2[well] > 0))
    rep.clauses["signs on (0, inf)"] = bool(np.all(v2[right] < 0) and np.all(v1[right] > 0))
    rep.clauses["V1(-inf) > 0"] = bool(v1[0] > 0)
    rep.clauses["V1(+inf) > 0"] = bool(v1[-1] > 0)
    rep.clauses["V2(-inf) > 0"] = bool(v2[0] > 0)
    rep.clauses["V2(+inf) < 0"] = bool(v2[-1] < 0)
    rep.clauses["crossing at 0"] = bool(abs(pair.v1(0.0)) < tol and abs(pair.v2(0.0)) < tol)
    d = 1e-5
    rep.tau1 = float(np.real(pair.v1(d) - pair.v1(-d)) / (2 * d))
    rep.tau2 = float(-np.real(pair.v2(d) - pair.v2(-d)) / (2 * d))
    rep.tau0 = float(-np.real(pair.v1(xs + d) - pair.v1(xs - d)) / (2 * d))
    rep.clauses["slope signs"] = rep.tau0 > 0 and rep.tau1 > 0 and rep.tau2 > 0
    return rep


# ---------------------------------------------------------------------------
# interaction

def _const(c):
    return lambda x: c + 0 * np.asarray(x)


@dataclass(frozen=True)
class Interaction:
    """Coefficients of W = r0(x) + r1(x) h D_x, with D_x = -i d/dx.

    The ``*_star`` callables are the analytic reflections
    x -> conj(r(conj(x))), which is what the formal adjoint uses off the
    real axis.
    """

    r0: Fn
    dr0: Fn
    r1: Fn
    dr1: Fn
    d2r1: Fn
    r0_at_zero: complex
    decoupled_allowed: bool = False

    @classmethod
    def constant(cls, r0: complex = 1.0, r1: complex = 0.0,
                 allow_decoupled: bool = True) -> "Interaction":
        if r0 == 0 and not allow_decoupled:
            raise ModelError("r0(0) = 0 needs allow_decoupled=True")
        z = _const(0.0)
        return cls(_const(r0), z, _const(r1), z, z, complex(r0),
                   decoupled_allowed=allow_decoupled)

    @property
    def is_zero(self) -> bool:
        probe = np.linspace(-3, 3, 7)
        return bool(np.all(self.r0(probe) == 0) and np.all(self.r1(probe) == 0))

    def star(self, fn: Fn) -> Fn:
        return lambda x: np.conj(fn(np.conj(np.asarray(x, dtype=complex))))


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class SemiclassicalConfig:
    """Numerical and semiclassical parameters; epsilon = h^(1/3)."""

    h: float
    theta: float = 0.5
    c0: float = 1.0
    x_infinity: float = 0.5
    x_left: float | None = None
    x_right: float | None = None
    grid_density: float = 60.0
    decay_margin: float = 40.0
    extent: float = 3.5
    max_exponent: float = 600.0
    tol_ode: float = 1e-10
    tol_quad: float = 1e-10
    tol_root: float = 1e-10

    def __post_init__(self):
        if self.h <= 0:
            raise ModelError("h must be positive")
        if self.theta <= 0 or self.theta >= 1:
            raise ModelError("theta must lie in (0, 1)")
        for name in ("tol_ode", "tol_quad", "tol_root", "grid_density", "c0"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be positive")

    @property
    def epsilon(self) -> float:
        return self.h ** (1.0 / 3.0)

    def in_window(self, E: complex, enlarge: float = 1.0) -> bool:
        c = self.c0 * enlarge
        return (abs(E.real) <= c * self.h ** (2 / 3)
                and -c * self.h <= E.imag <= 1e-14)


# ---------------------------------------------------------------------------
# turning points and action

def _newton(f, df, x0, tol, maxit=60):
    x = complex(x0)
    for _ in range(maxit):
        d = df(x)
        if d == 0:
            raise RootError(f"zero derivative in Newton from {x0}")
        step = f(x) / d
        x -= step
        if abs(step) <= tol * (1 + abs(x)):
            if abs(f(x)) <= max(tol, 1e-13):
                return x
    raise RootError(f"Newton did not converge from {x0}")


def turning_points(pair: PotentialPair, E: complex, tol: float = 1e-13):
    """Roots of V1 = E near x_star and near 0, and of V2 = E near 0."""
    E = complex(E)
    f1 = lambda x: complex(pair.v1(x)) - E
    d1 = lambda x: complex(pair.dv1(x))
    f2 = lambda x: complex(pair.v2(x)) - E
    d2 = lambda x: complex(pair.dv2(x))
    x1s = _newton(f1, d1, pair.x_star - E / pair.tau0, tol)
    x1 = _newton(f1, d1, E / pair.tau1, tol)
    x2 = _newton(f2, d2, -E / pair.tau2, tol)
    for val in (x1s, x1, x2):
        if not np.isfinite(val):
            raise RootError("turning point diverged")
    return x1s, x1, x2


@dataclass(frozen=True)
class ActionData:
    x1_star: complex
    x1: complex
    x2: complex
    action: complex
    a_prime0: float
    a_second0: float


def _well_integral(pair, E, kernel, n=64):
    x1s, x1, _ = turning_points(pair, E)
    return sqrt_endpoint_segment(lambda t: kernel(E - pair.v1(t)), x1s, x1, n, "both")


def action(pair: PotentialPair, E: complex, n: int = 64) -> complex:
    """A(E), the phase integral of sqrt(E - V1) across the well."""
    val = _well_integral(pair, complex(E), np.sqrt, n)
    return val.real if np.imag(E) == 0 else val


def action_prime(pair: PotentialPair, E: complex, n: int = 64) -> complex:
    """dA/dE = int 1 / (2 sqrt(E - V1)) across the well."""
    val = _well_integral(pair, complex(E), lambda q: 0.5 / np.sqrt(q), n)
    return val.real if np.imag(E) == 0 else val


def action_derivs(pair: PotentialPair, radius: float = 1e-2, points: int = 16):
    """A'(0) by direct quadrature, A''(0) by a Cauchy circle of 16 points.

    The circle formula differentiates the analytic function A(E) with
    truncation error of order radius^16, so the usual step-size trade-off of
    real finite differences does not arise.
    """
    xs = pair.x_star
    a1 = sqrt_endpoint_segment(lambda t: 0.5 / np.sqrt(np.abs(pair.v1(t))),
                               complex(xs), 0j, 64, "both").real
    radius = min(radius, 0.05 * pair.tau1 * abs(xs))
    w = np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([action(pair, radius * wk) for wk in w])
    a2 = (2.0 / (points * radius ** 2) * np.sum(vals * w ** -2)).real
    return float(a1), float(a2)


def action_data(pair: PotentialPair, E: complex) -> ActionData:
    x1s, x1, x2 = turning_points(pair, E)
    a1, a2 = action_derivs(pair)
    return ActionData(x1s, x1, x2, action(pair, E), a1, a2)


def action_inverse(pair: PotentialPair, target: float, span: float | None = None) -> float:
    """Real E with A(E) = target, bracketing around the crossing energy."""
    a1, _ = action_derivs(pair)
    a0 = action(pair, 0.0)
    guess = (target - a0) / a1
    span = span or max(4 * abs(guess), 0.05)
    lo, hi = guess - span, guess + span
    floor = float(np.min(pair.v1(np.linspace(pair.x_star, 0.0, 401))))
    lo = max(lo, 0.5 * floor)
    if math.isfinite(pair.v1_limits[0]):
        # stay below the top of the left barrier so x1*(E) exists
        barrier = float(np.max(pair.v1(np.linspace(pair.x_star - 40.0, pair.x_star, 4001))))
        hi = min(hi, 0.5 * barrier)
    return brentq(lambda e: action(pair, e) - target, lo, hi, xtol=1e-15, rtol=1e-15)


# ---------------------------------------------------------------------------
# grids and the distortion path

def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t^2)."""
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-100) ** 2), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.maximum(1 - t, 1e-100) ** 2), 0.0)
    return a / (a + b)


def distortion_profile(x, x_inf: float):
    """f with f = 0 on [0, x_inf], f(x) = x for x >= 2 x_inf."""
    x = np.asarray(x, dtype=float)
    return x * _smooth_step((x - x_inf) / x_inf)


@dataclass(frozen=True)
class DistortionPath:
    s: np.ndarray          # real parameter
    z: np.ndarray          # F_theta(s) = s + i theta f(s)
    theta: float
    x_infinity: float
    functional_min: float  # min over samples of the phase functional / h
    measured_c: float


def local_wavenumber(pair: PotentialPair, x, h: float):
    """Local wavenumber used for grid spacing: the faster channel, floored at
    the Airy scale h^(-2/3) near turning points."""
    k1 = np.sqrt(np.abs(pair.v1(x)))
    k2 = np.sqrt(np.abs(pair.v2(x)))
    floor = 2 * max(pair.tau1, pair.tau2, pair.tau0) ** (1 / 3) * h ** (1 / 3)
    return np.maximum(np.maximum(k1, k2), floor) / h


def march_nodes(pair, h, density, start, stop, direction, zfun=None):
    nodes = [start]
    x = start
    while (x - stop) * direction < 0:
        step = 2 * np.pi / density
        if zfun is None:
            step /= float(local_wavenumber(pair, x, h))
        else:
            # spacing is measured along the complex path, so divide by |dz/ds|
            speed = abs(zfun(x + 1e-6) - zfun(x - 1e-6)) / 2e-6
            step /= float(local_wavenumber(pair, zfun(x), h).real) * speed
        x = x + direction * step
        nodes.append(x)
    nodes[-1] = stop
    if len(nodes) > 2 and abs(nodes[-1] - nodes[-2]) < 0.25 * abs(nodes[-2] - nodes[-3]):
        del nodes[-2]
    return np.array(nodes)


def _pick_extent(coord, ph1, ph2, ok, config):
    """Smallest admissible extent reaching ``config.extent``, pulled back if
    either exponent would exceed ``max_exponent`` but never below the point
    where both decay margins (and ``ok``) hold."""
    good = ok & (ph1 >= config.decay_margin) & (ph2 >= config.decay_margin)
    bad = np.nonzero(~good)[0]
    i_min = bad[-1] + 1 if bad.size else 0
    if i_min >= coord.size:
        raise PathError("truncation margins not reached; enlarge the box")
    i_geo = int(np.searchsorted(np.abs(coord), config.extent))
    over = np.nonzero((ph1 > config.max_exponent) | (ph2 > config.max_exponent))[0]
    i_cap = over[0] - 1 if over.size else coord.size - 1
    return coord[max(i_min, min(i_geo, i_cap))]


def left_truncation(pair: PotentialPair, config: SemiclassicalConfig) -> float:
    """Left end of the box.

    Both potentials must sit above half their limits and both decaying
    solutions must be down by exp(-decay_margin) from their turning points.
    Beyond that the box is widened to ``extent`` unless the growth exponent
    would exceed ``max_exponent``. Energy-independent (evaluated at E = 0).
    """
    if config.x_left is not None:
        return config.x_left
    xs = np.linspace(0.0, -40.0, 40001)
    v1 = pair.v1(xs).real
    v2 = pair.v2(xs).real
    ok = (v1 >= 0.5 * pair.v1_limits[0]) & (v2 >= 0.5 * pair.v2_limits[0])
    dx = xs[0] - xs[1]
    ph1 = np.cumsum(np.sqrt(np.maximum(v1, 0)) * (xs <= pair.x_star)) * dx / config.h
    ph2 = np.cumsum(np.sqrt(np.maximum(v2, 0))) * dx / config.h
    return float(_pick_extent(xs, ph1, ph2, ok, config))


def make_distortion(config: SemiclassicalConfig, pair: PotentialPair,
                    check_energies: int = 10) -> DistortionPath:
    """Right-hand path s -> s + i theta f(s), truncated by the same rule as
    the left box (channel 1 decays, channel 2 is outgoing and decays along
    the path).

    The phase functional Im int_{x_inf}^{F(s)} sqrt(E - V2) dt is checked on
    the edges of the energy window; its worst value divided by h is reported
    as the measured constant.
    """
    h, th, xi = config.h, config.theta, config.x_infinity
    zf = lambda s: s + 1j * th * distortion_profile(s, xi)
    if config.x_right is not None:
        s_end = config.x_right
    else:
        s_try = np.linspace(0.0, 40.0, 40001)
        zt = zf(s_try)
        dz = np.diff(zt)
        zm = 0.5 * (zt[1:] + zt[:-1])
        ph2 = np.concatenate([[0], np.cumsum(np.sqrt(-pair.v2(zm) + 0j) * dz)]).imag / h
        ph1 = np.concatenate([[0], np.cumsum(np.sqrt(pair.v1(zm) + 0j) * dz)]).real / h
        s_end = float(_pick_extent(s_try, ph1, ph2, s_try >= 2 * xi, config))
    s = march_nodes(pair, h, config.grid_density, 0.0, s_end, +1, zf)
    z = zf(s)

    # phase functional on the window boundary
    hh = h ** (2 / 3) * config.c0
    re = np.linspace(-hh, hh, max(2, check_energies // 2))
    energies = np.concatenate([re + 0j, re - 1j * config.c0 * h])
    x_gl, w_gl = gauss_legendre(8)
    k0 = int(np.searchsorted(s, xi))
    worst = np.inf
    for E in energies:
        seg = []
        for a, b in zip(z[k0:-1], z[k0 + 1:]):
            t = a + (b - a) * x_gl
            seg.append((b - a) * np.dot(w_gl, np.sqrt(E - pair.v2(t))))
        vals = np.concatenate([[0.0], np.cumsum(seg)]).imag
        worst = min(worst, float(vals.min()))
    fmin = worst / h
    return DistortionPath(s=s, z=z, theta=th, x_infinity=xi,
                          functional_min=fmin, measured_c=max(0.0, -fmin))


@dataclass(frozen=True)
class Grids:
    """Left nodes on [x_left, 0] (ascending, last node 0) and right path
    nodes starting at 0."""

    left: np.ndarray
    right: np.ndarray
    path: DistortionPath


def build_grids(pair: PotentialPair, config: SemiclassicalConfig) -> Grids:
    xl = left_truncation(pair, config)
    left = march_nodes(pair, config.h, config.grid_density, 0.0, xl, -1)[::-1]
    path = make_distortion(config, pair)
    return Grids(left=left.astype(float), right=path.z.astype(complex), path=path)


# ---------------------------------------------------------------------------
# flat key=value configuration

CONFIG_KEYS = {
    # SemiclassicalConfig
    "h": float, "theta": float, "c0": float, "x_infinity": float,
    "x_left": float, "x_right": float, "grid_density": float,
    "decay_margin": float, "extent": float, "max_exponent": float,
    "tol_ode": float, "tol_quad": float, "tol_root": float,
    # potential pair: family is "reference" or "quadratic"
    "family": str, "x_star": float, "tau1": float, "tau2": float,
    # constant interaction W = r0 + r1 h D_x
    "r0": complex, "r1": complex,
}
"""Documented configuration keys and their types. Command-specific keys
(k_min, k_max, t_min, ...) are declared by the CLI and parsed the same way.
Lines are ``key = value``; ``#`` starts a comment."""

_CONFIG_FIELDS = ("h", "theta", "c0", "x_infinity", "x_left", "x_right", "grid_density",
                  "decay_margin", "extent", "max_exponent", "tol_ode", "tol_quad",
                  "tol_root")


def parse_key_values(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ModelError(f"config line {n}: empty key")
        out[key] = value
    return out


def convert_value(key: str, value: str, kind):
    try:
        if kind is complex:
            return complex(value.replace(" ", ""))
        return kind(value)
    except ValueError as exc:
        raise ModelError(f"config key {key}: cannot read {value!r}") from exc


def semiclassical_config(values: dict) -> SemiclassicalConfig:
    kw = {k: values[k] for k in _CONFIG_FIELDS if k in values}
    if "h" not in kw:
        raise ModelError("config needs h")
    return SemiclassicalConfig(**kw)


def potential_pair(values: dict) -> PotentialPair:
    family = values.get("family", "reference")
    x_star = values.get("x_star", -1.0)
    tau2 = values.get("tau2", 1.0)
    if family == "reference":
        return make_reference_pair(x_star, values.get("tau1", 1.0), tau2)
    if family == "quadratic":
        return make_quadratic_pair(x_star, tau2)
    raise ModelError(f"unknown potential family {family!r}")


def interaction(values: dict) -> Interaction:
    return Interaction.constant(values.get("r0", 1.0), values.get("r1", 0.0))
