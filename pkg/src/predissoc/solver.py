"""
Coupled-system solutions, the crossing Wronskian W0(E) and resonances.

Two independent constructions of the solutions that are decaying on the left
and outgoing on the right:

- ``neumann_solve``: the fixed-point series built from the scalar
  fundamental solutions, w = sum_k M^k (seed) with M_L = h^2 K1L W K2L W*
  and M_R = h^2 K2R W* K1R W;
- ``integrate_coupled``: direct Magnus integration of the four-dimensional
  first-order system from channel-wise WKB data at the box edges.

Both are evaluated at the crossing x = 0, where the 4x4 determinant W0 is
formed with rows (u1, d~u1, u2, d~u2) and columns (1L, 1R, 2L, 2R); this
ordering makes W0 reduce to W~(u1L-, u1R-) W~(u2L-, u2R-) when the
interaction vanishes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .magnus import (IntegrationError, propagate_subspace, step_matrices,
                     subspace_solutions)
from .model import (Grids, Interaction, PotentialPair, SemiclassicalConfig,
                    action, action_data, action_inverse, action_prime, build_grids,
                    turning_points)
from .operators import apply_w, apply_w_star, fundamental
from .scalar import (E_IPI4, Sampled, ScalarSolutions, _ray,
                     _wkb_seed, channel, scalar_solutions)


class DivergenceError(ArithmeticError):
    """The Neumann series does not contract (h too large for this coupling)."""


class ConvergenceError(ArithmeticError):
    """A root search did not converge."""


@dataclass(frozen=True)
class CoupledSolution:
    side: str
    label: int
    z: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    du1: np.ndarray
    du2: np.ndarray
    construction: str
    h: float
    contraction: float = float("nan")
    iterations: int = 0
    log_det: float = 0.0

    @property
    def zero_index(self) -> int:
        return -1 if self.side == "L" else 0

    def at_zero(self) -> np.ndarray:
        """(u1, d~u1, u2, d~u2) at the crossing."""
        k = self.zero_index
        return np.array([self.u1[k], self.du1[k], self.u2[k], self.du2[k]])

    def boundary_ratio(self) -> float:
        """|u| at the far box edge relative to its maximum."""
        k = 0 if self.side == "L" else -1
        mag = np.hypot(np.abs(self.u1), np.abs(self.u2))
        return float(mag[k] / np.max(mag))


def _scaled(h):
    return h ** (2 / 3)


def fundamental_apply(j: int, S: str, v: Sampled, sol: ScalarSolutions,
                      pair: PotentialPair, E: complex, h: float) -> Sampled:
    """K_{j,S}[v] on the side's nodes; see operators.fundamental."""
    return fundamental(sol.basis(j, S), v, channel(pair, j)[0], E, h)


# ---------------------------------------------------------------------------
# Neumann series

def _sup(s: Sampled) -> float:
    return float(np.max(np.abs(s.f)))


class _Ops:
    """h K_{j,S} W and h K_{j,S} W* as maps between sampled functions."""

    def __init__(self, S, sol, pair, inter, E, h):
        self.S, self.sol, self.pair, self.inter, self.E, self.h = S, sol, pair, inter, E, h

    def k1w(self, g: Sampled) -> Sampled:
        return fundamental_apply(1, self.S, apply_w(self.inter, g, self.h),
                                 self.sol, self.pair, self.E, self.h).scale(self.h)

    def k2ws(self, g: Sampled) -> Sampled:
        return fundamental_apply(2, self.S, apply_w_star(self.inter, g, self.h),
                                 self.sol, self.pair, self.E, self.h).scale(self.h)

    def m(self, g: Sampled) -> Sampled:
        if self.S == "L":
            return self.k1w(self.k2ws(g))
        return self.k2ws(self.k1w(g))


def _series(op, seed: Sampled, tol: float, max_iter: int):
    total = seed
    term = seed
    ratios = []
    for it in range(1, max_iter + 1):
        nxt = op(term)
        n_prev, n_next = _sup(term), _sup(nxt)
        if n_prev > 0:
            ratios.append(n_next / n_prev)
        total = total + nxt
        term = nxt
        if n_next <= tol * max(_sup(total), 1e-300):
            return total, ratios, it
        if len(ratios) >= 3 and min(ratios[-3:]) >= 1.0:
            raise DivergenceError("Neumann series is not contracting "
                                  f"(ratios {ratios[-3:]})")
    raise DivergenceError(f"Neumann series did not converge in {max_iter} terms")


def neumann_solve(S: str, j: int, E: complex, config: SemiclassicalConfig,
                  pair: PotentialPair, interaction: Interaction,
                  sol: ScalarSolutions | None = None, tol: float = 1e-12,
                  max_iter: int = 80) -> CoupledSolution:
    """w_{j,S} by the Neumann series; reports the measured contraction factor
    (geometric mean of the successive term ratios)."""
    h = config.h
    sol = sol or scalar_solutions(pair, E, config)
    ops = _Ops(S, sol, pair, interaction, complex(E), h)
    u1 = sol.basis(1, S).minus
    u2 = sol.basis(2, S).minus
    if S == "L":
        if j == 1:
            tot, ratios, it = _series(ops.m, u1, tol, max_iter)
            w1, w2 = tot, ops.k2ws(tot).scale(-1)
        else:
            tot, ratios, it = _series(ops.m, ops.k1w(u2), tol, max_iter)
            w1, w2 = tot.scale(-1), u2 + ops.k2ws(tot)
    else:
        if j == 1:
            tot, ratios, it = _series(ops.m, ops.k2ws(u1), tol, max_iter)
            w1, w2 = u1 + ops.k1w(tot), tot.scale(-1)
        else:
            tot, ratios, it = _series(ops.m, u2, tol, max_iter)
            w1, w2 = ops.k1w(tot).scale(-1), tot
    contraction = float(np.exp(np.mean(np.log(ratios)))) if ratios and min(ratios) > 0 \
        else 0.0
    sc = _scaled(h)
    return CoupledSolution(S, j, u1.z, w1.f, w2.f, sc * w1.d1, sc * w2.d1,
                           "neumann", h, contraction, it)


def test_functions(S: str, h: float, count: int = 10, seed: int = 1234):
    """Seeded bumps on the crossing scale: y = x / eps^2, profile
    exp(-((y - c)/w)^2) cos(k (y - c)) with random c, w, k."""
    rng = np.random.default_rng(seed)
    e2 = h ** (2 / 3)
    sgn = -1.0 if S == "L" else 1.0
    out = []
    for _ in range(count):
        c = sgn * rng.uniform(0.0, 3.0) * e2
        w = rng.uniform(0.5, 2.0) * e2
        k = rng.uniform(0.0, 2.0) / e2
        out.append((c, w, k))
    return out


def _bump(z, c, w, k):
    t = (z - c) / w
    g = np.exp(-t * t)
    dg = -2 * t / w * g
    d2g = (4 * t * t - 2) / (w * w) * g
    co, si = np.cos(k * (z - c)), np.sin(k * (z - c))
    f = g * co
    d1 = dg * co - k * g * si
    d2 = d2g * co - 2 * k * dg * si - k * k * g * co
    return Sampled(z, f, d1, d2)


def contraction_norm(S: str, E: complex, config: SemiclassicalConfig,
                     pair: PotentialPair, interaction: Interaction,
                     sol: ScalarSolutions | None = None, count: int = 10,
                     seed: int = 1234) -> float:
    """max over seeded test functions of |M_S f|_inf / |f|_inf."""
    h = config.h
    sol = sol or scalar_solutions(pair, E, config)
    ops = _Ops(S, sol, pair, interaction, complex(E), h)
    z = sol.basis(1, S).z
    best = 0.0
    for c, w, k in test_functions(S, h, count, seed):
        f = _bump(z, c, w, k)
        best = max(best, _sup(ops.m(f)) / _sup(f))
    return best


# ---------------------------------------------------------------------------
# direct integration of the 4x4 system

def _system(pair: PotentialPair, inter: Interaction, E: complex, h: float):
    """y = (u1, h u1', u2, h u2'); returns A(z) with y' = A y."""
    v1, v2 = pair.v1, pair.v2
    st = inter.star
    r0s, r1s, dr1s = st(inter.r0), st(inter.r1), st(inter.dr1)

    def afun(t):
        a = np.zeros(t.shape + (4, 4), dtype=complex)
        a[..., 0, 1] = 1.0 / h
        a[..., 1, 0] = (v1(t) - E) / h
        a[..., 1, 2] = inter.r0(t)
        a[..., 1, 3] = -1j * inter.r1(t)
        a[..., 2, 3] = 1.0 / h
        a[..., 3, 0] = r0s(t) - 1j * h * dr1s(t)
        a[..., 3, 1] = -1j * r1s(t)
        a[..., 3, 2] = (v2(t) - E) / h
        return a

    return afun


@dataclass
class _SideSeeds:
    z: np.ndarray
    start: int
    seeds: list = field(default_factory=list)


def _seeds(pair, E, h, grids: Grids, turns, S):
    x1s, x1, x2 = turns
    if S == "L":
        z = grids.left.astype(complex)
        ze = complex(z[0])
        a = _wkb_seed(pair, 1, E, x1s, ze, h, "decay", -1 + 0j, split=True)
        b = _wkb_seed(pair, 2, E, x2, ze, h, "decay", -1 + 0j, split=True)
        return _SideSeeds(z, 0, [a, b])
    z = grids.right
    ze = complex(z[-1])
    a = _wkb_seed(pair, 1, E, x1, ze, h, "decay", _ray(z), split=True)
    uo, do, lo = _wkb_seed(pair, 2, E, x2, ze, h, "out", _ray(z), split=True)
    # u2R^- = 2^(-1/2) e^(i pi/4) v_-, v_- = e^(-i pi/4) x outgoing wave
    c = 2 ** -0.5
    return _SideSeeds(z, z.size - 1, [a, (c * uo, c * do, lo)])


def integrate_coupled(S: str, E: complex, config: SemiclassicalConfig,
                      pair: PotentialPair, interaction: Interaction,
                      grids: Grids | None = None, turns=None
                      ) -> tuple[CoupledSolution, CoupledSolution]:
    """Two solutions spanning the decaying (S = "L") or outgoing (S = "R")
    subspace, seeded channel-wise with the scalar bases' WKB data and
    integrated towards the crossing.

    The pair is kept orthonormal at every step: a right-end seed with u1 = 0
    otherwise picks up an exponentially large multiple of the channel-1
    decaying mode and the two columns become numerically parallel. The
    returned pair is normalized to be orthonormal at x = 0; the seeded pair
    equals it times an upper-triangular matrix with positive diagonal whose
    log-determinant is ``log_det``.
    """
    h, E = config.h, complex(E)
    grids = grids or build_grids(pair, config)
    turns = turns or turning_points(pair, E)
    sd = _seeds(pair, E, h, grids, turns, S)
    afun = _system(pair, interaction, E, h)
    y0 = np.zeros((4, 2), dtype=complex)
    (a, da, la), (b, db, lb) = sd.seeds
    y0[0, 0], y0[1, 0] = a, h * da
    y0[2, 1], y0[3, 1] = b, h * db
    z = sd.z if sd.start == 0 else sd.z[::-1]
    mats = step_matrices(afun, z)
    qs, rs, logdet = propagate_subspace(mats, y0)
    logdet += la + lb
    if not np.isfinite(logdet) or not np.all(np.isfinite(qs[-1])):
        raise IntegrationError("coupled integration overflowed")
    y = subspace_solutions(qs, rs)
    if sd.start != 0:
        y = y[::-1]
    sc = h ** (-1 / 3)
    return tuple(CoupledSolution(S, k + 1, sd.z, y[:, 0, k], y[:, 2, k], sc * y[:, 1, k],
                                 sc * y[:, 3, k], "ode", h, log_det=logdet)
                 for k in range(2))


# ---------------------------------------------------------------------------
# the crossing Wronskian

def solution_matrix(w1L, w2L, w1R, w2R) -> np.ndarray:
    return np.column_stack([w1L.at_zero(), w1R.at_zero(), w2L.at_zero(), w2R.at_zero()])


def w0_determinant(w1L, w2L, w1R, w2R) -> complex:
    return complex(np.linalg.det(solution_matrix(w1L, w2L, w1R, w2R)))


def w0_ode(wL: tuple[CoupledSolution, CoupledSolution],
           wR: tuple[CoupledSolution, CoupledSolution]) -> tuple[complex, float]:
    """W0 of the seeded ODE pairs as (mantissa, log scale): the pairs are
    stored orthonormal at 0 and the triangular factors only contribute
    their (positive) determinants."""
    m = w0_determinant(wL[0], wL[1], wR[0], wR[1])
    return m, wL[0].log_det + wR[0].log_det


@dataclass(frozen=True)
class QuantizationState:
    E: complex
    h: float
    W0: complex
    expansion_lhs: complex
    expansion_rhs: complex
    F_value: complex
    phase: complex
    coeffs: object = None

    @property
    def expansion_error(self) -> float:
        return abs(self.expansion_lhs - self.expansion_rhs)


def wronskian_W0(E: complex, solutions, pair: PotentialPair, interaction: Interaction,
                 config: SemiclassicalConfig, coeffs=None) -> QuantizationState:
    """W0 from (w1L, w2L, w1R, w2R) and the crossing expansion

        -i pi^2 e^(-i pi/4) W0 = -4 sqrt2 cos(A/h) + 4 sqrt2 eps^2 F(E, eps)

    with F from the exact crossing coefficients at E (computed unless
    given)."""
    from .coupling import crossing_coeffs_exact, quantization_F

    w1L, w2L, w1R, w2R = solutions
    w0 = w0_determinant(w1L, w2L, w1R, w2R)
    h = config.h
    if coeffs is None:
        coeffs = crossing_coeffs_exact(pair, interaction, E, config)
    phase = complex(action(pair, E)) / h
    F = quantization_F(coeffs, coeffs.details["mu"], phase)
    lhs = -1j * math.pi ** 2 / E_IPI4 * w0
    rhs = -4 * math.sqrt(2) * cmath.cos(phase) + 4 * math.sqrt(2) * h ** (2 / 3) * F
    return QuantizationState(complex(E), h, w0, lhs, rhs, F, phase, coeffs)


# ---------------------------------------------------------------------------
# resonances

class W0Oracle:
    """W0(E) from direct integration on E-independent grids.

    Values are carried as (mantissa, log scale) since the seeded pairs
    span hundreds of orders of magnitude; only ratios W0(E')/W0(E) and the
    normalized determinant det[Q_L, Q_R] (columns of unit length) are
    ever used.
    """

    def __init__(self, pair: PotentialPair, interaction: Interaction,
                 config: SemiclassicalConfig, grids: Grids | None = None):
        self.pair, self.interaction, self.config = pair, interaction, config
        self.grids = grids or build_grids(pair, config)
        self.evaluations = 0

    def pairs(self, E: complex):
        self.evaluations += 1
        wL = integrate_coupled("L", E, self.config, self.pair, self.interaction, self.grids)
        wR = integrate_coupled("R", E, self.config, self.pair, self.interaction, self.grids)
        return wL, wR

    def __call__(self, E: complex) -> tuple[complex, float]:
        return w0_ode(*self.pairs(E))

    def matrix(self, E: complex) -> np.ndarray:
        wL, wR = self.pairs(E)
        return solution_matrix(wL[0], wL[1], wR[0], wR[1])

    def log_derivative(self, E: complex, step: float) -> tuple[complex, complex]:
        """(W0'/W0, normalized W0) by central differences with a real step."""
        m0, l0 = self(E)
        mp, lp = self(E + step)
        mm, lm = self(E - step)
        rp = mp / m0 * math.exp(lp - l0)
        rm = mm / m0 * math.exp(lm - l0)
        return (rp - rm) / (2 * step), m0


@dataclass(frozen=True)
class ResonanceRecord:
    k: int
    lambda_k: float
    e_k: float
    E_asym: complex | None = None
    E_bs: complex | None = None
    E_oracle: complex | None = None
    w0_residual: float = float("nan")
    newton_iters: int = 0
    condition: float = float("nan")
    converged: bool = True
    message: str = ""

    def csv_row(self, h: float) -> dict:
        def parts(z):
            return ("", "") if z is None else (repr(z.real), repr(z.imag))
        ra, ia = parts(self.E_asym)
        rb, ib = parts(self.E_bs)
        ro, io = parts(self.E_oracle)
        return {"h": h, "k": self.k, "lambda_k": self.lambda_k, "e_k": self.e_k,
                "reE_asym": ra, "imE_asym": ia, "reE_bs": rb, "imE_bs": ib,
                "reE_oracle": ro, "imE_oracle": io, "w0_residual": self.w0_residual,
                "newton_iters": self.newton_iters}


CSV_COLUMNS = ("h", "k", "lambda_k", "e_k", "reE_asym", "imE_asym", "reE_bs", "imE_bs",
               "reE_oracle", "imE_oracle", "w0_residual", "newton_iters")


@dataclass(frozen=True)
class Actions:
    """A(0), A'(0), A''(0) of the channel-1 well."""

    a0: float
    a1: float
    a2: float

    @classmethod
    def of(cls, pair: PotentialPair) -> "Actions":
        d = action_data(pair, 0.0)
        return cls(float(np.real(d.action)), d.a_prime0, d.a_second0)

    def spacing(self, h: float) -> float:
        return math.pi * h / self.a1


def lambda_k(k: int, h: float, actions: Actions) -> float:
    return (-2 * actions.a0 + (2 * k + 1) * math.pi * h) / (2 * actions.a1 * h ** (2 / 3))


def k_range(h: float, actions: Actions, c0: float) -> range:
    """All k with lambda_k(h) in [-c0, c0]."""
    lo = math.ceil((2 * actions.a0 - 2 * c0 * actions.a1 * h ** (2 / 3)) / (2 * math.pi * h) - 0.5)
    hi = math.floor((2 * actions.a0 + 2 * c0 * actions.a1 * h ** (2 / 3)) / (2 * math.pi * h) - 0.5)
    return range(max(lo, 0), hi + 1)


def k_nearest(h: float, actions: Actions, target: float = 0.0) -> int:
    """k whose lambda_k(h) is closest to ``target``."""
    x = (2 * actions.a0 + 2 * target * actions.a1 * h ** (2 / 3)) / (2 * math.pi * h) - 0.5
    return int(round(x))


def width_factor(t: float, tau1: float, tau2: float, r0: complex,
                 quad_tol: float = 1e-10) -> float:
    """pi^2 |r0|^2 g^2 (mu1 + mu2)^2, g = (tau1 tau2)^(-1/6); the width is
    this times h^(5/3)/A'(0). At unit slopes (mu1 + mu2)^2 = 2(mu1^2 + mu2^2)
    because mu1 = mu2."""
    from .coupling import mu12

    m1, m2 = mu12(t, tau1, tau2, quad_tol)
    return math.pi ** 2 * abs(r0) ** 2 * (tau1 * tau2) ** (-1 / 3) * (m1 + m2) ** 2


def asym_formulas(k: int, h: float, actions: Actions, mu=None, r0: complex = 1.0,
                  tau1: float = 1.0, tau2: float = 1.0) -> tuple[float, complex]:
    """(lambda_k, E_k) from the closed-form asymptotics:

        Re E = lambda h^(2/3) - lambda^2 A''(0) / (2 A'(0)) h^(4/3)
        Im E = -width_factor(lambda) h^(5/3) / A'(0)

    ``mu`` optionally maps t to (mu1, mu2) (defaults to quadrature)."""
    lam = lambda_k(k, h, actions)
    if mu is None:
        wf = width_factor(lam, tau1, tau2, r0)
    else:
        m1, m2 = mu(lam)
        wf = math.pi ** 2 * abs(r0) ** 2 * (tau1 * tau2) ** (-1 / 3) * (m1 + m2) ** 2
    re = lam * h ** (2 / 3) - lam ** 2 * actions.a2 / (2 * actions.a1) * h ** (4 / 3)
    im = -wf * h ** (5 / 3) / actions.a1
    return lam, complex(re, im)


def action_inverse_complex(pair: PotentialPair, target: complex, guess: float,
                           tol: float = 1e-14, maxit: int = 50) -> complex:
    """E with A(E) = target for complex target, by Newton on the analytic A."""
    E = complex(guess)
    for _ in range(maxit):
        step = (complex(action(pair, E)) - target) / complex(action_prime(pair, E))
        E -= step
        if abs(step) <= tol * max(1.0, abs(E)):
            return E
    raise ConvergenceError("action inverse did not converge")


def bs_solve(k: int, pair: PotentialPair, interaction: Interaction,
             config: SemiclassicalConfig, e_k: float | None = None,
             sol: ScalarSolutions | None = None) -> tuple[complex, complex]:
    """Local inversion of cos(A(E)/h) = eps^2 F(E, eps).

    With A(E)/h = (k + 1/2) pi + delta the condition reads
    -(-1)^k sin(delta) = eps^2 F; F (crossing coefficients and overlaps)
    is frozen at e_k. Returns (E_bs, F).
    """
    from .coupling import crossing_coeffs_exact, quantization_F

    h = config.h
    if e_k is None:
        e_k = action_inverse(pair, (k + 0.5) * math.pi * h)
    cc = crossing_coeffs_exact(pair, interaction, e_k, config, sol)
    F = quantization_F(cc, cc.details["mu"], (k + 0.5) * math.pi)
    delta = cmath.asin(-(-1) ** k * h ** (2 / 3) * F)
    E = action_inverse_complex(pair, h * ((k + 0.5) * math.pi + delta), e_k)
    return E, F


def newton_oracle(oracle: W0Oracle, E0: complex, spacing: float,
                  deflate: tuple = (), maxit: int = 40):
    """Damped Newton on W0 with a central-difference derivative (real step
    h 1e-3); already found roots are divided out. Returns
    (E, iterations, normalized |W0|)."""
    cfg = oracle.config
    step_fd = cfg.h * 1e-3
    E = complex(E0)
    for it in range(1, maxit + 1):
        dlog, m0 = oracle.log_derivative(E, step_fd)
        for r in deflate:
            dlog -= 1.0 / (E - r)
        if dlog == 0 or not cmath.isfinite(dlog):
            raise ConvergenceError("W0 derivative vanished")
        step = -1.0 / dlog
        if abs(step) > 0.3 * spacing:
            step *= 0.3 * spacing / abs(step)
        E += step
        if abs(step) <= cfg.tol_root * spacing:
            m, _ = oracle(E)
            return E, it, abs(m)
    raise ConvergenceError(f"Newton on W0 did not converge from {E0}")


def singular_ratio(matrix: np.ndarray) -> float:
    s = np.linalg.svd(matrix, compute_uv=False)
    return float(s[-1] / s[0])


def find_resonances(ks, pair: PotentialPair, interaction: Interaction,
                    config: SemiclassicalConfig, methods=("oracle", "bs", "asym"),
                    oracle: W0Oracle | None = None) -> list[ResonanceRecord]:
    """Resonances E_k for k in ``ks`` by the requested methods.

    oracle: Newton on the directly integrated W0 seeded at e_k; a root
    closer than a tenth of the level spacing to an earlier one is redone
    with the earlier roots deflated. bs: ``bs_solve``. asym:
    ``asym_formulas``.
    """
    h = config.h
    acts = Actions.of(pair)
    spacing = acts.spacing(h)
    methods = set(methods)
    if "oracle" in methods and oracle is None:
        oracle = W0Oracle(pair, interaction, config)
    found: list[complex] = []
    out = []
    for k in ks:
        lam = lambda_k(k, h, acts)
        e_k = action_inverse(pair, (k + 0.5) * math.pi * h)
        rec = dict(k=k, lambda_k=lam, e_k=e_k)
        if "asym" in methods:
            rec["E_asym"] = asym_formulas(k, h, acts, r0=interaction.r0_at_zero,
                                          tau1=pair.tau1, tau2=pair.tau2)[1]
        if "bs" in methods:
            rec["E_bs"] = bs_solve(k, pair, interaction, config, e_k)[0]
        if "oracle" in methods:
            try:
                E, it, res = newton_oracle(oracle, e_k, spacing)
                if any(abs(E - r) < 0.1 * spacing for r in found):
                    E, it2, res = newton_oracle(oracle, e_k, spacing, tuple(found))
                    it += it2
                    if any(abs(E - r) < 0.1 * spacing for r in found):
                        raise ConvergenceError("duplicate root after deflation")
                found.append(E)
                cond = singular_ratio(oracle.matrix(E))
                msg = "" if config.in_window(E, 1.5) else "root outside D_h(C0)"
                rec.update(E_oracle=E, w0_residual=res, newton_iters=it,
                           condition=cond, message=msg)
            except ConvergenceError as exc:
                rec.update(converged=False, message=str(exc))
        out.append(ResonanceRecord(**rec))
    return out


def cauchy_riemann_residual(oracle: W0Oracle, E: complex, step: float | None = None) -> float:
    """|dW/dy - i dW/dx| / |dW/dx| with fourth-order differences along both
    axes (a second-order stencil leaves (step A'(0)/h)^2 ~ 1e-6 of
    truncation error in the residual)."""
    step = step or oracle.config.h * 1e-3
    m0, l0 = oracle(E)

    def ratio(z):
        m, l = oracle(z)
        return m / m0 * math.exp(l - l0)

    def deriv(u):
        d1 = ratio(E + u * step) - ratio(E - u * step)
        d2 = ratio(E + 2 * u * step) - ratio(E - 2 * u * step)
        return (8 * d1 - d2) / (12 * step)

    dx, dy = deriv(1.0), deriv(1j)
    return abs(dy - 1j * dx) / abs(dx)


@dataclass(frozen=True)
class ConvergenceReport:
    records: list
    hs: list
    re_errors: list
    im_errors: list
    re_slope: float
    im_slope: float

    def rows(self) -> list[dict]:
        return [r.csv_row(h) for h, r in zip(self.hs, self.records)]


def _slope(hs, errs) -> float:
    hs, errs = np.asarray(hs), np.asarray(errs)
    ok = errs > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(hs[ok]), np.log(errs[ok]), 1)[0])


def convergence_study(h_list, pair: PotentialPair, interaction: Interaction,
                      config: SemiclassicalConfig, k_selector=None,
                      lambda_target: float = 0.0) -> ConvergenceReport:
    """Oracle vs closed-form asymptotics along k(h) with lambda_k(h) nearest
    ``lambda_target`` (or ``k_selector(h)``); log-log slopes of the Re and
    Im discrepancies."""
    from dataclasses import replace

    if len(h_list) < 3:
        raise ValueError("convergence_study needs at least three h values")
    acts = Actions.of(pair)
    recs = []
    for h in h_list:
        cfg = replace(config, h=h)
        k = k_selector(h) if k_selector else k_nearest(h, acts, lambda_target)
        (rec,) = find_resonances([k], pair, interaction, cfg, ("oracle", "asym"))
        if not rec.converged:
            raise ConvergenceError(f"h={h}: {rec.message}")
        recs.append(rec)
    re = [abs(r.E_oracle.real - r.E_asym.real) for r in recs]
    im = [abs(r.E_oracle.imag - r.E_asym.imag) for r in recs]
    return ConvergenceReport(recs, list(h_list), re, im, _slope(h_list, re), _slope(h_list, im))
