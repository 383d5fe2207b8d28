"""Command-line entry point: ``python3 -m predissoc <command> [options]``.

Every command reads an optional flat ``key = value`` file (``--config``),
applies ``--set key=value`` overrides and writes one CSV (``--out``, default
stdout). Exit codes: 0 success, 1 numeric acceptance failure, 2 usage or
configuration error, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import airy
from .coupling import mu_functions, mu_sum_closed_form
from .model import (CONFIG_KEYS, ModelError, PotentialPair, SemiclassicalConfig,
                    convert_value, interaction, parse_key_values, potential_pair,
                    semiclassical_config)
from .scalar import wronskian_table
from .solver import (CSV_COLUMNS, Actions, ConvergenceError, bs_solve, convergence_study,
                     find_resonances, k_range, lambda_k)

log = logging.getLogger("predissoc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3

COMMAND_KEYS = {
    "airy_samples": int, "airy_range": float, "airy_tol": float, "airy_known_tol": float,
    "t_min": float, "t_max": float, "t_step": float, "mu_tol": float,
    "energy": complex, "k_min": int, "k_max": int, "method": str,
    "h_list": str, "lambda_target": float, "re_slope_min": float,
}

DEFAULTS = {
    "h": 0.01, "airy_samples": 10_000, "airy_range": 30.0, "airy_tol": 1e-10,
    "airy_known_tol": 1e-12, "t_min": -3.0, "t_max": 3.0, "t_step": 0.25,
    "mu_tol": 1e-8, "energy": 0j, "method": "all", "h_list": "0.04,0.02,0.01,0.005",
    "lambda_target": 0.0, "re_slope_min": 1.5,
}

NOISE_FLOOR = 1e-12


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    out: Path | None = None
    perturb_ai: float = 0.0

    def __getitem__(self, key):
        return self.values[key] if key in self.values else DEFAULTS[key]

    def get(self, key, default=None):
        return self.values.get(key, DEFAULTS.get(key, default))

    @property
    def semiclassical(self) -> SemiclassicalConfig:
        return semiclassical_config({"h": self["h"], **self.values})

    @property
    def pair(self) -> PotentialPair:
        return potential_pair(self.values)

    @property
    def interaction(self):
        return interaction(self.values)

    def h_list(self) -> list[float]:
        hs = [float(s) for s in str(self["h_list"]).split(",") if s.strip()]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise UsageError("h_list must be strictly decreasing")
        return hs


def load_run_config(path: str | None, overrides: list[str], out: str | None,
                    perturb_ai: float = 0.0) -> RunConfig:
    raw = {}
    if path:
        try:
            raw.update(parse_key_values(Path(path).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
    raw.update(parse_key_values("\n".join(overrides)))
    kinds = {**CONFIG_KEYS, **COMMAND_KEYS}
    values = {}
    for key, value in raw.items():
        if key not in kinds:
            raise UsageError(f"unknown config key {key!r}")
        values[key] = convert_value(key, value, kinds[key])
    for key in ("tau1", "tau2"):
        if key in values and values[key] <= 0:
            raise UsageError(f"{key} must be positive")
    for key in ("tol_ode", "tol_quad", "tol_root", "mu_tol", "airy_tol", "airy_known_tol"):
        if key in values and values[key] <= 0:
            raise UsageError(f"{key} must be positive")
    return RunConfig(values, Path(out) if out else None, perturb_ai)


@contextmanager
def _writer(cfg: RunConfig, columns):
    if cfg.out is None:
        w = csv.DictWriter(sys.stdout, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        yield w
        return
    try:
        fh = cfg.out.open("w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {cfg.out}: {exc}") from exc
    with fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        yield w


# ---------------------------------------------------------------------------
# commands

AIRY_COLUMNS = ("y", "ai", "bi", "wronskian_residual")


def cmd_airy_check(cfg: RunConfig) -> int:
    n, span = cfg["airy_samples"], cfg["airy_range"]
    ys = np.linspace(-span, span, n)
    q = airy.airy_eval(ys)
    ai = q.ai * (1 + cfg.perturb_ai)
    aip = q.ai_prime * (1 + cfg.perturb_ai)
    res = np.abs(math.pi * (ai * q.bi_prime - aip * q.bi) - 1.0)
    q0 = airy.airy_eval(0.0)
    ai0 = float(q0.ai) * (1 + cfg.perturb_ai)
    ai0_exact = 3 ** (-2 / 3) / math.gamma(2 / 3)
    known = max(abs(ai0 - ai0_exact) / ai0_exact,
                abs(float(q0.bi) - math.sqrt(3) * ai0_exact) / (math.sqrt(3) * ai0_exact))
    with _writer(cfg, AIRY_COLUMNS) as w:
        for y, a, b, r in zip(ys, ai, q.bi, res):
            w.writerow({"y": y, "ai": a, "bi": b, "wronskian_residual": r})
    worst = float(res.max())
    log.info("airy-check: max Wronskian residual %.3e, known values %.3e", worst, known)
    ok = worst <= cfg["airy_tol"] and known <= cfg["airy_known_tol"]
    return EXIT_OK if ok else EXIT_FAIL


MU_COLUMNS = ("t", "mu1", "mu2", "muA", "muB", "closed_form", "identity_residual")


def cmd_mu_table(cfg: RunConfig) -> int:
    tau1, tau2 = cfg.get("tau1", 1.0), cfg.get("tau2", 1.0)
    n = int(round((cfg["t_max"] - cfg["t_min"]) / cfg["t_step"])) + 1
    ts = cfg["t_min"] + cfg["t_step"] * np.arange(n)
    worst = 0.0
    with _writer(cfg, MU_COLUMNS) as w:
        for t in ts:
            mu = mu_functions(float(t), tau1, tau2)
            r = mu.identity_residual
            worst = max(worst, r)
            w.writerow({"t": float(t), "mu1": mu.mu1, "mu2": mu.mu2, "muA": mu.muA,
                        "muB": mu.muB, "closed_form": mu_sum_closed_form(float(t), tau1, tau2),
                        "identity_residual": r})
    log.info("mu-table: %d rows, max identity residual %.3e", n, worst)
    return EXIT_OK if worst <= cfg["mu_tol"] else EXIT_FAIL


WRONSKIAN_COLUMNS = ("name", "predicted_re", "predicted_im", "measured_re", "measured_im",
                     "abs_err", "err_over_h")


def cmd_wronskian_table(cfg: RunConfig) -> int:
    sc = cfg.semiclassical
    entries = wronskian_table(cfg.pair, cfg["energy"], sc)
    with _writer(cfg, WRONSKIAN_COLUMNS) as w:
        for e in entries:
            w.writerow({"name": e.name, "predicted_re": e.predicted.real,
                        "predicted_im": e.predicted.imag, "measured_re": e.measured.real,
                        "measured_im": e.measured.imag, "abs_err": e.abs_err,
                        "err_over_h": e.abs_err / sc.h})
    return EXIT_OK


_METHODS = {"oracle": ("oracle",), "bs": ("bs",), "asym": ("asym",),
            "both": ("oracle", "asym"), "all": ("oracle", "bs", "asym")}


def _requested_ks(cfg: RunConfig, pair, sc):
    acts = Actions.of(pair)
    window = k_range(sc.h, acts, sc.c0)
    lo = cfg.get("k_min", window.start)
    hi = cfg.get("k_max", window.stop - 1)
    return acts, [k for k in range(lo, hi + 1)], window


def resonance_columns(method: str):
    cols = list(CSV_COLUMNS)
    if method == "both":
        cols.append("asym_oracle_gap")
    return cols + ["status"]


def cmd_resonance(cfg: RunConfig) -> int:
    method = cfg["method"]
    if method not in _METHODS:
        raise UsageError(f"method must be one of {sorted(_METHODS)}")
    sc, pair, inter = cfg.semiclassical, cfg.pair, cfg.interaction
    acts, ks, window = _requested_ks(cfg, pair, sc)
    inside = [k for k in ks if k in window]
    records = {r.k: r for r in find_resonances(inside, pair, inter, sc, _METHODS[method])}
    failed = False
    with _writer(cfg, resonance_columns(method)) as w:
        for k in ks:
            if k not in records:
                row = {c: "" for c in CSV_COLUMNS}
                row.update(h=sc.h, k=k, lambda_k=lambda_k(k, sc.h, acts), status="skipped")
                w.writerow(row)
                continue
            rec = records[k]
            row = rec.csv_row(sc.h)
            if method == "both" and rec.E_oracle is not None:
                row["asym_oracle_gap"] = abs(rec.E_asym - rec.E_oracle)
            row["status"] = "ok" if rec.converged else "failed"
            failed |= not rec.converged
            w.writerow(row)
            log.info("k=%d: %s", k, rec.message or row["status"])
    return EXIT_CONVERGENCE if failed else EXIT_OK


SWEEP_COLUMNS = CSV_COLUMNS + ("re_error", "im_error")
ORDER_COLUMNS = ("quantity", "slope", "threshold", "passed")


def _slope_field(slope, errors):
    if max(errors) < NOISE_FLOOR or not math.isfinite(slope):
        return "noise"
    return slope


def cmd_sweep(cfg: RunConfig) -> int:
    hs = cfg.h_list()
    if len(hs) < 3:
        raise UsageError("sweep needs at least three h values")
    sc, pair, inter = cfg.semiclassical, cfg.pair, cfg.interaction
    rep = convergence_study(hs, pair, inter, sc, lambda_target=cfg["lambda_target"])
    with _writer(cfg, SWEEP_COLUMNS) as w:
        for row, re, im in zip(rep.rows(), rep.re_errors, rep.im_errors):
            w.writerow({**row, "re_error": re, "im_error": im})
    re_slope = _slope_field(rep.re_slope, rep.re_errors)
    im_slope = _slope_field(rep.im_slope, rep.im_errors)
    ok = re_slope == "noise" or re_slope >= cfg["re_slope_min"]
    orders = [{"quantity": "re", "slope": re_slope, "threshold": cfg["re_slope_min"],
               "passed": ok},
              {"quantity": "im", "slope": im_slope, "threshold": "", "passed": ""}]
    if cfg.out is not None:
        path = cfg.out.with_name(cfg.out.stem + "_orders.csv")
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=ORDER_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(orders)
    log.info("sweep: Re slope %s, Im slope %s", re_slope, im_slope)
    return EXIT_OK if ok else EXIT_FAIL


BS_COLUMNS = ("h", "k", "lambda_k", "e_k", "reE_bs", "imE_bs", "F_re", "F_im")


def cmd_bs_solve(cfg: RunConfig) -> int:
    from .model import action_inverse

    sc, pair, inter = cfg.semiclassical, cfg.pair, cfg.interaction
    acts, ks, _ = _requested_ks(cfg, pair, sc)
    with _writer(cfg, BS_COLUMNS) as w:
        for k in ks:
            e_k = action_inverse(pair, (k + 0.5) * math.pi * sc.h)
            E, F = bs_solve(k, pair, inter, sc, e_k)
            w.writerow({"h": sc.h, "k": k, "lambda_k": lambda_k(k, sc.h, acts), "e_k": e_k,
                        "reE_bs": E.real, "imE_bs": E.imag, "F_re": F.real, "F_im": F.imag})
    return EXIT_OK


COMMANDS = {
    "airy-check": cmd_airy_check,
    "mu-table": cmd_mu_table,
    "wronskian-table": cmd_wronskian_table,
    "resonance": cmd_resonance,
    "sweep": cmd_sweep,
    "bs-solve": cmd_bs_solve,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="predissoc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", metavar="PATH")
        s.add_argument("--out", metavar="PATH")
        s.add_argument("--verbose", action="store_true")
        s.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       dest="overrides")
        if name == "airy-check":
            s.add_argument("--perturb-ai", type=float, default=0.0, help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_run_config(args.config, args.overrides, args.out,
                              getattr(args, "perturb_ai", 0.0))
        return COMMANDS[args.command](cfg)
    except (UsageError, ModelError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
