"""Batch commands shared by the command line and the HTTP service.

Each command turns an :class:`ExperimentConfig` into a :class:`RunTable`:
a CSV header plus typed rows. Formatting lives in :func:`format_csv` so
local and remote runs produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import math
import platform
import time
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy

from . import __version__
from .bem_bs import assemble_bs, price_bs, solve_bs
from .bem_heston import HestonGrids, assemble_heston, delta_heston, price_heston, solve_blocks
from .config import ExperimentConfig
from .cosexp import (
    bs_interval,
    cos_vanilla_price,
    estimate_nf_bs,
    heston_interval,
    truncation_error_bound,
)
from .errors import ArgumentError, ConfigError
from .models.charfun import bs_charfun, heston_logprice_charfun
from .models.params import BSParams, Payoff
from .oracles import bs_vanilla, heston_vanilla, mc_barrier
from .quad import TimeGrid, VarianceGrid

COMMANDS = ("price", "vanilla", "mc", "estimate-nf", "error-bound")

PRICE_HEADER = ("S", "v", "t", "price", "delta", "method", "n_dt", "n_dv", "n_f", "L", "cpu_seconds")
MC_HEADER = ("S", "v", "t", "mean", "ci_lo", "ci_hi", "n", "m", "seed", "cpu_seconds")
BOUND_HEADER = ("n_f", "bound", "first_term", "error")

Cell = float | int | str | None


@dataclass
class RunTable:
    header: tuple[str, ...]
    rows: list[tuple[Cell, ...]] = field(default_factory=list)
    text: str | None = None
    info: dict = field(default_factory=dict)


def _cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.7e}"
    return str(value)


def format_csv(table: RunTable) -> str:
    """CSV text with floats in scientific notation, 8 significant digits."""
    lines = [",".join(table.header)]
    lines += [",".join(_cell(c) for c in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _vanilla_kind(payoff: Payoff) -> str:
    return {
        Payoff.VANILLA_CALL: "call",
        Payoff.VANILLA_PUT: "put",
        Payoff.CASH_OR_NOTHING_CALL: "digital_call",
    }[payoff]


def _price_bs(cfg: ExperimentConfig, threads: int) -> RunTable:
    p, opt, g = cfg.params, cfg.option, cfg.grid
    t0 = time.process_time()
    sol = solve_bs(assemble_bs(p, opt, TimeGrid(g.n_dt, opt.maturity), g.cos, threads=threads))
    setup = time.process_time() - t0
    table = RunTable(PRICE_HEADER, info={"setup_cpu_seconds": setup})
    for pt in cfg.points:
        t1 = time.process_time()
        res = price_bs(p, opt, sol, pt.S, pt.t, g.cos)
        cpu = setup + time.process_time() - t1
        table.rows.append((pt.S, pt.v, pt.t, res.price, None, "cos-bem", g.n_dt, None, g.cos.n_terms, g.cos.L, cpu))
    return table


def _price_heston(cfg: ExperimentConfig, threads: int) -> RunTable:
    p, opt, g = cfg.params, cfg.option, cfg.grid
    v_max = g.v_max or VarianceGrid.default(max(pt.v for pt in cfg.points), p.vbar, g.n_dv).v_max
    grids = HestonGrids(TimeGrid(g.n_dt, opt.maturity), VarianceGrid(v_max, g.n_dv))
    t0 = time.process_time()
    sol = solve_blocks(assemble_heston(p, opt, grids, g.cos, threads=threads))
    setup = time.process_time() - t0
    table = RunTable(PRICE_HEADER, info={"setup_cpu_seconds": setup, "v_max": v_max, "condition": sol.condition})
    notes = []
    for pt in cfg.points:
        t1 = time.process_time()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = price_heston(p, opt, sol, pt.S, pt.v, g.cos, threads=threads)
            delta = delta_heston(p, opt, sol, pt.S, pt.v, g.cos, threads=threads) if cfg.delta else None
        notes.extend(res.warnings)
        cpu = setup + time.process_time() - t1
        table.rows.append(
            (pt.S, pt.v, pt.t, res.price, delta, "cos-bem", g.n_dt, g.n_dv, g.cos.n_terms, g.cos.L, cpu)
        )
    table.info["warnings"] = notes
    return table


def _vanilla(cfg: ExperimentConfig) -> RunTable:
    opt = cfg.option
    kind = _vanilla_kind(opt.payoff)
    table = RunTable(PRICE_HEADER)
    for pt in cfg.points:
        t1 = time.process_time()
        tau = opt.maturity - pt.t
        if cfg.model == "bs":
            if kind == "digital_call":
                raise ConfigError("vanilla oracle for Black-Scholes supports vanilla_call and vanilla_put only")
            price = bs_vanilla(cfg.params, kind, pt.S, opt.strike, tau)
            method = "bs-closed-form"
        else:
            price = heston_vanilla(cfg.params, kind, pt.S, pt.v, opt.strike, tau)
            method = "heston-fourier"
        table.rows.append((pt.S, pt.v, pt.t, price, None, method, None, None, None, None, time.process_time() - t1))
    return table


def _mc(cfg: ExperimentConfig, threads: int, seed: int | None) -> RunTable:
    if cfg.model != "heston":
        raise ConfigError("the Monte Carlo oracle needs a Heston model")
    if cfg.mc is None:
        raise ConfigError("[oracle] n_paths and n_steps are required for the mc command")
    mc = cfg.mc if seed is None else dataclasses.replace(cfg.mc, seed=seed)
    table = RunTable(MC_HEADER, info={"monitoring": mc.monitoring, "confidence": mc.confidence})
    for pt in cfg.points:
        t1 = time.process_time()
        est = mc_barrier(cfg.params, cfg.option, pt.S, pt.v, mc, threads)
        lo, hi = est.ci
        table.rows.append(
            (pt.S, pt.v, pt.t, est.mean, lo, hi, est.n_paths, est.n_steps, est.seed, time.process_time() - t1)
        )
    return table


def _bs_setup(cfg: ExperimentConfig):
    p: BSParams = cfg.params
    if not p.is_constant_rate:
        raise ConfigError("N_F estimation and error tables need a constant rate")
    pt = cfg.points[0]
    T = cfg.option.maturity - pt.t
    iv = bs_interval(p, 0.0, T, math.log(pt.S), cfg.grid.cos.L, T)
    return p, pt, T, iv


def _estimate_nf(cfg: ExperimentConfig) -> RunTable:
    if cfg.model != "bs":
        raise ConfigError("N_F estimation applies to Black-Scholes models")
    p, _, T, iv = _bs_setup(cfg)
    n = estimate_nf_bs(p, T, iv, cfg.sweep.eps)
    return RunTable(("n_f",), [(n,)], text=f"{n}\n", info={"eps": cfg.sweep.eps, "width": iv.width})


def _error_bound(cfg: ExperimentConfig) -> RunTable:
    opt, sw = cfg.option, cfg.sweep
    kind = _vanilla_kind(opt.payoff)
    cos_kind = "digital" if kind == "digital_call" else kind
    if cfg.model == "bs":
        p, pt, T, iv = _bs_setup(cfg)
        rate = p.rate_schedule[0][1]
        cf = lambda w: bs_charfun(p, w, 0.0, T, math.log(pt.S), T)  # noqa: E731
        sigma_sq = p.sigma**2
        if kind == "digital_call":
            raise ConfigError("error tables for Black-Scholes support vanilla_call and vanilla_put only")
        reference = bs_vanilla(p, kind, pt.S, opt.strike, T)
    else:
        p, pt = cfg.params, cfg.points[0]
        T = opt.maturity
        rate = p.r
        iv = heston_interval(p, T, pt.v, math.log(pt.S), cfg.grid.cos.L)
        cf = lambda w: heston_logprice_charfun(p, w, math.log(pt.S), pt.v, T)  # noqa: E731
        sigma_sq = None
        reference = heston_vanilla(p, kind, pt.S, pt.v, opt.strike, T)
    disc = math.exp(-rate * T)
    table = RunTable(BOUND_HEADER, info={"reference": reference, "a": iv.a, "b": iv.b})
    for n in range(sw.nf_min, sw.nf_max + 1, sw.nf_step):
        bound = truncation_error_bound(cf, iv, n, sw.tail_terms)
        first = None
        if sigma_sq is not None:
            first = 2.0 / iv.width * math.exp(-0.5 * sigma_sq * (math.pi / iv.width) ** 2 * T * n * n)
        err = abs(cos_vanilla_price(cf, iv, n, opt.strike, disc, cos_kind) - reference)
        table.rows.append((n, bound, first, err))
    return table


def run_command(command: str, cfg: ExperimentConfig, threads: int = 1, seed: int | None = None) -> RunTable:
    """Execute one batch command; raises package errors on failure."""
    if threads < 1:
        raise ArgumentError(f"threads must be >= 1, got {threads}")
    if command == "price":
        return _price_bs(cfg, threads) if cfg.model == "bs" else _price_heston(cfg, threads)
    if command == "vanilla":
        return _vanilla(cfg)
    if command == "mc":
        return _mc(cfg, threads, seed)
    if command == "estimate-nf":
        return _estimate_nf(cfg)
    if command == "error-bound":
        return _error_bound(cfg)
    raise ArgumentError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")


def versions() -> dict[str, str]:
    return {
        "cosbem": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def manifest(command: str, cfg: ExperimentConfig, table: RunTable, threads: int, seed: int | None,
             started: float, wall_seconds: float) -> dict:
    """JSON-ready record of a run: config echo, versions, timings."""
    return {
        "command": command,
        "config": cfg.echo(),
        "threads": threads,
        "seed_override": seed,
        "versions": versions(),
        "started_unix": started,
        "wall_seconds": wall_seconds,
        "rows": len(table.rows),
        "info": table.info,
    }
