"""Shared parameter sets and cached solves."""

from __future__ import annotations

import warnings

import pytest

from cosbem.bem_heston import NearBarrierWarning, solve_heston
from cosbem.models.params import BSParams, HestonParams, OptionSpec

# Black-Scholes up-and-out put with a two-piece rate schedule
BS_PIECEWISE = BSParams(0.105, ((0.0, 0.01), (0.25, 0.03)))
BS_PUT_OPTION = OptionSpec("vanilla_put", "up_and_out", 50.0, 40.0, 1.0)
BS_PUT_SPOT = 35.0

# Black-Scholes vanilla call used for the cosine-term estimate
BS_NF = BSParams.constant(0.2, 0.05)
BS_NF_SPOT, BS_NF_STRIKE, BS_NF_MATURITY, BS_NF_L = 100.0, 120.0, 0.1, 10.0

# Heston sets: down-and-out call, up-and-out call, up-and-out cash-or-nothing
HESTON_DOWN = HestonParams(4.0, 0.04, 0.1, -0.5, 0.05, 0.02)
DOWN_CALL = OptionSpec("vanilla_call", "down_and_out", 100.0, 110.0, 1.0)
HESTON_UP = HestonParams(2.0, 0.1, 0.1, -0.5, 0.03, 0.05)
UP_CALL = OptionSpec("vanilla_call", "up_and_out", 100.0, 130.0, 0.5)
HESTON_CASH = HestonParams(4.0, 0.04, 0.1, -0.5, 0.05, 0.02)
CASH_UP = OptionSpec("cash_or_nothing_call", "up_and_out", 100.0, 110.0, 1.0)

HESTON_SETS = {
    "down_call": (HESTON_DOWN, DOWN_CALL, 0.01),
    "up_call": (HESTON_UP, UP_CALL, 0.1),
    "cash": (HESTON_CASH, CASH_UP, 0.01),
}


def default_vmax(p: HestonParams, v: float) -> float:
    return 2.0 * max(v, p.vbar)


@pytest.fixture(scope="session")
def heston_solutions():
    """Cached (N_t, N_v) boundary densities per parameter set."""
    cache = {}

    def get(name: str, n_dt: int, n_dv: int):
        key = (name, n_dt, n_dv)
        if key not in cache:
            p, opt, v = HESTON_SETS[name]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NearBarrierWarning)
                cache[key] = solve_heston(p, opt, n_dt, n_dv, default_vmax(p, v))
        return cache[key]

    return get


# acceptance verdicts, printed once at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
