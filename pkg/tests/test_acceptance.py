"""Acceptance criteria: published-table reproductions, properties and determinism.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

from __future__ import annotations

import csv
import io
import math
import subprocess
import sys
import time
import warnings
from pathlib import Path

import pytest

from cosbem import cli
from cosbem.bem_bs import barrier_put_bs
from cosbem.bem_heston import NearBarrierWarning, price_heston, solve_heston
from cosbem.cosexp import bs_interval, cos_vanilla_price, estimate_nf_bs, truncation_error_bound
from cosbem.models.charfun import bs_charfun
from cosbem.oracles.closed_form import bs_vanilla
from cosbem.oracles.montecarlo import McConfig, mc_barrier

import conftest
from conftest import (
    BS_NF,
    BS_NF_L,
    BS_NF_MATURITY,
    BS_NF_SPOT,
    BS_NF_STRIKE,
    BS_PIECEWISE,
    BS_PUT_OPTION,
    BS_PUT_SPOT,
    CASH_UP,
    DOWN_CALL,
    HESTON_CASH,
    HESTON_DOWN,
    HESTON_UP,
    UP_CALL,
    default_vmax,
)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    conftest.ACCEPTANCE[number] = line
    print(line)


def quiet_price(p, opt, sol, S, v):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearBarrierWarning)
        return price_heston(p, opt, sol, S, v).price


def test_criterion_1_black_scholes_put_table():
    reference = {16: 11.43811, 32: 11.43789, 64: 11.43781}
    prices, seconds = {}, {}
    for n in reference:
        t0 = time.perf_counter()
        (res,) = barrier_put_bs(BS_PIECEWISE, BS_PUT_OPTION, n, [BS_PUT_SPOT])
        seconds[n] = time.perf_counter() - t0
        prices[n] = res.price
    within = all(abs(prices[n] - reference[n]) <= 2e-3 for n in reference)
    seq = [prices[n] for n in sorted(prices)]
    monotone = all(a > b for a, b in zip(seq, seq[1:]))
    fast = seconds[64] < 60.0
    ok = within and monotone and fast
    detail = ", ".join(f"N={n}: {prices[n]:.6f} (ref {reference[n]})" for n in sorted(prices))
    record(1, ok, f"{detail}; decreasing={monotone}; N=64 took {seconds[64]:.1f}s")
    assert within and monotone and fast


def test_criterion_2_cosine_term_estimate():
    x, T = math.log(BS_NF_SPOT), BS_NF_MATURITY
    iv = bs_interval(BS_NF, 0.0, T, x, BS_NF_L, T)
    cf = lambda w: bs_charfun(BS_NF, w, 0.0, T, x, T)  # noqa: E731
    n_f = estimate_nf_bs(BS_NF, T, iv, 1e-3)
    cos = cos_vanilla_price(cf, iv, 25, BS_NF_STRIKE, math.exp(-0.05 * T), "call")
    error = abs(cos - bs_vanilla(BS_NF, "call", BS_NF_SPOT, BS_NF_STRIKE, T))
    bound = truncation_error_bound(cf, iv, 25, 2000)
    ok = n_f == 25 and 1e-6 < error < 1e-3 and error <= bound
    record(2, ok, f"N_F={n_f}; realized error at 25 terms {error:.3e}; bound {bound:.3e}")
    assert n_f == 25
    assert 1e-6 < error < 1e-3
    assert error <= bound


def test_criterion_3_heston_down_and_out_call():
    v, v_max = 0.01, default_vmax(HESTON_DOWN, 0.01)
    prices, seconds = {}, 0.0
    for n in (3, 6, 9, 12, 15):
        t0 = time.perf_counter()
        sol = solve_heston(HESTON_DOWN, DOWN_CALL, n, n, v_max, threads=4)
        prices[n] = (quiet_price(HESTON_DOWN, DOWN_CALL, sol, 150.0, v),
                     quiet_price(HESTON_DOWN, DOWN_CALL, sol, 115.0, v))
        seconds = time.perf_counter() - t0
    hi, lo = prices[15]
    within = abs(hi - 51.022) <= 0.01 and abs(lo - 8.3190) <= 0.005
    cauchy = True
    for k in (0, 1):
        seq = [prices[n][k] for n in sorted(prices)]
        diffs = [abs(b - a) for a, b in zip(seq, seq[1:])]
        cauchy &= all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))
    fast = seconds < 180.0
    ok = within and cauchy and fast
    record(3, ok, f"V(150)={hi:.5f} (ref 51.022), V(115)={lo:.5f} (ref 8.3190); "
                  f"shrinking differences={cauchy}; N=15 took {seconds:.1f}s")
    assert within and cauchy and fast


def test_criterion_4_heston_up_and_out_call():
    reference = dict(zip((80.0, 90.0, 100.0, 110.0, 120.0), (0.9074, 1.8793, 2.5904, 2.4722, 1.4704)))
    sol = solve_heston(HESTON_UP, UP_CALL, 12, 12, default_vmax(HESTON_UP, 0.1), threads=4)
    prices = {S: quiet_price(HESTON_UP, UP_CALL, sol, S, 0.1) for S in reference}
    worst = max(abs(prices[S] - reference[S]) for S in reference)
    ok = worst <= 0.01
    record(4, ok, ", ".join(f"S={S:g}: {prices[S]:.5f}" for S in reference) + f"; max deviation {worst:.2e}")
    assert ok


@pytest.fixture(scope="module")
def cash_price_100():
    sol = solve_heston(HESTON_CASH, CASH_UP, 100, 30, default_vmax(HESTON_CASH, 0.01), threads=4)
    return quiet_price(HESTON_CASH, CASH_UP, sol, 100.0, 0.01)


def test_criterion_5_cash_or_nothing(cash_price_100):
    sol = solve_heston(HESTON_CASH, CASH_UP, 240, 40, default_vmax(HESTON_CASH, 0.01), threads=4)
    near = quiet_price(HESTON_CASH, CASH_UP, sol, 109.0, 0.01)
    ok_100 = abs(cash_price_100 - 4.7852e-2) <= 2e-4
    ok_109 = abs(near - 4.5772e-3) <= 5e-5
    record(5, ok_100 and ok_109,
           f"V(100)={cash_price_100:.6e} (ref 4.7852e-02), V(109)={near:.6e} (ref 4.5772e-03)")
    assert ok_100 and ok_109


def test_criterion_6_monte_carlo_cross_check(cash_price_100):
    t0 = time.perf_counter()
    est = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, McConfig(1_000_000, 1600), threads=4)
    seconds = time.perf_counter() - t0
    lo, hi = est.ci
    overlap = lo <= 4.83e-2 and hi >= 4.75e-2
    inside = lo <= cash_price_100 <= hi
    fast = seconds < 120.0
    ok = overlap and inside and fast
    record(6, ok, f"MC mean {est.mean:.6e}, CI [{lo:.6e}, {hi:.6e}]; overlaps reference CI={overlap}; "
                  f"BEM {cash_price_100:.6e} inside={inside}; {seconds:.1f}s")
    assert overlap, "CI does not overlap [4.75e-2, 4.83e-2]"
    assert inside, "boundary element price outside the Monte Carlo CI"
    assert fast


PROPERTY_SUITES = {
    "charfun unit value and symmetry": [
        "tests/test_models.py::TestBSCharfun::test_unit_at_zero",
        "tests/test_models.py::TestBSCharfun::test_hermitian",
        "tests/test_models.py::TestLogPriceCharfun::test_unit_at_zero",
        "tests/test_models.py::TestLogPriceCharfun::test_hermitian",
        "tests/test_models.py::TestConditionalCharfun::test_unit_at_zero",
        "tests/test_models.py::TestIntegratedVarianceCharfun::test_unit_at_zero",
    ],
    "variance density moments": ["tests/test_models.py::TestVarianceDensity::test_normalization_mean_variance"],
    "mixing identity": ["tests/test_models.py::TestConditionalCharfun::test_mixing_identity"],
    "cosine coefficients vs quadrature": [
        "tests/test_cosexp.py::TestSeries::test_coefficients_match_direct_quadrature",
    ],
    "payoff coefficients vs quadrature": [
        "tests/test_cosexp.py::TestPayoffCoefficients::test_call_matches_quadrature",
        "tests/test_cosexp.py::TestPayoffCoefficients::test_cash_matches_quadrature",
        "tests/test_cosexp.py::TestPayoffCoefficients::test_call_dx_matches_quadrature",
        "tests/test_cosexp.py::TestPayoffCoefficients::test_cash_dx_matches_quadrature",
    ],
    "solve residuals": [
        "tests/test_bem_bs.py::TestSolve::test_residual",
        "tests/test_bem_heston.py::TestSolve::test_single_time_block",
        "tests/test_bem_heston.py::TestSolve::test_dense_residual",
        "tests/test_bem_heston.py::TestSolve::test_matches_dense_solve",
    ],
    "delta vs finite difference": ["tests/test_bem_heston.py::TestDelta::test_matches_finite_difference"],
    "barrier below vanilla": [
        "tests/test_bem_bs.py::TestPricing::test_below_vanilla",
        "tests/test_bem_heston.py::TestPricing::test_dominated_by_vanilla",
    ],
    "far barrier recovers vanilla": [
        "tests/test_bem_bs.py::TestPricing::test_far_barrier_recovers_vanilla",
        "tests/test_bem_heston.py::TestPricing::test_far_barrier_recovers_vanilla",
    ],
}


def test_criterion_7_property_suites():
    outcome = {}
    for name, nodes in PROPERTY_SUITES.items():
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *nodes],
            cwd=ROOT, capture_output=True, text=True,
        )
        outcome[name] = proc.returncode == 0
    failed = [k for k, v in outcome.items() if not v]
    record(7, not failed, f"{len(outcome) - len(failed)}/{len(outcome)} suites pass"
                          + (f"; failing: {', '.join(failed)}" if failed else ""))
    assert not failed


def csv_without_cpu(path: Path) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(path.read_text())))
    col = rows[0].index("cpu_seconds")
    return [r[:col] + r[col + 1:] for r in rows]


def test_criterion_8_thread_count_determinism(tmp_path):
    mc_text = (CONFIGS / "heston_cash_up_out.ini").read_text()
    mc_text = mc_text.replace("n_paths = 1000000", "n_paths = 200000").replace("n_steps = 1600", "n_steps = 200")
    mc_cfg = tmp_path / "mc.ini"
    mc_cfg.write_text(mc_text)
    runs = [
        ("price", CONFIGS / "bs_up_out_put.ini"),
        ("price", CONFIGS / "heston_up_out_call.ini"),
        ("mc", mc_cfg),
    ]
    results = {}
    for command, cfg in runs:
        outs = []
        for threads in (1, 8):
            out = tmp_path / f"{cfg.stem}-{command}-{threads}.csv"
            assert cli.main([command, str(cfg), "--out", str(out), "--threads", str(threads)]) == 0
            outs.append(csv_without_cpu(out))
        results[f"{command} {cfg.stem}"] = outs[0] == outs[1]
    ok = all(results.values())
    record(8, ok, "; ".join(f"{k}: {'identical' if v else 'differs'}" for k, v in results.items()))
    assert ok
