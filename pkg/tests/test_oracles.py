"""Reference pricers: closed forms, Fourier inversion and Monte Carlo."""

import math

import pytest

from cosbem.errors import ArgumentError
from cosbem.models.params import BSParams, HestonParams, OptionSpec
from cosbem.oracles.closed_form import bs_vanilla
from cosbem.oracles.heston_vanilla import heston_vanilla
from cosbem.oracles.montecarlo import McConfig, mc_barrier, philox4x32

from conftest import BS_NF, CASH_UP, HESTON_CASH, HESTON_DOWN, HESTON_UP


class TestBlackScholes:
    def test_put_call_parity(self):
        S, E, T = 100.0, 120.0, 0.1
        call = bs_vanilla(BS_NF, "call", S, E, T)
        put = bs_vanilla(BS_NF, "put", S, E, T)
        assert call - put == pytest.approx(S - E * math.exp(-0.05 * T), abs=1e-12)

    def test_zero_volatility_limit(self):
        p = BSParams.constant(1e-8, 0.05, 0.01)
        for E in (80.0, 100.0, 120.0):
            fwd_value = 100.0 * math.exp(-0.01) - E * math.exp(-0.05)
            assert bs_vanilla(p, "call", 100.0, E, 1.0) == pytest.approx(max(fwd_value, 0.0), abs=1e-6)

    def test_needs_constant_rate(self):
        p = BSParams(0.2, ((0.0, 0.01), (0.5, 0.02)))
        with pytest.raises(ArgumentError):
            bs_vanilla(p, "call", 100.0, 100.0, 1.0)


class TestHestonVanilla:
    @pytest.mark.parametrize("p", [HESTON_DOWN, HESTON_UP])
    @pytest.mark.parametrize("E", [80.0, 100.0, 130.0])
    def test_put_call_parity(self, p, E):
        S, v, T = 100.0, 0.03, 0.8
        call = heston_vanilla(p, "call", S, v, E, T)
        put = heston_vanilla(p, "put", S, v, E, T)
        parity = S * math.exp(-p.delta * T) - E * math.exp(-p.r * T)
        assert call - put == pytest.approx(parity, abs=1e-10)

    def test_black_scholes_limit(self):
        vbar = 0.04
        p = HestonParams(4.0, vbar, 1e-6, -0.5, 0.05, 0.02)
        bs = BSParams.constant(math.sqrt(vbar), 0.05, 0.02)
        for E in (90.0, 100.0, 115.0):
            ref = bs_vanilla(bs, "call", 100.0, E, 1.0)
            assert heston_vanilla(p, "call", 100.0, vbar, E, 1.0) == pytest.approx(ref, rel=1e-4)

    def test_digital_between_zero_and_discount(self):
        d = heston_vanilla(HESTON_CASH, "digital_call", 100.0, 0.01, 100.0, 1.0)
        assert 0.0 < d < math.exp(-HESTON_CASH.r)

    def test_unknown_kind(self):
        with pytest.raises(ArgumentError):
            heston_vanilla(HESTON_DOWN, "straddle", 100.0, 0.01, 100.0, 1.0)


class TestPhilox:
    @pytest.mark.parametrize("ctr,key,expected", [
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
        ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
         (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
    ])
    def test_known_answers(self, ctr, key, expected):
        assert philox4x32(ctr, key) == expected


class TestMonteCarlo:
    cfg = McConfig(20000, 50, seed=7)

    def test_same_seed_same_estimate(self):
        a = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg)
        b = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg)
        assert a == b

    def test_thread_count_invariant(self):
        a = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg, threads=1)
        b = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg, threads=8)
        assert a == b

    def test_different_seed_differs(self):
        a = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg)
        b = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, McConfig(20000, 50, seed=8))
        assert a.mean != b.mean

    def test_confidence_interval_scales_with_root_n(self):
        widths = {
            n: mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, McConfig(n, 20, seed=3)).half_width
            for n in (40000, 80000, 160000)
        }
        assert widths[80000] / widths[40000] == pytest.approx(1 / math.sqrt(2), rel=0.1)
        assert widths[160000] / widths[40000] == pytest.approx(0.5, rel=0.1)

    def test_spot_on_barrier(self):
        est = mc_barrier(HESTON_CASH, CASH_UP, CASH_UP.barrier, 0.01, self.cfg)
        assert est.mean == 0.0 and est.n_knocked == self.cfg.n_paths

    def test_ci_contains_mean(self):
        est = mc_barrier(HESTON_CASH, CASH_UP, 100.0, 0.01, self.cfg)
        lo, hi = est.ci
        assert lo < est.mean < hi and est.half_width > 0

    def test_vanilla_limit_matches_fourier_price(self):
        opt = OptionSpec("vanilla_call", "up_and_out", 100.0, 1e6, 0.5)
        est = mc_barrier(HESTON_UP, opt, 100.0, 0.1, McConfig(100000, 50, seed=11))
        ref = heston_vanilla(HESTON_UP, "call", 100.0, 0.1, 100.0, 0.5)
        assert abs(est.mean - ref) < 4 * est.half_width / 1.96

    @pytest.mark.parametrize("kwargs", [
        dict(n_paths=10, n_steps=50), dict(n_paths=1000, n_steps=5),
        dict(n_paths=1000, n_steps=50, confidence=1.0), dict(n_paths=1000, n_steps=50, monitoring="x"),
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ArgumentError):
            McConfig(**kwargs)

    @pytest.mark.slow
    def test_near_barrier_overlaps_reference_interval(self):
        est = mc_barrier(HESTON_CASH, CASH_UP, 109.0, 0.01, McConfig(1_000_000, 800))
        lo, hi = est.ci
        assert lo <= 4.60e-3 and hi >= 4.58e-3
