"""Fourier-cosine series machinery.

A density on a truncation interval ``[a, b]`` is represented by the
coefficients ``F_n = 2/(b-a) Re{exp(-i n pi a/(b-a)) cf(n pi/(b-a))}``.
Coefficients are stored unweighted; the halved first term is applied only
where series are summed (:func:`eval_series`, :func:`series_inner`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, DegenerateCumulantError
from .models.params import BSParams, HestonParams, reversed_rate_integral

COLLAPSE_WIDTH = 1e-12

BS_DEFAULT_L = 10.0
BS_DEFAULT_NF = 50
HESTON_DEFAULT_L = 30.0
HESTON_DEFAULT_NF = 128

CharFun = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CosConfig:
    L: float
    n_terms: int

    @classmethod
    def bs_default(cls) -> "CosConfig":
        return cls(BS_DEFAULT_L, BS_DEFAULT_NF)

    @classmethod
    def heston_default(cls) -> "CosConfig":
        return cls(HESTON_DEFAULT_L, HESTON_DEFAULT_NF)


@dataclass(frozen=True)
class CosInterval:
    a: float
    b: float

    def __post_init__(self):
        if self.b < self.a:
            raise ArgumentError(f"interval bounds reversed: a={self.a}, b={self.b}")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def collapsed(self) -> bool:
        return self.b - self.a < COLLAPSE_WIDTH

    def frequencies(self, n_terms: int) -> np.ndarray:
        return np.arange(n_terms) * (math.pi / self.width)

    def contains(self, y: float) -> bool:
        return self.a < y < self.b


@dataclass(frozen=True)
class CosSeries:
    interval: CosInterval
    coeffs: np.ndarray

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    def __call__(self, x):
        return eval_series(self, x)


def _weighted(coeffs: np.ndarray) -> np.ndarray:
    w = np.array(coeffs, dtype=float, copy=True)
    w[..., 0] *= 0.5
    return w


def cos_coefficients(cf: CharFun, interval: CosInterval, n_terms: int) -> CosSeries:
    """Cosine coefficients of the density whose characteristic function is ``cf``."""
    if n_terms < 1:
        raise ArgumentError(f"n_terms must be >= 1, got {n_terms}")
    if interval.collapsed:
        return CosSeries(interval, np.zeros(n_terms))
    omega = interval.frequencies(n_terms)
    values = np.asarray(cf(omega), dtype=complex)
    if not np.all(np.isfinite(values)):
        n_bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ArithmeticError(f"characteristic function not finite at term n={n_bad}")
    coeffs = 2.0 / interval.width * (np.exp(-1j * omega * interval.a) * values).real
    return CosSeries(interval, coeffs)


def eval_series(s: CosSeries, x):
    """Sum' F_n cos(n pi (x - a)/(b - a)) with the first term halved."""
    x = np.asarray(x, dtype=float)
    if s.interval.collapsed:
        return np.zeros_like(x)[()]
    theta = np.multiply.outer(x - s.interval.a, s.interval.frequencies(s.n_terms))
    out = np.cos(theta) @ _weighted(s.coeffs)
    return out[()] if out.ndim == 0 else out


def series_inner(coeffs, payoff) -> float:
    """Sum' F_n V_n over the last axis."""
    return np.sum(_weighted(coeffs) * np.asarray(payoff), axis=-1)


def bs_interval(
    p: BSParams, s: float, tau: float, center: float, L: float, maturity: float
) -> CosInterval:
    """Truncation interval around the Black-Scholes log-price mean."""
    if not s < tau:
        raise ArgumentError(f"bs_interval needs s < tau, got s={s}, tau={tau}")
    dur = tau - s
    var = p.sigma**2 * dur
    mid = reversed_rate_integral(p, s, tau, maturity) - p.dividend * dur - 0.5 * var + center
    half = L * math.sqrt(var)
    return CosInterval(mid - half, mid + half)


def heston_cumulants(p: HestonParams, dt: float, v: float) -> tuple[float, float]:
    """First two cumulants of the Heston log-price increment over ``dt``."""
    lam, vbar, eta, rho = p.lam, p.vbar, p.eta, p.rho
    e1 = math.exp(-lam * dt)
    om = -math.expm1(-lam * dt)
    c1 = (p.r - p.delta) * dt + om * (vbar - v) / (2 * lam) - 0.5 * vbar * dt
    c2 = (
        eta * dt * lam * e1 * (v - vbar) * (8 * lam * rho - 4 * eta)
        + lam * rho * eta * om * (16 * vbar - 8 * v)
        + 2 * vbar * lam * dt * (-4 * lam * rho * eta + eta**2 + 4 * lam**2)
        + eta**2 * ((vbar - 2 * v) * e1 * e1 + vbar * (4 * e1 - 5) + 2 * v)
        + 8 * lam**2 * (v - vbar) * om
    ) / (8 * lam**3)
    return c1, c2


def heston_interval(p: HestonParams, dt: float, v: float, center: float, L: float) -> CosInterval:
    """Cumulant-based truncation interval for the Heston log-price over ``dt``."""
    if not dt > 0:
        raise ArgumentError(f"heston_interval needs dt > 0, got {dt}")
    c1, c2 = heston_cumulants(p, dt, v)
    if not c2 > 0:
        raise DegenerateCumulantError(f"second cumulant {c2:.3e} <= 0 at dt={dt}, v={v}")
    half = L * math.sqrt(c2)
    return CosInterval(c1 - half + center, c1 + half + center)


def estimate_nf_bs(p: BSParams, T: float, interval: CosInterval, eps: float) -> int:
    """Smallest N with (2/(b-a)) exp(-(sigma pi/(b-a))^2 T N^2 / 2) <= eps."""
    if not 0 < eps < 1:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    width = interval.width
    k = 0.5 * (p.sigma * math.pi / width) ** 2 * T

    def first_term(n: int) -> float:
        return 2.0 / width * math.exp(-k * n * n)

    log_arg = math.log(2.0 / (width * eps))
    if log_arg <= 0:
        return 1
    n = max(1, math.ceil(math.sqrt(log_arg / k)))
    # guard the ceiling against round-off on either side
    while first_term(n) > eps:
        n += 1
    while n > 1 and first_term(n - 1) <= eps:
        n -= 1
    return n


def truncation_error_bound(cf: CharFun, interval: CosInterval, n_start: int, n_max: int) -> float:
    """(2/(b-a)) * sum_{n=n_start}^{n_max} |cf(n pi/(b-a))|."""
    if not n_start < n_max:
        raise ArgumentError(f"need n_start < n_max, got {n_start}, {n_max}")
    n = np.arange(n_start, n_max + 1)
    omega = n * (math.pi / interval.width)
    return float(2.0 / interval.width * np.sum(np.abs(cf(omega))))


def _clip(interval: CosInterval, lo: float, hi: float) -> tuple[float, float] | None:
    lo, hi = max(interval.a, lo), min(interval.b, hi)
    if interval.collapsed or not hi - lo > 0:
        return None
    return lo, hi


def payoff_coeffs_cash(interval: CosInterval, clip_lo: float, clip_hi: float, n_terms: int) -> np.ndarray:
    """V_n = int cos(n pi (y-a)/(b-a)) dy over the clipped interval."""
    out = np.zeros(n_terms)
    span = _clip(interval, clip_lo, clip_hi)
    if span is None:
        return out
    lo, hi = span
    k = interval.frequencies(n_terms)
    out[0] = hi - lo
    kk = k[1:]
    out[1:] = (np.sin(kk * (hi - interval.a)) - np.sin(kk * (lo - interval.a))) / kk
    return out


def _chi(interval: CosInterval, lo: float, hi: float, k: np.ndarray) -> np.ndarray:
    # int_lo^hi e^y cos(k (y - a)) dy
    th_hi, th_lo = k * (hi - interval.a), k * (lo - interval.a)
    e_hi, e_lo = math.exp(hi), math.exp(lo)
    return (
        e_hi * (np.cos(th_hi) + k * np.sin(th_hi)) - e_lo * (np.cos(th_lo) + k * np.sin(th_lo))
    ) / (1.0 + k * k)


def payoff_coeffs_call(
    interval: CosInterval, strike: float, clip_lo: float, clip_hi: float, n_terms: int
) -> np.ndarray:
    """V_n = int (e^y - E) cos(n pi (y-a)/(b-a)) dy over the clipped interval."""
    span = _clip(interval, clip_lo, clip_hi)
    if span is None:
        return np.zeros(n_terms)
    lo, hi = span
    k = interval.frequencies(n_terms)
    return _chi(interval, lo, hi, k) - strike * payoff_coeffs_cash(interval, lo, hi, n_terms)


def payoff_coeffs_call_dx(
    interval: CosInterval, strike: float, clip_lo: float, clip_hi: float, n_terms: int
) -> np.ndarray:
    """V_n = int (e^y - E) sin(n pi (y-a)/(b-a)) (n pi/(b-a)) dy over the clipped interval.

    This is the x-derivative of :func:`payoff_coeffs_call` when the interval
    is translated with the spot (``a = a0 + x``) and the clip is held fixed.
    """
    out = np.zeros(n_terms)
    span = _clip(interval, clip_lo, clip_hi)
    if span is None:
        return out
    lo, hi = span
    k = interval.frequencies(n_terms)
    th_hi, th_lo = k * (hi - interval.a), k * (lo - interval.a)
    e_hi, e_lo = math.exp(hi), math.exp(lo)
    exp_part = (
        e_hi * (np.sin(th_hi) - k * np.cos(th_hi)) - e_lo * (np.sin(th_lo) - k * np.cos(th_lo))
    ) / (1.0 + k * k)
    out[:] = k * exp_part + strike * (np.cos(th_hi) - np.cos(th_lo))
    out[0] = 0.0
    return out


def cos_vanilla_price(
    cf: CharFun,
    interval: CosInterval,
    n_terms: int,
    strike: float,
    discount: float,
    kind: str = "call",
) -> float:
    """Plain-vanilla price from the density coefficients of the terminal log-price."""
    series = cos_coefficients(cf, interval, n_terms)
    log_k = math.log(strike)
    if kind == "call":
        v = payoff_coeffs_call(interval, strike, log_k, math.inf, n_terms)
    elif kind == "put":
        v = -payoff_coeffs_call(interval, strike, -math.inf, log_k, n_terms)
    elif kind == "digital":
        v = payoff_coeffs_cash(interval, log_k, math.inf, n_terms)
    else:
        raise ArgumentError(f"unknown payoff kind {kind!r}")
    return float(discount * series_inner(series.coeffs, v))


def payoff_coeffs_cash_dx(interval: CosInterval, clip_lo: float, clip_hi: float, n_terms: int) -> np.ndarray:
    """V_n = int sin(n pi (y-a)/(b-a)) (n pi/(b-a)) dy over the clipped interval."""
    out = np.zeros(n_terms)
    span = _clip(interval, clip_lo, clip_hi)
    if span is None:
        return out
    lo, hi = span
    k = interval.frequencies(n_terms)
    out[:] = np.cos(k * (lo - interval.a)) - np.cos(k * (hi - interval.a))
    return out
