"""Model parameter sets and option contracts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from ..errors import ArgumentError


@dataclass(frozen=True)
class BSParams:
    """Black-Scholes dynamics with a piecewise-constant short rate.

    ``rate_schedule`` holds ``(t_break, rate)`` pairs in calendar time; each
    rate applies from its breakpoint up to the next one. The first breakpoint
    must be 0.
    """

    sigma: float
    rate_schedule: tuple[tuple[float, float], ...]
    dividend: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.dividend < 0:
            raise ArgumentError(f"dividend must be non-negative, got {self.dividend}")
        sched = tuple((float(t), float(r)) for t, r in self.rate_schedule)
        if not sched:
            raise ArgumentError("rate_schedule is empty")
        if sched[0][0] != 0.0:
            raise ArgumentError("first rate breakpoint must be at t=0")
        for (t0, _), (t1, _) in zip(sched, sched[1:]):
            if not t1 > t0:
                raise ArgumentError("rate breakpoints must be strictly increasing")
        object.__setattr__(self, "rate_schedule", sched)

    @classmethod
    def constant(cls, sigma: float, rate: float, dividend: float = 0.0) -> "BSParams":
        return cls(sigma, ((0.0, rate),), dividend)

    @property
    def is_constant_rate(self) -> bool:
        return len(self.rate_schedule) == 1

    def rate_at(self, t: float) -> float:
        r = self.rate_schedule[0][1]
        for t_break, rate in self.rate_schedule:
            if t >= t_break:
                r = rate
        return r


def integrated_rate(p: BSParams, t1: float, t2: float) -> float:
    """Exact integral of the piecewise-constant rate over ``[t1, t2]``."""
    if t1 > t2:
        raise ArgumentError(f"integrated_rate needs t1 <= t2, got ({t1}, {t2})")
    if t1 < 0:
        raise ArgumentError(f"integrated_rate needs t1 >= 0, got {t1}")
    sched = p.rate_schedule
    total = 0.0
    for k, (start, rate) in enumerate(sched):
        end = sched[k + 1][0] if k + 1 < len(sched) else math.inf
        lo, hi = max(start, t1), min(end, t2)
        if hi > lo:
            total += rate * (hi - lo)
    return total


def reversed_rate_integral(p: BSParams, s: float, tau: float, maturity: float) -> float:
    """Integral of r(u) = rbar(maturity - u) over time-to-maturity ``[s, tau]``."""
    return integrated_rate(p, maturity - tau, maturity - s)


@dataclass(frozen=True)
class HestonParams:
    """Heston dynamics under the pricing measure.

    ``lam`` is the mean-reversion speed, ``vbar`` the long-run variance,
    ``eta`` the vol-of-vol. The volatility risk premium ``theta`` is pinned
    to zero. Construction enforces the Feller condition.
    """

    lam: float
    vbar: float
    eta: float
    rho: float
    r: float
    delta: float = 0.0
    theta: float = field(default=0.0)

    def __post_init__(self):
        for name in ("lam", "vbar", "eta"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if not -1.0 < self.rho < 1.0:
            raise ArgumentError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.theta != 0.0:
            raise ArgumentError("theta (volatility risk price) must be 0")
        if 2.0 * self.lam * self.vbar < self.eta**2 * (1.0 - 1e-12):
            raise ArgumentError(
                f"Feller condition violated: 2*lam*vbar={2 * self.lam * self.vbar:.6g} "
                f"< eta^2={self.eta**2:.6g}"
            )

    @property
    def a(self) -> float:
        """Shape parameter 2*lam*vbar/eta^2 of the variance transition density."""
        return 2.0 * self.lam * self.vbar / self.eta**2

    @property
    def d(self) -> float:
        """Degrees of freedom 4*vbar*lam/eta^2 of the scaled CIR process."""
        return 4.0 * self.vbar * self.lam / self.eta**2

    @property
    def bessel_order(self) -> float:
        return self.d / 2.0 - 1.0


class Payoff(str, Enum):
    VANILLA_PUT = "vanilla_put"
    VANILLA_CALL = "vanilla_call"
    CASH_OR_NOTHING_CALL = "cash_or_nothing_call"


class BarrierKind(str, Enum):
    UP_AND_OUT = "up_and_out"
    DOWN_AND_OUT = "down_and_out"


@dataclass(frozen=True)
class OptionSpec:
    payoff: Payoff
    barrier_kind: BarrierKind
    strike: float
    barrier: float
    maturity: float

    def __post_init__(self):
        object.__setattr__(self, "payoff", Payoff(self.payoff))
        object.__setattr__(self, "barrier_kind", BarrierKind(self.barrier_kind))
        for name in ("strike", "barrier", "maturity"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def log_strike(self) -> float:
        return math.log(self.strike)

    @property
    def log_barrier(self) -> float:
        return math.log(self.barrier)

    def is_alive(self, spot: float) -> bool:
        """True when ``spot`` lies strictly inside the continuation region."""
        if self.barrier_kind is BarrierKind.UP_AND_OUT:
            return spot < self.barrier
        return spot > self.barrier
