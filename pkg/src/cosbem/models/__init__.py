"""Model parameters, characteristic functions and transition densities."""

from .bessel import log_bessel_i
from .charfun import (
    bs_charfun,
    bs_density,
    heston_cond_charfun,
    heston_logprice_charfun,
    integrated_variance_charfun,
    variance_density,
    variance_moments,
)
from .params import (
    BarrierKind,
    BSParams,
    HestonParams,
    OptionSpec,
    Payoff,
    integrated_rate,
    reversed_rate_integral,
)

__all__ = [
    "BSParams",
    "BarrierKind",
    "HestonParams",
    "OptionSpec",
    "Payoff",
    "bs_charfun",
    "bs_density",
    "heston_cond_charfun",
    "heston_logprice_charfun",
    "integrated_rate",
    "integrated_variance_charfun",
    "log_bessel_i",
    "reversed_rate_integral",
    "variance_density",
    "variance_moments",
]
