"""Independent reference prices used to validate the boundary-element pricers."""

from .closed_form import bs_vanilla
from .heston_vanilla import heston_vanilla
from .montecarlo import McConfig, McEstimate, mc_barrier, philox4x32

__all__ = ["bs_vanilla", "heston_vanilla", "McConfig", "McEstimate", "mc_barrier", "philox4x32"]
