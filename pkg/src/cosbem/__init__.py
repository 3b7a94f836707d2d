"""COS-accelerated boundary element pricing of knock-out barrier options."""

__version__ = "0.1.0"

from .bem_bs import assemble_bs, barrier_put_bs, price_bs, solve_bs  # noqa: E402
from .bem_heston import (  # noqa: E402
    HestonQuadConfig,
    assemble_heston,
    delta_heston,
    price_heston,
    solve_blocks,
    solve_heston,
)
from .cosexp import CosConfig, CosInterval, CosSeries  # noqa: E402
from .models.params import BarrierKind, BSParams, HestonParams, OptionSpec, Payoff  # noqa: E402
from .quad import TimeGrid, VarianceGrid  # noqa: E402
from .results import PriceResult  # noqa: E402

__all__ = [
    "BSParams",
    "BarrierKind",
    "CosConfig",
    "CosInterval",
    "CosSeries",
    "HestonParams",
    "HestonQuadConfig",
    "OptionSpec",
    "Payoff",
    "PriceResult",
    "TimeGrid",
    "VarianceGrid",
    "assemble_bs",
    "assemble_heston",
    "barrier_put_bs",
    "delta_heston",
    "price_bs",
    "price_heston",
    "solve_blocks",
    "solve_bs",
    "solve_heston",
]
