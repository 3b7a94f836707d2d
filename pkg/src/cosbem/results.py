"""Result records shared by the pricers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PriceResult:
    """Price (and optionally Delta) at one evaluation point.

    ``knocked_out`` is set when the spot lies on or beyond the barrier, in
    which case price and Delta are 0.
    """

    price: float
    delta: float | None = None
    knocked_out: bool = False
    warnings: tuple[str, ...] = ()

    def __float__(self) -> float:
        return self.price
