"""Black-Scholes closed forms."""

from __future__ import annotations

import math

from scipy.special import ndtr

from ..errors import ArgumentError
from ..models.params import BSParams


def bs_vanilla(p: BSParams, kind: str, S: float, E: float, T: float) -> float:
    """European call or put under constant-rate Black-Scholes."""
    if not p.is_constant_rate:
        raise ArgumentError("bs_vanilla needs a constant rate")
    if kind not in ("call", "put"):
        raise ArgumentError(f"kind must be 'call' or 'put', got {kind!r}")
    r, q, sig = p.rate_schedule[0][1], p.dividend, p.sigma
    fwd_s, disc_k = S * math.exp(-q * T), E * math.exp(-r * T)
    sd = sig * math.sqrt(T)
    d1 = (math.log(S / E) + (r - q + 0.5 * sig * sig) * T) / sd
    d2 = d1 - sd
    if kind == "call":
        return fwd_s * ndtr(d1) - disc_k * ndtr(d2)
    return disc_k * ndtr(-d2) - fwd_s * ndtr(-d1)
