"""Heston European prices by Fourier inversion of the log-price characteristic function."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from ..errors import ArgumentError, QuadratureError
from ..models.charfun import heston_logprice_charfun
from ..models.params import HestonParams

_KINDS = ("call", "put", "digital_call")


def _cutoff(phi, tiny: float = 1e-18) -> float:
    # first frequency beyond which the characteristic function is negligible
    w = 16.0
    while abs(phi(w)) > tiny and w < 1e7:
        w *= 2.0
    return w


def _probabilities(p: HestonParams, S: float, v: float, E: float, T: float, tol: float):
    """(I1, I2): (1/pi) int Re(e^{-iwk} phi(w - i)/(iw)) dw and the same with phi(w)."""
    x, k = math.log(S), math.log(E)
    phi = lambda w: complex(heston_logprice_charfun(p, w, x, v, T))  # noqa: E731

    def f_share(w):
        return (np.exp(-1j * w * k) * phi(w - 1j) / (1j * w)).real

    def f_prob(w):
        return (np.exp(-1j * w * k) * phi(w) / (1j * w)).real

    top = _cutoff(phi)
    out = []
    for f in (f_share, f_prob):
        with warnings.catch_warnings():
            # the error estimate is checked below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, 0.0, top, epsabs=tol, epsrel=tol, limit=2000)
        if err > 100 * tol * max(1.0, abs(val)):
            raise QuadratureError("Fourier inversion did not converge", err)
        out.append(val / math.pi)
    return out[0], out[1]


def heston_vanilla(
    p: HestonParams, kind: str, S: float, v: float, E: float, T: float, tol: float = 1e-12
) -> float:
    """European call, put or cash-or-nothing call (paying 1) under Heston."""
    if kind not in _KINDS:
        raise ArgumentError(f"kind must be one of {_KINDS}, got {kind!r}")
    if not (S > 0 and E > 0 and T > 0 and v > 0):
        raise ArgumentError("S, E, T and v must be positive")
    disc = math.exp(-p.r * T)
    fwd = S * math.exp((p.r - p.delta) * T)
    i_share, i_prob = _probabilities(p, S, v, E, T, tol)
    if kind == "call":
        return disc * (0.5 * (fwd - E) + i_share - E * i_prob)
    if kind == "put":
        return disc * (0.5 * (E - fwd) + i_share - E * i_prob)
    return disc * (0.5 + i_prob)
