r"""Logarithm of the modified Bessel function of the first kind.

For large orders the Debye uniform expansion

.. math::
    I_\nu(\nu\zeta) \sim \frac{e^{\nu\eta}}{(2\pi\nu)^{1/2}(1+\zeta^2)^{1/4}}
    \sum_k \frac{U_k(p)}{\nu^k}, \qquad p = (1+\zeta^2)^{-1/2}

is evaluated in a compiled kernel; everything else falls back to the AMOS
routines behind :func:`scipy.special.ive`. Where those return nothing
usable, a power series covers small arguments and the Hankel expansion
covers very large ones.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numba
import numpy as np
from scipy import special

from ..errors import DomainError

MAX_ABS_ARG = 1e6
DEBYE_MIN_ORDER = 20.0
DEBYE_TERMS = 12
# Acceptance region of the expansion: close to the positive real axis, or far
# enough from the anti-Stokes line that the dropped e^{-2 nu eta} term is
# below double precision.
_DEBYE_MAX_ARG = 0.6
_DEBYE_MIN_STOKES = 35.0
# the AMOS routines give up on very large arguments
_HANKEL_MIN_ARG = 1e4


def _debye_polynomials(n_terms: int) -> list[list[Fraction]]:
    """Coefficient lists (ascending powers of p) of U_0..U_{n_terms-1}."""
    polys = [[Fraction(1)]]
    for _ in range(n_terms - 1):
        u = polys[-1]
        deg = len(u) - 1
        out = [Fraction(0)] * (deg + 4)
        # 1/2 p^2 (1 - p^2) u'(p)
        for j in range(1, deg + 1):
            c = Fraction(j) * u[j] / 2
            out[j + 1] += c
            out[j + 3] -= c
        # 1/8 int_0^p (1 - 5 t^2) u(t) dt
        for j, c in enumerate(u):
            out[j + 1] += c / (8 * (j + 1))
            out[j + 3] -= 5 * c / (8 * (j + 3))
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        polys.append(out)
    return polys


_U = _debye_polynomials(DEBYE_TERMS)


@lru_cache(maxsize=64)
def _debye_coefficients(nu: float) -> np.ndarray:
    """Coefficients of sum_k U_k(p) nu^-k as one polynomial in p, highest power first."""
    deg = max(len(u) for u in _U) - 1
    c = np.zeros(deg + 1)
    for k, u in enumerate(_U):
        scale = nu ** (-k)
        for j, coef in enumerate(u):
            c[j] += float(coef) * scale
    return c[::-1].copy()


@numba.njit(nogil=True, cache=True)
def _debye_kernel(nu, z, coeffs, out, max_arg, min_stokes):
    log2pinu = 0.5 * math.log(2.0 * math.pi * nu)
    for k in range(z.size):
        zeta = z[k] / nu
        if zeta.real <= 0.0:
            out[k] = np.nan
            continue
        sq = np.sqrt(1.0 + zeta * zeta)
        p = 1.0 / sq
        eta = sq + np.log(zeta / (1.0 + sq))
        if abs(math.atan2(zeta.imag, zeta.real)) > max_arg and 2.0 * nu * eta.real < min_stokes:
            out[k] = np.nan
            continue
        acc = coeffs[0] + 0j
        for j in range(1, coeffs.size):
            acc = acc * p + coeffs[j]
        out[k] = nu * eta - log2pinu - 0.5 * np.log(sq) + np.log(acc)


def _log_series(nu: float, z: np.ndarray) -> np.ndarray:
    """log I_nu(z) from the ascending series, for small |z|."""
    q = (z / 2.0) ** 2
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 60):
        term = term * q / (k * (nu + k))
        total = total + term
    return nu * np.log(z / 2.0) - special.gammaln(nu + 1.0) + np.log(total)


def _log_hankel(nu: float, z: np.ndarray) -> np.ndarray:
    """log I_nu(z) from the large-argument expansion, Re z > 0 and |z| >> nu^2."""
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 12):
        term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        total = total + term
    return z - 0.5 * np.log(2.0 * np.pi * z) + np.log(total)


def _log_fallback(nu: float, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    large = np.abs(z) > max(_HANKEL_MIN_ARG, 100.0 * nu * nu)
    out[large] = _log_hankel(nu, z[large])
    out[~large] = _log_series(nu, z[~large])
    return out


def _log_amos(nu: float, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = special.ive(nu, z)
        out = np.log(scaled + 0j) + np.abs(z.real)
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _log_fallback(nu, z[bad])
    return out


def log_bessel_i_unchecked(nu: float, z) -> np.ndarray:
    """Complex log I_nu(z) without range checks; imaginary part is defined mod 2*pi."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    flat = np.ascontiguousarray(z.ravel())
    out = np.empty(flat.shape, dtype=complex)
    if nu >= DEBYE_MIN_ORDER and flat.size:
        _debye_kernel(
            float(nu), flat, _debye_coefficients(float(nu)), out, _DEBYE_MAX_ARG, _DEBYE_MIN_STOKES
        )
        pending = np.isnan(out.real)
        if np.any(pending):
            out[pending] = _log_amos(nu, flat[pending])
    elif flat.size:
        out[:] = _log_amos(nu, flat)
    return out.reshape(shape)


def log_bessel_i(nu: float, z):
    """Logarithm of the modified Bessel function I_nu at complex ``z``.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0``.
    z : complex or array_like
        Argument with ``|z| < 1e6``.

    Returns
    -------
    complex or ndarray
        ``log I_nu(z)``; the imaginary part is only meaningful modulo 2*pi,
        so ratios should be formed as ``exp(log_bessel_i(nu, z1) - log_bessel_i(nu, z2))``.
    """
    if nu < 0:
        raise DomainError(f"order must be non-negative, got {nu}")
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) >= MAX_ABS_ARG):
        raise DomainError(f"|z| must be below {MAX_ABS_ARG:g}")
    out = log_bessel_i_unchecked(nu, arr)
    return out[()] if out.ndim == 0 else out


def log_bessel_i_real(nu: float, x) -> np.ndarray:
    """log I_nu(x) for real ``x >= 0`` (``-inf`` at 0 when nu > 0)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(special.ive(nu, x)) + x
    bad = ~np.isfinite(out) & (x > 0)
    if np.any(bad):
        out[bad] = _log_fallback(nu, x[bad].astype(complex)).real
    if nu == 0:
        out[x == 0] = 0.0
    return out
