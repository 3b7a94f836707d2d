"""Characteristic functions and transition densities.

Black-Scholes quantities live in time-to-maturity coordinates: ``s`` and
``tau`` are measured backwards from ``maturity``, so the drift integral over
``[s, tau]`` is the calendar-time rate integral over
``[maturity - tau, maturity - s]``.

Heston quantities use elapsed time ``dt`` between two observations.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, NumericalInstabilityError
from .bessel import log_bessel_i_real, log_bessel_i_unchecked
from .params import BSParams, HestonParams, reversed_rate_integral


def bs_charfun(p: BSParams, omega, s: float, tau: float, x: float, maturity: float):
    """Fourier transform in ``y`` of the Black-Scholes fundamental solution.

    Returns ``E[exp(i omega Y)]`` where ``Y`` is the log-price at
    time-to-maturity ``s`` started from ``x`` at ``tau > s``.
    """
    if not s < tau:
        raise ArgumentError(f"bs_charfun needs s < tau, got s={s}, tau={tau}")
    dur = tau - s
    drift = reversed_rate_integral(p, s, tau, maturity) - p.dividend * dur
    var = p.sigma**2 * dur
    omega = np.asarray(omega)
    return np.exp(1j * omega * (x + drift - 0.5 * var) - 0.5 * omega**2 * var)


def bs_density(p: BSParams, y, s: float, tau: float, x: float, maturity: float):
    """Closed-form Gaussian fundamental solution G(y, s; x, tau)."""
    dur = tau - s
    drift = reversed_rate_integral(p, s, tau, maturity) - p.dividend * dur
    var = p.sigma**2 * dur
    y = np.asarray(y, dtype=float)
    return np.exp(-((y - x - drift + 0.5 * var) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def _cir_scales(p: HestonParams, dt):
    # c = 2 lam / ((1 - e^{-lam dt}) eta^2) with the subtraction done by expm1
    one_minus = -np.expm1(-p.lam * dt)
    return 2.0 * p.lam / (one_minus * p.eta**2), np.exp(-p.lam * dt)


def variance_density(p: HestonParams, w, dt: float, v: float):
    """CIR transition density p_v(w, dt | v) of the variance.

    Evaluated in log space; ``w == 0`` returns the finite boundary limit,
    which is 0 unless the Feller condition holds with equality.
    """
    if not (dt > 0 and v > 0):
        raise ArgumentError(f"variance_density needs dt > 0 and v > 0, got dt={dt}, v={v}")
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ArgumentError("variance_density needs w >= 0")
    c, decay = _cir_scales(p, dt)
    b = c * v * decay
    q = c * w
    nu = p.a - 1.0
    out = np.zeros_like(w)
    pos = w > 0
    if np.any(pos):
        qp = q[pos]
        x = 2.0 * np.sqrt(b * qp)
        log_val = (
            np.log(c)
            - (np.sqrt(b) - np.sqrt(qp)) ** 2
            - x
            + 0.5 * nu * (np.log(qp) - np.log(b))
            + log_bessel_i_real(nu, x)
        )
        out[pos] = np.exp(log_val)
    if np.any(~pos) and abs(nu) < 1e-12:
        # (q/b)^{0} I_0(0) = 1
        out[~pos] = c * np.exp(-b)
    return out[()] if out.ndim == 0 else out


def variance_moments(p: HestonParams, dt: float, v: float) -> tuple[float, float]:
    """Conditional mean and variance of the CIR variance after ``dt``."""
    decay = np.exp(-p.lam * dt)
    one_minus = -np.expm1(-p.lam * dt)
    mean = v * decay + p.vbar * one_minus
    var = v * p.eta**2 / p.lam * decay * one_minus + p.vbar * p.eta**2 / (2 * p.lam) * one_minus**2
    return float(mean), float(var)


class _PhiTerms:
    """w-independent pieces of the integrated-variance characteristic function.

    ``log Phi(a) = log_pref + (v + w) * bracket + log I(kappa sqrt(v w)) - log I(kappa_lam sqrt(v w))``.
    """

    __slots__ = ("log_pref", "bracket", "kappa", "kappa_lam", "nu")

    def __init__(self, p: HestonParams, a_freq, dt: float):
        lam, eta = p.lam, p.eta
        a_freq = np.asarray(a_freq, dtype=complex)
        gamma = np.sqrt(lam**2 - 2.0 * eta**2 * 1j * a_freq)
        em_g = np.exp(-gamma * dt)
        one_m_g = -np.expm1(-gamma * dt)
        one_m_l = -np.expm1(-lam * dt)
        em_l = np.exp(-lam * dt)
        self.log_pref = (
            np.log(gamma / lam)
            - 0.5 * (gamma - lam) * dt
            + np.log(one_m_l)
            - np.log(one_m_g)
        )
        self.bracket = (lam * (1 + em_l) / one_m_l - gamma * (1 + em_g) / one_m_g) / eta**2
        self.kappa = 4.0 * gamma * np.exp(-0.5 * gamma * dt) / (eta**2 * one_m_g)
        self.kappa_lam = 4.0 * lam * np.exp(-0.5 * lam * dt) / (eta**2 * one_m_l)
        self.nu = p.d / 2.0 - 1.0

    def log_phi(self, v: float, w) -> np.ndarray:
        """log Phi on the outer grid (w along axis 0, frequency along axis 1)."""
        w = np.asarray(w, dtype=float)
        root = np.sqrt(v * w)
        num = log_bessel_i_unchecked(self.nu, np.multiply.outer(root, self.kappa))
        den = log_bessel_i_real(self.nu, root * self.kappa_lam)
        return (
            self.log_pref[None, :]
            + np.multiply.outer(v + w, self.bracket)
            + num
            - den[:, None]
        )


def integrated_variance_charfun(p: HestonParams, a_freq, dt: float, v: float, w: float):
    """Characteristic function of the integrated variance given both endpoints.

    ``E[exp(i a_freq * int_0^dt v_u du) | v_0 = v, v_dt = w]``; Bessel ratios
    are formed in log space.
    """
    if not (dt > 0 and v > 0 and w > 0):
        raise ArgumentError(f"needs dt, v, w > 0, got dt={dt}, v={v}, w={w}")
    a_arr = np.atleast_1d(np.asarray(a_freq, dtype=complex))
    terms = _PhiTerms(p, a_arr, dt)
    with np.errstate(all="ignore"):
        out = np.exp(terms.log_phi(v, np.array([w]))[0])
    out[a_arr == 0] = 1.0
    if not np.all(np.isfinite(out)):
        bad = a_arr[~np.isfinite(out)][0]
        raise NumericalInstabilityError("non-finite integrated-variance charfun", a_freq=bad, dt=dt)
    return out[0] if np.ndim(a_freq) == 0 else out


def phi_argument(p: HestonParams, omega):
    """Frequency at which Phi is evaluated for log-price frequency ``omega``."""
    omega = np.asarray(omega, dtype=float)
    return omega * (p.lam * p.rho / p.eta - 0.5) + 0.5j * omega**2 * (1.0 - p.rho**2)


def log_cond_charfun(p: HestonParams, omega, v: float, w, dt: float, terms: _PhiTerms | None = None):
    """log of the conditional log-price characteristic function, w along axis 0."""
    omega = np.asarray(omega, dtype=float)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if terms is None:
        terms = _PhiTerms(p, phi_argument(p, omega), dt)
    shift = (p.r - p.delta) * dt + np.multiply.outer(
        (p.rho / p.eta) * (w - v - p.lam * p.vbar * dt), np.ones_like(omega)
    )
    out = 1j * omega[None, :] * shift + terms.log_phi(v, w)
    out[:, omega == 0] = 0.0
    return out


def heston_cond_charfun(p: HestonParams, omega, v: float, w: float, dt: float):
    """Characteristic function of the log-price increment given v_0=v, v_dt=w.

    The endpoint-dependent drift ``(rho/eta)(w - v - lam*vbar*dt)`` multiplies
    ``i omega`` together with ``(r - delta) dt``.
    """
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    with np.errstate(all="ignore"):
        out = np.exp(log_cond_charfun(p, omega_arr, v, np.array([w]), dt)[0])
    if not np.all(np.isfinite(out)):
        bad = omega_arr[~np.isfinite(out)][0]
        raise NumericalInstabilityError("non-finite conditional charfun", omega=bad, dt=dt)
    return out[0] if np.ndim(omega) == 0 else out


def _clog1p(z):
    # numpy's complex log1p loses the real part for tiny |z|
    z = np.asarray(z, dtype=complex)
    re, im = z.real, z.imag
    return 0.5 * np.log1p(2.0 * re + re * re + im * im) + 1j * np.arctan2(im, 1.0 + re)


def heston_logprice_charfun(p: HestonParams, omega, x: float, v: float, dt: float):
    """Characteristic function of the log-price after ``dt`` from (x, v).

    Written with ``exp(-D dt)`` throughout so the principal branches of the
    square root and the logarithm stay continuous in ``omega``. Complex
    ``omega`` is accepted (e.g. ``-1j`` for the forward).
    """
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    lam, eta, rho = p.lam, p.eta, p.rho
    w = np.asarray(omega, dtype=complex)
    beta = lam - rho * eta * 1j * w
    D = np.sqrt(beta**2 + (w**2 + 1j * w) * eta**2)
    with np.errstate(all="ignore"):
        # beta - D and the logarithm are O(eta^2); rationalized forms avoid cancellation
        bmd = -(w**2 + 1j * w) * eta**2 / (beta + D)
        C = bmd / (beta + D)
        eD = np.exp(-D * dt)
        one_m_ed = -np.expm1(-D * dt)
        expo = (
            1j * w * ((p.r - p.delta) * dt + x)
            + (v / eta**2) * one_m_ed / (1 - C * eD) * bmd
            + (lam * p.vbar / eta**2) * (dt * bmd - 2 * _clog1p(C * one_m_ed / (1 - C)))
        )
    out = np.exp(expo)
    if not np.all(np.isfinite(out)):
        raise NumericalInstabilityError("non-finite Heston charfun", dt=dt)
    return out[()] if out.ndim == 0 else out
