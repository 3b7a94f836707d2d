"""Log-scaled modified Bessel function of the first kind."""

import math

import mpmath
import numpy as np
import pytest

from cosbem.errors import DomainError
from cosbem.models.bessel import log_bessel_i, log_bessel_i_real


def mp_log_i(nu, z):
    with mpmath.workdps(40):
        return complex(mpmath.log(mpmath.besseli(nu, mpmath.mpc(z.real, z.imag))))


def same_branchless(a, b):
    # compare logs modulo 2 pi i
    d = a - b
    return complex(d.real, math.remainder(d.imag, 2 * math.pi))


def test_order_zero_at_origin():
    assert log_bessel_i(0.0, 0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("z", [0.1, 1.0, 10.0])
def test_half_integer_closed_form(z):
    # I_{1/2}(z) = sqrt(2/(pi z)) sinh z
    expected = math.log(math.sqrt(2 / (math.pi * z)) * math.sinh(z))
    assert log_bessel_i_real(0.5, np.array([z]))[0] == pytest.approx(expected, rel=1e-13)


def test_integer_order_against_power_series():
    z = 2 + 5j
    total = sum((z / 2) ** (2 * k + 3) / (math.factorial(k) * math.factorial(k + 3)) for k in range(80))
    got = complex(log_bessel_i(3.0, z))
    assert abs(same_branchless(got, np.log(total))) < 1e-12


@pytest.mark.parametrize(
    "nu,z",
    [
        (3.0, 40 + 10j),       # large order-scaled argument
        (15.0, 200 + 80j),
        (0.6, 5000 + 300j),    # large argument
        (2.2, 0.05 + 0.02j),   # small argument
        (7.5, 1.0 + 30j),      # near the imaginary axis
    ],
)
def test_against_mpmath(nu, z):
    got = complex(log_bessel_i(nu, z))
    ref = mp_log_i(nu, z)
    assert abs(same_branchless(got, ref)) < 1e-10 * max(1.0, abs(ref))


def test_huge_argument_rejected():
    with pytest.raises(DomainError):
        log_bessel_i(1.0, 2e6 + 0j)
