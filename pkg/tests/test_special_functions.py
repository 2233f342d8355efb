import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hurwitz_lab.special_functions import (PoleError, additive_char, chi_critical, chi_factor, kernel_G, log_chi,
                                           log_gamma)


def mp_chi(s):
    s = mpmath.mpc(s)
    return complex(mpmath.pi ** (s - 0.5) * mpmath.gamma((1 - s) / 2) / mpmath.gamma(s / 2))


@pytest.mark.parametrize("z, expected", [(1, 0.0), (5, math.log(24)), (0.5, 0.5723649429247001)])
def test_log_gamma_examples(z, expected):
    assert abs(log_gamma(z) - expected) < 1e-14


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(-1e4, 1e4))
def test_log_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    if abs(z.imag) < 1e-3 and z.real < 0.5 and abs(z.real - round(z.real)) < 1e-3:
        return
    ref = complex(mpmath.loggamma(mpmath.mpc(x, y)))
    assert abs(log_gamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_chi_examples():
    assert abs(chi_factor(0.5) - 1.0) < 1e-15
    assert abs(abs(chi_factor(0.5 + 100j)) - 1.0) < 1e-10
    s = 0.3 + 7j
    assert abs(chi_factor(s) * chi_factor(1 - s) - 1.0) < 1e-10


@pytest.mark.parametrize("s", [0.5 + 3j, 2.5 - 11j, -3.2 + 0.7j, 0.9 + 1000j])
def test_chi_matches_gamma_quotient(s):
    assert abs(chi_factor(s) - mp_chi(s)) <= 1e-11 * abs(mp_chi(s))


def test_chi_riemann_functional_equation():
    # zeta(s) = chi(s) zeta(1 - s) pins down the sign of the pi exponent
    for s in (0.3 + 7j, 2.0 + 1j, -1.5 + 20j):
        lhs = complex(mpmath.zeta(s))
        assert abs(lhs - chi_factor(s) * complex(mpmath.zeta(1 - s))) < 1e-10 * max(1, abs(lhs))


@pytest.mark.parametrize("s", [1, 3, 5, 0, -2, -4])
def test_chi_excluded_points(s):
    with pytest.raises(PoleError):
        chi_factor(s)


def test_chi_modulus_on_critical_line():
    t = np.random.default_rng(3).uniform(1, 1e5, 100)
    assert np.max(np.abs(np.abs(chi_factor(0.5 + 1j * t)) - 1)) < 1e-9
    assert np.max(np.abs(chi_critical(t) - chi_factor(0.5 + 1j * t))) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20), st.floats(0.01, 1e4))
def test_chi_reflection(x, y):
    s = complex(x, y)
    assert abs(chi_factor(s) * chi_factor(1 - s) - 1) < 1e-9


def test_log_chi_large_height_is_finite():
    assert abs(abs(cmath.exp(log_chi(0.5 + 5e5j))) - 1) < 1e-9


def test_kernel_examples():
    assert kernel_G(0) == 1
    assert abs(kernel_G(2j) - math.exp(-4)) < 1e-16
    assert kernel_G(1 + 1j) == kernel_G(-1 - 1j)


def test_kernel_symmetries_on_grid():
    x, y = np.meshgrid(np.linspace(-3, 3, 41), np.linspace(-3, 3, 41))
    z = x + 1j * y
    assert np.array_equal(kernel_G(z), kernel_G(-z))
    assert np.array_equal(np.conj(kernel_G(z)), kernel_G(np.conj(z)))


def test_kernel_decay_in_vertical_direction():
    # |exp((x+iy)^2)| = exp(x^2 - y^2) <= exp(C^2) exp(-y^2) for |x| <= C
    C = 2.0
    x, y = np.meshgrid(np.linspace(-C, C, 21), np.linspace(-10, 10, 81))
    assert np.all(np.abs(kernel_G(x + 1j * y)) <= math.exp(C * C) * np.exp(-y * y) * (1 + 1e-12))


@pytest.mark.parametrize("x, expected", [(0.0, 1), (0.5, -1), (0.25, 1j)])
def test_additive_char_examples(x, expected):
    assert abs(additive_char(x) - expected) < 1e-15


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e6, 1e6))
def test_additive_char_periodic(x):
    assert abs(additive_char(x + 1) - additive_char(x)) < 1e-12
    assert abs(abs(additive_char(x)) - 1) < 1e-15
