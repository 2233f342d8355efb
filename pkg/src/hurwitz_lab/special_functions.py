"""Complex special functions: log-gamma, the chi factor, the smoothing kernel and e(x)."""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import special

LOG_PI = math.log(math.pi)
TWO_PI = 2.0 * math.pi


class PoleError(ValueError):
    """Raised when a function is evaluated at one of its poles."""


def _is_nonpositive_integer(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _check_finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"{what} produced a non-finite value")
    return value


def log_gamma(z):
    """Principal-branch log Gamma for complex scalars or arrays.

    Raises PoleError at the non-positive integers.
    """
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError(f"Gamma has a pole at {z!r}")
    out = special.loggamma(np.asarray(z, dtype=complex))
    _check_finite(out, "log_gamma")
    return complex(out) if np.ndim(out) == 0 else out


def log_chi(s):
    """log chi(s) with chi(s) = pi^(s-1/2) Gamma((1-s)/2) / Gamma(s/2)."""
    s = np.asarray(s, dtype=complex)
    if np.any(_is_nonpositive_integer((1.0 - s) / 2.0)):
        raise PoleError("chi has a pole at s = 1, 3, 5, ...")
    if np.any(_is_nonpositive_integer(s / 2.0)):
        raise PoleError("chi vanishes at s = 0, -2, -4, ...")
    out = (s - 0.5) * LOG_PI + special.loggamma((1.0 - s) / 2.0) - special.loggamma(s / 2.0)
    return complex(out) if np.ndim(out) == 0 else out


def chi_factor(s):
    """The factor in zeta(s) = chi(s) zeta(1-s).

    Evaluated in log space so that |Im s| in the hundreds of thousands does
    not overflow the individual gamma values.
    """
    out = np.exp(log_chi(s))
    _check_finite(out, "chi_factor")
    return complex(out) if np.ndim(out) == 0 else out


def chi_critical(t):
    """chi(1/2 + it) for real t (scalar or array); modulus one."""
    t = np.asarray(t, dtype=float)
    lc = log_chi(0.5 + 1j * t)
    # |chi| = 1 on the critical line; drop the rounding in the real part
    out = np.exp(1j * np.imag(lc))
    return complex(out) if np.ndim(out) == 0 else out


def kernel_G(z):
    """Smoothing kernel G(z) = exp(z^2): entire, even and conjugate-symmetric."""
    if np.ndim(z) == 0:
        return cmath.exp(complex(z) ** 2)
    z = np.asarray(z, dtype=complex)
    return np.exp(z * z)


def additive_char(x):
    """e(x) = exp(2 pi i x), with x reduced modulo 1 first."""
    if np.ndim(x) == 0:
        r = float(x) - round(float(x))
        return cmath.exp(1j * TWO_PI * r)
    x = np.asarray(x, dtype=float)
    return np.exp(1j * TWO_PI * (x - np.round(x)))
