"""Evaluation of zeta(s, alpha) and P(s, lambda).

Three evaluators live here:

* ``hurwitz_euler_maclaurin``: the slow, trusted reference.
* ``periodic_zeta``: the periodic zeta function, by resumming the tail of the
  Dirichlet series against the geometric character sum.
* ``hurwitz_afe``: the smoothed approximate functional equation on the
  critical line with weights w_t(x) = (1/2 pi i) int (tau/x)^s G(s) ds/s.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .shift import ShiftParameter, as_shift
from .special_functions import PoleError, chi_critical, chi_factor, kernel_G

TWO_PI = 2.0 * math.pi
_TWO_PI_LD = np.arctan(np.longdouble(1)) * 8
EM_ORACLE_MAX_T = 500.0
EM_TERM_BUDGET = 1 << 22
# B_2, B_4, ..., B_14
_BERNOULLI_EVEN = special.bernoulli(14)[2::2]
_EM_COEFFS = [float(_BERNOULLI_EVEN[j - 1] / math.factorial(2 * j)) for j in range(1, 8)]


class NonConvergenceError(RuntimeError):
    """The evaluator exceeded its term budget before reaching the tolerance."""


def _alpha_value(alpha) -> float:
    if isinstance(alpha, ShiftParameter):
        return alpha.value
    a = float(alpha)
    if not (0.0 < a <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {a}")
    return a


# ---------------------------------------------------------------------------
# Euler-Maclaurin oracle


def _power_sum(s: complex, n0: int, n1: int, a: float) -> complex:
    """sum_{n0 <= n < n1} (n+a)^(-s), phases in extended precision, fsum accumulation."""
    if n1 <= n0:
        return 0j
    x = np.arange(n0, n1, dtype=np.longdouble) + np.longdouble(a)
    logx = np.log(x)
    phase = np.fmod(np.longdouble(s.imag) * logx, _TWO_PI_LD).astype(float)
    mag = np.exp(-s.real * logx.astype(float))
    re = mag * np.cos(phase)
    im = -mag * np.sin(phase)
    return complex(math.fsum(re.tolist()), math.fsum(im.tolist()))


def _em_tail(s: complex, x: float) -> tuple[complex, float]:
    """Euler-Maclaurin tail sum_{n >= N} (n+a)^(-s) at x = N + a, plus the size of
    the first omitted correction."""
    xs = cmath.exp(-s * math.log(x))
    total = x * xs / (s - 1.0) + 0.5 * xs
    poch = s
    xpow = xs / x
    err = 0.0
    for j, c in enumerate(_EM_COEFFS, start=1):
        term = c * poch * xpow
        if j == len(_EM_COEFFS):
            err = abs(term)
            break
        total += term
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        xpow /= x * x
    return total, err


def hurwitz_euler_maclaurin(s, alpha, tol: float = 1e-13, return_error: bool = False):
    """zeta(s, alpha) by explicit summation of N terms plus an Euler-Maclaurin tail.

    N starts at max(50, 2|Im s|) and doubles until the first omitted Bernoulli
    correction (through B_12 kept, B_14 as the error estimate) is below ``tol``.
    """
    s = complex(s)
    a = _alpha_value(alpha)
    if s == 1.0:
        raise PoleError("zeta(s, alpha) has a pole at s = 1")
    if abs(s.imag) > 1e6:
        raise ValueError("|Im s| above 1e6 is outside the oracle's range")
    tol = max(float(tol), 1e-13)
    n = int(max(50, math.ceil(2 * abs(s.imag)), math.ceil(2 * abs(s.real))))
    head = _power_sum(s, 0, n, a)
    while True:
        tail, err = _em_tail(s, n + a)
        if err <= tol:
            value = head + tail
            return (value, err) if return_error else value
        if 2 * n > EM_TERM_BUDGET:
            raise NonConvergenceError(f"Euler-Maclaurin needed more than {EM_TERM_BUDGET} terms")
        head += _power_sum(s, n, 2 * n, a)
        n *= 2


def riemann_zeta(s, tol: float = 1e-13) -> complex:
    return hurwitz_euler_maclaurin(s, 1.0, tol)


# ---------------------------------------------------------------------------
# Periodic zeta function


def _geometric_coeffs(z: complex, kmax: int) -> np.ndarray:
    """Taylor coefficients g_k of 1/(1 - z e^x) at x = 0."""
    g = np.zeros(kmax + 1, dtype=complex)
    g[0] = 1.0 / (1.0 - z)
    r = z / (1.0 - z)
    inv_fact = 1.0 / special.factorial(np.arange(kmax + 1))
    for k in range(1, kmax + 1):
        g[k] = r * np.dot(g[k - 1::-1], inv_fact[1:k + 1])
    return g


def periodic_zeta(s, lam: float, tol: float = 1e-13, return_error: bool = False):
    """P(s, lambda) = sum_{n>=1} e(lambda n) n^(-s) for Re s > 0.

    For non-integer lambda the series is summed explicitly up to N and the
    remainder sum_{n>=N} z^n f(n), z = e(lambda), f(x) = x^(-s), is written as
    z^N (1 - z E)^(-1) f(N) = z^N sum_k g_k f^(k)(N), with E the unit shift and
    g_k the Taylor coefficients of 1/(1 - z e^x). This is iterated Abel
    summation against the geometric sum of the character, resummed; the series
    converges geometrically once N exceeds |s| / (2 pi ||lambda||).

    For integer lambda, P(s, lambda) = zeta(s) and the analytic continuation
    is returned (pole at s = 1).
    """
    s = complex(s)
    lam = float(lam)
    lam_red = lam - round(lam)
    tol = max(float(tol), 1e-13)
    if lam_red == 0.0:
        return hurwitz_euler_maclaurin(s, 1.0, tol, return_error)
    if s.real <= 0.0:
        raise ValueError("P(s, lambda) is only implemented for Re s > 0")
    dist = abs(lam_red)
    n_head = max(32, math.ceil((abs(s) + 40.0) / (math.pi * dist)))
    if n_head > EM_TERM_BUDGET:
        raise NonConvergenceError("lambda too close to an integer for the term budget")
    z = cmath.exp(2j * math.pi * lam_red)

    n = np.arange(1, n_head, dtype=np.int64)
    logn = np.log(n.astype(np.longdouble))
    # e(lambda n) n^(-it): combine both phases in extended precision
    phase = np.fmod(np.longdouble(lam_red) * _TWO_PI_LD * n - np.longdouble(s.imag) * logn, _TWO_PI_LD)
    phase = phase.astype(float)
    mag = np.exp(-s.real * logn.astype(float))
    head = complex(math.fsum((mag * np.cos(phase)).tolist()), math.fsum((mag * np.sin(phase)).tolist()))

    kmax = 200
    g = _geometric_coeffs(z, kmax)
    big_n = float(n_head)
    deriv = cmath.exp(-s * math.log(big_n))  # f(N)
    tail = 0j
    prev = err = abs(deriv)
    for k in range(kmax + 1):
        term = g[k] * deriv
        tail += term
        # g_k can vanish for every other k (lambda = 1/2), so look at two terms
        err = max(prev, abs(term))
        prev = abs(term)
        if k > 4 and err < 1e-3 * tol:
            break
        deriv *= (-s - k) / big_n
    zn = cmath.exp(2j * math.pi * ((lam_red * n_head) % 1.0))
    value = head + zn * tail
    return (value, err) if return_error else value


# ---------------------------------------------------------------------------
# Functional-equation residuals


def _fe_coefficients(z: complex) -> tuple[complex, complex]:
    """e^{-pi i z/2} / (2 cos(pi z/2)) and e^{pi i z/2} / (2 cos(pi z/2)), overflow-free."""
    if z.imag >= 0:
        q = cmath.exp(1j * math.pi * z)
        den = 1.0 + q
        if abs(den) == 0.0:
            raise PoleError("cos(pi z / 2) vanishes")
        return 1.0 / den, q / den
    q = cmath.exp(-1j * math.pi * z)
    den = 1.0 + q
    if abs(den) == 0.0:
        raise PoleError("cos(pi z / 2) vanishes")
    return q / den, 1.0 / den


def _is_odd_integer(z: complex) -> bool:
    return z.imag == 0 and z.real == round(z.real) and int(round(z.real)) % 2 == 1


def hurwitz_via_functional_equation(z, alpha) -> complex:
    """Right-hand side of the Hurwitz functional equation for zeta(1 - z, alpha)."""
    z = complex(z)
    if _is_odd_integer(z):
        raise PoleError("cos(pi z / 2) vanishes at odd integers")
    a = _alpha_value(alpha)
    c1, c2 = _fe_coefficients(z)
    return chi_factor(1.0 - z) * (c1 * periodic_zeta(z, a) + c2 * periodic_zeta(z, -a))


def functional_equation_residual(z, alpha) -> float:
    """|zeta(1-z, alpha) - chi(1-z)/(2 cos(pi z/2)) [e^{-pi i z/2} P(z, alpha) + e^{pi i z/2} P(z, -alpha)]|."""
    z = complex(z)
    rhs = hurwitz_via_functional_equation(z, alpha)
    lhs = hurwitz_euler_maclaurin(1.0 - z, alpha)
    return abs(lhs - rhs)


def chi_p_identity_residual(t: float, alpha) -> float:
    """|zeta(1/2+it, alpha) - chi(1/2+it) P(1/2-it, -alpha)|, of size t e^{-pi t}."""
    a = _alpha_value(alpha)
    lhs = hurwitz_euler_maclaurin(complex(0.5, t), a)
    rhs = chi_critical(t) * periodic_zeta(complex(0.5, -t), -a)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Weights


@dataclass(frozen=True)
class WeightProfile:
    """Kernel and contour parameters for w_t(x).

    ``shift_exponent_A`` is the exponent in the decay bounds
    |w - 1| <= C (x/sqrt t)^A and |w| <= C (sqrt t/x)^A. The sums in the
    approximate functional equation are rolled off to zero just after the
    weight drops below ``weight_floor``.
    """

    kernel: Callable = kernel_G
    contour_abscissa: float = 1.0
    shift_exponent_A: float = 3.0
    truncation_height: float = 12.0
    quad_step: float = 0.01
    weight_floor: float = 1e-3

    def __post_init__(self):
        if self.contour_abscissa <= 0:
            raise ValueError("contour abscissa must be positive")
        if self.shift_exponent_A < 1:
            raise ValueError("A must be at least 1")
        if self.truncation_height <= 0 or self.quad_step <= 0:
            raise ValueError("quadrature parameters must be positive")
        if not (0.0 < self.weight_floor < 0.5):
            raise ValueError("weight floor must lie in (0, 1/2)")


DEFAULT_PROFILE = WeightProfile()


def _u_grid(profile: WeightProfile) -> np.ndarray:
    n = int(round(profile.truncation_height / profile.quad_step))
    return profile.quad_step * np.arange(-n, n + 1, dtype=float)


def weight_quadrature(L, profile: WeightProfile = DEFAULT_PROFILE, order: int = 0, shift: bool = True) -> np.ndarray:
    """d^order/dL^order of F(L) = (1/2 pi i) int e^{sL} G(s) ds/s, complex result.

    w_t(x) = F(log(tau/x)). The integral runs over Re s = c with s = c + iu,
    u in [-H, H] by the trapezoid rule. With ``shift`` set, points with L > 0
    use the line Re s = -c instead plus the residue G(0) at s = 0, which keeps
    the integrand from growing like e^{cL}.
    """
    L = np.atleast_1d(np.asarray(L, dtype=float))
    u = _u_grid(profile)
    c = profile.contour_abscissa
    h = profile.quad_step
    out = np.empty(L.shape, dtype=complex)
    flip = (L > 0) if shift else np.zeros(L.shape, dtype=bool)
    for sign in (1.0, -1.0):
        sel = ~flip if sign > 0 else flip
        if not np.any(sel):
            continue
        s = sign * c + 1j * u
        base = profile.kernel(s) * s ** (order - 1)
        Ls = L[sel]
        rows = []
        for lo in range(0, Ls.size, 256):
            blk = Ls[lo:lo + 256]
            rows.append(np.exp(np.outer(blk, s)) @ base)
        vals = np.concatenate(rows) * (h / TWO_PI)
        if sign < 0 and order == 0:
            vals = vals + complex(profile.kernel(0.0))
        out[sel] = vals
    return out


def weight_w(t: float, x, profile: WeightProfile = DEFAULT_PROFILE):
    """w_t(x) by direct quadrature of the defining contour integral (real part)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    tau = math.sqrt(t / TWO_PI)
    vals = weight_quadrature(np.log(tau / x).ravel(), profile).real.reshape(x.shape)
    return float(vals) if vals.ndim == 0 else vals


def weight_closed_form(t: float, x):
    """w_t(x) for G(z) = exp(z^2): (1/2) erfc(log(x/tau)/2)."""
    tau = math.sqrt(t / TWO_PI)
    return 0.5 * special.erfc(np.log(np.asarray(x, dtype=float) / tau) / 2.0)


@dataclass(frozen=True)
class WeightTable:
    """F(L) and its first two derivatives on a fine uniform grid in L.

    Below the weight floor F is rolled off to zero by a C^2 taper over
    ``taper_L`` in L, so a sum truncated at the cutoff is smooth in t.
    """

    L0: float
    dL: float
    F: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    cutoff_L: float  # F(-cutoff_L) = weight floor
    taper_L: float = 0.0
    d2_max: float = 0.0  # max |F''|
    d3_max: float = 0.0  # max |F'''|

    def interp_error(self) -> float:
        """Bound on the linear-interpolation error of F."""
        return self.dL**2 / 8.0 * self.d2_max

    def _interp(self, arr, L):
        idx = (np.asarray(L, dtype=float) - self.L0) / self.dL
        return np.interp(idx, np.arange(arr.size, dtype=float), arr)

    def __call__(self, L, order: int = 0):
        return self._interp((self.F, self.F1, self.F2)[order], L)

    def cutoff_factor(self) -> float:
        """Sums are truncated at x <= tau * cutoff_factor(); beyond it the table is zero."""
        return math.exp(self.cutoff_L + self.taper_L)


_TABLE_SPAN = 14.0
_COARSE_STEP = 0.01
_FINE_STEP = 1e-4
_TAPER = 0.25


def _taper(L: np.ndarray, lo: float, width: float):
    """Smootherstep from 0 at L = lo to 1 at lo + width, with two derivatives."""
    u = np.clip((L - lo) / width, 0.0, 1.0)
    S = u**3 * (10.0 + u * (6.0 * u - 15.0))
    S1 = 30.0 * u**2 * (u - 1.0) ** 2 / width
    S2 = 60.0 * u * (u - 1.0) * (2.0 * u - 1.0) / width**2
    return S, S1, S2


@lru_cache(maxsize=8)
def weight_table(profile: WeightProfile = DEFAULT_PROFILE) -> WeightTable:
    """Memoized weight table; built once per profile (idempotent, so concurrent
    first calls at worst duplicate work)."""
    n = int(round(_TABLE_SPAN / _COARSE_STEP))
    Lc = _COARSE_STEP * np.arange(-n, n + 1)
    F, F1, F2, F3 = (weight_quadrature(Lc, profile, order=k).real for k in range(4))
    m = int(round(_TABLE_SPAN / _FINE_STEP))
    Lf = _FINE_STEP * np.arange(-m, m + 1)
    fine_F = CubicHermiteSpline(Lc, F, F1)(Lf)
    fine_F1 = CubicHermiteSpline(Lc, F1, F2)(Lf)
    fine_F2 = CubicHermiteSpline(Lc, F2, F3)(Lf)
    # F increases from 0 to 1; the cutoff is where it first reaches the floor
    below = np.nonzero(F < profile.weight_floor)[0]
    if below.size == 0:
        raise ValueError("weight floor is below the tabulated range")
    cutoff_L = -float(Lc[below[-1]])
    S, S1, S2 = _taper(Lf, -cutoff_L - _TAPER, _TAPER)
    F_t = fine_F * S
    F1_t = fine_F1 * S + fine_F * S1
    F2_t = fine_F2 * S + 2.0 * fine_F1 * S1 + fine_F * S2
    d3 = np.gradient(F2_t, _FINE_STEP)
    return WeightTable(L0=float(Lf[0]), dL=_FINE_STEP, F=F_t, F1=F1_t, F2=F2_t, cutoff_L=cutoff_L, taper_L=_TAPER,
                       d2_max=float(np.abs(F2_t).max()), d3_max=float(np.abs(d3).max()))


def afe_lengths(t: float, alpha: float, profile: WeightProfile = DEFAULT_PROFILE) -> tuple[int, int]:
    """Number of terms (m = 0..M-1, n = 1..N) kept in the two sums at height t."""
    tau = math.sqrt(t / TWO_PI)
    X = tau * weight_table(profile).cutoff_factor()
    return int(math.floor(X - alpha)) + 1, int(math.floor(X))


def hurwitz_afe(t: float, alpha, profile: WeightProfile = DEFAULT_PROFILE) -> complex:
    """zeta(1/2+it, alpha) from the smoothed approximate functional equation.

    sum_m w_t(m+alpha) (m+alpha)^{-1/2-it} + chi(1/2+it) sum_n e(-n alpha) n^{-1/2+it} w_t(n),
    with w_t rolled off to zero just below the profile's weight floor.
    The approximation error is O(t^{-1/2}).
    """
    t = float(t)
    if t < 10:
        raise ValueError("the approximate functional equation needs t >= 10")
    shift = as_shift(alpha)
    a = shift.value
    table = weight_table(profile)
    tau = math.sqrt(t / TWO_PI)
    M, N = afe_lengths(t, a, profile)
    log_tau = math.log(tau)

    x1 = np.arange(M, dtype=float) + a
    lx1 = np.log(x1)
    w1 = table(log_tau - lx1)
    s1 = np.sum(w1 * np.exp(-0.5 * lx1 - 1j * t * lx1))

    n = np.arange(1, N + 1, dtype=np.uint64)
    lx2 = np.log(n.astype(float))
    w2 = table(log_tau - lx2)
    phase = t * lx2 - TWO_PI * shift.signed_frac_multiples(n)
    s2 = np.sum(w2 * np.exp(-0.5 * lx2 + 1j * phase))
    return complex(s1 + chi_critical(t) * s2)


def zeta_critical(t: float, alpha, profile: WeightProfile = DEFAULT_PROFILE) -> tuple[complex, str]:
    """zeta(1/2+it, alpha) by the method-selection policy: the Euler-Maclaurin
    oracle for |t| <= 500, the approximate functional equation above."""
    if abs(t) <= EM_ORACLE_MAX_T:
        return hurwitz_euler_maclaurin(complex(0.5, t), as_shift(alpha).value), "euler-maclaurin"
    if t < 0:
        return zeta_critical(-t, alpha, profile)[0].conjugate(), "afe"
    return hurwitz_afe(t, alpha, profile), "afe"
