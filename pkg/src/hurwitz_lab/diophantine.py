"""Continued fractions, irrationality-exponent estimates and the two Diophantine sums.

The Kruse sum is sum_{h<=N} ||h alpha||^(-eta); the bilinear sum is
sum_{h<=x} sum_{k<=y} e(-alpha d h k). Both rely on the exact fixed-point
reduction of h*alpha mod 1 in :mod:`hurwitz_lab.shift`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from math import isqrt

import numpy as np

from .shift import FRAC_BITS, ShiftParameter, as_shift
from .summation import exact_sum, exact_sum_complex

GROWTH_CONSTANT = 10.0
MAX_Q_BITS = 1 << 16
_CHUNK = 1 << 20


class PrecisionExhaustedWarning(UserWarning):
    """The expansion stopped because the input's rounding error was reached."""


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients a_0, a_1, ... and convergents p_k/q_k (exact integers).

    ``value`` is the exact rational that was expanded (for floats, the double
    itself). ``terminated`` is set when the expansion reached that value
    exactly; ``precision_exhausted`` when it stopped at the rounding guard.
    """

    a: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    value: Fraction
    terminated: bool = False
    precision_exhausted: bool = False

    def __len__(self) -> int:
        return len(self.a)

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.p[k], self.q[k])

    def determinants(self) -> list[int]:
        """p_k q_{k-1} - p_{k-1} q_k for k >= 1."""
        return [self.p[k] * self.q[k - 1] - self.p[k - 1] * self.q[k] for k in range(1, len(self.a))]


def _convergents(a) -> tuple[list[int], list[int]]:
    p, q = [], []
    p_prev, q_prev, p_cur, q_cur = 0, 1, 1, 0
    for ai in a:
        p_new, q_new = ai * p_cur + p_prev, ai * q_cur + q_prev
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_new, q_new
        p.append(p_new)
        q.append(q_new)
    return p, q


def cf_from_quotients(a, value: Fraction | None = None) -> ContinuedFraction:
    a = tuple(int(x) for x in a)
    p, q = _convergents(a)
    if value is None:
        value = Fraction(p[-1], q[-1])
    return ContinuedFraction(a=a, p=tuple(p), q=tuple(q), value=value, terminated=value == Fraction(p[-1], q[-1]))


def expand_cf(alpha, max_q: int = 1 << 62, ulp: Fraction | None = None) -> ContinuedFraction:
    """Continued fraction of ``alpha`` with every convergent q_k <= max_q.

    Floats are expanded exactly (a double is a dyadic rational) and the
    expansion stops once |alpha - p_k/q_k| < 4 ulp(alpha), past which the
    quotients describe rounding noise rather than the intended number. A
    Fraction is expanded without a guard unless ``ulp`` is given.
    """
    if isinstance(alpha, ShiftParameter):
        return alpha.cf
    if isinstance(alpha, Fraction):
        x = alpha
    else:
        xf = float(alpha)
        if not math.isfinite(xf):
            raise ValueError("alpha must be finite")
        x = Fraction(xf)
        if ulp is None:
            ulp = Fraction(math.ulp(xf))
    if max_q < 1:
        raise ValueError("max_q must be positive")
    guard = None if ulp is None else 4 * ulp

    a: list[int] = []
    p: list[int] = []
    q: list[int] = []
    # (p_{-2}, q_{-2}) = (0, 1), (p_{-1}, q_{-1}) = (1, 0)
    p_prev, q_prev, p_cur, q_cur = 0, 1, 1, 0
    rest = x
    terminated = exhausted = False
    while True:
        ak = math.floor(rest)
        p_new, q_new = ak * p_cur + p_prev, ak * q_cur + q_prev
        if q_new > max_q:
            break
        a.append(ak)
        p.append(p_new)
        q.append(q_new)
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_new, q_new
        frac = rest - ak
        if frac == 0:
            terminated = True
            break
        if guard is not None and abs(x - Fraction(p_new, q_new)) < guard:
            exhausted = True
            warnings.warn(
                f"continued fraction stopped at q={q_new}: input precision exhausted",
                PrecisionExhaustedWarning,
                stacklevel=2,
            )
            break
        rest = 1 / frac
    return ContinuedFraction(a=tuple(a), p=tuple(p), q=tuple(q), value=x, terminated=terminated,
                             precision_exhausted=exhausted)


def irrationality_exponent_estimate(cf: ContinuedFraction, window: int = 3) -> float:
    """Finite-data estimate of mu(alpha) = 1 + limsup log q_{k+1} / log q_k.

    The limsup is replaced by the maximum over the last ``window`` available
    ratios with q_k > 10. Early ratios are dominated by small-number effects
    (log 2 / log 1 and the like) and say nothing about the tail.
    """
    if len(cf.q) < 4:
        raise InsufficientDataError("need at least 4 convergents")
    ratios = [math.log(cf.q[k + 1]) / math.log(cf.q[k]) for k in range(len(cf.q) - 1) if cf.q[k] > 10]
    if not ratios:
        raise InsufficientDataError("no convergent denominators above 10")
    return 1.0 + max(ratios[-window:])


def growth_check(cf: ContinuedFraction, delta: float, C: float = GROWTH_CONSTANT) -> bool:
    """True iff q_{k+1} <= C q_k^(2 - delta) for every stored k with q_k > 100."""
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    log_c = math.log(C)
    for k in range(len(cf.q) - 1):
        if cf.q[k] > 100 and math.log(cf.q[k + 1]) > log_c + (2.0 - delta) * math.log(cf.q[k]):
            return False
    return True


def nearest_int_dist(x):
    """||x||, the distance from x to the nearest integer."""
    if np.ndim(x) == 0:
        x = float(x)
        return abs(x - round(x))
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.round(x))


@dataclass(frozen=True)
class FractionalPartSum:
    alpha: ShiftParameter
    N: int
    eta: float
    value: float

    @property
    def ratio(self) -> float:
        return self.value / self.N


def _chunks(n: int, size: int = _CHUNK):
    for lo in range(1, n + 1, size):
        yield lo, min(n, lo + size - 1)


def kruse_sum(alpha, N: int, eta: float) -> FractionalPartSum:
    """sum_{h=1}^{N} ||h alpha||^(-eta), correctly rounded.

    ||h alpha|| comes from the exact fixed-point reduction, so the smallest
    distances (about 1/q_{k+1} for h near q_k) keep full relative precision.
    """
    alpha = as_shift(alpha)
    N = int(N)
    if N < 1 or N > 10**8:
        raise ValueError("N must lie in [1, 1e8]")
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must lie in (0, 1]")
    if alpha.is_rational and N >= alpha.exact.denominator:
        raise ValueError("||h alpha|| vanishes at multiples of the denominator; need N < q")
    partials = []
    for lo, hi in _chunks(N):
        h = np.arange(lo, hi + 1, dtype=np.uint64)
        d = alpha.dist_multiples(h)
        partials.append(exact_sum(d ** (-eta)))
    return FractionalPartSum(alpha=alpha, N=N, eta=float(eta), value=math.fsum(partials))


def bilinear_exp_sum(alpha, d: int, x: int, y: int) -> complex:
    """sum_{h<=x} sum_{k<=y} e(-alpha d h k) in O(x) operations.

    The inner sum over k is geometric: with r = -d h alpha reduced into
    [-1/2, 1/2), it equals e(r (y+1)/2) sin(pi r y) / sin(pi r), or y when r = 0.
    """
    alpha = as_shift(alpha)
    d, x, y = int(d), int(x), int(y)
    if d < 1 or x < 1 or y < 1:
        raise ValueError("d, x, y must be positive")
    parts = []
    for lo, hi in _chunks(x):
        h = np.arange(lo, hi + 1, dtype=np.uint64)
        r = -alpha.signed_frac_multiples(h * np.uint64(d))
        # -(-1/2) = 1/2 is still a valid representative
        zero = r == 0.0
        rs = np.where(zero, 1.0, r)
        inner = np.exp(1j * math.pi * rs * (y + 1)) * np.sin(math.pi * rs * y) / np.sin(math.pi * rs)
        inner = np.where(zero, float(y), inner)
        parts.append(exact_sum_complex(inner))
    total = complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
    return total


def bilinear_exp_sum_direct(alpha, d: int, x: int, y: int) -> complex:
    """O(xy) reference evaluation with exact phase reduction."""
    alpha = as_shift(alpha)
    h = np.arange(1, x + 1, dtype=np.uint64)[:, None]
    k = np.arange(1, y + 1, dtype=np.uint64)[None, :]
    r = alpha.signed_frac_multiples((h * k * np.uint64(d)).ravel())
    return exact_sum_complex(np.exp(-2j * math.pi * r))


def _ceil_power(q: int, e: float) -> int:
    """ceil(q ** e) for an integer q >= 1 and real e >= 0."""
    if float(e).is_integer():
        return q ** int(e)
    digits = int(len(str(q)) * max(e, 1.0)) + 30
    with localcontext() as ctx:
        ctx.prec = digits
        v = Decimal(q) ** Decimal(repr(float(e)))
        return int(v.to_integral_value(rounding="ROUND_CEILING"))


def synth_liouville(growth_exponent: float, depth: int) -> tuple[ShiftParameter, ContinuedFraction]:
    """A number whose continued fraction has a_{k+1} = ceil(q_k^(e-2)) for k < depth.

    Then log q_{k+1} / log q_k tends to e - 1. Past ``depth`` the expansion
    continues with partial quotients 1 so that alpha is irrational; the value
    is (p_d phi + p_{d-1}) / (q_d phi + q_{d-1}) with phi the golden ratio,
    stored to 128 fractional bits. The returned ContinuedFraction holds the
    constructed part only.
    """
    e = float(growth_exponent)
    if e < 2.0:
        raise ValueError("growth exponent must be at least 2")
    if not (1 <= depth <= 30):
        raise ValueError("depth must lie in [1, 30]")
    a = [0]
    q_prev, q_cur = 0, 1
    for _ in range(depth):
        ak = max(1, _ceil_power(q_cur, e - 2.0))
        a.append(ak)
        q_prev, q_cur = q_cur, ak * q_cur + q_prev
        if q_cur.bit_length() > MAX_Q_BITS:
            raise OverflowError(f"convergent denominator exceeds {MAX_Q_BITS} bits")
    p, q = _convergents(a)
    # phi = (1 + sqrt5)/2 with enough bits that the error in alpha is below 2**-(FRAC_BITS+64)
    bits = FRAC_BITS + 64 + 2 * q[-1].bit_length()
    phi = Fraction(isqrt(5 << (2 * bits)) + (1 << bits), 1 << (bits + 1))
    value = (p[-1] * phi + p[-2]) / (q[-1] * phi + q[-2])
    fixed = (value.numerator << FRAC_BITS) // value.denominator
    cf = ContinuedFraction(a=tuple(a), p=tuple(p), q=tuple(q), value=value)
    tag = f"liouville:{e:g},{depth}"
    return ShiftParameter.from_fixed(fixed, tag=tag, cf=cf), cf
