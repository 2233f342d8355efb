"""The shift parameter alpha and exact fixed-point reduction of multiples of alpha mod 1."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt

import numpy as np

FRAC_BITS = 128
_ONE = 1 << FRAC_BITS
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_HALF64 = np.uint64(1 << 63)
_TWO_M64 = 2.0**-64


class DecimalShiftWarning(UserWarning):
    """A decimal literal was given for alpha; it is treated as the rational it denotes."""


def _limbs(value: int) -> list[np.uint64]:
    return [np.uint64((value >> (32 * i)) & 0xFFFFFFFF) for i in range(4)]


def fixed_point_multiples(fixed: int, m) -> np.ndarray:
    """Top 64 bits of (fixed * m mod 2**128) for a 128-bit fraction ``fixed``.

    ``m`` is an array of non-negative integers below 2**64. The result is the
    fractional part of m*alpha scaled by 2**64, exact up to truncation of the
    bits below 2**-64 (plus m * 2**-128 from the representation of alpha).
    """
    m = np.asarray(m, dtype=np.uint64)
    a = _limbs(fixed)
    mj = [m & _MASK32, m >> _SHIFT32]
    cols = [np.zeros_like(m) for _ in range(4)]
    for i in range(4):
        for j in range(2):
            k = i + j
            if k > 3:
                continue
            p = a[i] * mj[j]
            cols[k] += p & _MASK32
            if k + 1 <= 3:
                cols[k + 1] += p >> _SHIFT32
    carry = cols[0] >> _SHIFT32
    c1 = cols[1] + carry
    carry = c1 >> _SHIFT32
    c2 = cols[2] + carry
    carry = c2 >> _SHIFT32
    c3 = (cols[3] + carry) & _MASK32
    return (c3 << _SHIFT32) | (c2 & _MASK32)


def top64_to_distance(u: np.ndarray) -> np.ndarray:
    """||x|| from the 64-bit scaled fractional part of x."""
    u = np.asarray(u, dtype=np.uint64)
    d = np.where(u < _HALF64, u, (~u) + np.uint64(1))
    return d.astype(np.float64) * _TWO_M64


def top64_to_signed(u: np.ndarray) -> np.ndarray:
    """Representative of the fractional part in [-1/2, 1/2)."""
    u = np.asarray(u, dtype=np.uint64)
    pos = u < _HALF64
    mag = np.where(pos, u, (~u) + np.uint64(1)).astype(np.float64) * _TWO_M64
    return np.where(pos, mag, -mag)


def top64_to_unit(u: np.ndarray) -> np.ndarray:
    """Fractional part in [0, 1) as float (absolute error 2**-53)."""
    return np.asarray(u, dtype=np.uint64).astype(np.float64) * _TWO_M64


def _scale_residues(res: np.ndarray, q: int) -> np.ndarray:
    """floor(res * 2**64 / q) for residues 0 <= res < q < 2**31."""
    q64 = np.uint64(q)
    hi = (res << _SHIFT32) // q64
    rem = (res << _SHIFT32) % q64
    lo = (rem << _SHIFT32) // q64
    return (hi << _SHIFT32) | lo


def _fixed_from_fraction(x: Fraction) -> int:
    return (x.numerator << FRAC_BITS) // x.denominator


@dataclass(frozen=True)
class ShiftParameter:
    """A shift 0 < alpha <= 1.

    ``kind`` is ``"rational"`` (then ``exact`` holds a/q) or ``"irrational"``
    (then ``fixed`` holds floor(alpha * 2**128), enough for every reduction of
    h*alpha mod 1 this package performs). ``tag`` names the number for caches
    and reports.
    """

    value: float
    kind: str
    tag: str
    exact: Fraction | None = None
    fixed: int = 0
    _cf: object = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not (0.0 < self.value <= 1.0):
            raise ValueError(f"shift must lie in (0, 1], got {self.value}")
        if self.kind not in ("rational", "irrational"):
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.kind == "rational":
            if self.exact is None or not (0 < self.exact <= 1):
                raise ValueError("rational shift needs an exact value in (0, 1]")
            object.__setattr__(self, "fixed", _fixed_from_fraction(self.exact) % _ONE)
        elif self.fixed <= 0 or self.fixed >= _ONE:
            raise ValueError("irrational shift needs a 128-bit fraction in (0, 1)")

    # constructors ---------------------------------------------------------

    @classmethod
    def rational(cls, a: int, q: int) -> "ShiftParameter":
        x = Fraction(a, q)
        return cls(value=float(x), kind="rational", tag=f"rational:{x.numerator}/{x.denominator}", exact=x)

    @classmethod
    def golden(cls) -> "ShiftParameter":
        # (sqrt5 - 1)/2 to 128 fractional bits
        fixed = (isqrt(5 << (2 * FRAC_BITS)) - _ONE) >> 1
        return cls(value=(math.sqrt(5.0) - 1.0) / 2.0, kind="irrational", tag="golden", fixed=fixed)

    @classmethod
    def sqrt2m1(cls) -> "ShiftParameter":
        fixed = isqrt(2 << (2 * FRAC_BITS)) - _ONE
        return cls(value=math.sqrt(2.0) - 1.0, kind="irrational", tag="sqrt2m1", fixed=fixed)

    @classmethod
    def from_fixed(cls, fixed: int, tag: str, cf=None) -> "ShiftParameter":
        return cls(value=fixed / _ONE, kind="irrational", tag=tag, fixed=fixed, _cf=cf)

    @classmethod
    def from_float(cls, x: float) -> "ShiftParameter":
        """A double is a rational number; it is stored as such."""
        return cls.from_fraction(Fraction(x))

    @classmethod
    def from_fraction(cls, x: Fraction) -> "ShiftParameter":
        return cls(value=float(x), kind="rational", tag=f"rational:{x.numerator}/{x.denominator}", exact=x)

    @classmethod
    def parse(cls, spec: str) -> "ShiftParameter":
        """Parse ``golden``, ``sqrt2m1``, ``rational:a/q``, ``liouville:e,depth`` or a decimal."""
        spec = spec.strip()
        if spec == "golden":
            return cls.golden()
        if spec == "sqrt2m1":
            return cls.sqrt2m1()
        if spec.startswith("rational:"):
            a, _, q = spec[len("rational:"):].partition("/")
            return cls.rational(int(a), int(q or 1))
        if spec.startswith("liouville:"):
            from .diophantine import synth_liouville

            e, _, depth = spec[len("liouville:"):].partition(",")
            shift, _cf = synth_liouville(float(e), int(depth or 10))
            return shift
        try:
            x = Fraction(spec)
        except ValueError:
            raise ValueError(f"cannot parse shift {spec!r}") from None
        warnings.warn(
            f"decimal shift {spec} is the rational {x}; use a named preset for irrationals",
            DecimalShiftWarning,
            stacklevel=2,
        )
        return cls.from_fraction(x)

    # derived data ----------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def fraction(self) -> Fraction:
        """Exact value (rational) or the 128-bit truncation (irrational)."""
        if self.exact is not None:
            return self.exact
        return Fraction(self.fixed, _ONE)

    @cached_property
    def cf(self):
        """Continued fraction with exact convergents, cached on first use."""
        if self._cf is not None:
            return self._cf
        from .diophantine import expand_cf

        if self.is_rational:
            return expand_cf(self.exact, max_q=1 << 62)
        # 128 bits pin down the convergents while q_k q_{k+1} < 2**126
        return expand_cf(self.fraction, max_q=1 << 62, ulp=Fraction(1, _ONE))

    def _small_rational(self) -> bool:
        return self.exact is not None and self.exact.denominator < (1 << 31)

    def frac_multiples(self, m) -> np.ndarray:
        """Fractional parts of m*alpha scaled by 2**64, as uint64.

        Small rationals use exact residues; everything else goes through the
        128-bit fixed-point product.
        """
        if self._small_rational():
            a, q = self.exact.numerator % self.exact.denominator, self.exact.denominator
            m = np.asarray(m, dtype=np.uint64)
            res = ((m % np.uint64(q)) * np.uint64(a)) % np.uint64(q)
            # res/q scaled by 2**64; exact zero stays zero
            return _scale_residues(res, q)
        return fixed_point_multiples(self.fixed, m)

    def dist_multiples(self, m) -> np.ndarray:
        """||m alpha|| for an integer array m."""
        return top64_to_distance(self.frac_multiples(m))

    def signed_frac_multiples(self, m) -> np.ndarray:
        """m*alpha reduced into [-1/2, 1/2)."""
        return top64_to_signed(self.frac_multiples(m))


def as_shift(alpha) -> ShiftParameter:
    if isinstance(alpha, ShiftParameter):
        return alpha
    if isinstance(alpha, str):
        return ShiftParameter.parse(alpha)
    if isinstance(alpha, Fraction):
        return ShiftParameter.from_fraction(alpha)
    if isinstance(alpha, int):
        return ShiftParameter.rational(alpha, 1)
    return ShiftParameter.from_float(float(alpha))
