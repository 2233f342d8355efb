import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hurwitz_lab.shift import DecimalShiftWarning, ShiftParameter, as_shift


def frac_of(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2**63), min_size=1, max_size=20))
def test_fixed_point_reduction_is_exact(ms):
    g = ShiftParameter.golden()
    got = g.frac_multiples(np.array(ms, dtype=np.uint64))
    for m, u in zip(ms, got.tolist()):
        # top 64 bits of the exact 128-bit product
        assert u == (m * g.fixed % 2**128) >> 64


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6), st.integers(0, 2**40))
def test_rational_distance_matches_exact(a, q, m):
    shift = ShiftParameter.from_fraction(Fraction(min(a, q), q))
    exact = frac_of(m * shift.exact)
    want = float(min(exact, 1 - exact))
    assert abs(shift.dist_multiples(np.array([m], dtype=np.uint64))[0] - want) <= 2.0**-52


def test_rational_multiples_of_denominator_vanish():
    s = ShiftParameter.rational(2, 7)
    assert np.all(s.dist_multiples(np.arange(0, 700, 7, dtype=np.uint64)) == 0.0)


def test_parse_presets():
    assert as_shift("golden").tag == "golden"
    assert abs(as_shift("sqrt2m1").value - (2**0.5 - 1)) < 1e-16
    r = as_shift("rational:6/8")
    assert r.exact == Fraction(3, 4) and r.tag == "rational:3/4"
    assert as_shift("liouville:3,6").tag == "liouville:3,6"


def test_decimal_is_rational_with_warning():
    with pytest.warns(DecimalShiftWarning):
        s = as_shift("0.25")
    assert s.is_rational and s.exact == Fraction(1, 4)


@pytest.mark.parametrize("bad", ["0", "1.5", "-0.2", "rational:5/3", "nonsense"])
def test_invalid_shifts(bad):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecimalShiftWarning)
        with pytest.raises(ValueError):
            as_shift(bad)


def test_golden_fixed_point_is_accurate():
    g = ShiftParameter.golden()
    # phi = (sqrt5 - 1)/2 satisfies phi^2 + phi - 1 = 0
    x = Fraction(g.fixed, 2**128)
    assert abs(x * x + x - 1) < Fraction(1, 2**126)
