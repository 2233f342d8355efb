"""Order-independent summation helpers.

``math.fsum`` returns the correctly rounded sum, so chunking and worker count
cannot change a single bit of the result.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


def exact_sum(values) -> float:
    """Correctly rounded sum of a real array or iterable."""
    if isinstance(values, np.ndarray):
        return math.fsum(values.ravel().tolist())
    return math.fsum(values)


def exact_sum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def combine(partials: Iterable[float]) -> float:
    """Merge per-chunk partial sums. Partials should themselves be exact sums of
    disjoint pieces; the result is then independent of the chunking up to the
    rounding of each partial."""
    return math.fsum(partials)
