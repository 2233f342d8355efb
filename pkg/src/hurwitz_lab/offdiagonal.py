"""Diagonal and off-diagonal structure of the fourth-moment sum.

Every decision about whether prod (n_i + alpha) equals prod (m_j + alpha) is
made in exact integer arithmetic on the coefficients of the two sides as
polynomials in alpha.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .moments import BudgetExceededError
from .shift import ShiftParameter, as_shift
from .zeta_eval import DEFAULT_PROFILE, TWO_PI, WeightProfile, weight_table

_INT64_SAFE = 1 << 62


class ConsistencyError(RuntimeError):
    """A structural identity that must hold for every off-diagonal tuple failed."""


# ---------------------------------------------------------------------------
# Diagonal equation


@dataclass(frozen=True)
class DiagonalEquationInstance:
    """k-fold diagonal equation with 1 <= n_j <= N under one model of alpha.

    ``model`` is ``generic`` (alpha transcendental: compare all coefficients),
    ``quadratic`` (alpha^2 = r alpha + s) or ``rational`` (alpha = a/q).
    """

    k: int
    model: str
    N: int
    r: int = 0
    s: int = 0
    a: int = 1
    q: int = 1

    def __post_init__(self):
        if self.k not in (2, 3):
            raise ValueError("k must be 2 or 3")
        if self.model not in ("generic", "quadratic", "rational"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.model == "quadratic":
            disc = self.r * self.r + 4 * self.s
            if disc >= 0 and math.isqrt(disc) ** 2 == disc:
                raise ValueError("x^2 - r x - s must be irreducible over the rationals")
        if self.model == "rational" and (self.q < 1 or math.gcd(self.a, self.q) != 1):
            raise ValueError("rational model needs a/q in lowest terms")


@dataclass
class DiagonalResult:
    instance: DiagonalEquationInstance
    count: int
    permutation_count: int
    groups: dict

    @property
    def extra_count(self) -> int:
        """Solutions that are not permutations of each other."""
        return self.count - self.permutation_count

    def solutions(self):
        """Yield every solution as a pair of k-tuples."""
        for members in self.groups.values():
            for left in members:
                for right in members:
                    yield left, right


def _signature_arrays(inst: DiagonalEquationInstance, cols: list[np.ndarray]) -> list[np.ndarray]:
    """Integer invariants that agree iff the two products agree under the model."""
    k = inst.k
    if inst.model == "rational":
        bound = (inst.q * inst.N + abs(inst.a)) ** k
        if bound >= _INT64_SAFE:
            raise OverflowError("coefficient arithmetic would overflow 64-bit integers")
        out = np.ones_like(cols[0])
        for c in cols:
            out = out * (inst.q * c + inst.a)
        return [out]
    if k == 2:
        e1 = cols[0] + cols[1]
        e2 = cols[0] * cols[1]
        # alpha^2 appears on both sides with coefficient 1, so it cancels
        return [e1, e2]
    n1, n2, n3 = cols
    e1 = n1 + n2 + n3
    e2 = n1 * n2 + n1 * n3 + n2 * n3
    e3 = n1 * n2 * n3
    if inst.model == "generic":
        return [e1, e2, e3]
    r, s = inst.r, inst.s
    # alpha^3 = (r^2 + s) alpha + r s and alpha^2 = r alpha + s
    if max(abs(r), abs(s)) * 3 * inst.N**2 >= _INT64_SAFE:
        raise OverflowError("coefficient arithmetic would overflow 64-bit integers")
    return [e3 + s * e1, e2 + r * e1]


def enumerate_diagonal(instance: DiagonalEquationInstance) -> DiagonalResult:
    """All pairs of k-tuples with prod (n_i + alpha) = prod (m_j + alpha), 1 <= n, m <= N."""
    inst = instance
    if inst.k == 2 and inst.N > 500:
        raise ValueError("N <= 500 for k = 2")
    if inst.k == 3 and inst.N > 80:
        raise ValueError("N <= 80 for k = 3")
    grids = np.meshgrid(*([np.arange(1, inst.N + 1, dtype=np.int64)] * inst.k), indexing="ij")
    cols = [g.ravel() for g in grids]
    sig = np.stack(_signature_arrays(inst, cols), axis=1)
    _, inverse, counts = np.unique(sig, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    count = int(np.sum(counts.astype(np.int64) ** 2))

    # permutations: tuples with the same sorted content
    sorted_cols = np.sort(np.stack(cols, axis=1), axis=1)
    _, perm_counts = np.unique(sorted_cols, axis=0, return_counts=True)
    perm_count = int(np.sum(perm_counts.astype(np.int64) ** 2))

    groups: dict = defaultdict(list)
    tuples = np.stack(cols, axis=1)
    multi = np.nonzero(counts[inverse] > 1)[0]
    for idx in multi:
        groups[int(inverse[idx])].append(tuple(int(v) for v in tuples[idx]))
    # singleton classes are solutions paired with themselves
    for idx in np.nonzero(counts[inverse] == 1)[0]:
        groups[int(inverse[idx])] = [tuple(int(v) for v in tuples[idx])]
    return DiagonalResult(instance=inst, count=count, permutation_count=perm_count, groups=dict(groups))


# ---------------------------------------------------------------------------
# Off-diagonal tuples


@dataclass(frozen=True)
class OffDiagonalTuple:
    n1: int
    n2: int
    n3: int
    n4: int
    h1: int
    h2: int

    def __post_init__(self):
        if self.h1 != self.n1 * self.n2 - self.n3 * self.n4 or self.h2 != self.n1 + self.n2 - self.n3 - self.n4:
            raise ConsistencyError("stored h1, h2 do not match the n_j")
        if self.h1 == 0 and self.h2 == 0:
            raise ValueError("(h1, h2) = (0, 0) is diagonal")

    @classmethod
    def from_ns(cls, n1: int, n2: int, n3: int, n4: int) -> "OffDiagonalTuple":
        return cls(n1, n2, n3, n4, n1 * n2 - n3 * n4, n1 + n2 - n3 - n4)


def parametrize_offdiagonal(h1: int, h2: int, n_max: int) -> list[tuple[int, int, int, int, int]]:
    """Solutions of h1 = n1 n2 - n3 n4, h2 = n1 + n2 - n3 - n4 with 1 <= n_j,
    n4 <= n3 <= n_max and n1, n2 < n3, as (n, k, n1, n2, n4) with n = n3, k = n3 - n1.

    For fixed n, k runs over 1 <= k < n with k | n h2 - h1, and then
    n4 = n - h2 - k + (n h2 - h1)/k, n2 = h2 + n4 + k. Output is sorted by (n, k).
    """
    h1, h2, n_max = int(h1), int(h2), int(n_max)
    if h1 == 0 and h2 == 0:
        raise ValueError("(h1, h2) = (0, 0) is the diagonal")
    if not (1 <= n_max <= 10**6):
        raise ValueError("n_max must lie in [1, 1e6]")
    out = []
    for n in range(2, n_max + 1):
        m = n * h2 - h1
        k = np.arange(1, n, dtype=np.int64)
        if m != 0:
            k = k[m % k == 0]
        if k.size == 0:
            continue
        n4 = n - h2 - k + m // k
        n2 = h2 + n4 + k
        ok = (n4 >= 1) & (n4 <= n) & (n2 >= 1) & (n2 < n)
        for kk, a2, a4 in zip(k[ok].tolist(), n2[ok].tolist(), n4[ok].tolist()):
            out.append((n, kk, n - kk, a2, a4))
    return out


def brute_force_offdiagonal(n_max: int, h_range: int | None = None) -> dict:
    """All (n1, n2, n3, n4) with 1 <= n_j, n4 <= n3 <= n_max, n1, n2 < n3, grouped by (h1, h2).

    With ``h_range`` only pairs with |h1|, |h2| <= h_range are kept.
    """
    found: dict = defaultdict(set)
    for n3 in range(2, n_max + 1):
        r = np.arange(1, n3, dtype=np.int64)
        n1, n2, n4 = np.meshgrid(r, r, np.arange(1, n3 + 1, dtype=np.int64), indexing="ij")
        h1 = n1 * n2 - n3 * n4
        h2 = n1 + n2 - n3 - n4
        keep = (h1 != 0) | (h2 != 0)
        if h_range is not None:
            keep &= (np.abs(h1) <= h_range) & (np.abs(h2) <= h_range)
        idx = np.nonzero(keep)
        for a, b, c, d, e in zip(n1[idx].tolist(), n2[idx].tolist(), n4[idx].tolist(), h1[idx].tolist(),
                                 h2[idx].tolist()):
            found[(d, e)].add((a, b, n3, c))
    return found


@dataclass(frozen=True)
class RefinedTuple:
    g: int
    k_g: int
    h1_g: int
    h2_g: int
    n: int
    n_star_g: int


def gcd_refine(tuples, h2: int) -> dict[int, list[RefinedTuple]]:
    """Group parametrized tuples (n, k, n1, n2, n4) by g = gcd(k, h2).

    h1 is recomputed from each tuple. Checks g | h1 and that
    n*_g = n - g k' - g h2' + (n h2' - h1')/k' (primes: divided by g) equals n4.
    """
    h2 = int(h2)
    out: dict[int, list[RefinedTuple]] = defaultdict(list)
    for n, k, n1, n2, n4 in tuples:
        h1 = n1 * n2 - n * n4
        if n1 + n2 - n - n4 != h2:
            raise ConsistencyError(f"tuple {(n, k, n1, n2, n4)} has h2 != {h2}")
        g = math.gcd(k, h2)
        if h1 % g:
            raise ConsistencyError(f"g = {g} does not divide h1 = {h1}")
        kg, h1g, h2g = k // g, h1 // g, h2 // g
        num = n * h2g - h1g
        if num % kg:
            raise ConsistencyError("k/g does not divide n h2/g - h1/g")
        n_star = n - g * kg - g * h2g + num // kg
        if n_star != n4:
            raise ConsistencyError(f"n*_g = {n_star} differs from n4 = {n4}")
        out[g].append(RefinedTuple(g, kg, h1g, h2g, n, n_star))
    return dict(out)


def _offset(h1: int, h2: int, alpha: ShiftParameter) -> float:
    """h1 + h2 alpha, exact for rationals and from the 128-bit value otherwise."""
    return float(h1 + h2 * alpha.fraction)


def near_diagonal_filter(tuples, alpha, T: float, eps: float = 0.1, C: float = 1.0) -> list[OffDiagonalTuple]:
    """Keep tuples with 0 < |h1 + h2 alpha| <= C (n3+alpha)(n4+alpha) / T^(1-eps)."""
    alpha = as_shift(alpha)
    if T < 100:
        raise ValueError("T must be at least 100")
    scale = C / T ** (1.0 - eps)
    a = alpha.value
    kept = []
    for tp in tuples:
        if not isinstance(tp, OffDiagonalTuple):
            tp = OffDiagonalTuple.from_ns(*tp)
        exact = tp.h1 + tp.h2 * alpha.fraction
        if exact == 0:
            continue
        if abs(float(exact)) <= scale * (tp.n3 + a) * (tp.n4 + a):
            kept.append(tp)
    return kept


def diagonal_main_term(alpha, T: float) -> float:
    """2T (sum_{0 <= n <= T} 1/(n+alpha))^2; digamma closed form for large T."""
    a = as_shift(alpha).value if not isinstance(alpha, float) else alpha
    T = float(T)
    if T < 10:
        raise ValueError("T must be at least 10")
    N = int(math.floor(T))
    if N <= 10**6:
        s = math.fsum(1.0 / (np.arange(N + 1) + a))
    else:
        from scipy.special import digamma

        s = float(digamma(N + 1 + a) - digamma(a))
    return 2.0 * T * s * s


@dataclass
class OscillatoryEstimate:
    value: complex
    t: float
    n_max: int
    tuple_count: int
    pair_count: int
    max_exp_ratio: float
    max_exp_ratio_T: float


def offdiag_oscillatory_estimate(alpha, T: float, window=None, eps: float = 0.1, C: float = 1.0,
                                 profile: WeightProfile = DEFAULT_PROFILE, max_tuples: int = 2_000_000
                                 ) -> OscillatoryEstimate:
    """The close off-diagonal sum at t = 3T/2:

        sum 1/(h1 + h2 alpha) {exp(i t x) - 1} w_t(n1+alpha) w_t(n2+alpha) w_t(n3+alpha) w_t(n4+alpha),
        x = (h1 + h2 alpha) / ((n3+alpha)(n4+alpha)),

    over 1 <= n_j <= T^(1/2+eps), n4 <= n3, n1, n2 < n3 and the close condition
    0 < |h1 + h2 alpha| <= C (n3+alpha)(n4+alpha)/T^(1-eps). Each (h1, h2) that
    can satisfy the close condition is expanded with parametrize_offdiagonal.
    ``window`` multiplies by Phi(t/T) (equal to 1 for the bump at t = 3T/2).

    ``max_exp_ratio`` is the largest |exp(itx) - 1| / min(2, t|x|), at most 1.
    ``max_exp_ratio_T`` uses T in place of t and is bounded by t/T = 3/2.
    """
    alpha = as_shift(alpha)
    T = float(T)
    if T > 2e4:
        raise ValueError("T must be at most 2e4")
    t = 1.5 * T
    a = alpha.value
    n_max = int(math.floor(T ** (0.5 + eps)))
    scale = C / T ** (1.0 - eps)
    bound = scale * (n_max + a) ** 2
    table = weight_table(profile)
    log_tau = 0.5 * math.log(t / TWO_PI)
    phi = 1.0 if window is None else float(window.phi(t / T))

    total = 0j
    count = pairs = 0
    worst = worst_T = 0.0
    h2_max = 2 * n_max
    for h2 in range(-h2_max, h2_max + 1):
        center = -h2 * a
        lo, hi = math.ceil(center - bound), math.floor(center + bound)
        for h1 in range(lo, hi + 1):
            if h1 == 0 and h2 == 0:
                continue
            sols = parametrize_offdiagonal(h1, h2, n_max)
            if not sols:
                continue
            kept = near_diagonal_filter((OffDiagonalTuple.from_ns(n1, n2, n, n4) for n, _, n1, n2, n4 in sols),
                                        alpha, T, eps, C)
            if not kept:
                continue
            pairs += 1
            count += len(kept)
            if count > max_tuples:
                raise BudgetExceededError(f"more than {max_tuples} close off-diagonal tuples")
            d = _offset(h1, h2, alpha)
            ns = np.array([[tp.n1, tp.n2, tp.n3, tp.n4] for tp in kept], dtype=float) + a
            x = d / (ns[:, 2] * ns[:, 3])
            osc = np.expm1(1j * t * x)
            w = np.prod(table(log_tau - np.log(ns)), axis=1)
            total += complex(np.sum(osc * w)) / d
            mag = np.abs(osc)
            worst = max(worst, float(np.max(mag / np.minimum(2.0, t * np.abs(x)))))
            worst_T = max(worst_T, float(np.max(mag / np.minimum(2.0, T * np.abs(x)))))
    return OscillatoryEstimate(value=total * phi, t=t, n_max=n_max, tuple_count=count, pair_count=pairs,
                               max_exp_ratio=worst, max_exp_ratio_T=worst_T)
