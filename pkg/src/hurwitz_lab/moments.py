"""Moment integrals of zeta(1/2+it, alpha), their predicted main terms, and the
value-distribution test.

The integrand is sampled once per (alpha, T, grid) and reused for every k:
the smooth window and the sharp interval [T, 2T] share one grid on [T/2, 5T/2],
so M_{2k} for several k and both modes cost a single sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from . import cache as cache_mod
from .critical import grid_error_bound, zeta_grid, zeta_points
from .shift import ShiftParameter, as_shift
from .summation import exact_sum
from .zeta_eval import DEFAULT_PROFILE, WeightProfile, hurwitz_euler_maclaurin

EULER_GAMMA = 0.57721566490153286061
LOG_TWO_PI = math.log(2.0 * math.pi)
MODES = ("sharp_0T", "sharp_T2T", "smooth")
SAMPLER_VERSION = "philox-uniform-1"


class BudgetExceededError(RuntimeError):
    """The quadrature grid would exceed the configured point budget."""


# ---------------------------------------------------------------------------
# Smooth window


@dataclass(frozen=True)
class SmoothWindow:
    phi: Callable
    dphi: Callable
    support: tuple[float, float]
    mass: float


def _bump_core(u):
    u = np.asarray(u, dtype=float)
    g = (u - 0.5) * (2.5 - u)
    inside = g > 0
    gs = np.where(inside, g, 1.0)
    return inside, gs


def _bump(u):
    inside, g = _bump_core(u)
    out = np.where(inside, np.exp(1.0 - 1.0 / g), 0.0)
    return float(out) if out.ndim == 0 else out


def _bump_derivative(u):
    inside, g = _bump_core(u)
    uu = np.asarray(u, dtype=float)
    # d/du (-1/g) = g'/g^2 with g' = 3 - 2u
    out = np.where(inside, np.exp(1.0 - 1.0 / g) * (3.0 - 2.0 * uu) / g**2, 0.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=1)
def make_bump_window() -> SmoothWindow:
    """Phi(u) = exp(1 - 1/((u-1/2)(5/2-u))) on (1/2, 5/2), zero outside; Phi(3/2) = 1."""
    mass, _ = integrate.quad(_bump, 0.5, 2.5, epsabs=1e-13, epsrel=1e-13, limit=200)
    return SmoothWindow(phi=_bump, dphi=_bump_derivative, support=(0.5, 2.5), mass=mass)


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid step h = step_factor / log T; composite Simpson with the h vs 2h
    difference as error estimate."""

    step_factor: float = 0.5
    max_points: int = 4_000_000
    em_max_t: float = 500.0
    workers: int = 1
    profile: WeightProfile = DEFAULT_PROFILE
    cache_dir: object = False

    def step(self, T: float) -> float:
        return self.step_factor / math.log(T)


@dataclass
class MomentEstimate:
    value: float
    k: float
    T: float
    alpha: str
    mode: str
    quad_points: int
    quad_error_estimate: float
    wall_time: float
    step: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.value >= 0 and 0 <= self.quad_error_estimate <= 0.05 * self.value

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MomentEstimate":
        return cls(**d)


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    if n_intervals % 2:
        raise ValueError("Simpson needs an even number of intervals")
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _simpson_pair(f: np.ndarray, h: float) -> tuple[float, float]:
    """Simpson at step h and at 2h (every other node)."""
    n = f.size - 1
    fine = exact_sum(simpson_weights(n, h) * f)
    coarse = exact_sum(simpson_weights(n // 2, 2 * h) * f[::2])
    return fine, coarse


def _round_up(x: float, multiple: int) -> int:
    return max(multiple, multiple * math.ceil(x / multiple))


def _abs2_uniform(alpha: ShiftParameter, t0: float, h: float, n: int, spec: QuadratureSpec) -> np.ndarray:
    """|zeta(1/2+it, alpha)|^2 at t = t0 + j h, j < n: the Euler-Maclaurin oracle
    up to em_max_t, the blocked approximate functional equation above."""
    ts = t0 + h * np.arange(n)
    n_em = int(np.searchsorted(ts, spec.em_max_t, side="right"))
    out = np.empty(n)
    for j in range(n_em):
        out[j] = abs(hurwitz_euler_maclaurin(complex(0.5, ts[j]), alpha.value, tol=1e-12)) ** 2
    if n_em < n:
        z = zeta_grid(alpha, float(ts[n_em]), h, n - n_em, spec.profile, workers=spec.workers)
        out[n_em:] = z.real**2 + z.imag**2
    return out


def _sample_error(alpha: ShiftParameter, t0: float, h: float, n: int, spec: QuadratureSpec) -> np.ndarray:
    """Per-sample bound on the evaluation error of zeta, matching _abs2_uniform."""
    ts = t0 + h * np.arange(n)
    out = np.full(n, 1e-12)
    hi = ts > spec.em_max_t
    out[hi] = grid_error_bound(ts[hi], h, alpha, spec.profile)
    return out


def _power_error(abs2: np.ndarray, eps: np.ndarray, k: float) -> np.ndarray:
    """Bound on how far |z|^{2k} moves when z moves by eps."""
    if k == 0:
        return np.zeros_like(abs2)
    p = 2.0 * k
    if p <= 1.0:
        return eps**p
    return p * (np.sqrt(abs2) + eps) ** (p - 1.0) * eps


_MEMO: dict = {}


def _profile_key(p: WeightProfile) -> dict:
    return {"kernel": getattr(p.kernel, "__name__", repr(p.kernel)), "c": p.contour_abscissa,
            "A": p.shift_exponent_A, "H": p.truncation_height, "du": p.quad_step, "floor": p.weight_floor}


def _samples(alpha: ShiftParameter, t0: float, h: float, n: int, spec: QuadratureSpec) -> np.ndarray:
    key = (alpha.tag, alpha.fixed, t0, h, n, spec.em_max_t, spec.profile)
    if key in _MEMO:
        return _MEMO[key]
    path = None
    cdir = cache_mod.resolve_cache_dir(spec.cache_dir)
    if cdir is not None:
        name = cache_mod.cache_key("abs2", alpha=alpha.tag, fixed=str(alpha.fixed), t0=repr(t0), h=repr(h), n=n,
                                   em=spec.em_max_t, profile=_profile_key(spec.profile))
        path = cdir / f"abs2-{name}.npz"
        hit = cache_mod.load_arrays(path)
        if hit is not None:
            _MEMO[key] = hit[1]["abs2"]
            return _MEMO[key]
    vals = _abs2_uniform(alpha, t0, h, n, spec)
    if path is not None:
        cache_mod.save_arrays(path, {"alpha": alpha.tag, "t0": t0, "h": h, "n": n}, abs2=vals)
    _MEMO[key] = vals
    return vals


def clear_sample_memo() -> None:
    _MEMO.clear()


def _power(abs2: np.ndarray, k: float) -> np.ndarray:
    if k == 0:
        return np.ones_like(abs2)
    with np.errstate(divide="ignore"):
        return np.where(abs2 > 0, np.exp(k * np.log(np.where(abs2 > 0, abs2, 1.0))), 0.0)


def window_grid(T: float, spec: QuadratureSpec) -> tuple[float, float, int]:
    """(t0, h, n_intervals) for [T/2, 5T/2]; n_intervals is a multiple of 8 so that
    [T, 2T] is a sub-grid with a multiple of 4 intervals."""
    n_int = _round_up(2.0 * T / spec.step(T), 8)
    return T / 2.0, 2.0 * T / n_int, n_int


def moment_integral(alpha, T: float, k: float, mode: str = "sharp_T2T", spec: QuadratureSpec | None = None,
                    window: SmoothWindow | None = None) -> MomentEstimate:
    """Simpson approximation of a 2k-th moment.

    The error estimate adds the Simpson step-h versus step-2h difference to a
    bound on the integrated evaluation error of the samples.

    ``mode`` is ``sharp_0T`` (int_0^T), ``sharp_T2T`` (int_T^{2T}) or ``smooth``
    (int |zeta|^{2k} Phi(t/T) dt with the bump window).
    """
    alpha = as_shift(alpha)
    spec = spec or QuadratureSpec()
    T = float(T)
    if T < 100:
        raise ValueError("T must be at least 100")
    if not (0.0 <= k <= 4.0):
        raise ValueError("k must lie in [0, 4]")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    start = time.perf_counter()
    h_target = spec.step(T)

    if mode == "sharp_0T":
        n0 = _round_up(10.0 / min(h_target, 0.05), 4)
        n1 = _round_up((T - 10.0) / h_target, 4)
        points = n0 + n1 + 2
        if points > spec.max_points:
            raise BudgetExceededError(f"{points} points exceed the budget of {spec.max_points}")
        h0, h1 = 10.0 / n0, (T - 10.0) / n1
        s0 = _samples(alpha, 0.0, h0, n0 + 1, spec)
        s1 = _samples(alpha, 10.0, h1, n1 + 1, spec)
        a0, b0 = _simpson_pair(_power(s0, k), h0)
        a1, b1 = _simpson_pair(_power(s1, k), h1)
        e0 = _power_error(s0, _sample_error(alpha, 0.0, h0, n0 + 1, spec), k)
        e1 = _power_error(s1, _sample_error(alpha, 10.0, h1, n1 + 1, spec), k)
        eval_err = exact_sum(simpson_weights(n0, h0) * e0) + exact_sum(simpson_weights(n1, h1) * e1)
        value, err, step = a0 + a1, abs(a0 - b0) + abs(a1 - b1) + eval_err, h1
    else:
        t0, h, n_int = window_grid(T, spec)
        points = n_int + 1
        if points > spec.max_points:
            raise BudgetExceededError(f"{points} points exceed the budget of {spec.max_points}")
        abs2 = _samples(alpha, t0, h, n_int + 1, spec)
        f = _power(abs2, k)
        e = _power_error(abs2, _sample_error(alpha, t0, h, n_int + 1, spec), k)
        if mode == "smooth":
            window = window or make_bump_window()
            ts = t0 + h * np.arange(n_int + 1)
            phi = window.phi(ts / T)
            f, e = f * phi, e * phi
        else:
            lo, hi = n_int // 4, 3 * n_int // 4
            f, e = f[lo:hi + 1], e[lo:hi + 1]
            points = f.size
        value, coarse = _simpson_pair(f, h)
        eval_err = exact_sum(simpson_weights(f.size - 1, h) * e)
        err, step = abs(value - coarse) + eval_err, h
    return MomentEstimate(value=float(value), k=float(k), T=T, alpha=alpha.tag, mode=mode, quad_points=int(points),
                          quad_error_estimate=float(err), wall_time=time.perf_counter() - start, step=float(step))


# ---------------------------------------------------------------------------
# Predictions


def c_alpha(alpha) -> float:
    """c(alpha) = lim (sum_{0<=n<=N} 1/(n+alpha) - log N), by Euler-Maclaurin.

    Equal to -digamma(alpha); c(1) is Euler's constant.
    """
    a = as_shift(alpha).value if not isinstance(alpha, float) else alpha
    if not (0.0 < a <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    M = 20
    x = M + a
    head = math.fsum(1.0 / (n + a) for n in range(M))
    corr = [1.0 / (2.0 * x)]
    bern = special.bernoulli(12)
    for j in range(1, 7):
        corr.append(bern[2 * j] / (2 * j) * x ** (-2 * j))
    return math.fsum([head, -math.log(x)] + corr)


def rane_prediction(alpha, T: float) -> float:
    """T log T + T (c(alpha) + gamma - 1 - log 2 pi)."""
    T = float(T)
    return T * math.log(T) + T * (c_alpha(alpha) + EULER_GAMMA - 1.0 - LOG_TWO_PI)


def rane_prediction_interval(alpha, T1: float, T2: float) -> float:
    return rane_prediction(alpha, T2) - rane_prediction(alpha, T1)


def _prime_divisors(q: int) -> list[int]:
    out, p = [], 2
    while p * p <= q:
        if q % p == 0:
            out.append(p)
            while q % p == 0:
                q //= p
        p += 1
    if q > 1:
        out.append(q)
    return out


def rational_fourth_prediction(a: int, q: int, T: float) -> float:
    """T (log T)^4 / (2 pi^2 q) * prod_{p | q} (1 - 1/(p+1))."""
    if not (1 <= a < q) or math.gcd(a, q) != 1 or q < 3:
        raise ValueError("need 1 <= a < q, gcd(a, q) = 1 and q >= 3")
    factor = math.prod(1.0 - 1.0 / (p + 1) for p in _prime_divisors(q))
    return T * math.log(T) ** 4 / (2.0 * math.pi**2 * q) * factor


def conjecture_prediction(T: float, k: int, mode: str = "sharp", window: SmoothWindow | None = None) -> float:
    """k! T (log T)^k (sharp) or k! mass T (log T)^k (smooth window)."""
    if k not in (1, 2):
        raise ValueError("only k = 1 and k = 2 are supported")
    base = math.factorial(k) * T * math.log(T) ** k
    if mode == "sharp":
        return base
    if mode == "smooth":
        return base * (window or make_bump_window()).mass
    raise ValueError("mode must be 'sharp' or 'smooth'")


# ---------------------------------------------------------------------------
# Hoelder consistency


@dataclass
class HolderReport:
    T: float
    alpha: str
    mode: str
    moments: dict
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["holds"] for c in self.checks)


def holder_consistency(alpha, T: float, spec: QuadratureSpec | None = None, mode: str = "sharp_T2T",
                       ks=(0.5, 1.0, 1.5), slack: float = 1.02) -> HolderReport:
    """Check M_{2k} <= T^{1-k/2} M_4^{k/2} and the lower-bound chain
    M_2 <= T^{1-1/k} M_{2k}^{1/k} (k >= 1),
    M_2 <= M_{2k}^{1/(2-k)} M_4^{(1-k)/(2-k)} (k <= 1)
    on computed moments. With positive quadrature weights these hold exactly
    for the discrete sums, so any violation beyond ``slack`` is a bug."""
    alpha = as_shift(alpha)
    spec = spec or QuadratureSpec()
    ks_all = sorted(set((0.0, 1.0, 2.0) + tuple(ks)))
    est = {k: moment_integral(alpha, T, k, mode, spec) for k in ks_all}
    M = {k: e.value for k, e in est.items()}
    length = M[0.0]
    checks = []
    for k in ks_all:
        bound = length ** (1 - k / 2) * M[2.0] ** (k / 2)
        checks.append({"check": "upper", "k": k, "lhs": M[k], "rhs": bound, "slack": bound / M[k] if M[k] else math.inf,
                       "holds": M[k] <= slack * bound})
        if k >= 1:
            rhs = length ** (1 - 1 / k) * M[k] ** (1 / k)
            checks.append({"check": "lower_k_ge_1", "k": k, "lhs": M[1.0], "rhs": rhs, "slack": rhs / M[1.0],
                           "holds": M[1.0] <= slack * rhs})
        if 0 < k <= 1:
            rhs = M[k] ** (1 / (2 - k)) * M[2.0] ** ((1 - k) / (2 - k))
            checks.append({"check": "lower_k_le_1", "k": k, "lhs": M[1.0], "rhs": rhs, "slack": rhs / M[1.0],
                           "holds": M[1.0] <= slack * rhs})
    return HolderReport(T=T, alpha=alpha.tag, mode=mode, moments={str(k): v for k, v in M.items()}, checks=checks)


# ---------------------------------------------------------------------------
# Value distribution


@dataclass
class DistributionReport:
    T: float
    n_samples: int
    seed: int
    alpha: str
    ks_modulus: float
    ks_real: dict
    ks_imag: dict
    empirical_moments: dict
    gaussian_moments: dict

    def to_dict(self) -> dict:
        return asdict(self)


def sample_t(T: float, n: int, seed: int) -> np.ndarray:
    """n points uniform in [T, 2T] from a counter-based (Philox) generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    return T + T * rng.random(n)


def critical_samples(alpha, T: float, n: int, seed: int, profile: WeightProfile = DEFAULT_PROFILE,
                     workers: int = 1, cache_dir=False) -> tuple[np.ndarray, np.ndarray]:
    """(t, zeta(1/2+it, alpha)) at the seeded sample points, cached on disk if asked."""
    alpha = as_shift(alpha)
    cdir = cache_mod.resolve_cache_dir(cache_dir)
    path = None
    if cdir is not None:
        name = cache_mod.cache_key("samples", alpha=alpha.tag, fixed=str(alpha.fixed), T=repr(float(T)), n=n,
                                   seed=seed, generator=SAMPLER_VERSION, profile=_profile_key(profile))
        path = cdir / f"samples-{name}.npz"
        hit = cache_mod.load_arrays(path)
        if hit is not None:
            rows = hit[1]["rows"]
            return rows[:, 0], rows[:, 1] + 1j * rows[:, 2]
    t = sample_t(T, n, seed)
    z = zeta_points(t, alpha, profile, workers)
    if path is not None:
        header = {"alpha": alpha.tag, "T": float(T), "seed": int(seed), "generator": SAMPLER_VERSION}
        cache_mod.save_arrays(path, header, rows=np.column_stack([t, z.real, z.imag]))
    return t, z


def gaussian_sample_and_test(alpha, T: float, n_samples: int, seed: int, profile: WeightProfile = DEFAULT_PROFILE,
                             workers: int = 1, cache_dir=False) -> DistributionReport:
    """Kolmogorov-Smirnov statistics of z = zeta(1/2+it, alpha)/sqrt(log T), t uniform in [T, 2T].

    Two normalisations are reported side by side: ``var_half`` (Re z, Im z
    centred normal with variance 1/2, so E|z|^2 = 1 and E|z|^{2k} = k!) and
    ``var_one`` (variance 1, so E|z|^2 = 2 and E|z|^{2k} = 2^k k!).
    """
    alpha = as_shift(alpha)
    if T < 1e3 or n_samples < 100:
        raise ValueError("need T >= 1000 and at least 100 samples")
    _, zeta = critical_samples(alpha, T, n_samples, seed, profile, workers, cache_dir)
    z = zeta / math.sqrt(math.log(T))
    r2 = z.real**2 + z.imag**2
    ks_mod = stats.kstest(r2, "expon").statistic
    ks_real = {"var_half": stats.kstest(z.real, "norm", args=(0, math.sqrt(0.5))).statistic,
               "var_one": stats.kstest(z.real, "norm", args=(0, 1.0)).statistic}
    ks_imag = {"var_half": stats.kstest(z.imag, "norm", args=(0, math.sqrt(0.5))).statistic,
               "var_one": stats.kstest(z.imag, "norm", args=(0, 1.0)).statistic}
    moments = {str(k): exact_sum(r2**k) / r2.size for k in (1, 2, 3, 4)}
    ref = {"var_half": {str(k): float(math.factorial(k)) for k in (1, 2, 3, 4)},
           "var_one": {str(k): float(2**k * math.factorial(k)) for k in (1, 2, 3, 4)}}
    return DistributionReport(T=float(T), n_samples=int(n_samples), seed=int(seed), alpha=alpha.tag,
                              ks_modulus=float(ks_mod), ks_real={k: float(v) for k, v in ks_real.items()},
                              ks_imag={k: float(v) for k, v in ks_imag.items()},
                              empirical_moments=moments, gaussian_moments=ref)


def histograms(alpha, T: float, n_samples: int, seed: int, bins: int = 50, profile: WeightProfile = DEFAULT_PROFILE,
               workers: int = 1, cache_dir=False) -> dict:
    """50-bin histograms of |z|^2, Re z and Im z: name -> (edges, counts)."""
    _, zeta = critical_samples(alpha, T, n_samples, seed, profile, workers, cache_dir)
    z = zeta / math.sqrt(math.log(T))
    out = {}
    for name, v in (("abs2", z.real**2 + z.imag**2), ("re", z.real), ("im", z.imag)):
        counts, edges = np.histogram(v, bins=bins)
        out[name] = (edges, counts)
    return out
