"""``hurwitz-lab`` command line.

Exit codes: 0 success, 1 validation failure (or a failed computation), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

from scipy import integrate

from . import acceptance
from . import cache as cache_mod
from .config import ConfigError, RunConfig, load
from .diophantine import InsufficientDataError, growth_check, irrationality_exponent_estimate, kruse_sum
from .moments import (EULER_GAMMA, LOG_TWO_PI, MODES, BudgetExceededError, MomentEstimate, QuadratureSpec, c_alpha,
                      conjecture_prediction, gaussian_sample_and_test, histograms, make_bump_window, moment_integral,
                      rational_fourth_prediction)
from .offdiagonal import (DiagonalEquationInstance, diagonal_main_term, enumerate_diagonal, gcd_refine,
                          offdiag_oscillatory_estimate, parametrize_offdiagonal)
from .shift import as_shift
from .zeta_eval import WeightProfile, zeta_critical

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers


def _profile(cfg: RunConfig) -> WeightProfile:
    return WeightProfile(weight_floor=cfg.weight_floor, shift_exponent_A=cfg.A)


def _cache_dir(cfg: RunConfig):
    """Cache location: the config value, else the environment, else the default."""
    return cache_mod.resolve_cache_dir(cfg.cache_dir or None)


def _emit(text: str, cfg: RunConfig, path: str | None = None) -> None:
    target = path if path is not None else cfg.output
    if target:
        p = Path(target)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    else:
        sys.stdout.write(text)


def _csv(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write(cfg.comment_line() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


# ---------------------------------------------------------------------------
# eval


def cmd_eval(cfg: RunConfig) -> int:
    shift = as_shift(cfg.alpha)
    profile = _profile(cfg)
    rows = []
    for t in cfg.t_values():
        z, method = zeta_critical(t, shift, profile)
        rows.append([_num(t), _num(z.real), _num(z.imag), _num(abs(z)), method])
    _emit(_csv(cfg, ["t", "re", "im", "abs", "method"], rows), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# cf


KRUSE_NS = (10**3, 10**4, 10**5, 10**6)


def diophantine_report(cfg: RunConfig) -> dict:
    shift = as_shift(cfg.alpha)
    cf = shift.cf
    try:
        mu = irrationality_exponent_estimate(cf)
    except InsufficientDataError:
        mu = None
    kruse = []
    for N in KRUSE_NS:
        if shift.is_rational and N >= shift.fraction.denominator:
            break
        kruse.append({"N": N, "sum_over_N": kruse_sum(shift, N, 0.5).ratio})
    return {
        "alpha": shift.tag,
        "value": shift.value,
        "rational": shift.is_rational,
        "partial_quotients": list(cf.a),
        "convergents": [[p, q] for p, q in zip(cf.p, cf.q)],
        "terminated": cf.terminated,
        "precision_exhausted": cf.precision_exhausted,
        "mu_estimate": mu,
        "growth_check": {"delta": cfg.delta, "holds": growth_check(cf, cfg.delta) if len(cf.q) > 1 else True},
        "kruse": kruse,
    }


def cmd_cf(cfg: RunConfig) -> int:
    report = diophantine_report(cfg)
    if not report["growth_check"]["holds"]:
        print(f"note: growth check fails at delta={cfg.delta} (Liouville-type growth)", file=sys.stderr)
    _emit(json.dumps(report, indent=1, sort_keys=True) + "\n", cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# moment


def _cumulative_prediction(shift, k: float):
    """Predicted int_0^X |zeta|^{2k} as a function of X, or None."""
    if k == 1:
        c = c_alpha(shift)
        return lambda X: X * math.log(X) + X * (c + EULER_GAMMA - 1.0 - LOG_TWO_PI)
    if k == 2:
        if shift.is_rational:
            fr = shift.fraction
            a, q = fr.numerator, fr.denominator
            if q < 3:
                return None
            return lambda X: rational_fourth_prediction(a, q, X)
        return lambda X: conjecture_prediction(X, 2, "sharp")
    return None


def moment_prediction(shift, T: float, k: float, mode: str):
    """Prediction matched to the integration mode; for k = 0 this is T."""
    if k == 0:
        return T
    P = _cumulative_prediction(shift, k)
    if P is None:
        return None
    if mode == "sharp_0T":
        return P(T)
    if mode == "sharp_T2T":
        return P(2 * T) - P(T)
    # int Phi(t/T) dP(t) = -int Phi'(u) P(uT) du
    w = make_bump_window()
    val, _ = integrate.quad(lambda u: -float(w.dphi(u)) * P(u * T), *w.support, epsabs=0, epsrel=1e-12, limit=200)
    return val


def _moment_estimate(cfg: RunConfig, spec: QuadratureSpec) -> MomentEstimate:
    shift = as_shift(cfg.alpha)
    cdir = _cache_dir(cfg)
    path = None
    if cdir is not None:
        key = cache_mod.cache_key("moment", alpha=shift.tag, fixed=str(shift.fixed), T=repr(cfg.T), k=repr(cfg.k),
                                  mode=cfg.mode, step=repr(cfg.step_factor), seed=cfg.seed,
                                  floor=repr(cfg.weight_floor), A=repr(cfg.A))
        path = cdir / f"moment-{key}.json"
        hit = cache_mod.load_json(path)
        if hit is not None:
            return MomentEstimate.from_dict(hit)
    est = moment_integral(shift, cfg.T, cfg.k, cfg.mode, spec)
    if path is not None:
        cache_mod.save_json(path, est.to_dict())
    return est


def cmd_moment(cfg: RunConfig) -> int:
    spec = QuadratureSpec(step_factor=cfg.step_factor, workers=cfg.workers, profile=_profile(cfg),
                          cache_dir=_cache_dir(cfg) or False)
    est = _moment_estimate(cfg, spec)
    pred = moment_prediction(as_shift(cfg.alpha), cfg.T, cfg.k, cfg.mode)
    ratio = est.value / pred if pred else None
    header = ["T", "k", "mode", "value", "prediction", "ratio", "quad_error", "points", "seconds"]
    row = [_num(est.T), _num(est.k), est.mode, _num(est.value), _num(pred), _num(ratio),
           _num(est.quad_error_estimate), str(est.quad_points), f"{est.wall_time:.3f}"]
    _emit(_csv(cfg, header, [row]), cfg)
    if not est.accepted:
        print("warning: quadrature error estimate exceeds 5% of the value", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# dist


def cmd_dist(cfg: RunConfig, hist_path: str | None) -> int:
    if cfg.n_samples < 100:
        raise ConfigError("dist needs n_samples >= 100")
    profile, cdir = _profile(cfg), _cache_dir(cfg) or False
    rep = gaussian_sample_and_test(cfg.alpha, cfg.T, cfg.n_samples, cfg.seed, profile, cfg.workers, cdir)
    _emit(json.dumps(rep.to_dict(), indent=1, sort_keys=True) + "\n", cfg)
    if hist_path is None and cfg.output:
        hist_path = str(Path(cfg.output).with_suffix("")) + "_hist.csv"
    if hist_path:
        rows = []
        for name, (edges, counts) in histograms(cfg.alpha, cfg.T, cfg.n_samples, cfg.seed, 50, profile,
                                                cfg.workers, cdir).items():
            for j, c in enumerate(counts):
                rows.append([name, str(j), _num(edges[j]), _num(edges[j + 1]), str(int(c))])
        _emit(_csv(cfg, ["variable", "bin", "left", "right", "count"], rows), cfg, hist_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# offdiag


def cmd_offdiag(cfg: RunConfig, what: str, diag_model: str, diag_k: int) -> int:
    if what == "tuples":
        if cfg.h1 == 0 and cfg.h2 == 0:
            raise ConfigError("(h1, h2) = (0, 0) is the diagonal")
        sols = parametrize_offdiagonal(cfg.h1, cfg.h2, cfg.n_max)
        gcd_refine(sols, cfg.h2)
        rows = [[n1, n2, n, n4, cfg.h1, cfg.h2, math.gcd(k, cfg.h2)] for n, k, n1, n2, n4 in sols]
        _emit(_csv(cfg, ["n1", "n2", "n3", "n4", "h1", "h2", "g"], rows), cfg)
        return EXIT_OK
    if what == "diagonal":
        shift = as_shift(cfg.alpha)
        kw = {}
        if diag_model == "rational":
            if not shift.is_rational:
                raise ConfigError("rational model needs a rational alpha")
            kw = {"a": shift.fraction.numerator, "q": shift.fraction.denominator}
        elif diag_model == "quadratic":
            # golden satisfies a^2 = -a + 1, sqrt2 - 1 satisfies a^2 = -2a + 1
            table = {"golden": (-1, 1), "sqrt2m1": (-2, 1)}
            if shift.tag not in table:
                raise ConfigError("quadratic model is available for golden and sqrt2m1")
            kw = dict(zip(("r", "s"), table[shift.tag]))
        res = enumerate_diagonal(DiagonalEquationInstance(diag_k, diag_model, cfg.n_max, **kw))
        rows = [[diag_k, diag_model, cfg.n_max, res.count, res.permutation_count, res.extra_count]]
        _emit(_csv(cfg, ["k", "model", "N", "count", "permutations", "extra"], rows), cfg)
        return EXIT_OK
    est = offdiag_oscillatory_estimate(cfg.alpha, cfg.T, make_bump_window(), cfg.eps, cfg.C, _profile(cfg))
    height = math.sqrt(cfg.T / (2 * math.pi))
    # the diagonal comparison needs sqrt(T/2pi) >= 10
    diag = diagonal_main_term(cfg.alpha, height) if height >= 10 else None
    header = ["T", "t", "n_max", "pairs", "tuples", "re", "im", "abs", "diagonal", "abs_over_diagonal",
              "max_exp_ratio"]
    row = [_num(cfg.T), _num(est.t), str(est.n_max), str(est.pair_count), str(est.tuple_count),
           _num(est.value.real), _num(est.value.imag), _num(abs(est.value)), _num(diag),
           _num(abs(est.value) / diag if diag else None), _num(est.max_exp_ratio)]
    _emit(_csv(cfg, header, [row]), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(cfg: RunConfig, only, list_only: bool, json_path: str | None, timings_path: str | None) -> int:
    if list_only:
        sys.stdout.write(acceptance.listing())
        return EXIT_OK
    ids = None
    if only:
        ids = {s.strip() for s in only.split(",") if s.strip()}
        unknown = ids - set(acceptance.ALL_IDS)
        if unknown:
            raise ConfigError(f"unknown criteria: {', '.join(sorted(unknown))}")
    run, report = acceptance.run_suite(cfg, ids, _cache_dir(cfg) or False,
                                       log=lambda m: print(m, file=sys.stderr))
    _emit(report, cfg)
    if json_path:
        rows = [{"id": r.id, "title": r.title, "status": r.status, "passed": r.passed,
                 "expected_fail": r.expected_fail, "detail": r.detail, "metrics": r.metrics} for r in run.results]
        Path(json_path).write_text(json.dumps(rows, indent=1, default=str) + "\n")
    if timings_path:
        Path(timings_path).write_text(json.dumps(run.timings, indent=1, sort_keys=True) + "\n")
    return EXIT_OK if run.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--alpha", help="golden | sqrt2m1 | rational:a/q | liouville:e,depth | decimal")
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--k", type=float)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--step-factor", type=float, dest="step_factor")
    p.add_argument("--weight-floor", type=float, dest="weight_floor")
    p.add_argument("--A", type=float, dest="A")
    p.add_argument("--C", type=float, dest="C")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--output", "-o")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hurwitz-lab", description="Numerical lab for the Hurwitz zeta function.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="zeta(1/2+it, alpha) on a t grid (CSV)")
    _common(p)
    p.add_argument("--t", type=float, action="append", help="single t value (repeatable)")
    p.add_argument("--t-start", type=float, dest="t_start")
    p.add_argument("--t-stop", type=float, dest="t_stop")
    p.add_argument("--t-count", type=int, dest="t_count")

    p = sub.add_parser("cf", help="continued fraction and Diophantine report (JSON)")
    _common(p)

    p = sub.add_parser("moment", help="one moment integral with predictions (CSV)")
    _common(p)

    p = sub.add_parser("dist", help="value distribution report (JSON) and histograms (CSV)")
    _common(p)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--hist", help="histogram CSV path (default: next to --output)")

    p = sub.add_parser("offdiag", help="off-diagonal tuples, diagonal counts or the oscillatory estimate (CSV)")
    _common(p)
    p.add_argument("what", choices=("tuples", "diagonal", "estimate"))
    p.add_argument("--h1", type=int)
    p.add_argument("--h2", type=int)
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--model", choices=("generic", "quadratic", "rational"), default="generic")
    p.add_argument("--diag-k", type=int, choices=(2, 3), default=2, dest="diag_k")

    p = sub.add_parser("validate", help="run the acceptance suite")
    _common(p)
    p.add_argument("--list", action="store_true", dest="list_only", help="list criteria without running")
    p.add_argument("--only", help="comma-separated criterion ids")
    p.add_argument("--json", dest="json_path", help="also write results as JSON")
    p.add_argument("--timings", dest="timings_path", help="write per-criterion wall times as JSON")
    return parser


_CONFIG_KEYS = ("alpha", "T", "k", "mode", "seed", "step_factor", "weight_floor", "A", "C", "eps", "delta",
                "workers", "cache_dir", "output", "n_samples", "t_start", "t_stop", "t_count", "h1", "h2", "n_max")


def _config_from_args(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    ts = getattr(args, "t", None)
    if ts:
        if len(ts) == 1:
            overrides.update(t_start=ts[0], t_stop=ts[0], t_count=1)
        else:
            raise ConfigError("give one --t, or use --t-start/--t-stop/--t-count for a grid")
    return load(args.config, overrides)


def _dispatch(args) -> int:
    cfg = _config_from_args(args)
    if args.command == "eval":
        return cmd_eval(cfg)
    if args.command == "cf":
        return cmd_cf(cfg)
    if args.command == "moment":
        return cmd_moment(cfg)
    if args.command == "dist":
        return cmd_dist(cfg, args.hist)
    if args.command == "offdiag":
        return cmd_offdiag(cfg, args.what, args.model, args.diag_k)
    return cmd_validate(cfg, args.only, args.list_only, args.json_path, args.timings_path)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                return _dispatch(args)
            finally:
                # each distinct warning once, after the command
                for msg in dict.fromkeys(str(w.message) for w in caught):
                    print(f"warning: {msg}", file=sys.stderr)
    except (UsageError, ConfigError) as exc:
        print(f"hurwitz-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceededError, ValueError, OverflowError) as exc:
        print(f"hurwitz-lab: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
