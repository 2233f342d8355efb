import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hurwitz_lab import cache as cache_mod
from hurwitz_lab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from hurwitz_lab.config import OPERATIONAL_KEYS, ConfigError, RunConfig, load, parse, parse_pairs, serialize
from hurwitz_lab.moments import clear_sample_memo
from hurwitz_lab.zeta_eval import hurwitz_euler_maclaurin, riemann_zeta


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv(cache_mod.ENV_VAR, str(d))
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


# ---------------------------------------------------------------------------
# config


configs = st.builds(
    RunConfig,
    alpha=st.sampled_from(["golden", "sqrt2m1", "rational:3/8", "liouville:3,6", "0.25"]),
    T=st.floats(min_value=10, max_value=1e7, allow_nan=False),
    k=st.floats(min_value=0, max_value=4),
    mode=st.sampled_from(["sharp_0T", "sharp_T2T", "smooth"]),
    seed=st.integers(0, 2**31),
    step_factor=st.floats(min_value=0.01, max_value=2.0),
    C=st.floats(min_value=1e-3, max_value=1e3),
    eps=st.floats(min_value=0.01, max_value=0.49),
    delta=st.floats(min_value=0.01, max_value=0.99),
    n_max=st.integers(1, 10**6),
    workers=st.integers(1, 16),
    output=st.sampled_from(["", "out.csv", "runs/a b.csv"]),
)


@pytest.mark.filterwarnings("ignore:decimal shift")
@settings(max_examples=60, deadline=None)
@given(configs)
def test_config_round_trip(cfg):
    assert parse(serialize(cfg)) == cfg
    assert serialize(parse(serialize(cfg))) == serialize(cfg)


def test_config_comments_and_blank_lines():
    text = "# a run\n\nalpha = rational:1/3   # thirds\nT = 2e4\n  k=1\n"
    cfg = parse(text)
    assert (cfg.alpha, cfg.T, cfg.k) == ("rational:1/3", 2e4, 1.0)


@pytest.mark.parametrize("text", ["bogus = 1\n", "T\n", "T = ten\n", "k = 7\n", "alpha = nonsense\n",
                                  "mode = sharp\n", "T = nan\n"])
def test_config_rejects_bad_input(text):
    with pytest.raises(ConfigError):
        parse(text)


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("T = 5000\nk = 1\nseed = 4\n")
    cfg = load(path, {"k": 2.0, "seed": None})
    assert (cfg.T, cfg.k, cfg.seed) == (5000.0, 2.0, 4)
    with pytest.raises(ConfigError):
        load(tmp_path / "missing.cfg")


def test_comment_line_excludes_operational_keys():
    a = RunConfig(workers=1, output="a.csv").comment_line()
    b = RunConfig(workers=8, output="b.csv", cache_dir="/tmp/x").comment_line()
    assert a == b
    assert all(f"{k}=" not in a for k in OPERATIONAL_KEYS)
    assert "alpha=golden" in a and "seed=1" in a


def test_parse_pairs_only_returns_given_keys():
    assert parse_pairs("T = 100.0\n") == {"T": 100.0}


# ---------------------------------------------------------------------------
# eval


def test_eval_first_zero(capsys):
    code, out, _ = run(capsys, "eval", "--alpha", "rational:1/1", "--t", "14.134725")
    assert code == EXIT_OK
    (row,) = read_csv(out)
    oracle = abs(hurwitz_euler_maclaurin(complex(0.5, 14.134725), 1.0))
    assert float(row["abs"]) < 1e-6
    assert abs(float(row["abs"]) - oracle) < 1e-12


def test_eval_half_shift_matches_composition(capsys):
    code, out, _ = run(capsys, "eval", "--alpha", "rational:1/2", "--t", "100")
    assert code == EXIT_OK
    (row,) = read_csv(out)
    s = complex(0.5, 100.0)
    expected = (2**s - 1) * riemann_zeta(s)
    assert abs(complex(float(row["re"]), float(row["im"])) - expected) < 1e-8


def test_eval_grid_and_empty_range(capsys, tmp_path):
    code, out, _ = run(capsys, "eval", "--t-start", "600", "--t-stop", "700", "--t-count", "3")
    assert code == EXIT_OK
    rows = read_csv(out)
    assert [float(r["t"]) for r in rows] == [600.0, 650.0, 700.0]
    assert {r["method"] for r in rows} == {"afe"}
    target = tmp_path / "empty.csv"
    code, _, _ = run(capsys, "eval", "--t-count", "0", "-o", str(target))
    assert code == EXIT_OK
    lines = target.read_text().splitlines()
    assert len(lines) == 2 and lines[1] == "t,re,im,abs,method"


def test_eval_usage_errors(capsys):
    code, _, err = run(capsys, "eval", "--alpha", "not-a-number")
    assert code == EXIT_USAGE and "alpha" in err
    code, _, _ = run(capsys, "eval", "--T", "1")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "nope")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "eval", "--t", "1", "--t", "2")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "eval", "--t-start", "-3")
    assert code == EXIT_USAGE


def test_decimal_alpha_warns(capsys):
    code, _, err = run(capsys, "eval", "--alpha", "0.25", "--t", "100")
    assert code == EXIT_OK and "warning" in err


# ---------------------------------------------------------------------------
# cf


def test_cf_golden(capsys):
    code, out, _ = run(capsys, "cf", "--alpha", "golden")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert set(rep["partial_quotients"][1:]) == {1}
    assert abs(rep["mu_estimate"] - 2) < 0.1
    assert rep["growth_check"]["holds"]
    assert [row["N"] for row in rep["kruse"]] == [10**3, 10**4, 10**5, 10**6]


def test_cf_rational(capsys):
    code, out, _ = run(capsys, "cf", "--alpha", "rational:3/8")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["partial_quotients"] == [0, 2, 1, 2] and rep["terminated"]
    assert rep["convergents"][-1] == [3, 8]


def test_cf_liouville_flagged(capsys):
    code, out, err = run(capsys, "cf", "--alpha", "liouville:3,10", "--delta", "0.5")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["growth_check"]["holds"] is False
    assert "growth check fails" in err


def test_cf_is_deterministic(capsys):
    assert run(capsys, "cf", "--alpha", "sqrt2m1")[1] == run(capsys, "cf", "--alpha", "sqrt2m1")[1]


# ---------------------------------------------------------------------------
# moment


def test_moment_k0_ratio(capsys):
    code, out, _ = run(capsys, "moment", "--T", "1000", "--k", "0", "--mode", "sharp_T2T")
    assert code == EXIT_OK
    (row,) = read_csv(out)
    assert float(row["prediction"]) == 1000.0
    assert float(row["ratio"]) == float(row["value"]) / 1000.0


def test_moment_rerun_identical_bytes(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["moment", "--T", "1000", "--k", "1", "--mode", "smooth", "--cache-dir", str(tmp_path / "c")]
    assert run(capsys, *args, "-o", str(a))[0] == EXIT_OK
    assert run(capsys, *args, "--workers", "2", "-o", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert list((tmp_path / "c").glob("moment-*.json"))
    (row,) = read_csv(a.read_text())
    assert abs(float(row["ratio"]) - 1) < 0.01
    assert float(row["quad_error"]) <= 0.05 * float(row["value"])


def test_moment_numbers_independent_of_workers(capsys, tmp_path):
    rows = []
    for w in ("1", "3"):
        code, out, _ = run(capsys, "moment", "--T", "1000", "--k", "2", "--mode", "sharp_T2T", "--workers", w,
                           "--cache-dir", str(tmp_path / w))
        assert code == EXIT_OK
        rows.append({k: v for k, v in read_csv(out)[0].items() if k != "seconds"})
    assert rows[0] == rows[1]


def test_moment_budget_failure(capsys):
    code, _, err = run(capsys, "moment", "--T", "1e6", "--k", "1", "--mode", "smooth")
    assert code == EXIT_FAIL and "budget" in err


def test_moment_rational_prediction(capsys):
    code, out, _ = run(capsys, "moment", "--alpha", "rational:1/3", "--T", "1000", "--k", "2", "--mode", "sharp_0T")
    (row,) = read_csv(out)
    assert code == EXIT_OK and float(row["prediction"]) > 0
    code, out, _ = run(capsys, "moment", "--alpha", "rational:1/2", "--T", "1000", "--k", "2", "--mode", "sharp_0T")
    (row,) = read_csv(out)
    assert code == EXIT_OK and row["prediction"] == "" and row["ratio"] == ""


# ---------------------------------------------------------------------------
# dist


def test_dist_seeded_and_histograms(capsys, tmp_path):
    out1, out2 = tmp_path / "d1.json", tmp_path / "d2.json"
    base = ["dist", "--T", "1000", "--n-samples", "200", "--seed", "5"]
    assert run(capsys, *base, "-o", str(out1))[0] == EXIT_OK
    assert run(capsys, *base, "-o", str(out2))[0] == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    rep = json.loads(out1.read_text())
    assert rep["n_samples"] == 200 and 0 <= rep["ks_modulus"] <= 1
    hist = read_csv((tmp_path / "d1_hist.csv").read_text())
    for var in ("abs2", "re", "im"):
        rows = [r for r in hist if r["variable"] == var]
        assert len(rows) == 50 and sum(int(r["count"]) for r in rows) == 200


def test_dist_rejects_small_sample(capsys):
    assert run(capsys, "dist", "--T", "1000", "--n-samples", "50")[0] == EXIT_USAGE


# ---------------------------------------------------------------------------
# offdiag


def test_offdiag_tuples(capsys):
    code, out, _ = run(capsys, "offdiag", "tuples", "--h1", "6", "--h2", "-4", "--n-max", "60")
    rows = read_csv(out)
    assert code == EXIT_OK and rows
    for r in rows:
        n1, n2, n3, n4 = (int(r[c]) for c in ("n1", "n2", "n3", "n4"))
        assert n1 * n2 - n3 * n4 == 6 and n1 + n2 - n3 - n4 == -4
        assert math.gcd(n3 - n1, 4) == int(r["g"])
    assert run(capsys, "offdiag", "tuples", "--h1", "0", "--h2", "0")[0] == EXIT_USAGE


def test_offdiag_diagonal(capsys):
    code, out, _ = run(capsys, "offdiag", "diagonal", "--n-max", "50")
    (row,) = read_csv(out)
    assert code == EXIT_OK and int(row["count"]) == 4950 and int(row["extra"]) == 0
    code, out, _ = run(capsys, "offdiag", "diagonal", "--model", "rational", "--alpha", "rational:1/1",
                       "--n-max", "50")
    (row,) = read_csv(out)
    assert int(row["count"]) > 4950
    code, out, _ = run(capsys, "offdiag", "diagonal", "--model", "quadratic", "--alpha", "sqrt2m1", "--diag-k",
                       "3", "--n-max", "15")
    (row,) = read_csv(out)
    # a quadratic shift cannot separate cubic products: extra solutions appear
    assert code == EXIT_OK and int(row["extra"]) > 0


def test_offdiag_estimate(capsys):
    code, out, _ = run(capsys, "offdiag", "estimate", "--T", "300")
    (row,) = read_csv(out)
    assert code == EXIT_OK
    assert float(row["max_exp_ratio"]) <= 1 + 1e-12
    assert row["diagonal"] == ""  # sqrt(T / 2 pi) < 10
    code, out, _ = run(capsys, "offdiag", "estimate", "--T", "1000")
    (row,) = read_csv(out)
    assert code == EXIT_OK and float(row["abs_over_diagonal"]) < math.log(1000) ** (-1 / 3)


# ---------------------------------------------------------------------------
# validate


def test_validate_list(capsys):
    code, out, _ = run(capsys, "validate", "--list")
    assert code == EXIT_OK
    ids = [line.split()[0] for line in out.splitlines() if line.strip()]
    for cid in ("1", "6", "6g", "11", "12"):
        assert cid in ids


def test_validate_liouville_growth_is_expected_fail(capsys, tmp_path):
    js = tmp_path / "v.json"
    code, out, _ = run(capsys, "validate", "--only", "6g", "--alpha", "liouville:3,10", "--delta", "0.9",
                       "--json", str(js))
    assert code == EXIT_OK
    (row,) = json.loads(js.read_text())
    assert row["status"] == "XFAIL" and row["passed"] is False and row["expected_fail"] is True
    assert "XFAIL" in out


def test_validate_fast_subset(capsys, tmp_path):
    js = tmp_path / "v.json"
    code, out, _ = run(capsys, "validate", "--only", "2,9", "--json", str(js))
    rows = json.loads(js.read_text())
    assert code == EXIT_OK
    assert [r["id"] for r in rows] == ["2", "9"] and all(r["status"] == "PASS" for r in rows)
    again = run(capsys, "validate", "--only", "2,9")[1]
    assert again == out


def test_validate_unknown_id(capsys):
    assert run(capsys, "validate", "--only", "99")[0] == EXIT_USAGE


def test_cache_env_var(isolated_cache, capsys):
    clear_sample_memo()
    assert run(capsys, "moment", "--T", "1000", "--k", "1", "--mode", "sharp_T2T")[0] == EXIT_OK
    assert list(isolated_cache.glob("moment-*.json"))
    assert list(isolated_cache.glob("abs2-*.npz"))
