import json
import math

import numpy as np
import pytest

from mpmue import DomainError, run_checks, run_ledger, write_ledger
from mpmue.verify import (
    REQUIRED_OPS,
    CheckResult,
    DiscrepancyRecord,
    check_density,
    check_mc,
    check_value,
    chi2_sf,
    default_tolerance,
    ks_critical,
    ks_statistic,
)


def test_default_tolerance_env(monkeypatch):
    monkeypatch.delenv("MPMUE_TOL", raising=False)
    assert default_tolerance() == 1e-8
    monkeypatch.setenv("MPMUE_TOL", "1e-6")
    assert default_tolerance() == 1e-6
    monkeypatch.setenv("MPMUE_TOL", "0")
    assert default_tolerance() == 0.0
    monkeypatch.setenv("MPMUE_TOL", "not-a-number")
    with pytest.raises(DomainError):
        default_tolerance()


def test_check_result_line_format():
    ok = CheckResult("alpha", True, 1.0, 1.0, 1e-8)
    assert ok.line() == "PASS alpha: value=1 target=1 tol=1e-08"
    bad = CheckResult("beta", False, 2.0, 1.0, 1e-8, detail="off by one")
    assert bad.line().startswith("FAIL beta:")
    assert "(off by one)" in bad.line()


def test_check_value_worst_pair():
    res = check_value("pairs", [(1.0, 1.0), (2.0, 2.5)], tol=0.1)
    assert not res.passed
    assert res.value == pytest.approx(0.5)  # the worst deviation is reported
    res2 = check_value("pairs", [(1.0, 1.0), (2.0, 2.0000001)], tol=1e-3)
    assert res2.passed


def test_check_value_relative():
    res = check_value("rel", [(1000.0, 1001.0)], tol=2e-3, relative=True)
    assert res.passed
    res2 = check_value("rel", [(1000.0, 1001.0)], tol=2e-3, relative=False)
    assert not res2.passed


def test_check_density_integrates_to_one():
    res = check_density(
        "unit-exp", lambda x: math.exp(-x), (0.0, math.inf), tol=1e-9, breakpoints=(1.0,)
    )
    assert res.passed
    res2 = check_density(
        "broken", lambda x: 0.9 * math.exp(-x), (0.0, math.inf), tol=1e-9, breakpoints=()
    )
    assert not res2.passed


def test_ks_statistic_and_critical():
    # Perfectly placed uniform quantiles give the minimal possible statistic.
    n = 100
    vals = np.array([(i + 0.5) / n for i in range(n)])
    stat = ks_statistic(vals, lambda x: x)
    assert stat == pytest.approx(0.5 / n, abs=1e-12)
    # Shifted sample must blow past the 1% critical value.
    bad = ks_statistic(vals * 0.5, lambda x: x)
    assert bad > ks_critical(n)
    assert ks_critical(n) == pytest.approx(1.6276 / math.sqrt(n))
    with pytest.raises(DomainError):
        ks_critical(100, level=0.05)


def test_chi2_sf_known_values():
    assert chi2_sf(0.0, 5) == pytest.approx(1.0)
    # Two degrees of freedom: survival is exp(-x/2).
    for x in (0.5, 2.0, 7.0):
        assert chi2_sf(x, 2) == pytest.approx(math.exp(-x / 2.0), rel=1e-10)
    assert chi2_sf(10.0, 3) < chi2_sf(5.0, 3) < chi2_sf(1.0, 3)


def _const_sampler(value):
    def sampler(n, stream):
        stream.uniforms(n)  # consume the stream like a real sampler
        return np.full(n, value)

    return sampler


def test_check_mc_mean_mode():
    res = check_mc(
        "const-mean",
        _const_sampler(2.0),
        statistic=lambda x: x,
        closed_form=2.0,
        n_draws=500,
        seed=1,
    )
    assert res.passed


def test_check_mc_nonfinite_target_switches_to_quantile():
    # An infinite closed form cannot be checked as a mean; with a cdf
    # supplied the check degrades to quantile agreement.
    def sampler(n, stream):
        return -np.log(stream.uniforms(n))

    res = check_mc(
        "inf-target",
        sampler,
        statistic=lambda x: x,
        closed_form=math.inf,
        n_draws=5_000,
        seed=3,
        cdf=lambda t: -math.expm1(-t),
        cdf_points=(0.5, 1.0, 2.0),
    )
    assert res.passed
    assert "quantile" in res.detail


def test_check_mc_nonfinite_without_cdf_fails():
    res = check_mc(
        "inf-no-cdf",
        _const_sampler(1.0),
        statistic=lambda x: x,
        closed_form=math.inf,
        n_draws=100,
        seed=4,
    )
    assert not res.passed
    assert "no cdf supplied" in res.detail


def test_check_mc_heavy_tail_guard():
    # One draw carrying most of the second moment must not be trusted as a
    # mean estimate; the guard reroutes to the quantile comparison.
    def sampler(n, stream):
        stream.uniforms(n)
        out = np.ones(n)
        out[0] = 1e6
        return out

    res = check_mc(
        "heavy",
        sampler,
        statistic=lambda x: x,
        closed_form=1.0 + 1e6 / 1000,
        n_draws=1_000,
        seed=5,
        cdf=lambda t: 0.0 if t < 1.0 else (0.999 if t < 1e6 else 1.0),
        cdf_points=(1.5,),
    )
    assert res.passed
    assert "quantile" in res.detail


def test_discrepancy_record_json_fields():
    rec = DiscrepancyRecord(
        formula_id="demo",
        params={"a": 1.0},
        paper_literal=2.0,
        corrected=1.0,
        oracle=1.0,
        abs_dev_literal=1.0,
        abs_dev_corrected=0.0,
        verdict="corrected_adopted",
    )
    d = rec.to_json_dict()
    assert list(d.keys()) == [
        "formula_id",
        "params",
        "paper_literal",
        "corrected",
        "oracle",
        "abs_dev_literal",
        "abs_dev_corrected",
        "verdict",
    ]


def test_write_ledger_round_trip(tmp_path):
    recs = [
        DiscrepancyRecord("one", {"t": 1.0}, 0.1, 0.2, 0.2, 0.1, 0.0, "corrected_adopted"),
        DiscrepancyRecord("two", {}, math.inf, 1.5, 1.49, math.inf, 0.01, "corrected_adopted"),
    ]
    path = tmp_path / "ledger.json"
    write_ledger(path, recs)
    back = json.loads(path.read_text())
    assert [r["formula_id"] for r in back] == ["one", "two"]
    assert back[1]["paper_literal"] == math.inf


EXPECTED_FORMULA_IDS = {
    "lst-first-term",
    "count-variance-sign",
    "arrival-moment-rate-factor",
    "pgf-literal-terms",
    "regression-mixing-on-arrival",
    "reciprocal-moment-sign",
    "conditional-density-factor",
    "posterior-density-scale",
    "interarrival-mean-finite",
}


def test_run_ledger_all_corrections_confirmed():
    records = run_ledger(mc_draws=20_000)
    assert {r.formula_id for r in records} == EXPECTED_FORMULA_IDS
    for rec in records:
        assert rec.verdict == "corrected_adopted", rec.formula_id
        assert rec.abs_dev_corrected < rec.abs_dev_literal


def test_run_ledger_divergence_claim_is_literal_infinity():
    records = {r.formula_id: r for r in run_ledger(mc_draws=20_000)}
    rec = records["interarrival-mean-finite"]
    assert rec.paper_literal == math.inf
    assert math.isfinite(rec.corrected)
    assert math.isfinite(rec.oracle)


def test_run_checks_small_budget_green():
    results = run_checks(mc_draws=20_000, paths=2_000)
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    covered = set()
    for r in results:
        covered.update(r.ops)
    assert REQUIRED_OPS <= covered


def test_run_checks_honors_tol_argument():
    # A zero tolerance must fail the exact-identity checks too (they compare
    # floating point results from two different computation routes).
    results = run_checks(tol=0.0, mc_draws=2_000, paths=500)
    assert any(not r.passed for r in results)
