import json
import math
import os

import pytest

from mcaudit.cli import (REFERENCE_WINDOW_COUNTS, SCHEMA_VERSION, AuditReport,
                         BenchResult, ConversionAttempt, SkippedTest,
                         SuitabilityVerdict, audit_report_to_dict,
                         audit_report_to_text, bench_results_to_dict,
                         bench_results_to_text, conversion_attempt_matrix,
                         main, rerun_manifest_digest, run_battery, run_bench,
                         verdict_for, _serial_bins_for)
from mcaudit.errors import McAuditError
from mcaudit.mc_engine import (BudgetReport, BudgetRule, run_simulation,
                               SimulationConfig)
from mcaudit.rng_core import GeneratorKind, RealConversion
from mcaudit.special_functions import Probability
from mcaudit.stat_tests import ChiSquareReport, CorrelationReport
from mcaudit.stat_tests import TestVerdict as Verdict


# -- synthetic report pieces for the verdict fold ---------------------------

def _chi(verdict: Verdict) -> ChiSquareReport:
    stat = 5.0 if verdict is Verdict.ACCEPT else 50.0
    return ChiSquareReport(observed=(500, 500), expected_per_cell=500.0,
                           statistic=stat, df=1, alpha=0.05,
                           critical_value=3.841,
                           p_value=Probability(0.5 if verdict is Verdict.ACCEPT
                                               else 1e-9),
                           verdict=verdict)


def _lag(r: float) -> CorrelationReport:
    return CorrelationReport(lag=1, r=r, pair_count=9999)


def _budget(ok: bool) -> BudgetReport:
    rule = BudgetRule(name="ten-percent", max_draws=100, max_log2=6.6, passed=ok)
    return BudgetReport(requested_draws=10, period_log2=10.0, rules=(rule,))


GOOD = dict(uniformity=_chi(Verdict.ACCEPT), serial=_chi(Verdict.ACCEPT),
            lag=_lag(0.001), lag_threshold=0.03, budget=_budget(True))


def test_verdict_all_clear():
    assert verdict_for(**GOOD) is SuitabilityVerdict.USE_WITH_CONFIDENCE


def test_verdict_hard_failures():
    for patch in (dict(uniformity=_chi(Verdict.REJECT)),
                  dict(serial=_chi(Verdict.REJECT)),
                  dict(lag=_lag(0.5)),
                  dict(lag=_lag(-0.5)),
                  dict(budget=_budget(False))):
        assert verdict_for(**{**GOOD, **patch}) is SuitabilityVerdict.DO_NOT_USE


def test_verdict_skips_mean_test_before_use():
    skip = SkippedTest(reason="too small")
    for patch in (dict(uniformity=skip),
                  dict(serial=skip),
                  dict(lag=skip, lag_threshold=None)):
        assert verdict_for(**{**GOOD, **patch}) is SuitabilityVerdict.TEST_BEFORE_USE


def test_verdict_hard_failure_beats_skip():
    got = verdict_for(uniformity=SkippedTest(reason="x"),
                      serial=_chi(Verdict.ACCEPT), lag=_lag(0.0),
                      lag_threshold=0.03, budget=_budget(False))
    assert got is SuitabilityVerdict.DO_NOT_USE


def test_verdict_lag_boundary_is_inclusive():
    at = verdict_for(**{**GOOD, "lag": _lag(0.03)})
    assert at is SuitabilityVerdict.USE_WITH_CONFIDENCE


# -- serial bin adaptation ---------------------------------------------------

def test_serial_bins_for():
    assert _serial_bins_for(30_000, 10) == 10      # 5*10^3 <= 30000
    assert _serial_bins_for(3_333, 10) == 8        # 5*9^3 = 3645 > 3333
    assert _serial_bins_for(666, 10) == 5
    assert _serial_bins_for(40, 10) == 2
    assert _serial_bins_for(39, 10) is None
    assert _serial_bins_for(10**9, 4) == 4         # capped at the request


# -- run_battery ----------------------------------------------------------------

@pytest.fixture(scope="module")
def default_report() -> AuditReport:
    return run_battery(GeneratorKind.MT19937, 5489, 10**6, 10**4, 10,
                       0.05, None, 10**4)


def test_default_battery_verdict_and_tests(default_report):
    rep = default_report
    assert rep.verdict is SuitabilityVerdict.USE_WITH_CONFIDENCE
    assert rep.uniformity.observed == REFERENCE_WINDOW_COUNTS
    assert abs(rep.uniformity.statistic - 8.748) <= 1e-12
    assert rep.serial_bins_per_dim == 8
    assert abs(rep.serial.statistic - 496.47734773477345) <= 1e-9
    assert rep.serial.verdict is Verdict.ACCEPT
    assert abs(rep.lag.r - 0.0015515780647676243) <= 1e-12
    assert rep.lag_threshold == 3.0 / math.sqrt(9999)
    assert rep.budget.all_pass
    assert rep.workload == 10**4


def test_default_battery_reference_matrix(default_report):
    matrix = default_report.reference_matrix
    assert matrix is not None
    assert [a.conversion for a in matrix] == [c.value for c in RealConversion]
    by_name = {a.conversion: a for a in matrix}
    for name in ("closed-closed", "half-open", "open-open"):
        attempt = by_name[name]
        assert attempt.status == "ok"
        assert attempt.counts == REFERENCE_WINDOW_COUNTS
        assert attempt.counts_match is True
        assert abs(attempt.statistic - 8.748) <= 1e-12
    assert by_name["half-open-31"].status == "out-of-range"
    assert by_name["half-open-31"].counts is None


def test_battery_off_reference_window_has_no_matrix():
    rep = run_battery(GeneratorKind.MT19937, 5489, 0, 3000, 10, 0.05, None, 1000)
    assert rep.reference_matrix is None


def test_randu_battery_flags_serial_structure():
    rep = run_battery(GeneratorKind.RANDU, 1, 0, 90_000, 10, 0.05, None, 10**4)
    assert rep.verdict is SuitabilityVerdict.DO_NOT_USE
    assert rep.conversion is RealConversion.HALF_OPEN_31
    assert rep.serial_bins_per_dim == 10
    assert rep.serial.verdict is Verdict.REJECT
    assert abs(rep.serial.statistic - 1143.0) <= 1e-9
    assert rep.budget.failures() == ("sqrt-200", "cube-root")


def test_small_sample_battery_is_test_before_use():
    rep = run_battery(GeneratorKind.MT19937, 1, 0, 60, 10, 0.05, None, 1000)
    assert isinstance(rep.serial, SkippedTest)
    assert "2x2x2" in rep.serial.reason
    assert rep.uniformity.verdict is Verdict.ACCEPT
    assert rep.verdict is SuitabilityVerdict.TEST_BEFORE_USE


def test_battery_rejects_narrow_conversion_on_wide_generator():
    with pytest.raises(McAuditError):
        run_battery(GeneratorKind.MT19937, 5489, 0, 1000, 10, 0.05,
                    RealConversion.HALF_OPEN_31, 1000)


def test_battery_manifest_reproduces_digest(default_report):
    manifest = default_report.manifest
    assert manifest.model == "audit-battery"
    assert rerun_manifest_digest(manifest) == manifest.result_digest


def test_simulation_manifest_reproduces_digest():
    config = SimulationConfig(kind=GeneratorKind.LCG_MINSTD, base_seed=9,
                              replications=4, draws_per_replication=300,
                              model="uniform-mean")
    _, manifest, _ = run_simulation(config)
    assert rerun_manifest_digest(manifest) == manifest.result_digest


# -- report rendering --------------------------------------------------------------

def _stable_dict(report: AuditReport) -> dict:
    d = audit_report_to_dict(report)
    d.pop("timestamp")
    d.pop("throughput")
    return d


def test_machine_report_is_deterministic():
    a = run_battery(GeneratorKind.MT19937, 7, 1000, 2000, 10, 0.05, None, 5000)
    b = run_battery(GeneratorKind.MT19937, 7, 1000, 2000, 10, 0.05, None, 5000)
    assert a.timestamp is not None
    assert json.dumps(_stable_dict(a), sort_keys=True) == \
        json.dumps(_stable_dict(b), sort_keys=True)


def test_machine_report_schema(default_report):
    d = audit_report_to_dict(default_report)
    assert d["schema_version"] == SCHEMA_VERSION
    assert d["report"] == "generator-suitability-audit"
    assert d["inputs"]["generator"] == "mt19937"
    assert d["inputs"]["workload"] == 10**4
    assert d["results"]["uniformity"]["observed"] == list(REFERENCE_WINDOW_COUNTS)
    assert d["results"]["serial"]["dim"] == 3
    assert d["results"]["serial"]["bins_per_dim"] == 8
    assert d["results"]["lag_correlation"]["within_threshold"] is True
    assert len(d["results"]["budget"]["rules"]) == 3
    assert d["verdict"] == "use-with-confidence"
    assert d["reference_reproduction"]["expected_counts"] == \
        list(REFERENCE_WINDOW_COUNTS)
    assert len(d["reference_reproduction"]["attempts"]) == 4
    assert d["manifest"]["result_digest"].startswith("0x")
    json.dumps(d)  # must be JSON-serializable as-is


def test_text_report_stable_apart_from_timing_lines():
    a = run_battery(GeneratorKind.MT19937, 7, 1000, 2000, 10, 0.05, None, 5000)
    b = run_battery(GeneratorKind.MT19937, 7, 1000, 2000, 10, 0.05, None, 5000)

    def stable_lines(rep):
        return [line for line in audit_report_to_text(rep).splitlines()
                if not line.startswith(("timestamp:", "throughput:"))]

    assert stable_lines(a) == stable_lines(b)
    text = audit_report_to_text(a)
    assert "verdict: use-with-confidence" in text
    assert "uniformity chi-square" in text
    assert "period budget" in text
    assert "manifest:" in text


# -- bench ---------------------------------------------------------------------------

def test_run_bench_structure():
    result = run_bench(GeneratorKind.MT19937, 20_000, 3)
    assert result.repeats == 3
    assert len(result.generate_seconds) == 3
    assert len(result.write_seconds) == 3
    assert result.median_generate_rate > 0
    assert result.median_total_rate > 0
    # writing can only add time on top of generation
    assert result.median_total_rate <= result.median_generate_rate
    assert result.elapsed_seconds >= sum(result.generate_seconds)


def test_run_bench_validation():
    with pytest.raises(McAuditError):
        run_bench(GeneratorKind.MT19937, 1000, 2)
    with pytest.raises(McAuditError):
        run_bench(GeneratorKind.MT19937, 0, 3)


def test_bench_rendering():
    results = [run_bench(GeneratorKind.MT19937, 5000, 3),
               run_bench(GeneratorKind.LCG_MINSTD, 5000, 3)]
    text = bench_results_to_text(results)
    lines = text.splitlines()
    assert len(lines) == 4  # banner, header, one row per generator
    assert "mt19937" in lines[2] and "minstd" in lines[3]
    d = bench_results_to_dict(results)
    assert d["report"] == "throughput-bench"
    assert [r["generator"] for r in d["results"]] == ["mt19937", "minstd"]
    json.dumps(d)


# -- command line ------------------------------------------------------------------

def test_cli_audit_text_to_file(tmp_path):
    out = tmp_path / "report.txt"
    code = main(["audit", "--skip", "1000", "--n", "2000", "--out", str(out),
                 "--no-plot"])
    assert code == 0
    text = out.read_text()
    assert text.startswith("generator suitability report")
    assert not (tmp_path / "report.png").exists()


def test_cli_audit_machine_with_plot(tmp_path):
    out = tmp_path / "report.json"
    code = main(["audit", "--skip", "1000", "--n", "2000", "--format",
                 "machine", "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert d["inputs"]["n"] == 2000
    assert d["inputs"]["workload"] == 2000  # defaults to n
    png = tmp_path / "report.png"
    assert png.exists() and png.stat().st_size > 0


def test_cli_audit_strict_exit_code(tmp_path):
    args = ["audit", "--generator", "randu", "--seed", "1", "--skip", "0",
            "--n", "2000", "--workload", "10000", "--out",
            str(tmp_path / "r.txt"), "--no-plot"]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 2


def test_cli_usage_errors_exit_one(capsys):
    assert main(["audit", "--generator", "mystery"]) == 1
    assert main(["audit", "--n", "0"]) == 1
    assert main(["audit", "--definitely-not-a-flag"]) == 1
    assert main(["export", "scatter"]) == 1  # --out is required
    assert main(["bench", "--repeats", "0"]) == 1
    capsys.readouterr()


def test_cli_domain_errors_exit_one(capsys):
    assert main(["bench", "--repeats", "2", "--n", "10"]) == 1
    assert main(["bench", "--generator", " , "]) == 1
    err = capsys.readouterr().err
    assert "mcaudit: error:" in err


def test_cli_io_error_exit_one(tmp_path, capsys):
    missing = tmp_path / "no-such-dir" / "report.txt"
    code = main(["audit", "--skip", "0", "--n", "500", "--no-plot",
                 "--out", str(missing)])
    assert code == 1
    assert "io error" in capsys.readouterr().err


def test_cli_export_scatter(tmp_path):
    out = tmp_path / "points.csv"
    code = main(["export", "scatter", "--n", "50", "--header",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 51
    x, y = lines[1].split(",")
    assert 0.0 <= float(x) < 1.0 and 0.0 <= float(y) < 1.0
    png = tmp_path / "points.png"
    assert png.exists() and png.stat().st_size > 0


def test_cli_export_scatter_3d_no_plot(tmp_path):
    out = tmp_path / "cube.csv"
    code = main(["export", "scatter", "--n", "40", "--dim", "3",
                 "--generator", "randu", "--seed", "1",
                 "--out", str(out), "--no-plot"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 40
    assert all(len(line.split(",")) == 3 for line in lines)
    assert not (tmp_path / "cube.png").exists()


def test_cli_export_scatter_empty(tmp_path):
    out = tmp_path / "empty.csv"
    code = main(["export", "scatter", "--n", "0", "--out", str(out)])
    assert code == 0
    assert out.read_text() == ""


def test_cli_export_histogram_reproduces_reference_counts(tmp_path):
    out = tmp_path / "freq.csv"
    code = main(["export", "histogram", "--skip", "1000000", "--n", "10000",
                 "--header", "--out", str(out), "--no-plot"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bin_upper,count"
    counts = tuple(int(line.split(",")[1]) for line in lines[1:])
    assert counts == REFERENCE_WINDOW_COUNTS
    uppers = [float(line.split(",")[0]) for line in lines[1:]]
    assert uppers == [(i + 1) / 10 for i in range(10)]


def test_cli_export_histogram_plot(tmp_path):
    out = tmp_path / "freq.csv"
    code = main(["export", "histogram", "--n", "2000", "--out", str(out)])
    assert code == 0
    png = tmp_path / "freq.png"
    assert png.exists() and png.stat().st_size > 0


def test_cli_simulate(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    man = tmp_path / "run.manifest"
    code = main(["simulate", "--model", "uniform-mean", "--n", "200",
                 "--replications", "30", "--seed", "7", "--out", str(man)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "95% CI for the mean:" in stdout
    assert str(man) in stdout
    from mcaudit.mc_engine import ReproducibilityManifest
    manifest = ReproducibilityManifest.from_text(man.read_text())
    assert manifest.replications == 30
    assert rerun_manifest_digest(manifest) == manifest.result_digest


def test_cli_simulate_default_manifest_name(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = main(["simulate", "--model", "pi", "--n", "100",
                 "--replications", "3", "--seed", "11"])
    assert code == 0
    assert (tmp_path / "mcaudit-manifest-pi-mt19937-11.txt").exists()
    capsys.readouterr()


def test_cli_simulate_budget_policy(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    args = ["simulate", "--model", "uniform-mean", "--generator", "randu",
            "--seed", "1", "--n", "10000", "--replications", "30"]
    assert main(args) == 1
    assert "budget" in capsys.readouterr().err
    assert main(args + ["--budget-policy", "warn"]) == 0
    capsys.readouterr()


def test_cli_bench_multiple_generators(capsys):
    code = main(["bench", "--generator", "mt19937,minstd", "--n", "5000",
                 "--repeats", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert "mt19937" in out and "minstd" in out


def test_cli_audit_stdout_default(capsys):
    code = main(["audit", "--skip", "0", "--n", "500", "--workload", "100"])
    assert code == 0
    out = capsys.readouterr().out
    assert "generator suitability report" in out


def test_render_scatter_3d_writes_png(tmp_path):
    from mcaudit.figures import render_scatter
    from mcaudit.rng_core import new_generator
    from mcaudit.stat_tests import export_scatter

    rows = export_scatter(new_generator(GeneratorKind.RANDU, 1), 200, 3)
    out = tmp_path / "cube.png"
    render_scatter(rows, str(out), title="three consecutive draws")
    assert out.stat().st_size > 0
