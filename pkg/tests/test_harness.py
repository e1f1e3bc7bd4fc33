"""
Unit tests for suites and report serialization
"""
import json
import math

import pytest

from modules.fixtures import POLYHEDRON_FAMILIES
from modules.harness import (
    CSV_COLUMNS, ReportRow, SuiteInputs, SuiteReport, UnknownSuiteError, emit, json_safe, report_from_csv,
    report_from_json, run_suite, schlafli_tolerance,
)
from modules.polyhedra import PolyhedronFamily


def _sample_report() -> SuiteReport:
    rows = [
        ReportRow.compare("lengths", "lengths.a", "thirds, with a comma", 1.0 / 3.0, 0.1 + 0.2, 1e-12),
        ReportRow.compare("lengths", "lengths.b", "tiny", 1e-300, -2.5e-17, 1e-12),
        ReportRow("lengths", "lengths.c", "failed task", math.nan, math.nan, math.nan, 0.0),
    ]
    return SuiteReport("lengths", rows, 1.25, {"seed": 0})


def _same_rows(a, b) -> bool:
    def key(row):
        return [repr(v) for v in row.as_dict().values()]
    return [key(r) for r in a.rows] == [key(r) for r in b.rows]


class TestRows:
    """Test suite for report rows"""

    def test_compare_residual(self):
        """Test compare rows store |lhs - rhs|"""
        row = ReportRow.compare("s", "s.x", "", 1.5, 1.25, 0.3)
        assert row.residual == 0.25
        assert row.passed

    def test_bound_residual(self):
        """Test bound rows only count violations"""
        assert ReportRow.bound("s", "s.x", "", 1.0, 2.0, 0.0).residual == 0.0
        assert not ReportRow.bound("s", "s.x", "", 2.0, 1.0, 0.5).passed

    def test_bound_non_finite(self):
        """Test bound rows with a NaN or infinite side never pass"""
        row = ReportRow.bound("s", "s.x", "", math.nan, 0.0, 1e-9)
        assert math.isnan(row.residual)
        assert not row.passed
        assert not ReportRow.bound("s", "s.x", "", 0.0, math.inf, 1e-9).passed
        assert not ReportRow.bound("s", "s.x", "", -math.inf, 0.0, 1e-9).passed

    def test_nan_fails(self):
        """Test NaN residuals never pass"""
        assert not ReportRow("s", "s.x", "", math.nan, 0.0, math.nan, 1.0).passed

    def test_tolerance_grows_with_step(self):
        """Test the polyhedral tolerance floor and its h^2 growth"""
        assert schlafli_tolerance(1e-4) == 1e-6
        assert schlafli_tolerance(1e-2) == pytest.approx(1e-2)


class TestSerialization:
    """Test suite for JSON and CSV reports"""

    def test_json_layout(self):
        """Test key order and optional wall time"""
        payload = json.loads(emit(_sample_report()))
        assert list(payload) == ["suite", "pass", "config", "rows"]
        assert payload["pass"] is False
        assert list(payload["rows"][0]) == CSV_COLUMNS
        timed = json.loads(emit(_sample_report(), include_timing=True))
        assert timed["wall_time"] == 1.25

    def test_json_round_trip(self):
        """Test floats survive JSON exactly"""
        report = _sample_report()
        assert _same_rows(report_from_json(emit(report)), report)

    def test_json_is_strict(self):
        """Test non-finite values are written as strings a strict parser accepts"""
        report = _sample_report()
        report.rows.append(ReportRow("lengths", "lengths.d", "overflow", math.inf, -math.inf, math.inf, 1e-12))

        def reject(token):
            raise ValueError(f"bare {token} in JSON output")

        payload = json.loads(emit(report), parse_constant=reject)
        assert payload["rows"][2]["lhs"] == "nan"
        assert (payload["rows"][3]["lhs"], payload["rows"][3]["rhs"]) == ("inf", "-inf")
        assert _same_rows(report_from_json(emit(report)), report)

    def test_json_safe(self):
        """Test nested non-finite floats are replaced and other values kept"""
        value = {"a": [1.5, math.nan, (math.inf, "x")], "b": None, "c": -math.inf}
        assert json_safe(value) == {"a": [1.5, "nan", ["inf", "x"]], "b": None, "c": "-inf"}

    def test_csv_round_trip(self):
        """Test JSON to CSV to JSON is bit-exact"""
        report = _sample_report()
        from_csv = report_from_csv(emit(report, "csv"))
        assert from_csv.suite == "lengths"
        assert _same_rows(from_csv, report)
        assert emit(SuiteReport("lengths", from_csv.rows, 1.25, {"seed": 0})) == emit(report)

    def test_empty_csv_has_header(self):
        """Test an empty report gives a header-only CSV"""
        assert emit(SuiteReport("tubes", []), "csv") == ",".join(CSV_COLUMNS) + "\n"

    def test_unknown_format(self):
        """Test formats other than json and csv are rejected"""
        with pytest.raises(ValueError):
            emit(_sample_report(), "xml")


class TestSuites:
    """Test suite for running suites"""

    def test_unknown_suite(self, fast_config):
        """Test unknown suite names are rejected"""
        with pytest.raises(UnknownSuiteError):
            run_suite("volumes", fast_config)

    def test_tubes_at_zero_eps(self, fast_config):
        """Test every tube volume vanishes at eps = 0"""
        cfg = fast_config.model_copy(update={"eps_grid": [0.0]})
        report = run_suite("tubes", cfg)
        assert report.passed, report.failing()
        flat = next(r for r in report.rows if r.check == "tubes.flat.eps=0.0000")
        assert flat.lhs == 0.0

    def test_core_expansion_suite(self, fast_config):
        """Test the core expansion suite passes"""
        report = run_suite("core-expansion", fast_config)
        assert report.passed, report.failing()
        assert report.config["families"] == ["builtin:stretch-tetra-v1"]

    def test_margins_check_held_out_times(self, fast_config):
        """Test the dilation bound is checked at times the constant was not fitted on"""
        report = run_suite("margins", fast_config)
        held_out = sorted(r.check for r in report.rows if ".held-out." in r.check)
        assert len(held_out) == 2
        assert report.passed, report.failing()

    def test_lengths_suite_is_deterministic(self, fast_config):
        """Test two runs with the same seed give identical JSON"""
        first = run_suite("lengths", fast_config)
        second = run_suite("lengths", fast_config)
        assert first.passed, first.failing()
        assert emit(first) == emit(second)

    def test_thread_count_does_not_change_rows(self, fast_config):
        """Test rows do not depend on the number of workers"""
        single = run_suite("lengths", fast_config)
        pooled = run_suite("lengths", fast_config.model_copy(update={"threads": 3}))
        assert _same_rows(single, pooled)
        assert [r.check for r in pooled.rows] == sorted(r.check for r in pooled.rows)

    def test_failing_task_becomes_row(self, fast_config):
        """Test a task whose stencil leaves the family domain reports a failing row"""
        narrow = PolyhedronFamily("narrow", POLYHEDRON_FAMILIES["stretch-tetra-v1"], (-0.05, 0.05))
        cfg = fast_config.model_copy(update={"t_grid": [0.1]})
        report = run_suite("schlafli", cfg, SuiteInputs(families=[narrow]))
        errors = [r for r in report.rows if r.check.startswith("schlafli.error")]
        assert len(errors) == 1
        assert not report.passed
        assert errors[0].check in report.failing()
