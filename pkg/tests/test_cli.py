"""
Command-line tests for schlafli-lab
"""
import json
import math

import pytest

from main import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, main
from modules.fixtures import BASE_TETRA


def _points(scale: float = 1.0):
    return [{"klein": [scale * float(c) for c in y]} for y in BASE_TETRA]


class TestSingleCommands:
    """Test suite for tube, core-expansion and margin"""

    def test_tube_wedge(self, capsys):
        """Test the wedge command reports theta l (cosh 2eps - 1) / 4"""
        code = main(["tube", "--kind", "wedge", "--eps", "0.5", "--theta", "1.0", "--length", "2.0"])
        out = json.loads(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert out["volume"] == pytest.approx(0.5 * (math.cosh(1.0) - 1.0), rel=1e-14)
        assert out["pass"] is True

    def test_tube_rejects_negative_eps(self, capsys):
        """Test invalid tube parameters exit with the input error code"""
        assert main(["tube", "--kind", "flat", "--eps", "-0.1", "--area", "1.0"]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err

    def test_core_expansion_at_zero(self, capsys):
        """Test eps = 0 returns Vol*_0"""
        code = main(["core-expansion", "--vstar", "-1.0", "--lmu", "2.0", "--eps", "0"])
        assert code == EXIT_PASS
        assert json.loads(capsys.readouterr().out)["dual_volume"] == -1.0

    def test_margin_identity(self, capsys):
        """Test the identity family has zero margin and stays convex"""
        code = main(["margin", "--family", "builtin:identity-v1", "--eps", "0.5", "--t", "0.0"])
        out = json.loads(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert out["margin"] == pytest.approx(0.0, abs=1e-6)

    def test_margin_unknown_family(self):
        """Test unknown deformation families are input errors"""
        assert main(["margin", "--family", "builtin:shear-v1", "--eps", "0.5", "--t", "0.01"]) == EXIT_INPUT


class TestCheckCommand:
    """Test suite for the check command"""

    def test_smooth_sphere(self, capsys, write_json):
        """Test the smooth check passes on a geodesic sphere"""
        path = write_json("sphere.json", {"smooth": {"kind": "geodesic_sphere", "start": 0.5}})
        code = main(["check", "smooth", "--in", path])
        out = json.loads(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert out["reports"][0]["lhs"] == pytest.approx(-4.0 * math.pi * math.cosh(0.5) ** 2, rel=1e-9)

    def test_monotonic_not_contained(self, capsys, write_json):
        """Test a pair that is not nested fails with exit code 1"""
        path = write_json("pair.json", {"inner": {"vertices": _points()}, "outer": {"vertices": _points(0.5)}})
        assert main(["check", "monotonic", "--in", path]) == EXIT_FAIL
        out = json.loads(capsys.readouterr().out)
        assert out["reports"][0]["contained"] is False
        assert out["reports"][0]["margin"] is None

    def test_missing_field(self, capsys, write_json):
        """Test a check without its input field names the missing pointer"""
        path = write_json("empty.json", {})
        assert main(["check", "dual-schlafli", "--in", path]) == EXIT_INPUT
        assert "/family" in capsys.readouterr().err

    def test_malformed_json(self, write_json):
        """Test unparsable input files exit with code 2"""
        path = write_json("bad.json", "{")
        assert main(["check", "smooth", "--in", path]) == EXIT_INPUT

    def test_missing_in_option(self):
        """Test check without --in is an input error"""
        assert main(["check", "smooth"]) == EXIT_INPUT

    def test_unknown_kind(self):
        """Test argparse rejects unknown check kinds"""
        with pytest.raises(SystemExit) as exc:
            main(["check", "curvature", "--in", "x.json"])
        assert exc.value.code == 2


class TestSuiteCommands:
    """Test suite for suite subcommands"""

    def test_core_expansion_csv(self, capsys, write_json):
        """Test a suite run in CSV with a small configuration"""
        path = write_json("config.json", {"families": ["builtin:stretch-tetra-v1"]})
        assert main(["core-expansion", "--config", path, "--format", "csv"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert out.startswith("suite,check,anchor,lhs,rhs,residual,tolerance,pass\n")

    def test_invalid_config(self, write_json):
        """Test configuration values are validated"""
        path = write_json("config.json", {"threads": 0})
        assert main(["run", "lengths", "--config", path]) == EXIT_INPUT

    def test_unknown_suite(self):
        """Test run with an unknown suite name is an input error"""
        assert main(["run", "volumes"]) == EXIT_INPUT
