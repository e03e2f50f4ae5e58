import subprocess
import sys
from pathlib import Path

import pytest

from quill import cli
from quill.validation import CheckRow, ValidationReport

SWEEPS = Path(__file__).resolve().parent.parent / "sweeps"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestAsymptote:
    def test_fig3_values(self, capsys):
        code, out, _ = run(capsys, "asymptote", "--n-twb", "4232", "--n-thb", "3278", "--eta", "0.38", "--m", "90000")
        assert code == 0
        assert out.strip() == "15.136336"

    def test_bad_value(self, capsys):
        code, _, err = run(capsys, "asymptote", "--n-twb", "1", "--n-thb", "1", "--eta", "2", "--m", "10")
        assert code == 1 and "eta" in err

    def test_missing_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["asymptote", "--n-twb", "1"])
        assert exc.value.code == 1

    def test_console_script_module(self):
        res = subprocess.run([sys.executable, "-m", "quill.cli", "asymptote", "--n-twb", "4000",
                              "--n-thb", "4000", "--eta", "0.38", "--m", "90000"],
                             capture_output=True, text=True, check=True)
        assert res.stdout.strip() == "9.550000"


class TestFigures:
    def test_figure2_outputs(self, capsys, tmp_path):
        code, out, _ = run(capsys, "figure2", "--out", str(tmp_path))
        assert code == 0
        assert {p.name for p in tmp_path.iterdir()} == {"figure2.csv", "figure2.svg"}
        assert "asymptote = 9.550000" in out

    def test_figure2_byte_identical(self, capsys, tmp_path):
        for sub in ("a", "b"):
            assert run(capsys, "figure2", "--out", str(tmp_path / sub), "--seed", "7")[0] == 0
        assert (tmp_path / "a/figure2.csv").read_bytes() == (tmp_path / "b/figure2.csv").read_bytes()
        assert (tmp_path / "a/figure2.svg").read_bytes() == (tmp_path / "b/figure2.svg").read_bytes()

    def test_csv_only(self, capsys, tmp_path):
        assert run(capsys, "figure2", "--out", str(tmp_path), "--format", "csv")[0] == 0
        assert [p.name for p in tmp_path.iterdir()] == ["figure2.csv"]

    def test_grid_and_overrides(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figure2", "--out", str(tmp_path), "--grid", "100:1000:4", "--N", "2000",
                         "--M_beta", "60", "--format", "csv")
        assert code == 0
        lines = (tmp_path / "figure2.csv").read_text().splitlines()
        assert len(lines) == 5

    def test_empty_grid(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["figure2", "--out", str(tmp_path), "--grid", "1:10:0"])
        assert exc.value.code == 1

    def test_invalid_override(self, capsys, tmp_path):
        code, _, err = run(capsys, "figure2", "--out", str(tmp_path), "--eta", "0")
        assert code == 1 and "eta" in err

    def test_unbalanced_tau_rejected(self, capsys, tmp_path):
        code, _, err = run(capsys, "figure2", "--out", str(tmp_path), "--tau", "0.3")
        assert code == 1 and "tau" in err

    def test_unwritable_output(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run(capsys, "figure2", "--out", str(blocker))
        assert code == 3 and "I/O" in err

    def test_figure3(self, capsys, tmp_path):
        code, out, _ = run(capsys, "figure3", "--out", str(tmp_path))
        assert code == 0
        assert "15.1363" in out and "theory curves only" in out
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"figure3.csv", "figure3_snr.svg", "figure3_mi.svg", "figure3_ratios.svg"}

    def test_figure3_brightness_flags(self, capsys, tmp_path):
        code, out, _ = run(capsys, "figure3", "--out", str(tmp_path), "--n-twb", "4000", "--n-thb", "4000",
                           "--format", "csv")
        assert code == 0 and "9.5500" in out


class TestSweep:
    def test_stdout_matches_figure2(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", str(SWEEPS / "figure2.json"))
        assert code == 0
        run(capsys, "figure2", "--out", str(tmp_path), "--format", "csv")
        assert out.encode() == (tmp_path / "figure2.csv").read_bytes()

    def test_file_and_svg(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", str(SWEEPS / "figure3.json"), "-o", str(tmp_path / "t.csv"),
                         "--svg", str(tmp_path / "t.svg"))
        assert code == 0
        first = (tmp_path / "t.csv").read_text().splitlines()[1].split(",")
        assert float(first[-1]) == pytest.approx(15.136335531010628, rel=1e-15)
        assert (tmp_path / "t.svg").read_text().startswith("<svg")

    def test_unknown_key(self, capsys, tmp_path):
        spec = tmp_path / "s.json"
        spec.write_text((SWEEPS / "figure2.json").read_text().replace('"grid"', '"grdi"', 1))
        code, _, err = run(capsys, "sweep", str(spec))
        assert code == 1 and "grdi" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", str(tmp_path / "nope.json"))
        assert code == 3


class TestSeed:
    def test_precedence(self, monkeypatch):
        monkeypatch.delenv(cli.SEED_ENV, raising=False)
        assert cli.resolve_seed(None) == 0
        monkeypatch.setenv(cli.SEED_ENV, "42")
        assert cli.resolve_seed(None) == 42
        assert cli.resolve_seed(5) == 5

    @pytest.mark.parametrize("raw", ["abc", "-1", str(2**64), "1.5"])
    def test_bad_env(self, monkeypatch, raw):
        monkeypatch.setenv(cli.SEED_ENV, raw)
        with pytest.raises(cli.UsageError):
            cli.resolve_seed(None)

    def test_bad_env_exit_code(self, monkeypatch, capsys, tmp_path):
        monkeypatch.setenv(cli.SEED_ENV, "nope")
        code, _, err = run(capsys, "figure2", "--out", str(tmp_path))
        assert code == 1 and cli.SEED_ENV in err


class TestValidate:
    def test_failure_exit_code(self, monkeypatch, capsys):
        failing = ValidationReport([], [CheckRow("x", "epsilon_THB <= 1", 2.0, False)], False, [])
        monkeypatch.setattr(cli, "run_validation", lambda cfg, progress=None: failing)
        code, out, _ = run(capsys, "validate", "--quiet")
        assert code == 2 and "FAIL" in out

    def test_bad_config(self, capsys):
        code, _, err = run(capsys, "validate", "--shots", "10", "--quiet")
        assert code == 1

    def test_passes_and_writes_report(self, monkeypatch, capsys, tmp_path):
        monkeypatch.delenv(cli.SEED_ENV, raising=False)
        code, out, err = run(capsys, "validate", "--shots", "20000", "--workers", "4", "--out", str(tmp_path))
        assert code == 0, out
        assert "PASSED" in out and "running vacuum" in err
        rows = (tmp_path / "validate.csv").read_text().splitlines()
        assert rows[0] == "instance,quantity,analytic,mc,std_error,z,seed,attempt"
        assert any(r.startswith("vacuum,mean_s,0,") for r in rows)
