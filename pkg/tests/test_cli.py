import json

import pytest
from gmpy2 import mpfr

from sisqsd.cli import main, parse_config
from sisqsd.erroranalysis import ErrorReport
from sisqsd.experiment import ConfigError, ExperimentConfig, run_experiment
from sisqsd.report import CSV_HEADER, emit_report, render, sci


def test_table1_defaults():
    cfg = parse_config(["--experiment", "table1"])
    assert cfg.r0_values == (2, 5, 10)
    assert cfg.n_values == (25, 50, 100)
    assert cfg.approximations == ("beta_binomial", "p1", "p0", "ov3")


def test_table2_defaults():
    cfg = parse_config(["--experiment", "table2"])
    assert cfg.r0_values == (0.5, 0.2, 0.1)
    assert cfg.approximations == ("g1", "g2", "p0", "p1")


def test_scaling_flags():
    cfg = parse_config(["--experiment", "scaling", "--r0", "2", "--n", "25,50,100", "--approx", "p0"])
    assert cfg.n_values == (25, 50, 100) and cfg.approximations == ("p0",)


@pytest.mark.parametrize("argv,match", [
    (["--experiment", "scaling", "--n", "25,60"], "doublings"),
    (["--experiment", "table1", "--approx", "p0,normal"], "valid labels"),
    (["--experiment", "table1", "--approx", "g2"], "R0 < 1"),
    (["--experiment", "single", "--r0", "2,3", "--n", "5"], "exactly one"),
    (["--experiment", "single", "--r0", "2"], "needs --r0 and --n"),
    (["--r0", "2"], "required"),
    (["--experiment", "table1", "--n", "ten"], "malformed"),
    (["--experiment", "single", "--r0", "2", "--n", "1", "--approx", "ov3"], "N >= 2"),
])
def test_config_errors(argv, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(argv)


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# demo\nexperiment = scaling\nr0 = 2, 5\nn = 10,20,40\napprox = p0\nformat = csv\n")
    cfg = parse_config(["--config", str(path)])
    assert cfg.r0_values == (2, 5) and cfg.n_values == (10, 20, 40) and cfg.output_format == "csv"
    cfg = parse_config(["--config", str(path), "--r0", "3", "--format", "json-lines"])
    assert cfg.r0_values == (3,) and cfg.output_format == "json-lines"
    assert cfg.n_values == (10, 20, 40)


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("experiment = table1\ncolour = blue\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(["--config", str(path)])


def _fake_reports():
    out = []
    for r0 in (2.0, 5.0, 10.0):
        for n in (25, 50, 100):
            for name in ("beta_binomial", "p1", "p0", "ov3"):
                out.append(ErrorReport(name, n, r0, mpfr("0.125"), mpfr("0.25"), 256))
    return out


def test_csv_single_report():
    text = render(_fake_reports()[:1], "csv")
    lines = text.splitlines()
    assert lines == [CSV_HEADER, "2,25,beta_binomial,1.25000e-1,2.50000e-1,256"]


def test_text_table_layout():
    lines = [l for l in render(_fake_reports(), "text-table").splitlines() if l.strip()]
    header, rule, *rows = lines
    assert header.split()[2:] == ["Err1(beta_binomial)", "Err1(p1)", "Err1(p0)", "Err1(ov3)"]
    assert len(rows) == 9
    assert all(len(r.split()) == 6 for r in rows)
    assert rows[0].split()[2] == "1.2e-1"  # half-even at two digits


def test_json_lines_count():
    reports = _fake_reports()
    lines = render(reports, "json-lines").splitlines()
    assert len(lines) == len(reports)
    rec = json.loads(lines[0])
    assert rec["record"] == "error" and rec["n"] == 25 and float(rec["err1"]) == 0.125


def test_emit_report_writes_file(tmp_path):
    path = tmp_path / "out.csv"
    text = emit_report(_fake_reports()[:2], "csv", str(path))
    assert path.read_text() == text
    with pytest.raises(ValueError):
        emit_report([], "csv")
    with pytest.raises(OSError):
        emit_report(_fake_reports()[:1], "csv", str(tmp_path / "missing" / "x.csv"))


def test_sci_rounding():
    assert sci(mpfr("4.6e-61"), 2) == "4.6e-61"
    assert sci(mpfr("0.125"), 2) == "1.2e-1"
    assert sci(mpfr("0.375"), 2) == "3.8e-1"
    assert sci(0, 3) == "0.00e+0"


def test_single_cell_n1_point_mass():
    cfg = parse_config(["--experiment", "single", "--r0", "0.5", "--n", "1"])
    result = run_experiment(cfg)
    assert result.ok
    assert {r.approx_name for r in result.reports} == {"p0", "p1", "g1"}
    assert all(r.err1 == 0 for r in result.reports)


def test_small_scaling_run_and_determinism(tmp_path, capsys):
    argv = ["--experiment", "scaling", "--r0", "3", "--n", "8,16,32", "--approx", "p0,p1,ov3", "--format", "csv"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert lines[0] == CSV_HEADER
    data = [l for l in lines[1:] if not l.startswith("#")]
    assert len(data) == 9
    verdicts = [l for l in lines if l.startswith("# verdict")]
    assert len(verdicts) == 3


def test_parallel_matches_serial():
    base = dict(experiment="table2", r0_values=(0.5, 0.2), n_values=(10, 20), approximations=("g1", "p1"))
    serial = run_experiment(ExperimentConfig(**base))
    parallel = run_experiment(ExperimentConfig(**base, jobs=2))
    assert [(r.R0, r.N, r.approx_name, r.err1) for r in serial.reports] == \
        [(r.R0, r.N, r.approx_name, r.err1) for r in parallel.reports]


def test_exit_codes(tmp_path, capsys):
    assert main(["--experiment", "table1", "--approx", "bogus"]) == 2
    # R0 = N/(N-1) makes ov3 undefined: the cell fails, others still reported
    code = main(["--experiment", "single", "--r0", "2", "--n", "2", "--approx", "p0,ov3", "--format", "csv"])
    assert code == 1
    out = capsys.readouterr().out
    assert "2,2,p0," in out and "# failed r0=2 n=2 approx=ov3" in out
    assert main(["--experiment", "single", "--r0", "2", "--n", "3", "--out", str(tmp_path / "no" / "x")]) == 2


@pytest.mark.slow
def test_scaling_on_default_grid_verdicts():
    cfg = parse_config(["--experiment", "scaling", "--approx", "p1,p0,ov3"])
    result = run_experiment(cfg, check_oracle=False)
    verdicts = {(v.R0, v.approx_name): v.verdict for v in result.verdicts}
    assert len(verdicts) == 9
    for r0 in (2, 5, 10):
        assert verdicts[(r0, "p1")] == "polynomial_1_over_N"
        assert verdicts[(r0, "p0")] == "exponentially_small"
        assert verdicts[(r0, "ov3")] == "exponentially_small"
    records = [json.loads(l) for l in render(result.reports, "json-lines", result.verdicts).splitlines()]
    assert sum(r["record"] == "verdict" for r in records) == 9
