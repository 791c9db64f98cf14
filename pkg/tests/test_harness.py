import math

import numpy as np
import pytest

from kslogistic import model
from kslogistic.errors import ConfigError
from kslogistic.field import read_snapshot
from kslogistic.harness import cli
from kslogistic.harness import config as cfg
from kslogistic.harness import output, sweep
from kslogistic.harness.initial import make_initial, resolve
from kslogistic.harness.scenario import run_scenario

SMALL = """\
# small smoke scenario
params.chi_over_chi0 = 0.5
params.gamma = 1.5
grid.points = 16
grid.length = 2*pi*2
step.dt = 0.02
run.t_end = 1
run.seed = 7
initial.kind = random_band
initial.min = 0.5
initial.max = 1.5
checks = boundedness
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_parse_arithmetic_and_defaults():
    c = cfg.loads(SMALL)
    assert c.grid.length == pytest.approx(4 * math.pi)
    assert c.chi_rule == ("chi0", 0.5)
    assert c.ctl.scheme == "etd2rk" and c.seed == 7
    assert c.params.lam == 1.0


@pytest.mark.parametrize("text, line", [
    ("params.a = 1\nbogus.key = 3\n", 2),
    ("params.a = 1\n\nparams.a = 2\n", 3),
    ("params.a = x\n", 1),
    ("# c\nno equals sign\n", 2),
    ("grid.points = 12\n", 1),
    ("params.chi = 1\nparams.chi_over_chi0 = 0.5\n", 2),
    ("initial.kind = random_band\ninitial.min = -1\n", 2),
    ("checks = boundedness, decay\ninitial.kind = bump\ninitial.floor = 0\n", 3),
    ("step.scheme = rk4\n", 1),
])
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        cfg.loads(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_overrides_and_alias():
    c = cfg.loads(SMALL, {"seed": "11", "grid.points": "32"})
    assert c.seed == 11 and c.grid.n == 32
    with pytest.raises(ConfigError):
        cfg.loads(SMALL, {"nope": "1"})


def test_make_initial_kinds():
    base = "grid.points = 32\nparams.a = 4\nparams.mu = 2\nparams.lambda = 4\n"
    eq = make_initial(cfg.loads(base + "initial.kind = equilibrium\ninitial.v_kind = equilibrium\n"))
    assert np.all(eq.u.values == 16.0) and np.all(eq.v.values == 8.0)
    pert = make_initial(cfg.loads(base + "initial.kind = perturbed_equilibrium\ninitial.amplitude = 0.2\n"))
    assert 16 * 0.8 - 1e-12 <= pert.u.values.min() and pert.u.values.max() <= 16 * 1.2 + 1e-12
    b = make_initial(cfg.loads(base + "initial.kind = bump\ninitial.floor = 0.3\ninitial.height = 2\n"))
    assert b.u.values.min() >= 0.3 and b.u.values.max() <= 2.3
    assert b.u.values.max() == pytest.approx(2.3, abs=1e-2)


@pytest.mark.parametrize("seed", [0, 1, 2**40])
def test_random_band_range_and_determinism(seed):
    c = cfg.loads(SMALL, {"seed": str(seed), "initial.v_kind": "random_band"})
    s1, s2 = make_initial(c), make_initial(c)
    assert np.array_equal(s1.u.values, s2.u.values)
    assert np.array_equal(s1.v.values, s2.v.values)
    assert s1.u.values.min() >= 0.5 and s1.u.values.max() <= 1.5
    assert s1.u.values.min() == 0.5 and s1.u.values.max() == 1.5


def test_resolve_scales_chi():
    c = cfg.loads(SMALL)
    params, norms, _ = resolve(c)
    assert params.chi == pytest.approx(0.5 * model.chi0(params, norms), rel=1e-14)


def test_report_and_csv_roundtrip(tmp_path):
    c = cfg.loads(SMALL, {"analysis.t_transient": "0.5"})
    res = run_scenario(c, checks=("boundedness", "persistence"))
    assert res.passed
    text = output.reports_text(res.reports)
    blocks = output.parse_reports(text)
    assert [b["check"] for b in blocks] == ["boundedness", "persistence"]
    assert float(blocks[0]["worst_margin"]) == res.reports[0].worst_margin
    path = tmp_path / "ts.csv"
    output.write_timeseries(res.record, path)
    assert output.read_timeseries(path) == res.record.rows
    first = path.read_text().splitlines()[0]
    assert first.startswith("# columns: t,sup_u")


def test_cli_constants_gamma2(tmp_path, capsys):
    path = tmp_path / "g2.cfg"
    path.write_text("params.gamma = 2\ninitial.kind = constant\ninitial.value = 1\ngrid.points = 16\n")
    code = cli.main(["constants", "--config", str(path), "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("chi0 ="))
    assert float(line.split("=")[1].split("#")[0]) == pytest.approx(7.0711e-3, abs=1e-7)
    assert "chi_star_scope = out of scope" in out
    assert (tmp_path / "o" / "constants.txt").read_text() == out


def test_cli_constants_in_scope(small_cfg, tmp_path, capsys):
    assert cli.main(["constants", "--config", str(small_cfg), "--out", str(tmp_path)]) == 0
    assert "chi_star_scope = in scope" in capsys.readouterr().out


def test_cli_invalid_sigma_exit_2(small_cfg, tmp_path, capsys):
    code = cli.main(["verify-decay", "--config", str(small_cfg), "--out", str(tmp_path),
                     "--set", "analysis.sigma=0.9"])
    assert code == 2
    assert "sigma" in capsys.readouterr().err


def test_cli_config_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("params.a = 1\nparams.zzz = 2\n")
    assert cli.main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_simulate_is_deterministic(small_cfg, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["simulate", "--config", str(small_cfg), "--out", str(out),
                         "--snapshot-every", "0.5"]) == 0
        outs.append(out)
    assert (outs[0] / "timeseries.csv").read_bytes() == (outs[1] / "timeseries.csv").read_bytes()
    snaps = sorted((outs[0] / "snapshots").iterdir())
    assert [p.name for p in snaps][:2] == ["u_00000.ksfld", "u_00001.ksfld"]
    f, t = read_snapshot(outs[0] / "snapshots" / "u_00002.ksfld")
    assert t == pytest.approx(1.0) and f.grid.n == 16


def test_cli_verify_commands(small_cfg, tmp_path, capsys):
    assert cli.main(["verify-bounds", "--config", str(small_cfg), "--out", str(tmp_path)]) == 0
    assert "check = boundedness" in (tmp_path / "report.txt").read_text()
    assert (tmp_path / "report_summary.csv").read_text().startswith("check,passed")
    code = cli.main(["verify-persistence", "--config", str(small_cfg), "--out", str(tmp_path),
                     "--set", "analysis.t_transient=0.5"])
    assert code == 0
    # one time unit is far too short for the decay fit window to be entered
    code = cli.main(["verify-decay", "--config", str(small_cfg), "--out", str(tmp_path)])
    assert code == 1


BLOWUP = ("params.chi = 1000\nparams.dim = 1\ngrid.points = 16\nstep.dt = 0.05\n"
          "step.positivity_clip = false\nrun.t_end = 20\ninitial.kind = bump\n"
          "initial.width = 0.5\n")


def test_cli_abort_exit_3(tmp_path, capsys):
    # v0 = 0 keeps the step ceiling loose; the aggregation then overflows
    path = tmp_path / "blow.cfg"
    path.write_text(BLOWUP)
    assert cli.main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 3
    assert "non-finite at t=" in capsys.readouterr().out
    assert len(output.read_timeseries(tmp_path / "timeseries.csv")) >= 1


def test_cli_step_ceiling_exit_2(tmp_path, capsys):
    path = tmp_path / "steep.cfg"
    path.write_text(BLOWUP + "initial.v_kind = random_band\ninitial.v_max = 2\n")
    assert cli.main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "stability ceiling" in capsys.readouterr().err


def test_cli_lnseq(tmp_path, capsys):
    code = cli.main(["lnseq", "--xi", "0.125", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#") and l != "n,l_n"]
    assert rows[1] == "1,1.375"
    assert float(rows[-1].split(",")[1]) == pytest.approx(7.4641016, abs=1e-7)
    assert cli.main(["lnseq", "--xi", "0.3"]) == 2


def test_sweep_classification_and_exit(small_cfg, tmp_path, capsys):
    code = cli.main(["sweep", "--config", str(small_cfg), "--out", str(tmp_path),
                     "--axis", "params.chi_over_chi0=0.5,1,2", "--jobs", "2"])
    assert code == 0
    text = (tmp_path / "sweep_summary.csv").read_text()
    lines = text.splitlines()
    assert lines[0].startswith("#") and len(lines) == 5
    outcomes = [l.split(",")[5] for l in lines[2:]]
    assert outcomes[0] == "bounded" and outcomes[1:] == ["unclassified"] * 2
    assert (tmp_path / "cell_002.csv").exists()


def test_sweep_axis_errors():
    with pytest.raises(ConfigError):
        sweep.parse_axis("params.chi")
    with pytest.raises(ConfigError):
        sweep.parse_axis("params.nope=1,2")
    assert sweep.parse_axis("seed=1, 2") == ("run.seed", ["1", "2"])


def test_sweep_exit_status_rules():
    row = dict(chi=1.0, chi0=2.0, outcome=sweep.BOUNDED, aborted=False)
    assert sweep.exit_status([row]) == 0
    assert sweep.exit_status([dict(row, outcome=sweep.VIOLATED)]) == 1
    assert sweep.exit_status([dict(row, outcome="non-finite at t=1", aborted=True)]) == 3
    assert sweep.exit_status([dict(row, chi=3.0, outcome="non-finite at t=1", aborted=True)]) == 0
