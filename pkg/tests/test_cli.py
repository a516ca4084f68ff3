import subprocess
import sys

import numpy as np
import pytest

from llcontrol.cli import main
from llcontrol.io import read_trajectory_csv
from llcontrol.presets import PRESETS, R1, R2, R3, R4, describe, get_preset

QUICK = """\
name = quick
discretization.elements = 8
integrator.record_every = 50
phase.1.control = none
phase.1.until = duration
phase.1.duration = 0.2
phase.2.control = affine
phase.2.gain = 0.5
phase.2.target = 0, 0, 1
phase.2.until = duration
phase.2.duration = 0.2
"""


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in out] == [f"fig{i}" for i in range(1, 7)]


def test_preset_contents():
    assert len(PRESETS) == 6
    for cfg in PRESETS.values():
        assert cfg.n_elements == 12 and cfg.physical.nu == 0.02 and cfg.physical.length == 1.0
        assert cfg.initial.kind == "trig" and cfg.initial.winding == 1
        cfg.validate()
    assert [p.target for p in get_preset("fig3").phases] == [None, R2, R3]
    assert get_preset("fig6").phases[-1].target == R4
    assert get_preset("fig2").phases[0].target == R1
    assert all(p.gain == 10.0 for p in get_preset("fig5").phases[1:])
    assert len(describe()) == 6
    with pytest.raises(KeyError):
        get_preset("fig7")


def test_run_config_writes_outputs_and_echo_replays(tmp_path, capsys):
    cfg = tmp_path / "q.cfg"
    cfg.write_text(QUICK)
    out1 = tmp_path / "a"
    assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
    names = {p.name for p in out1.iterdir()}
    assert {"trajectory.csv", "diagnostics.csv", "m1.svg", "m2.svg", "m3.svg",
            "config.resolved", "metadata.json", "summary.txt"} <= names
    summary = capsys.readouterr().out
    assert "phase 2 [affine k=0.5] completed" in summary
    out2 = tmp_path / "b"
    assert main(["run", "--config", str(out1 / "config.resolved"), "--out", str(out2)]) == 0
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_overrides(tmp_path):
    cfg = tmp_path / "q.cfg"
    cfg.write_text(QUICK)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--elements", "10", "--dt", "1e-4"]) == 0
    t, s = read_trajectory_csv(tmp_path / "o" / "trajectory.csv")
    assert s.shape[1] == 11
    assert np.allclose(np.diff(t)[:3], 50e-4)


def test_several_configs_run_concurrently(tmp_path, capsys):
    a, b = tmp_path / "a.cfg", tmp_path / "b.cfg"
    a.write_text(QUICK)
    b.write_text(QUICK.replace("name = quick", "name = other"))
    assert main(["run", "--config", str(a), "--config", str(b), "--out", str(tmp_path / "o"),
                 "--jobs", "2"]) == 0
    assert (tmp_path / "o" / "quick" / "trajectory.csv").exists()
    assert (tmp_path / "o" / "other" / "trajectory.csv").exists()


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("phase.1.control = none\nphysical.nu = fast\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["run"]) == 1
    assert main(["run", "--preset", "fig9"]) == 1


def test_blow_up_exit_code_keeps_partial_outputs(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("integrator.dt = 0.003\nintegrator.record_every = 1\nphase.1.control = none\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    t, s = read_trajectory_csv(tmp_path / "o" / "trajectory.csv")
    assert len(t) >= 1 and np.all(np.isfinite(s))
    assert "BLOW-UP" in (tmp_path / "o" / "summary.txt").read_text()


def test_timeout_is_zero_exit_and_flagged(tmp_path, capsys):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("integrator.t_max = 0.3\nintegrator.record_every = 500\nphase.1.control = none\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "timed out" in capsys.readouterr().out


def test_verify_subset(capsys):
    assert main(["verify", "--suite", "fixed_points", "--suite", "decomposition", "--jobs", "1"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] fixed_points" in out and "checks passed" in out
    assert main(["verify", "--suite", "nonsense"]) == 1


def test_verify_failure_exit_code(monkeypatch):
    from llcontrol import verify

    monkeypatch.setitem(verify.SUITES, "fixed_points",
                        lambda level, seed: [verify.Check("x", "always fails", 2.0, upper=1.0)])
    assert main(["verify", "--suite", "fixed_points", "--jobs", "1"]) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "llcontrol", "presets"], capture_output=True, text=True)
    assert res.returncode == 0 and "fig6" in res.stdout
