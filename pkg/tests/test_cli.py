import json

import numpy as np
import pytest

from rmg import cli
from rmg import io as rio
from rmg.domain import BiosignalTrace, PhaseSignal
from rmg.synthetic import Pulse, reference_config, trapezoid_envelope


def scenario(tmp_path, motion=None, M=64, **noise):
    doc = {
        "format_version": 1,
        "config": rio.config_to_dict(reference_config(M=M)),
        "trajectory": {"R0": 0.7, "motion": motion or {"type": "sinusoid", "amplitude": 1e-3, "frequency": 1.0},
                       "amplitude": 1000.0},
        "noise": noise,
        "seed": 3,
    }
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(doc))
    return p


def simulate(tmp_path, **kw):
    sc = scenario(tmp_path, **kw)
    cap, cfg = tmp_path / "cap.bin", tmp_path / "cfg.json"
    assert cli.main(["simulate", str(sc), str(cap), "--config-out", str(cfg)]) == 0
    return cap, cfg


def test_simulate_writes_capture_and_truth(tmp_path):
    cap, cfg = simulate(tmp_path)
    assert cap.stat().st_size == 64 * 256 * 4
    lines = (tmp_path / "truth.csv").read_text().splitlines()
    assert lines[0] == "slow_time_s,x_m,rbm_m,phi_rad" and len(lines) == 65


def test_static_target_truth_phase_constant(tmp_path):
    simulate(tmp_path, motion={"type": "constant", "value": 0.0})
    rows = np.loadtxt(tmp_path / "truth.csv", delimiter=",", skiprows=1)
    assert np.ptp(rows[:, 3]) == 0.0


def test_simulate_is_seed_deterministic(tmp_path):
    sc = scenario(tmp_path, awgn_sigma=5.0)
    a, b, c = (tmp_path / n for n in ("a.bin", "b.bin", "c.bin"))
    cli.main(["simulate", str(sc), str(a)])
    cli.main(["simulate", str(sc), str(b), "--jobs", "3"])
    cli.main(["simulate", str(sc), str(c), "--seed", "4"])
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_process_prints_bin_and_writes_sidecar(tmp_path, capsys):
    cap, cfg = simulate(tmp_path)
    out = tmp_path / "res"
    assert cli.main(["process", str(cap), "--config", str(cfg), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "range bin 12" in printed and "0.7026 m" in printed
    side = json.loads((tmp_path / "res.process.json").read_text())
    assert side["dc_correct"] is True and "dc_correct" in side["stages"]
    assert side["format_version"] == 1
    assert len((tmp_path / "res.csv").read_text().splitlines()) == 65


def test_no_dc_correct_reflected(tmp_path):
    cap, cfg = simulate(tmp_path)
    out = tmp_path / "res"
    assert cli.main(["process", str(cap), "--config", str(cfg), "--out", str(out), "--no-dc-correct"]) == 0
    side = json.loads((tmp_path / "res.process.json").read_text())
    assert side["dc_correct"] is False and "dc_correct" not in side["stages"]


def test_process_several_captures_in_parallel(tmp_path):
    cap, cfg = simulate(tmp_path)
    cap2 = tmp_path / "cap2.bin"
    cap2.write_bytes(cap.read_bytes())
    outdir = tmp_path / "out"
    assert cli.main(["process", str(cap), str(cap2), "--config", str(cfg), "--out", str(outdir), "--jobs", "2"]) == 0
    assert (outdir / "cap.csv").read_bytes() == (outdir / "cap2.csv").read_bytes()


def test_schema_error_exit_3_with_pointer(tmp_path, capsys):
    cap, cfg = simulate(tmp_path)
    doc = json.loads(cfg.read_text())
    doc["fs"] = -1
    cfg.write_text(json.dumps(doc))
    assert cli.main(["process", str(cap), "--config", str(cfg), "--out", str(tmp_path / "r")]) == 3
    assert "/fs" in capsys.readouterr().err


def test_truncated_capture_exit_3(tmp_path, capsys):
    cap, cfg = simulate(tmp_path)
    cap.write_bytes(cap.read_bytes()[:-5])
    assert cli.main(["process", str(cap), "--config", str(cfg), "--out", str(tmp_path / "r")]) == 3
    assert "short read" in capsys.readouterr().err


def test_empty_range_window_exit_3(tmp_path, capsys):
    cap, cfg = simulate(tmp_path)
    rc = cli.main(["process", str(cap), "--config", str(cfg), "--out", str(tmp_path / "r"), "--range-window", "0.701:0.702"])
    assert rc == 3
    assert "select_range_bin" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["fit", "r.csv", "e.csv", "--out", "x.json", "--on-thresh", "0.05", "--off-thresh", "0.1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["process", "c.bin", "--config", "c.json", "--out", "o", "--range-window", "2:1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["bogus"])
    assert info.value.code == 2


def write_fit_inputs(tmp_path, phase_fn, emg_fn, duration=12.0):
    t = np.arange(int(duration * 178.5) + 1) / 178.5
    disp = np.zeros_like(t)
    rio.write_results(PhaseSignal(phase_fn(t), t), disp, tmp_path / "res")
    te = np.arange(int(duration * 1000) + 1) / 1000.0
    rio.write_emg_csv(BiosignalTrace(emg_fn(te), 1000.0, 0.0), tmp_path / "emg.csv")
    return tmp_path / "res.csv", tmp_path / "emg.csv"


def test_fit_without_cycles_warns_and_exits_0(tmp_path, capsys):
    res, emg = write_fit_inputs(tmp_path, lambda t: t, lambda t: np.ones_like(t))
    out = tmp_path / "fit.json"
    assert cli.main(["fit", str(res), str(emg), "--out", str(out), "--envelope-window", "0"]) == 0
    assert "no contraction cycles" in capsys.readouterr().err
    rep = json.loads(out.read_text())
    assert rep["cycles"] == [] and rep["aggregate"]["mean_A"] is None


PULSES = [Pulse(1.0 + 3.0 * k, 0.8, 0.8, 0.8) for k in range(3)]


def test_fit_recovers_clean_model(tmp_path, capsys):
    env = lambda t: trapezoid_envelope(t, PULSES)  # noqa: E731
    res, emg = write_fit_inputs(tmp_path, lambda t: 1 - np.exp(-4.0 * env(t)), env)
    out = tmp_path / "fit.json"
    aligned = tmp_path / "aligned"
    rc = cli.main(["fit", str(res), str(emg), "--out", str(out), "--envelope-window", "0",
                   "--group", "p1", "--aligned-out", str(aligned)])
    assert rc == 0
    rep = rio.read_fit_report(out)
    assert rep["aggregate"]["n_cycles"] == 3 and rep["group"] == "p1"
    assert rep["aggregate"]["mean_B"] == pytest.approx(4.0, abs=1e-3)
    header = (tmp_path / "aligned.csv").read_text().splitlines()[0]
    assert header.endswith("emg_norm,phase_norm")


def test_fit_nonconvergence_exit_4(tmp_path):
    # phase proportional to EMG: the model's best fit runs off to B -> 0, A -> inf
    env = lambda t: trapezoid_envelope(t, PULSES)  # noqa: E731
    res, emg = write_fit_inputs(tmp_path, env, env)
    rc = cli.main(["fit", str(res), str(emg), "--out", str(tmp_path / "f.json"), "--envelope-window", "0"])
    assert rc == 4
    rep = json.loads((tmp_path / "f.json").read_text())
    assert rep["aggregate"]["n_converged"] < rep["aggregate"]["n_cycles"]


def test_fit_coverage_error_exit_3(tmp_path, capsys):
    env = lambda t: trapezoid_envelope(t, PULSES)  # noqa: E731
    res, emg = write_fit_inputs(tmp_path, env, env)
    rc = cli.main(["fit", str(res), str(emg), "--out", str(tmp_path / "f.json"), "--emg-offset", "5"])
    assert rc == 3
    assert "EMG spans" in capsys.readouterr().err


def test_report_aggregates_groups(tmp_path, capsys):
    paths = []
    for i, (g, b) in enumerate([("p1", 3.0), ("p1", 4.0), ("p2", 10.0)]):
        p = tmp_path / f"r{i}.json"
        rio.write_json({"format_version": 1, "group": g,
                        "aggregate": {"mean_A": 1.0, "mean_B": b, "mean_r_squared": 0.5}}, p)
        paths.append(str(p))
    assert cli.main(["report", *paths, "--out", str(tmp_path / "summary")]) == 0
    md = capsys.readouterr().out
    assert "| p1 | 2 | 1.00 | 3.50 | 0.50 |" in md
    assert "| all | 3 | 1.00 | 6.75 | 0.50 |" in md
    csv_lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert csv_lines[0] == "group,n_experiments,mean_A,mean_B,mean_r_squared"
