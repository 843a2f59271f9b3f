import numpy as np
import pytest

from rmg.domain import ChirpCube
from rmg.errors import EmptyWindowError, ZeroSampleError
from rmg.pipeline import STAGES, StageError, process_cube
from rmg.simulator import NoiseSpec, Sinusoid, TargetTrajectory, synthesize_cube, true_phase


def test_stage_order_is_fixed(small_cfg):
    res = process_cube(synthesize_cube(small_cfg, TargetTrajectory(0.7, Sinusoid(1e-3, 1.0))))
    assert res.stages_run == STAGES
    skipped = process_cube(synthesize_cube(small_cfg, TargetTrajectory(0.7)), dc_correct=False)
    assert skipped.stages_run == tuple(s for s in STAGES if s != "dc_correct")


def test_stage_errors_name_the_stage(small_cfg):
    cube = synthesize_cube(small_cfg, TargetTrajectory(0.7))
    with pytest.raises(StageError) as info:
        process_cube(cube, range_window=(0.701, 0.702))
    assert info.value.stage == "select_range_bin"
    assert isinstance(info.value.cause, EmptyWindowError)


def test_all_zero_cube_fails_at_demodulation(small_cfg):
    cube = ChirpCube(small_cfg, np.zeros((small_cfg.M, small_cfg.N)))
    with pytest.raises(StageError) as info:
        process_cube(cube, dc_correct=False)
    assert info.value.stage == "arctangent_demodulate"
    assert isinstance(info.value.cause, ZeroSampleError)


def test_dc_correct_reduces_error_with_stationary_reflector(cfg):
    tr = TargetTrajectory(0.7, Sinusoid(1.5e-3, 1.0))
    noise = NoiseSpec(clutter=0.5 + 0.25j, awgn_sigma=0.02)
    cube = synthesize_cube(cfg, tr, noise, 5)
    truth = true_phase(cfg, tr)

    def err(dc):
        p = process_cube(cube, dc_correct=dc).phase.values
        return np.max(np.abs((p - p[0]) - (truth - truth[0])))

    assert err(True) < err(False)


def test_linear_detrend_removes_drift(small_cfg):
    cfg = small_cfg.replace(M=400)
    t = cfg.slow_time_axis()
    drift = lambda tt: 2e-4 * np.asarray(tt)  # noqa: E731
    from rmg.simulator import PiecewiseLinear

    tr = TargetTrajectory(0.7, PiecewiseLinear(tuple(t), tuple(drift(t))))
    res = process_cube(synthesize_cube(cfg, tr), dc_correct=False, detrend="linear")
    assert res.detrend == "linear" and "detrend" in res.stages_run
    assert np.max(np.abs(res.phase.values)) < 1e-9
    with pytest.raises(ValueError):
        process_cube(synthesize_cube(cfg, tr), detrend="cubic")


def test_hann_window_keeps_target_bin(cfg):
    cube = synthesize_cube(cfg.replace(M=16), TargetTrajectory(0.9, Sinusoid(1e-3, 1.0)))
    a = process_cube(cube, dc_correct=False)
    b = process_cube(cube, dc_correct=False, window="hann")
    assert abs(a.nominal_range - b.nominal_range) <= cfg.range_resolution * 1.6
