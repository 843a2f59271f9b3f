import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from rmg.biosignal import align_to_slow_time, envelope, normalize
from rmg.domain import BiosignalTrace, PhaseSignal
from rmg.errors import CoverageError, NormalizationError
from rmg.synthetic import contraction_experiment


def test_constant_input_envelope_is_constant():
    env = envelope(BiosignalTrace(np.full(500, -0.7), 1000.0), 0.05).values
    assert np.allclose(env, 0.7, rtol=1e-12)


def test_zero_input_gives_zero_envelope():
    assert np.all(envelope(BiosignalTrace(np.zeros(200), 1000.0), 0.05).values == 0)


def test_sinusoid_envelope_is_rms():
    fs, f, a = 2000.0, 100.0, 0.8
    t = np.arange(4000) / fs
    env = envelope(BiosignalTrace(a * np.sin(2 * np.pi * f * t), fs), 0.1).values
    # window of 200 samples spans exactly 10 periods
    assert np.allclose(env[500:-500], a / np.sqrt(2), rtol=1e-9)


def test_envelope_window_validation():
    tr = BiosignalTrace(np.ones(10), 100.0)
    with pytest.raises(ValueError):
        envelope(tr, 0.0)
    with pytest.raises(ValueError):
        envelope(tr, 0.001)


def test_normalize_examples():
    assert np.array_equal(normalize([0.0, 2.0, 1.0]), [0.0, 1.0, 0.5])
    with pytest.raises(NormalizationError):
        normalize([0.0, 0.0])
    with pytest.raises(NormalizationError):
        normalize([-1.0, -2.0])
    with pytest.raises(NormalizationError):
        normalize([])


@settings(max_examples=200, deadline=None)
@given(hnp.arrays(float, st.integers(1, 60), elements=st.floats(0, 1e6)), st.floats(1e-3, 1e3))
def test_normalize_properties(v, c):
    if not v.max() > 0:
        return
    out = normalize(v)
    assert out.max() == 1.0
    assert np.all((out >= 0) & (out <= 1))
    assert np.allclose(normalize(c * v), out, rtol=1e-12, atol=1e-15)


def test_align_identity_on_same_grid():
    t = np.arange(100) / 178.5
    values = np.linspace(0, 2, 100)
    trace = BiosignalTrace(values, 178.5, 0.0)
    pair = align_to_slow_time(trace, PhaseSignal(values * 3 + 1, t))
    assert np.allclose(pair.emg_norm, values / 2, rtol=1e-12)
    assert np.allclose(pair.phase_norm, values / 2, rtol=1e-12)
    assert pair.phase_norm[0] == 0.0


def test_align_midpoint_interpolation():
    trace = BiosignalTrace(np.array([0.0, 1.0, 0.0, 1.0, 2.0]), 1.0, 0.0)
    phase = PhaseSignal([0.0, 1.0, 2.0], [0.5, 2.5, 3.5])
    pair = align_to_slow_time(trace, phase)
    assert np.allclose(pair.emg_norm, [0.5, 0.5, 1.5] / np.float64(1.5))


def test_align_uses_offset_and_reports_coverage():
    trace = BiosignalTrace(np.arange(10.0), 1.0, 0.0)
    phase = PhaseSignal([0.0, 1.0, 2.0], [3.0, 4.0, 5.0])
    shifted = align_to_slow_time(trace, phase, emg_offset=1.0)
    assert np.allclose(shifted.emg_norm, np.array([2.0, 3.0, 4.0]) / 4.0)
    with pytest.raises(CoverageError, match="EMG spans"):
        align_to_slow_time(trace, PhaseSignal([0.0, 1.0], [8.0, 12.0]))
    with pytest.raises(CoverageError):
        align_to_slow_time(trace, phase, emg_offset=5.0)


def test_slow_time_grid_for_57_seconds():
    exp = contraction_experiment()
    assert exp.config.M == 10193
    assert exp.config.slow_time_axis()[-1] == pytest.approx(57.1, abs=1 / 178.5)
