import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from rmg.domain import RangeBinSignal
from rmg.errors import ZeroSampleError
from rmg.phase import (
    arctangent_demodulate,
    check_velocity_budget,
    dc_correct,
    phase_to_displacement,
    recover_phase,
    unwrap,
)
from rmg.simulator import PiecewiseLinear, Sinusoid, TargetTrajectory

from conftest import wrap


def bin_signal(samples):
    samples = np.asarray(samples, dtype=complex)
    return RangeBinSignal(3, 0.7, samples, np.arange(len(samples)) / 178.5)


@pytest.mark.parametrize(
    "z, phi",
    [(1 + 0j, 0.0), (1j, np.pi / 2), (-1 + 0j, np.pi), (-1j, -np.pi / 2), (complex(-1, -0.0), np.pi)],
)
def test_arctangent_examples(z, phi):
    assert arctangent_demodulate(np.array([z]))[0] == pytest.approx(phi, abs=1e-15)


def test_arctangent_rejects_exact_zero():
    with pytest.raises(ZeroSampleError, match="sample 1"):
        arctangent_demodulate(np.array([1, 0, 1], dtype=complex))


@settings(max_examples=200, deadline=None)
@given(hnp.arrays(np.complex128, st.integers(1, 50), elements=st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6)))
def test_arctangent_range_and_reconstruction(z):
    phi = arctangent_demodulate(z)
    assert np.all(phi > -np.pi) and np.all(phi <= np.pi)
    assert np.allclose(np.abs(z) * np.exp(1j * phi), z, rtol=1e-9, atol=1e-9 * np.abs(z).max())


def test_unwrap_examples():
    assert np.allclose(unwrap([3.0, -3.0]), [3.0, -3.0 + 2 * np.pi])
    assert np.allclose(unwrap([0.0, 3.0, -3.0, -0.5]), [0.0, 3.0, -3.0 + 2 * np.pi, -0.5 + 2 * np.pi])
    assert np.allclose(unwrap([-3.0, 3.0]), [-3.0, 3.0 - 2 * np.pi])
    assert np.array_equal(unwrap([1.25]), [1.25])


def test_unwrap_leaves_exact_pi_jump():
    w = np.array([0.0, np.pi, 0.0, -np.pi])
    assert np.array_equal(unwrap(w), w)


@settings(max_examples=300, deadline=None)
@given(hnp.arrays(float, st.integers(1, 100), elements=st.floats(-np.pi, np.pi)))
def test_unwrap_properties(w):
    u = unwrap(w)
    assert u[0] == w[0]
    k = (u - w) / (2 * np.pi)
    assert np.allclose(k, np.round(k), atol=1e-9)
    assert np.all(np.abs(np.diff(u)) <= np.pi + 1e-9)


@settings(max_examples=300, deadline=None)
@given(
    start=st.floats(-np.pi, np.pi),
    steps=hnp.arrays(float, st.integers(1, 100), elements=st.floats(-3.1, 3.1)),
)
def test_unwrap_inverts_wrap_of_slow_phase(start, steps):
    phi = start + np.concatenate(([0.0], np.cumsum(steps)))
    u = unwrap(wrap(phi))
    assert np.allclose(u - u[0], phi - phi[0], atol=1e-8)


def test_dc_correct_removes_mean_and_is_idempotent():
    rng = np.random.default_rng(7)
    s = bin_signal(rng.normal(size=50) + 1j * rng.normal(size=50) + (3 - 2j))
    once = dc_correct(s)
    assert abs(once.samples.mean()) < 1e-12
    twice = dc_correct(once)
    assert np.allclose(twice.samples, once.samples, atol=1e-14)
    assert np.array_equal(once.slow_time_axis, s.slow_time_axis)


def test_dc_correct_recenters_offset_circle():
    theta = np.linspace(-1.2, 1.9, 200)
    full = np.exp(1j * np.linspace(0, 2 * np.pi, 400, endpoint=False))
    shifted = bin_signal(5 * full + (2 + 1j))
    assert np.allclose(dc_correct(shifted).samples, 5 * full, atol=1e-12)
    # partial arcs are not recentered exactly: the mean lies inside the circle
    arc = bin_signal(np.exp(1j * theta))
    assert abs(dc_correct(arc).samples.mean()) < 1e-12


def test_pi_step_is_quarter_wavelength(cfg):
    x = phase_to_displacement(np.array([0.3, 0.3 + np.pi]), cfg)
    assert x[0] == 0.0
    assert x[1] == pytest.approx(cfg.lambda_c / 4, rel=1e-15)


def test_recover_phase_of_clean_rotation():
    true = 0.2 + 0.05 * np.arange(300) ** 1.2
    sig = bin_signal(4.0 * np.exp(1j * true))
    got = recover_phase(sig, dc=False).values
    assert np.allclose(got - got[0], true - true[0], atol=1e-9)


def test_velocity_budget_examples(cfg):
    Tr = cfg.chirp_repetition_period
    assert cfg.v_max == pytest.approx(cfg.lambda_c / (4 * Tr))
    slow = TargetTrajectory(0.7, PiecewiseLinear((0.0, 1.0), (0.0, 0.9 * cfg.v_max)))
    fast = TargetTrajectory(0.7, PiecewiseLinear((0.0, 1.0), (0.0, 1.5 * cfg.v_max)))
    assert check_velocity_budget(slow, cfg.replace(M=100)).ok
    rep = check_velocity_budget(fast, cfg.replace(M=100))
    assert not rep.ok and rep.n_flagged == 99
    assert rep.worst_step == pytest.approx(1.5 * cfg.lambda_c / 4)


def test_velocity_budget_is_inclusive_at_limit(cfg):
    lim = cfg.lambda_c / 4
    assert check_velocity_budget(np.array([0.0, lim]), cfg).ok
    rep = check_velocity_budget(np.array([0.0, 0.0, -lim * 1.01]), cfg)
    assert rep.n_flagged == 1 and rep.worst_index == 1 and rep.worst_step < 0


def test_sinusoid_within_budget(cfg):
    # peak speed 2 pi a f = 6.3 mm/s, far below v_max
    assert check_velocity_budget(TargetTrajectory(0.7, Sinusoid(1e-3, 1.0)), cfg).ok
