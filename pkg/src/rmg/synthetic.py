"""Synthetic contraction experiments: EMG envelope drives deformation through the model.

Used by the experiment scripts and the end-to-end tests.  The EMG written
out is a carrier sinusoid amplitude-modulated by a trapezoidal envelope,
so that rectification plus moving RMS recovers the envelope.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import BiosignalTrace, RadarConfig, make_radar_config
from .simulator import NoiseSpec, PiecewiseLinear, TargetTrajectory


def reference_config(M: int = 2048) -> RadarConfig:
    """60 GHz start, 4 GHz sweep, 40 us chirp, 10 MHz ADC, 256 samples, 178.5 Hz slow time."""
    return make_radar_config(f0=60e9, B=4e9, T=40e-6, fs=10e6, N=256, M=M, slow_time_rate=178.5)


@dataclass(frozen=True)
class Pulse:
    start: float  # s, rise begins
    rise: float
    hold: float
    fall: float
    peak: float = 1.0

    def breakpoints(self):
        t1 = self.start + self.rise
        t2 = t1 + self.hold
        t3 = t2 + self.fall
        return [(self.start, 0.0), (t1, self.peak), (t2, self.peak), (t3, 0.0)]


def trapezoid_envelope(t, pulses: Sequence[Pulse]):
    """Piecewise-linear envelope that is zero outside the pulses."""
    times, values = [], []
    for p in pulses:
        for bt, bv in p.breakpoints():
            times.append(bt)
            values.append(bv)
    return np.interp(np.asarray(t, dtype=float), times, values, left=0.0, right=0.0)


def default_pulses(duration: float = 57.1):
    peaks = [1.0, 0.85, 0.95, 0.9, 1.0, 0.8]
    pulses = [Pulse(2.0 + 8.0 * k, 1.0, 1.5, 1.0, pk) for k, pk in enumerate(peaks)]
    return [p for p in pulses if p.breakpoints()[-1][0] < duration]


def awgn_for_phase_noise(config: RadarConfig, R0: float, amplitude: float, phase_sigma: float) -> float:
    """Per-component AWGN sigma giving ``phase_sigma`` rad of range-bin phase noise.

    At high SNR the phase noise is the per-component noise of the bin
    (sigma * sqrt(N)) divided by the bin magnitude amplitude * |sum z^n|.
    """
    fb = config.beat_frequency(R0)
    k = int(round(fb * config.N / config.fs))
    n = np.arange(config.N)
    gain = abs(np.sum(np.exp(2j * np.pi * (fb / config.fs - k / config.N) * n)))
    return phase_sigma * amplitude * gain / np.sqrt(config.N)


@dataclass
class SyntheticExperiment:
    config: RadarConfig
    trajectory: TargetTrajectory
    noise: NoiseSpec
    emg: BiosignalTrace
    envelope_truth: np.ndarray  # on the slow-time grid
    deformation_truth: np.ndarray  # meters, on the slow-time grid


def contraction_experiment(
    duration: float = 57.1,
    *,
    A: float = 1.0,
    B: float = 5.0,
    peak_displacement: float = 1e-3,
    phase_sigma: float = 0.01,
    R0: float = 0.70,
    amplitude: float = 1000.0,
    emg_rate: float = 2000.0,
    carrier_hz: float = 96.0,
    emg_volts: float = 1e-3,
    pulses: Sequence[Pulse] = None,
) -> SyntheticExperiment:
    """Deformation x(t) = peak_displacement * A * (1 - exp(-B * env(t))).

    ``env`` is the trapezoidal EMG envelope (peak 1).  The radar slow-time
    grid covers ``duration`` seconds inclusive of both ends.
    """
    rate = 178.5
    M = int(np.floor(duration * rate + 1e-9)) + 1
    config = reference_config(M)
    pulses = default_pulses(duration) if pulses is None else list(pulses)
    t = config.slow_time_axis()
    env = trapezoid_envelope(t, pulses)
    x = peak_displacement * A * (1.0 - np.exp(-B * env))
    trajectory = TargetTrajectory(R0, PiecewiseLinear(tuple(t), tuple(x)), amplitude=amplitude)
    noise = NoiseSpec(awgn_sigma=awgn_for_phase_noise(config, R0, amplitude, phase_sigma))

    n_emg = int(np.ceil((t[-1] + 0.5) * emg_rate)) + 1
    t_emg = np.arange(n_emg) / emg_rate
    raw = emg_volts * trapezoid_envelope(t_emg, pulses) * np.sin(2 * np.pi * carrier_hz * t_emg)
    emg = BiosignalTrace(raw, emg_rate, 0.0)
    return SyntheticExperiment(config, trajectory, noise, emg, env, x)
