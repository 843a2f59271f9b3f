"""Synthetic FMCW baseband generator for a single point target.

The target's motion is frozen within each chirp (no Doppler term), so a
chirp i sampled at fast-time index n is

    A_R * exp(j * (2*pi*f_b*n/fs + 4*pi*R0/lambda0 + 4*pi*(x(iTr) + rho(iTr))/lambda_c + phi0))

where Tr is the chirp repetition period.  Noise and DC offset are added on
top of that ideal tone by :func:`synthesize_cube`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .domain import ChirpCube, RadarConfig
from .errors import AliasError, TrajectoryError

__all__ = [
    "Constant",
    "Sinusoid",
    "PiecewiseLinear",
    "TargetTrajectory",
    "NoiseSpec",
    "synthesize_beat_sample",
    "synthesize_cube",
    "true_phase",
    "motion_from_dict",
]


@dataclass(frozen=True)
class Constant:
    value: float = 0.0

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value))

    def to_dict(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2*pi*frequency*t + phase)``"""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t + self.phase)

    def to_dict(self):
        return {
            "type": "sinusoid",
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self.phase,
        }


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through (time, value) breakpoints, held flat outside."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) == 0 or len(times) != len(values):
            raise TrajectoryError("piecewise_linear needs equal, non-empty times and values")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TrajectoryError("piecewise_linear times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    def to_dict(self):
        return {"type": "piecewise_linear", "times": list(self.times), "values": list(self.values)}


Motion = Union[Constant, Sinusoid, PiecewiseLinear, Callable]


def motion_from_dict(d: dict):
    kind = d["type"]
    if kind == "constant":
        return Constant(d.get("value", 0.0))
    if kind == "sinusoid":
        return Sinusoid(d["amplitude"], d["frequency"], d.get("phase", 0.0))
    if kind == "piecewise_linear":
        return PiecewiseLinear(tuple(d["times"]), tuple(d["values"]))
    raise TrajectoryError(f"unknown motion type {kind!r}")


@dataclass(frozen=True)
class TargetTrajectory:
    """Point target at nominal range ``R0`` with motion ``x(t)`` and optional RBM ``rho(t)``.

    ``motion`` and ``rbm`` are vectorized callables of slow time (seconds)
    returning displacement along boresight in meters.
    """

    R0: float
    motion: Motion = field(default_factory=Constant)
    rbm: Optional[Motion] = None
    amplitude: float = 1.0
    initial_phase: float = 0.0

    def __post_init__(self):
        if not (self.R0 > 0 and math.isfinite(self.R0)):
            raise TrajectoryError(f"R0 must be > 0, got {self.R0!r}")

    def displacement(self, t):
        """Total boresight displacement x(t) + rho(t)."""
        x = np.asarray(self.motion(t), dtype=float)
        if self.rbm is not None:
            x = x + np.asarray(self.rbm(t), dtype=float)
        return x

    def check(self, t):
        x = np.abs(np.asarray(self.motion(t), dtype=float))
        if self.rbm is not None:
            x = x + np.abs(np.asarray(self.rbm(t), dtype=float))
        if not np.all(np.isfinite(x)):
            raise TrajectoryError("trajectory produced non-finite displacement")
        if np.any(x >= self.R0):
            worst = float(np.max(x))
            raise TrajectoryError(
                f"|x| + |rho| reaches {worst:g} m, target would pass the radar (R0={self.R0:g} m)"
            )


@dataclass(frozen=True)
class NoiseSpec:
    """Receiver impairments.

    ``awgn_sigma`` is the standard deviation of each of the real and
    imaginary noise components per sample.  ``dc_offset`` is a complex
    constant added to every fast-time sample (it lands in range bin 0).
    ``clutter`` is the complex amplitude of a stationary reflector at
    ``clutter_range`` (defaults to the target range); this is what puts a
    constant offset into the target's range-bin signal.
    """

    awgn_sigma: float = 0.0
    dc_offset: complex = 0j
    clutter: complex = 0j
    clutter_range: Optional[float] = None

    def __post_init__(self):
        if not (self.awgn_sigma >= 0 and math.isfinite(self.awgn_sigma)):
            raise ValueError(f"awgn_sigma must be >= 0, got {self.awgn_sigma!r}")

    @property
    def is_noiseless(self):
        return self.awgn_sigma == 0 and self.dc_offset == 0 and self.clutter == 0


def _checked_beat_frequency(config: RadarConfig, R0: float) -> float:
    fb = config.beat_frequency(R0)
    if fb >= config.fs / 2:
        raise AliasError(
            f"beat frequency {fb:g} Hz for R0={R0:g} m is at or above fs/2={config.fs / 2:g} Hz"
        )
    return fb


def _phase_terms(config: RadarConfig, trajectory: TargetTrajectory, chirp_times):
    static = 4 * np.pi * trajectory.R0 / config.lambda0 + trajectory.initial_phase
    motion = 4 * np.pi * trajectory.displacement(chirp_times) / config.lambda_c
    return static + motion


def _tone(fb, n, fs, phase_i, amplitude):
    # one expression shared by the scalar and batched paths keeps them bit-identical
    return amplitude * np.exp(1j * (2 * np.pi * fb * (n / fs) + phase_i))


def true_phase(config: RadarConfig, trajectory: TargetTrajectory, M: Optional[int] = None):
    """Ground-truth per-chirp phase for chirps 0..M-1."""
    t = np.arange(config.M if M is None else M) * config.chirp_repetition_period
    return _phase_terms(config, trajectory, t)


def synthesize_beat_sample(config: RadarConfig, trajectory: TargetTrajectory, i: int, n: int) -> complex:
    """Noiseless baseband sample for chirp ``i``, fast-time index ``n``."""
    if not (0 <= i < config.M and 0 <= n < config.N):
        raise IndexError(f"(i, n) = ({i}, {n}) outside M x N = {config.M} x {config.N}")
    fb = _checked_beat_frequency(config, trajectory.R0)
    t = np.array([i * config.chirp_repetition_period])
    phase_i = _phase_terms(config, trajectory, t)
    return complex(_tone(fb, np.array([float(n)]), config.fs, phase_i, trajectory.amplitude)[0])


def _noise_block(seed_seqs, N, sigma):
    out = np.empty((len(seed_seqs), N), dtype=np.complex128)
    for row, ss in enumerate(seed_seqs):
        rng = np.random.default_rng(ss)
        out[row].real = rng.standard_normal(N)
        out[row].imag = rng.standard_normal(N)
    return out * sigma


def synthesize_cube(
    config: RadarConfig,
    trajectory: TargetTrajectory,
    noise: NoiseSpec = NoiseSpec(),
    rng_seed: int = 0,
    *,
    capture_start_time: float = 0.0,
    jobs: int = 1,
) -> ChirpCube:
    """Batch the single-sample model over all M x N samples and add ``noise``.

    Each chirp draws its noise from its own child of
    ``SeedSequence(rng_seed)``, so the output does not depend on ``jobs``.
    """
    fb = _checked_beat_frequency(config, trajectory.R0)
    t = np.arange(config.M) * config.chirp_repetition_period
    trajectory.check(t)
    phase_i = _phase_terms(config, trajectory, t)[:, None]
    n = np.arange(config.N, dtype=float)[None, :]
    samples = _tone(fb, n, config.fs, phase_i, trajectory.amplitude)

    if noise.clutter != 0:
        r_clutter = trajectory.R0 if noise.clutter_range is None else noise.clutter_range
        fc_b = _checked_beat_frequency(config, r_clutter)
        samples = samples + noise.clutter * np.exp(1j * 2 * np.pi * fc_b * (n / config.fs))
    if noise.dc_offset != 0:
        samples = samples + complex(noise.dc_offset)
    if noise.awgn_sigma > 0:
        children = np.random.SeedSequence(rng_seed).spawn(config.M)
        if jobs > 1:
            chunks = np.array_split(np.arange(config.M), jobs)
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                blocks = list(
                    pool.map(
                        lambda idx: _noise_block([children[k] for k in idx], config.N, noise.awgn_sigma),
                        chunks,
                    )
                )
            samples = samples + np.concatenate(blocks, axis=0)
        else:
            samples = samples + _noise_block(children, config.N, noise.awgn_sigma)
    return ChirpCube(config, samples, capture_start_time)
