"""Shared types, units and derived radar quantities.

All distances are meters, times seconds, frequencies hertz and angles
radians.  The aliases below exist to make signatures say which.
All containers are frozen and their arrays are made read-only, so they
can be shared between threads freely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError

Hz = float
Seconds = float
Meters = float
Radians = float

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


def _frozen(arr, dtype=None):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RadarConfig:
    """Chirp and frame parameterization of an FMCW capture.

    ``T`` is the duration of one chirp sweep and
    ``chirp_repetition_period`` the slow-time sampling period, i.e. the
    spacing between successive chirps.  Derived quantities are computed on
    construction.
    """

    f0: Hz
    B: Hz
    T: Seconds
    fs: Hz
    N: int
    M: int
    chirp_repetition_period: Seconds

    K: float = field(init=False)
    fc: Hz = field(init=False)
    lambda0: Meters = field(init=False)
    lambda_c: Meters = field(init=False)
    range_resolution: Meters = field(init=False)
    v_max: float = field(init=False)
    slow_time_rate: Hz = field(init=False)

    def __post_init__(self):
        for name in ("f0", "B", "T", "fs", "chirp_repetition_period"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{name} numeric", f"got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} > 0", f"got {value!r}")
        for name in ("N", "M"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} integer", f"got {value!r}")
            if value < 2:
                raise ConfigError(f"{name} >= 2", f"got {value!r}")
        # small slack so that e.g. N = fs*T computed in floating point passes
        if self.N > self.fs * self.T * (1 + 1e-12):
            raise ConfigError(
                "N <= fs*T",
                f"N={self.N} samples exceed fs*T={self.fs * self.T:g}",
            )
        if self.chirp_repetition_period < self.T * (1 - 1e-12):
            raise ConfigError(
                "chirp_repetition_period >= T",
                f"{self.chirp_repetition_period!r} < {self.T!r}",
            )

        fc = self.f0 + self.B / 2
        derived = dict(
            K=self.B / self.T,
            fc=fc,
            lambda0=SPEED_OF_LIGHT / self.f0,
            lambda_c=SPEED_OF_LIGHT / fc,
            range_resolution=SPEED_OF_LIGHT / (2 * self.B),
            v_max=(SPEED_OF_LIGHT / fc) / (4 * self.chirp_repetition_period),
            slow_time_rate=1.0 / self.chirp_repetition_period,
        )
        for name, value in derived.items():
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} > 0", f"derived value {value!r}")
            object.__setattr__(self, name, value)

    @property
    def sample_period(self) -> Seconds:
        return 1.0 / self.fs

    def beat_frequency(self, R0: Meters) -> Hz:
        """Beat frequency of a point target at range ``R0``: 2*B*R0/(c*T)."""
        return 2 * self.B * R0 / (SPEED_OF_LIGHT * self.T)

    def bin_range_axis(self) -> np.ndarray:
        """Range in meters associated with each of the N DFT bins."""
        k = np.arange(self.N)
        return k * (self.fs / self.N) * SPEED_OF_LIGHT * self.T / (2 * self.B)

    def slow_time_axis(self) -> np.ndarray:
        return np.arange(self.M) * self.chirp_repetition_period

    def raw_fields(self) -> dict:
        return dict(
            f0=self.f0,
            B=self.B,
            T=self.T,
            fs=self.fs,
            N=int(self.N),
            M=int(self.M),
            chirp_repetition_period=self.chirp_repetition_period,
        )

    def replace(self, **changes) -> "RadarConfig":
        fields = self.raw_fields()
        fields.update(changes)
        return RadarConfig(**fields)


def make_radar_config(**raw) -> RadarConfig:
    """Build a validated :class:`RadarConfig` from raw fields.

    Accepts either ``chirp_repetition_period`` or ``slow_time_rate`` (the
    reciprocal) for convenience.
    """
    raw = dict(raw)
    if "slow_time_rate" in raw:
        if "chirp_repetition_period" in raw:
            raise ConfigError(
                "single slow-time spec",
                "give chirp_repetition_period or slow_time_rate, not both",
            )
        rate = raw.pop("slow_time_rate")
        if not isinstance(rate, (int, float)) or not rate > 0:
            raise ConfigError("slow_time_rate > 0", f"got {rate!r}")
        raw["chirp_repetition_period"] = 1.0 / rate
    expected = {"f0", "B", "T", "fs", "N", "M", "chirp_repetition_period"}
    missing = expected - raw.keys()
    extra = raw.keys() - expected
    if missing:
        raise ConfigError("required fields", f"missing {sorted(missing)}")
    if extra:
        raise ConfigError("known fields", f"unexpected {sorted(extra)}")
    return RadarConfig(**raw)


@dataclass(frozen=True)
class ChirpCube:
    """M x N complex baseband samples: row i is chirp i, column n fast-time sample n."""

    config: RadarConfig
    samples: np.ndarray
    capture_start_time: Seconds = 0.0

    def __post_init__(self):
        samples = _frozen(self.samples, dtype=np.complex128)
        expected = (self.config.M, self.config.N)
        if samples.shape != expected:
            raise ValueError(f"cube shape {samples.shape} != (M, N) = {expected}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("cube contains non-finite samples")
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True)
class RangeProfile:
    config: RadarConfig
    coefficients: np.ndarray
    bin_range_axis: np.ndarray
    window: str = "rect"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients, np.complex128))
        object.__setattr__(self, "bin_range_axis", _frozen(self.bin_range_axis, float))


@dataclass(frozen=True)
class RangeBinSignal:
    bin_index: int
    nominal_range: Meters
    samples: np.ndarray
    slow_time_axis: np.ndarray

    def __post_init__(self):
        samples = _frozen(self.samples, np.complex128)
        axis = _frozen(self.slow_time_axis, float)
        if samples.ndim != 1 or samples.shape != axis.shape:
            raise ValueError("samples and slow_time_axis must be equal-length vectors")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "slow_time_axis", axis)

    def with_samples(self, samples) -> "RangeBinSignal":
        return RangeBinSignal(self.bin_index, self.nominal_range, samples, self.slow_time_axis)


@dataclass(frozen=True)
class PhaseSignal:
    """Unwrapped slow-time phase (rad)."""

    values: np.ndarray
    slow_time_axis: np.ndarray
    config_ref: Optional[RadarConfig] = None

    def __post_init__(self):
        values = _frozen(self.values, float)
        axis = _frozen(self.slow_time_axis, float)
        if values.ndim != 1 or values.shape != axis.shape:
            raise ValueError("values and slow_time_axis must be equal-length vectors")
        if not np.all(np.isfinite(values)):
            raise ValueError("phase values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slow_time_axis", axis)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class BiosignalTrace:
    """Uniformly sampled reference trace (volts) on the experiment clock."""

    values: np.ndarray
    sample_rate: Hz
    start_time: Seconds = 0.0

    def __post_init__(self):
        values = _frozen(self.values, float)
        if values.ndim != 1:
            raise ValueError("trace values must be a vector")
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("trace values must be finite")
        object.__setattr__(self, "values", values)

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.values)) / self.sample_rate


@dataclass(frozen=True)
class DeformationModel:
    """Fitted Y = A * (1 - exp(-B * X)) with diagnostics."""

    A: float
    B_coef: float
    r_squared: float
    residual_norm: float
    iterations: int
    converged: bool
    n_samples: int = 0

    def __call__(self, x):
        return self.A * (1.0 - np.exp(-self.B_coef * np.asarray(x, dtype=float)))
