"""Reference EMG conditioning and alignment to the radar slow-time grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .domain import BiosignalTrace, PhaseSignal
from .errors import CoverageError, NormalizationError

DEFAULT_ENVELOPE_WINDOW = 0.125  # s


@dataclass(frozen=True)
class AlignedPair:
    emg_norm: np.ndarray
    phase_norm: np.ndarray
    slow_time_axis: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float) for a in (self.emg_norm, self.phase_norm, self.slow_time_axis)]
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape) or arrays[0].ndim != 1:
            raise ValueError("aligned channels must be equal-length vectors")
        for name, a in zip(("emg_norm", "phase_norm", "slow_time_axis"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return len(self.emg_norm)

    def subset(self, start, stop) -> "AlignedPair":
        return AlignedPair(self.emg_norm[start:stop], self.phase_norm[start:stop], self.slow_time_axis[start:stop])


def envelope(trace: BiosignalTrace, window_s: float = DEFAULT_ENVELOPE_WINDOW) -> BiosignalTrace:
    """Full-wave rectification followed by a centered moving RMS.

    Edges repeat the nearest sample, so a constant input stays constant.
    """
    if not window_s > 0:
        raise ValueError(f"window_s must be > 0, got {window_s!r}")
    width = int(round(window_s * trace.sample_rate))
    if width < 1:
        raise ValueError(f"window {window_s} s is shorter than one sample at {trace.sample_rate} Hz")
    rectified = np.abs(trace.values)
    mean_sq = uniform_filter1d(rectified**2, size=width, mode="nearest")
    return BiosignalTrace(np.sqrt(np.clip(mean_sq, 0.0, None)), trace.sample_rate, trace.start_time)


def normalize(values) -> np.ndarray:
    """Divide by the largest sample: out = v / max(v)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise NormalizationError("cannot normalize an empty vector")
    peak = np.max(v)
    if not peak > 0:
        raise NormalizationError(f"largest sample is {peak!r}; normalization needs a positive maximum")
    return v / peak


def align_to_slow_time(trace: BiosignalTrace, phase: PhaseSignal, *, emg_offset: float = 0.0) -> AlignedPair:
    """Interpolate the trace onto the phase timebase and normalize both channels.

    ``emg_offset`` (s) is added to the trace's timestamps before
    interpolation to correct a rig whose triggers are not simultaneous.
    Phase is referenced to its first sample before normalization, so the
    normalized phase starts at 0.
    """
    t_emg = trace.times() + emg_offset
    t = phase.slow_time_axis
    dt = 1.0 / trace.sample_rate
    if len(t_emg) == 0 or t[0] < t_emg[0] - dt or t[-1] > t_emg[-1] + dt:
        span = (float(t_emg[0]), float(t_emg[-1])) if len(t_emg) else (np.nan, np.nan)
        raise CoverageError(
            f"EMG spans {span[0]:.6g}..{span[1]:.6g} s but radar capture spans "
            f"{t[0]:.6g}..{t[-1]:.6g} s"
        )
    emg = np.interp(t, t_emg, trace.values)
    rel = phase.values - phase.values[0]
    return AlignedPair(normalize(emg), normalize(rel), t)
