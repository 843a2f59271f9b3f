"""From a range-bin signal to unwrapped phase and relative displacement."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .domain import PhaseSignal, RadarConfig, RangeBinSignal
from .errors import ZeroSampleError

TWO_PI = 2 * np.pi


def dc_correct(signal: RangeBinSignal) -> RangeBinSignal:
    """Subtract the complex mean of the range-bin signal."""
    s = signal.samples
    return signal.with_samples(s - s.mean())


def arctangent_demodulate(signal: Union[RangeBinSignal, np.ndarray]) -> np.ndarray:
    """Four-quadrant angle of I + jQ, mapped into (-pi, pi]."""
    s = signal.samples if isinstance(signal, RangeBinSignal) else np.asarray(signal, dtype=complex)
    zero = np.flatnonzero(s == 0)
    if zero.size:
        raise ZeroSampleError(f"phase undefined: sample {int(zero[0])} is exactly 0+0j")
    phi = np.angle(s)
    # atan2 returns -pi for a negative real with imaginary part -0.0
    phi[phi == -np.pi] = np.pi
    return phi


def unwrap(wrapped) -> np.ndarray:
    """Sequential 2*pi correction of a wrapped phase sequence.

    Walks the raw consecutive differences once and keeps a running offset:
    a raw jump above pi subtracts 2*pi from every later sample, a jump
    below -pi adds 2*pi.  A jump of exactly +-pi is left alone.  Unlike
    ``numpy.unwrap`` (which assigns each boundary value to the lower
    branch), this is exactly the inclusive rule.
    """
    w = np.asarray(wrapped, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("unwrap expects a non-empty 1-D vector")
    d = np.diff(w)
    step = np.where(d > np.pi, -TWO_PI, np.where(d < -np.pi, TWO_PI, 0.0))
    offset = np.concatenate(([0.0], np.cumsum(step)))
    return w + offset


def phase_to_displacement(phase: Union[PhaseSignal, np.ndarray], config: RadarConfig) -> np.ndarray:
    """Displacement relative to the first chirp, x = (phi - phi[0]) * lambda_c / (4 pi)."""
    v = phase.values if isinstance(phase, PhaseSignal) else np.asarray(phase, dtype=float)
    return (v - v[0]) * config.lambda_c / (4 * np.pi)


def detrend_linear(phase: PhaseSignal) -> PhaseSignal:
    """Least-squares straight-line removal; a convenience, not part of the core chain."""
    from scipy.signal import detrend

    return PhaseSignal(detrend(phase.values, type="linear"), phase.slow_time_axis, phase.config_ref)


@dataclass(frozen=True)
class VelocityReport:
    n_flagged: int
    worst_index: Optional[int]  # step worst_index -> worst_index + 1
    worst_step: float  # signed displacement of the worst step (m)
    limit: float  # lambda_c / 4

    @property
    def ok(self):
        return self.n_flagged == 0


def check_velocity_budget(motion, config: RadarConfig) -> VelocityReport:
    """Flag slow-time steps whose displacement exceeds lambda_c/4 in magnitude.

    ``motion`` is a displacement vector (m) sampled on the slow-time grid or
    a trajectory object with a ``displacement(t)`` method, which is then
    sampled at the config's M chirp times.
    """
    if hasattr(motion, "displacement"):
        x = np.asarray(motion.displacement(config.slow_time_axis()), dtype=float)
    else:
        x = np.asarray(motion, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    dx = np.diff(x)
    limit = config.lambda_c / 4
    flagged = np.abs(dx) > limit
    n = int(np.count_nonzero(flagged))
    worst = int(np.argmax(np.abs(dx)))
    return VelocityReport(
        n_flagged=n,
        worst_index=worst if n else None,
        worst_step=float(dx[worst]),
        limit=limit,
    )


def recover_phase(signal: RangeBinSignal, config: Optional[RadarConfig] = None, *, dc: bool = True) -> PhaseSignal:
    """dc_correct (optional) -> arctangent_demodulate -> unwrap."""
    if dc:
        signal = dc_correct(signal)
    return PhaseSignal(unwrap(arctangent_demodulate(signal)), signal.slow_time_axis, config)
