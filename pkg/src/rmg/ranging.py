"""Range FFT, range-bin selection and range-bin signal extraction."""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from .domain import ChirpCube, RangeBinSignal, RangeProfile
from .errors import EmptyWindowError

WINDOWS = ("rect", "hann")


def range_fft(cube: ChirpCube, window: str = "rect") -> RangeProfile:
    """Unnormalized per-chirp DFT, X_k = sum_n x_n exp(-j 2 pi k n / N).

    ``window="hann"`` tapers each chirp first; it is meant for real captures
    and breaks the exact peak magnitude N*A_R of an on-grid tone.
    """
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}, got {window!r}")
    x = cube.samples
    if window == "hann":
        x = x * np.hanning(cube.config.N)[None, :]
    coefficients = np.fft.fft(x, axis=1)
    return RangeProfile(cube.config, coefficients, cube.config.bin_range_axis(), window)


def select_range_bin(
    profile: RangeProfile,
    search_window: Optional[Tuple[float, float]] = None,
) -> int:
    """Index of the bin with the largest mean magnitude across chirps.

    Without ``search_window`` every bin except DC is a candidate.  With a
    ``(lo, hi)`` window in meters, exactly the bins whose nominal range lies
    in ``[lo, hi]`` are candidates, DC included if it falls inside.  Ties go
    to the lower index.
    """
    axis = profile.bin_range_axis
    if search_window is None:
        candidates = np.arange(1, len(axis))
    else:
        lo, hi = search_window
        if not lo <= hi:
            raise EmptyWindowError(f"range window [{lo}, {hi}] is inverted")
        candidates = np.flatnonzero((axis >= lo) & (axis <= hi))
    if candidates.size == 0:
        raise EmptyWindowError(f"range window {search_window} contains no range bins")
    mean_mag = np.mean(np.abs(profile.coefficients[:, candidates]), axis=0)
    return int(candidates[np.argmax(mean_mag)])


def extract_range_bin_signal(profile: RangeProfile, bin_index: int) -> RangeBinSignal:
    n_bins = profile.coefficients.shape[1]
    if not 0 <= bin_index < n_bins:
        raise IndexError(f"bin {bin_index} outside [0, {n_bins})")
    samples = profile.coefficients[:, bin_index]
    slow_time = np.arange(len(samples)) * profile.config.chirp_repetition_period
    return RangeBinSignal(
        bin_index=int(bin_index),
        nominal_range=float(profile.bin_range_axis[bin_index]),
        samples=samples,
        slow_time_axis=slow_time,
    )
