"""The fixed processing chain: cube -> range FFT -> bin -> phase -> displacement."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import phase as ph
from .domain import ChirpCube, PhaseSignal, RangeBinSignal
from .ranging import extract_range_bin_signal, range_fft, select_range_bin

log = logging.getLogger(__name__)

STAGES = (
    "range_fft",
    "select_range_bin",
    "extract_range_bin_signal",
    "dc_correct",
    "arctangent_demodulate",
    "unwrap",
    "phase_to_displacement",
)


class StageError(Exception):
    """Wraps a failure with the name of the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineResult:
    bin_signal: RangeBinSignal
    phase: PhaseSignal
    displacement: np.ndarray
    stages_run: Tuple[str, ...]
    detrend: str = "none"

    @property
    def bin_index(self):
        return self.bin_signal.bin_index

    @property
    def nominal_range(self):
        return self.bin_signal.nominal_range


def process_cube(
    cube: ChirpCube,
    *,
    range_window: Optional[Tuple[float, float]] = None,
    window: str = "rect",
    dc_correct: bool = True,
    detrend: str = "none",
) -> PipelineResult:
    config = cube.config
    run = []

    def stage(name, fn, *args, **kwargs):
        try:
            out = fn(*args, **kwargs)
        except Exception as exc:
            raise StageError(name, exc) from exc
        run.append(name)
        return out

    profile = stage("range_fft", range_fft, cube, window=window)
    k = stage("select_range_bin", select_range_bin, profile, range_window)
    signal = stage("extract_range_bin_signal", extract_range_bin_signal, profile, k)
    log.info("selected range bin %d (nominal range %.4f m)", k, signal.nominal_range)
    if dc_correct:
        signal = stage("dc_correct", ph.dc_correct, signal)
    wrapped = stage("arctangent_demodulate", ph.arctangent_demodulate, signal)
    values = stage("unwrap", ph.unwrap, wrapped)
    phase = PhaseSignal(values, signal.slow_time_axis, config)
    if detrend == "linear":
        phase = stage("detrend", ph.detrend_linear, phase)
    elif detrend != "none":
        raise ValueError(f"detrend must be 'none' or 'linear', got {detrend!r}")
    x = stage("phase_to_displacement", ph.phase_to_displacement, phase, config)
    return PipelineResult(signal, phase, x, tuple(run), detrend)
