"""File formats: raw captures, JSON configs/scenarios/reports and CSV results.

Capture layout
--------------
A capture is ``M * N`` complex samples stored as little-endian int16
pairs, I then Q, fast-time major (sample index varies fastest, then chirp
index).  There is no header; the shape comes from the radar config.  The
file is therefore exactly ``M * N * 4`` bytes.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from pathlib import Path
from typing import Iterable, Optional, Sequence

import jsonschema
import numpy as np

from .domain import BiosignalTrace, ChirpCube, PhaseSignal, RadarConfig, make_radar_config
from .errors import (
    CaptureFormatError,
    ConfigError,
    CSVFormatError,
    RMGError,
    SampleRangeError,
    SchemaError,
)
from .simulator import NoiseSpec, TargetTrajectory, motion_from_dict

FORMAT_VERSION = 1
BYTES_PER_SAMPLE = 4
INT16_MIN, INT16_MAX = -32768, 32767

_CAPTURE_DTYPE = np.dtype("<i2")


# --- captures -----------------------------------------------------------------


def decode_iq(data: bytes, M: int, N: int) -> np.ndarray:
    """Decode the canonical layout into an (M, N) complex array, no scaling."""
    expected = M * N * BYTES_PER_SAMPLE
    actual = len(data)
    if actual != expected:
        raise CaptureFormatError(
            f"capture size mismatch: expected {expected} bytes for M={M} x N={N}, got {actual}",
            offset=min(actual, expected),
        )
    raw = np.frombuffer(data, dtype=_CAPTURE_DTYPE).astype(np.float64)
    iq = raw.reshape(M, N, 2)
    return iq[..., 0] + 1j * iq[..., 1]


def parse_capture(data: bytes, config: RadarConfig, capture_start_time: float = 0.0) -> ChirpCube:
    return ChirpCube(config, decode_iq(data, config.M, config.N), capture_start_time)


def read_capture(path, config: RadarConfig, capture_start_time: float = 0.0) -> ChirpCube:
    path = Path(path)
    expected = config.M * config.N * BYTES_PER_SAMPLE
    with open(path, "rb") as fh:
        data = fh.read(expected + 1)
    if len(data) < expected:
        raise CaptureFormatError(
            f"{path}: short read, expected {expected} bytes, got {len(data)}", offset=len(data)
        )
    if len(data) > expected:
        actual = os.path.getsize(path)
        raise CaptureFormatError(
            f"{path}: capture size mismatch, expected {expected} bytes, got {actual}", offset=expected
        )
    return parse_capture(data, config, capture_start_time)


def encode_capture(cube: ChirpCube) -> bytes:
    iq = np.stack((np.rint(cube.samples.real), np.rint(cube.samples.imag)), axis=-1)
    bad = np.flatnonzero(((iq < INT16_MIN) | (iq > INT16_MAX)).any(axis=-1).ravel())
    if bad.size:
        i, n = divmod(int(bad[0]), cube.config.N)
        raise SampleRangeError(
            f"sample (chirp {i}, index {n}) = {cube.samples[i, n]!r} does not fit int16 "
            f"after rounding ({bad.size} samples out of range)"
        )
    return iq.astype(_CAPTURE_DTYPE).tobytes()


def write_capture(cube: ChirpCube, path) -> None:
    data = encode_capture(cube)
    with open(path, "wb") as fh:
        fh.write(data)


# --- JSON helpers -------------------------------------------------------------


def _pointer(path: Iterable) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else ""


def _load_json(path_or_text, *, is_text=False):
    try:
        if is_text:
            return json.loads(path_or_text)
        with open(path_or_text, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", "") from exc
    except UnicodeDecodeError as exc:
        raise SchemaError(f"not UTF-8 text: {exc}", "") from exc


def _validate(doc, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _pointer(err.absolute_path))


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "f0": _POS,
        "B": _POS,
        "T": _POS,
        "fs": _POS,
        "N": {"type": "integer", "minimum": 2},
        "M": {"type": "integer", "minimum": 2},
        "chirp_repetition_period": _POS,
    },
    "required": ["f0", "B", "T", "fs", "N", "M", "chirp_repetition_period"],
    "additionalProperties": False,
}

_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

_MOTION_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "constant"}, "value": _NUM},
            "required": ["type"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "sinusoid"},
                "amplitude": _NUM,
                "frequency": {"type": "number", "minimum": 0},
                "phase": _NUM,
            },
            "required": ["type", "amplitude", "frequency"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "piecewise_linear"},
                "times": {"type": "array", "items": _NUM, "minItems": 1},
                "values": {"type": "array", "items": _NUM, "minItems": 1},
            },
            "required": ["type", "times", "values"],
            "additionalProperties": False,
        },
    ]
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "config": CONFIG_SCHEMA,
        "trajectory": {
            "type": "object",
            "properties": {
                "R0": _POS,
                "motion": _MOTION_SCHEMA,
                "rbm": _MOTION_SCHEMA,
                "amplitude": _NUM,
                "initial_phase": _NUM,
            },
            "required": ["R0", "motion"],
            "additionalProperties": False,
        },
        "noise": {
            "type": "object",
            "properties": {
                "awgn_sigma": {"type": "number", "minimum": 0},
                "dc_offset": _COMPLEX,
                "clutter": _COMPLEX,
                "clutter_range": _POS,
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
        "capture_start_time": _NUM,
    },
    "required": ["config", "trajectory"],
    "additionalProperties": False,
}


def config_to_dict(config: RadarConfig) -> dict:
    return {"format_version": FORMAT_VERSION, **config.raw_fields()}


def config_from_dict(doc, pointer: str = "") -> RadarConfig:
    _validate(doc, CONFIG_SCHEMA)
    raw = {k: v for k, v in doc.items() if k != "format_version"}
    raw["N"], raw["M"] = int(raw["N"]), int(raw["M"])
    try:
        return make_radar_config(**raw)
    except ConfigError as exc:
        raise SchemaError(str(exc), pointer) from exc


def write_config(config: RadarConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")


def read_config(path) -> RadarConfig:
    return config_from_dict(_load_json(path))


class Scenario:
    """A parsed simulation scenario."""

    def __init__(self, config, trajectory, noise, seed=0, capture_start_time=0.0):
        self.config = config
        self.trajectory = trajectory
        self.noise = noise
        self.seed = seed
        self.capture_start_time = capture_start_time


def scenario_from_dict(doc) -> Scenario:
    _validate(doc, SCENARIO_SCHEMA)
    config = config_from_dict(doc["config"], "/config")
    tr = doc["trajectory"]
    try:
        trajectory = TargetTrajectory(
            R0=tr["R0"],
            motion=motion_from_dict(tr["motion"]),
            rbm=motion_from_dict(tr["rbm"]) if "rbm" in tr else None,
            amplitude=tr.get("amplitude", 1.0),
            initial_phase=tr.get("initial_phase", 0.0),
        )
    except RMGError as exc:
        raise SchemaError(str(exc), "/trajectory") from exc
    nz = doc.get("noise", {})
    noise = NoiseSpec(
        awgn_sigma=nz.get("awgn_sigma", 0.0),
        dc_offset=complex(*nz.get("dc_offset", (0.0, 0.0))),
        clutter=complex(*nz.get("clutter", (0.0, 0.0))),
        clutter_range=nz.get("clutter_range"),
    )
    return Scenario(config, trajectory, noise, doc.get("seed", 0), doc.get("capture_start_time", 0.0))


def scenario_to_dict(sc: Scenario) -> dict:
    tr = sc.trajectory
    doc = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(sc.config),
        "trajectory": {
            "R0": tr.R0,
            "motion": tr.motion.to_dict(),
            "amplitude": tr.amplitude,
            "initial_phase": tr.initial_phase,
        },
        "noise": {
            "awgn_sigma": sc.noise.awgn_sigma,
            "dc_offset": [complex(sc.noise.dc_offset).real, complex(sc.noise.dc_offset).imag],
            "clutter": [complex(sc.noise.clutter).real, complex(sc.noise.clutter).imag],
        },
        "seed": sc.seed,
        "capture_start_time": sc.capture_start_time,
    }
    if tr.rbm is not None:
        doc["trajectory"]["rbm"] = tr.rbm.to_dict()
    if sc.noise.clutter_range is not None:
        doc["noise"]["clutter_range"] = sc.noise.clutter_range
    return doc


def read_scenario(path) -> Scenario:
    return scenario_from_dict(_load_json(path))


def write_json(doc, path) -> None:
    try:
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


# --- CSV ----------------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def _write_rows(path, header, columns):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(v) for v in row])
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def _read_numeric_csv(path, required: Sequence[str]):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise CSVFormatError(f"{path}: not UTF-8 text", 1) from exc
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CSVFormatError(f"{path}: empty file", 1) from None
    except csv.Error as exc:
        raise CSVFormatError(f"{path}: {exc}", 1) from exc
    header = [h.strip() for h in header]
    missing = [c for c in required if c not in header]
    if missing:
        raise CSVFormatError(f"{path}: header {header} lacks columns {missing}", 1)
    rows = []
    try:
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CSVFormatError(f"{path}: expected {len(header)} fields, got {len(row)}", line_no)
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise CSVFormatError(f"{path}: non-numeric field in {row}", line_no) from None
            if not all(math.isfinite(v) for v in values):
                raise CSVFormatError(f"{path}: non-finite value in {row}", line_no)
            rows.append(values)
    except csv.Error as exc:
        raise CSVFormatError(f"{path}: {exc}", reader.line_num) from exc
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


EMG_HEADER = ("time_s", "voltage_v")


def read_emg_csv(path, *, rate_tolerance: float = 1e-3) -> BiosignalTrace:
    """Read a ``time_s,voltage_v`` CSV into a uniformly sampled trace."""
    cols = _read_numeric_csv(path, EMG_HEADER)
    t, v = cols["time_s"], cols["voltage_v"]
    if len(t) < 2:
        raise CSVFormatError(f"{path}: need at least two samples", 2)
    dt = np.diff(t)
    bad = np.flatnonzero(dt <= 0)
    if bad.size:
        raise CSVFormatError(f"{path}: time column is not strictly increasing", int(bad[0]) + 3)
    # judge uniformity against the first step so the error names the row
    # where the sampling breaks; the rate itself uses the mean step
    irregular = np.flatnonzero(np.abs(dt - dt[0]) > rate_tolerance * dt[0])
    step = (t[-1] - t[0]) / (len(t) - 1)
    if irregular.size:
        raise CSVFormatError(f"{path}: time column is not uniformly sampled", int(irregular[0]) + 3)
    return BiosignalTrace(v, 1.0 / step, float(t[0]))


def write_emg_csv(trace: BiosignalTrace, path) -> None:
    _write_rows(path, EMG_HEADER, (trace.times(), trace.values))


RESULTS_HEADER = ("slow_time_s", "phase_rad", "displacement_m")
ALIGNED_HEADER = ("emg_norm", "phase_norm")


def write_results(phase: PhaseSignal, displacement, path_prefix, *, aligned=None, fit_report: Optional[dict] = None):
    """Write ``<prefix>.csv`` and, if given, ``<prefix>.json`` (fit report).

    Returns the list of paths written.
    """
    prefix = str(path_prefix)
    displacement = np.asarray(displacement, dtype=float)
    if len(displacement) != len(phase):
        raise ValueError("phase and displacement lengths differ")
    header = list(RESULTS_HEADER)
    columns = [phase.slow_time_axis, phase.values, displacement]
    if aligned is not None:
        if len(aligned) != len(phase):
            raise ValueError("aligned pair length differs from phase")
        header += ALIGNED_HEADER
        columns += [aligned.emg_norm, aligned.phase_norm]
    written = [prefix + ".csv"]
    _write_rows(written[0], header, columns)
    if fit_report is not None:
        written.append(prefix + ".json")
        write_json(fit_report, written[1])
    return written


def read_results(path):
    """Read a results CSV back as ``(PhaseSignal, displacement)``."""
    cols = _read_numeric_csv(path, RESULTS_HEADER)
    if len(cols["slow_time_s"]) == 0:
        raise CSVFormatError(f"{path}: no data rows", 2)
    return PhaseSignal(cols["phase_rad"], cols["slow_time_s"]), cols["displacement_m"]


def write_truth_csv(path, t, x, rbm, phi) -> None:
    _write_rows(path, ("slow_time_s", "x_m", "rbm_m", "phi_rad"), (t, x, rbm, phi))


# --- fit reports ----------------------------------------------------------------

REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "experiment": {"type": "string"},
        "group": {"type": "string"},
        "cycles": {"type": "array"},
        "aggregate": {
            "type": "object",
            "properties": {
                "mean_A": {"type": ["number", "null"]},
                "mean_B": {"type": ["number", "null"]},
                "mean_r_squared": {"type": ["number", "null"]},
            },
            "required": ["mean_A", "mean_B", "mean_r_squared"],
        },
    },
    "required": ["aggregate"],
}


def read_fit_report(path) -> dict:
    doc = _load_json(path)
    _validate(doc, REPORT_SCHEMA)
    return doc


def build_fit_report(exp_fit, *, experiment: str = "", group: str = "", settings: Optional[dict] = None) -> dict:
    """Serializable per-cycle and per-experiment summary of an ``ExperimentFit``."""
    cycles = [
        {
            "cycle": c.cycle,
            "start_idx": int(c.interval[0]),
            "end_idx": int(c.interval[1]),
            "A": c.model.A,
            "B": c.model.B_coef,
            "r_squared": c.model.r_squared,
            "n_samples": c.model.n_samples,
            "iterations": c.model.iterations,
            "converged": c.model.converged,
        }
        for c in exp_fit.cycles
    ]
    return {
        "format_version": FORMAT_VERSION,
        "experiment": experiment,
        "group": group,
        "settings": settings or {},
        "cycles": cycles,
        "skipped_cycles": [{"cycle": c, "reason": why} for c, why in exp_fit.skipped],
        "aggregate": {
            "n_cycles": len(cycles),
            "n_converged": sum(1 for c in exp_fit.cycles if c.model.converged),
            "mean_A": exp_fit.mean_A,
            "mean_B": exp_fit.mean_B,
            "mean_r_squared": exp_fit.r_squared,
            "mean_cycle_r_squared": exp_fit.mean_cycle_r_squared,
        },
    }
