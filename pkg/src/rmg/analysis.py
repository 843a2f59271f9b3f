"""Deformation-EMG model fitting, scoring and contraction-stage analysis.

The model is ``Y = A * (1 - exp(-B * X))`` with X the normalized EMG and
Y the normalized deformation (phase).  A is the asymptote and B sets the
curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .biosignal import AlignedPair, normalize
from .domain import DeformationModel
from .errors import DegenerateDataError, MissingCycleError, MissingStageError

# Levenberg-Marquardt settings
B_INIT = 5.0
LAMBDA_INIT = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 10.0
LAMBDA_MAX = 1e16
STEP_TOL = 1e-10
MAX_ITER = 200
MIN_SAMPLES = 10


def _model_terms(A, B, X):
    e = np.exp(-B * X)
    f = A * (1.0 - e)
    # columns: d(residual)/dA, d(residual)/dB, residual = Y - f
    J = np.column_stack((-(1.0 - e), -A * X * e))
    return f, J


def fit_exponential(X, Y, init: Optional[Tuple[float, float]] = None, *, max_iter: int = MAX_ITER) -> DeformationModel:
    """Least-squares fit of ``A, B`` by Levenberg-Marquardt.

    Solves ``(J^T J + lam * diag(J^T J)) step = -J^T r`` with the analytic
    Jacobian.  A trial step is accepted only if it lowers the cost and keeps
    both coefficients positive; accepted steps divide ``lam`` by 10 and
    rejected ones multiply it by 10.  Iteration stops once an accepted step
    is shorter than 1e-10 (converged), after ``max_iter`` iterations, or if
    the damping blows up (both not converged).

    Parameters
    ----------
    X, Y : array_like
        Normalized EMG in [0, 1] and the matching deformation samples.
    init : (A0, B0), optional
        Starting point; defaults to ``(max(Y), 5)``.

    Returns
    -------
    DeformationModel
        Non-convergence is reported through ``converged=False``, never
        raised.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 1:
        raise ValueError("X and Y must be equal-length vectors")
    if X.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {X.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("X and Y must be finite")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("X must lie in [0, 1]")
    if np.ptp(X) == 0:
        raise DegenerateDataError("X is constant; the curvature is unidentifiable")
    if np.ptp(Y) == 0:
        raise DegenerateDataError("Y is constant; the fit is undefined")

    if init is None:
        A0 = float(np.max(Y))
        init = (A0 if A0 > 0 else 1.0, B_INIT)
    p = np.array(init, dtype=float)
    if not np.all(p > 0):
        raise ValueError(f"initial coefficients must be positive, got {init}")

    f, J = _model_terms(p[0], p[1], X)
    r = Y - f
    cost = float(r @ r)
    lam = LAMBDA_INIT
    converged = False
    iterations = 0

    while iterations < max_iter:
        iterations += 1
        if cost == 0.0:
            converged = True
            break
        JtJ = J.T @ J
        g = J.T @ r
        D = np.diag(np.diag(JtJ))
        try:
            step = np.linalg.solve(JtJ + lam * D, -g)
        except np.linalg.LinAlgError:
            step = None
        trial = None if step is None else p + step
        if trial is not None and np.all(np.isfinite(trial)) and np.all(trial > 0):
            f_t, J_t = _model_terms(trial[0], trial[1], X)
            r_t = Y - f_t
            cost_t = float(r_t @ r_t)
        else:
            cost_t = math.inf
        if math.isfinite(cost_t) and cost_t <= cost:
            p, J, r, cost = trial, J_t, r_t, cost_t
            lam = max(lam / LAMBDA_DOWN, 1e-300)
            if np.linalg.norm(step) < STEP_TOL:
                converged = True
                break
        else:
            lam *= LAMBDA_UP
            if lam > LAMBDA_MAX:
                break

    f = p[0] * (1.0 - np.exp(-p[1] * X))
    return DeformationModel(
        A=float(p[0]),
        B_coef=float(p[1]),
        r_squared=r_squared(Y, f),
        residual_norm=float(np.sqrt(cost)),
        iterations=iterations,
        converged=bool(converged),
        n_samples=int(X.size),
    )


def r_squared(observed, predicted) -> float:
    """1 - SS_res / SS_tot; negative when worse than the mean predictor."""
    y = np.asarray(observed, dtype=float)
    f = np.asarray(predicted, dtype=float)
    if y.shape != f.shape or y.size == 0:
        raise ValueError("observed and predicted must be equal, non-zero length")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise DegenerateDataError("observed values are constant (SS_tot = 0)")
    ss_res = float(np.sum((y - f) ** 2))
    return 1.0 - ss_res / ss_tot


def predict_deformation(model: DeformationModel, emg_norm) -> np.ndarray:
    return model.A * (1.0 - np.exp(-model.B_coef * np.asarray(emg_norm, dtype=float)))


# --- stage segmentation -------------------------------------------------------

Interval = Tuple[int, int]


@dataclass(frozen=True)
class StageSegmentation:
    """Per-cycle [start, end) index intervals on the slow-time grid.

    The three lists are parallel: entry c of each belongs to cycle c.  A
    hold interval may be empty (start == end) for pulses with no plateau.
    """

    on_intervals: List[Interval] = field(default_factory=list)
    hold_intervals: List[Interval] = field(default_factory=list)
    off_intervals: List[Interval] = field(default_factory=list)

    @property
    def n_cycles(self):
        return len(self.on_intervals)

    def cycle(self, c) -> Tuple[Interval, Interval, Interval]:
        if not 0 <= c < self.n_cycles:
            raise MissingCycleError(f"cycle {c} does not exist ({self.n_cycles} cycles)")
        return self.on_intervals[c], self.hold_intervals[c], self.off_intervals[c]


def _smoothed_slope(y, t, width):
    slope = np.gradient(y, t) if len(y) > 1 else np.zeros_like(y)
    if width > 1:
        kernel = np.ones(width) / width
        slope = np.convolve(slope, kernel, mode="same")
    return slope


def segment_stages(
    pair: AlignedPair,
    on_thresh: float = 0.15,
    off_thresh: float = 0.08,
    *,
    slope_thresh: float = 0.25,
    slope_window_s: float = 0.03,
) -> StageSegmentation:
    """Schmitt-trigger segmentation of the normalized EMG into ON/HOLD/OFF stages.

    A cycle is active from the sample that rises through ``on_thresh`` to
    the sample that falls through ``off_thresh``.  The hold is the stretch
    between the first and last samples of the active span whose smoothed
    slope magnitude is below ``slope_thresh`` (per second).  The ON stage
    extends backwards from the hold to where the rise began, i.e. where the
    unsmoothed slope last fell below ``slope_thresh``; OFF extends forward
    the same way.
    """
    if not 0 < off_thresh < on_thresh < 1:
        raise ValueError(f"need 0 < off_thresh < on_thresh < 1, got off={off_thresh}, on={on_thresh}")
    x = pair.emg_norm
    t = pair.slow_time_axis
    M = len(x)
    seg = StageSegmentation()
    if M < 2:
        return seg
    dt = float(np.median(np.diff(t)))
    width = max(1, int(round(slope_window_s / dt))) if dt > 0 else 1
    slope = _smoothed_slope(x, t, width)
    # the extensions past the Schmitt edges use the raw slope so the corners
    # are not smeared by the smoothing kernel
    raw = np.gradient(x, t)

    active = []
    state = False
    start = 0
    for i in range(M):
        if not state and x[i] >= on_thresh and (i == 0 or x[i - 1] < on_thresh):
            state, start = True, i
        elif state and x[i] < off_thresh:
            active.append((start, i))
            state = False
    # an activation still open at the end of the capture has no OFF stage; drop it

    prev_end = 0
    for s, e in active:
        low = np.flatnonzero(np.abs(slope[s:e]) < slope_thresh)
        if low.size:
            hold = (s + int(low[0]), s + int(low[-1]) + 1)
        else:
            peak = s + int(np.argmax(x[s:e]))
            hold = (peak, peak)
        onset = s
        while onset > prev_end and raw[onset - 1] >= slope_thresh:
            onset -= 1
        end = e
        while end < M and raw[end] <= -slope_thresh:
            end += 1
        seg.on_intervals.append((onset, hold[0]))
        seg.hold_intervals.append(hold)
        seg.off_intervals.append((hold[1], end))
        prev_end = end
    return seg


# --- hysteresis and deformation rates ---------------------------------------


@dataclass(frozen=True)
class HysteresisCurve:
    on: np.ndarray  # (k, 2) points (phase_norm, emg_norm), time ordered
    off: np.ndarray
    signed_area: float  # > 0 means clockwise in the (phase, EMG) plane

    @property
    def orientation(self):
        if self.signed_area > 0:
            return "clockwise"
        if self.signed_area < 0:
            return "counterclockwise"
        return "none"


def _shoelace(points):
    if len(points) < 3:
        return 0.0
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def hysteresis_curve(pair: AlignedPair, seg: StageSegmentation, cycle_index: int) -> HysteresisCurve:
    (on_s, on_e), _, (off_s, off_e) = seg.cycle(cycle_index)
    on = np.column_stack((pair.phase_norm[on_s:on_e], pair.emg_norm[on_s:on_e]))
    off = np.column_stack((pair.phase_norm[off_s:off_e], pair.emg_norm[off_s:off_e]))
    loop = np.concatenate((on, off)) if len(on) + len(off) else np.empty((0, 2))
    # shoelace is positive for counterclockwise loops
    return HysteresisCurve(on, off, -_shoelace(loop))


@dataclass(frozen=True)
class DeformationRates:
    on_rate: float
    off_rate: float
    ratio: Optional[float]  # None when the OFF rate is zero


def _mean_abs_rate(y, t, intervals):
    rates = []
    for s, e in intervals:
        if e - s >= 2:
            rates.append(np.abs(np.diff(y[s:e]) / np.diff(t[s:e])))
    if not rates:
        return None
    return float(np.mean(np.concatenate(rates)))


def deformation_rate_report(pair: AlignedPair, seg: StageSegmentation) -> DeformationRates:
    """Mean |d(phase_norm)/dt| over all ON and all OFF stages, and their ratio."""
    on = _mean_abs_rate(pair.phase_norm, pair.slow_time_axis, seg.on_intervals)
    off = _mean_abs_rate(pair.phase_norm, pair.slow_time_axis, seg.off_intervals)
    if on is None:
        raise MissingStageError("no ON stage with at least two samples")
    if off is None:
        raise MissingStageError("no OFF stage with at least two samples")
    return DeformationRates(on, off, on / off if off > 0 else None)


# --- experiment-level fitting -----------------------------------------------


@dataclass(frozen=True)
class CycleFit:
    cycle: int
    interval: Interval
    model: DeformationModel


@dataclass(frozen=True)
class ExperimentFit:
    cycles: List[CycleFit]
    skipped: List[Tuple[int, str]]
    mean_A: Optional[float]
    mean_B: Optional[float]
    mean_cycle_r_squared: Optional[float]
    r_squared: Optional[float]  # mean-coefficient model over all fitted samples

    @property
    def all_converged(self):
        return all(c.model.converged for c in self.cycles)


STAGE_NAMES = ("on", "hold", "off")


def fit_experiment(
    pair: AlignedPair,
    seg: StageSegmentation,
    *,
    stage: str = "on",
    per_cycle_normalization: bool = False,
) -> ExperimentFit:
    """Fit every cycle's chosen stage and aggregate.

    The experiment R^2 evaluates the model with the mean A and mean B of the
    converged cycles against all samples that were fitted.
    """
    if stage not in STAGE_NAMES:
        raise ValueError(f"stage must be one of {STAGE_NAMES}")
    idx = STAGE_NAMES.index(stage)
    fits, skipped, xs, ys = [], [], [], []
    for c in range(seg.n_cycles):
        s, e = seg.cycle(c)[idx]
        X = pair.emg_norm[s:e]
        Y = pair.phase_norm[s:e]
        if per_cycle_normalization:
            cs, _ = seg.on_intervals[c]
            _, ce = seg.off_intervals[c]
            try:
                X = normalize(pair.emg_norm[cs:ce])[s - cs:e - cs]
                Y = normalize(pair.phase_norm[cs:ce] - pair.phase_norm[cs])[s - cs:e - cs]
            except Exception as exc:
                skipped.append((c, str(exc)))
                continue
        X = np.clip(X, 0.0, 1.0)
        try:
            model = fit_exponential(X, Y)
        except (ValueError, DegenerateDataError) as exc:
            skipped.append((c, str(exc)))
            continue
        fits.append(CycleFit(c, (s, e), model))
        if model.converged:
            xs.append(X)
            ys.append(Y)

    good = [f.model for f in fits if f.model.converged]
    if not good:
        return ExperimentFit(fits, skipped, None, None, None, None)
    mean_A = float(np.mean([m.A for m in good]))
    mean_B = float(np.mean([m.B_coef for m in good]))
    mean_r2 = float(np.mean([m.r_squared for m in good]))
    X_all, Y_all = np.concatenate(xs), np.concatenate(ys)
    pred = mean_A * (1.0 - np.exp(-mean_B * X_all))
    try:
        r2 = r_squared(Y_all, pred)
    except DegenerateDataError:
        r2 = None
    return ExperimentFit(fits, skipped, mean_A, mean_B, mean_r2, r2)


# --- cross-experiment aggregation ---------------------------------------------

@dataclass(frozen=True)
class GroupSummary:
    group: str
    n_experiments: int
    mean_A: Optional[float]
    mean_B: Optional[float]
    mean_r_squared: Optional[float]


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def aggregate_reports(reports: Sequence[dict]) -> List[GroupSummary]:
    """Arithmetic means of per-experiment values, per group then over all groups.

    The final "all" row averages the group means, so every group weighs the
    same regardless of how many experiments it holds.
    """
    groups = {}
    for rep in reports:
        groups.setdefault(rep.get("group", "") or "", []).append(rep["aggregate"])
    rows = []
    for name in sorted(groups):
        aggs = groups[name]
        rows.append(
            GroupSummary(
                name,
                len(aggs),
                _mean_or_none([a.get("mean_A") for a in aggs]),
                _mean_or_none([a.get("mean_B") for a in aggs]),
                _mean_or_none([a.get("mean_r_squared") for a in aggs]),
            )
        )
    if len(rows) > 1:
        rows.append(
            GroupSummary(
                "all",
                sum(r.n_experiments for r in rows),
                _mean_or_none([r.mean_A for r in rows]),
                _mean_or_none([r.mean_B for r in rows]),
                _mean_or_none([r.mean_r_squared for r in rows]),
            )
        )
    return rows
