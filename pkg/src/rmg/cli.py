"""Command line entry point: ``rmg simulate | process | fit | report``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric
non-convergence.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io as rio
from .analysis import aggregate_reports, fit_experiment, segment_stages
from .biosignal import DEFAULT_ENVELOPE_WINDOW, align_to_slow_time, envelope
from .errors import RMGError
from .phase import check_velocity_budget
from .pipeline import StageError, process_cube
from .simulator import synthesize_cube, true_phase

log = logging.getLogger("rmg")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 0, 2, 3, 4


def _range_window(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI in meters, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"range window {text!r} has LO > HI")
    return lo, hi


# --- simulate -----------------------------------------------------------------


def cmd_simulate(args):
    sc = rio.read_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    cube = synthesize_cube(
        sc.config, sc.trajectory, sc.noise, seed, capture_start_time=sc.capture_start_time, jobs=args.jobs
    )
    rio.write_capture(cube, args.out)
    truth = Path(args.truth) if args.truth else Path(args.out).with_name("truth.csv")
    t = sc.config.slow_time_axis()
    x = np.asarray(sc.trajectory.motion(t), dtype=float)
    rbm = np.asarray(sc.trajectory.rbm(t), dtype=float) if sc.trajectory.rbm is not None else np.zeros_like(t)
    rio.write_truth_csv(truth, t, x, rbm, true_phase(sc.config, sc.trajectory))
    if args.config_out:
        rio.write_config(sc.config, args.config_out)
    log.info("wrote %s (%d x %d) and %s", args.out, sc.config.M, sc.config.N, truth)
    return EXIT_OK


# --- process ------------------------------------------------------------------


def _process_one(capture, config, out_prefix, range_window, window, dc, detrend):
    cube = rio.read_capture(capture, config)
    result = process_cube(cube, range_window=range_window, window=window, dc_correct=dc, detrend=detrend)
    written = rio.write_results(result.phase, result.displacement, out_prefix)
    velocity = check_velocity_budget(result.displacement, config)
    sidecar = {
        "format_version": rio.FORMAT_VERSION,
        "capture": str(capture),
        "bin_index": result.bin_index,
        "nominal_range_m": result.nominal_range,
        "stages": list(result.stages_run),
        "dc_correct": dc,
        "window": window,
        "detrend": detrend,
        "range_window_m": list(range_window) if range_window else None,
        "velocity_budget": {"n_flagged": velocity.n_flagged, "limit_m": velocity.limit},
    }
    rio.write_json(sidecar, str(out_prefix) + ".process.json")
    return capture, result.bin_index, result.nominal_range, written


def cmd_process(args):
    config = rio.read_config(args.config)
    captures = args.capture
    if len(captures) == 1:
        prefixes = [args.out]
    else:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        prefixes = [str(out_dir / Path(c).stem) for c in captures]
    jobs = [
        (c, config, p, args.range_window, args.window, not args.no_dc_correct, args.detrend)
        for c, p in zip(captures, prefixes)
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_process_one, *zip(*jobs)))
    else:
        results = [_process_one(*j) for j in jobs]
    for capture, k, r, written in results:
        print(f"{capture}: range bin {k}, nominal range {r:.4f} m -> {', '.join(written)}")
        log.info("%s: selected bin %d at %.4f m", capture, k, r)
    return EXIT_OK


# --- fit ----------------------------------------------------------------------


def cmd_fit(args):
    phase, displacement = rio.read_results(args.results)
    trace = rio.read_emg_csv(args.emg)
    if args.envelope_window > 0:
        trace = envelope(trace, args.envelope_window)
    pair = align_to_slow_time(trace, phase, emg_offset=args.emg_offset)
    seg = segment_stages(pair, args.on_thresh, args.off_thresh, slope_thresh=args.slope_thresh)
    exp_fit = fit_experiment(pair, seg, stage=args.stage, per_cycle_normalization=args.normalize == "cycle")
    settings = {
        "on_thresh": args.on_thresh,
        "off_thresh": args.off_thresh,
        "slope_thresh": args.slope_thresh,
        "envelope_window_s": args.envelope_window,
        "emg_offset_s": args.emg_offset,
        "stage": args.stage,
        "normalize": args.normalize,
    }
    report = rio.build_fit_report(
        exp_fit, experiment=args.experiment or Path(args.results).stem, group=args.group, settings=settings
    )
    rio.write_json(report, args.out)
    if args.aligned_out:
        rio.write_results(phase, displacement, args.aligned_out, aligned=pair)
    if not exp_fit.cycles:
        log.warning("no contraction cycles detected; wrote empty report %s", args.out)
        print(f"warning: no contraction cycles detected in {args.results}", file=sys.stderr)
        return EXIT_OK
    agg = report["aggregate"]
    print(
        f"{agg['n_converged']}/{agg['n_cycles']} cycles converged; "
        f"mean A={_fmt(agg['mean_A'])} mean B={_fmt(agg['mean_B'])} R^2={_fmt(agg['mean_r_squared'])}"
    )
    if not exp_fit.all_converged:
        print("error: at least one cycle fit did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _fmt(v):
    return "n/a" if v is None else f"{v:.4f}"


# --- report -------------------------------------------------------------------


def cmd_report(args):
    reports = [rio.read_fit_report(p) for p in args.reports]
    rows = aggregate_reports(reports)
    header = ["group", "n_experiments", "mean_A", "mean_B", "mean_r_squared"]
    lines_csv = [",".join(header)]
    lines_md = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for r in rows:
        vals = [r.group, str(r.n_experiments)] + [
            "" if v is None else repr(v) for v in (r.mean_A, r.mean_B, r.mean_r_squared)
        ]
        lines_csv.append(",".join(vals))
        md_vals = [r.group, str(r.n_experiments)] + [
            "n/a" if v is None else f"{v:.2f}" for v in (r.mean_A, r.mean_B, r.mean_r_squared)
        ]
        lines_md.append("| " + " | ".join(md_vals) + " |")
    Path(args.out + ".csv").write_text("\n".join(lines_csv) + "\n", encoding="utf-8")
    md = "\n".join(lines_md) + "\n"
    Path(args.out + ".md").write_text(md, encoding="utf-8")
    print(md, end="")
    return EXIT_OK


# --- wiring -------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="rmg", description="FMCW radar muscle-deformation pipeline")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="synthesize a capture from a scenario JSON")
    s.add_argument("scenario")
    s.add_argument("out", help="capture file to write")
    s.add_argument("--truth", help="ground-truth CSV (default: truth.csv next to the capture)")
    s.add_argument("--config-out", help="also write the radar config JSON here")
    s.add_argument("--seed", type=int, help="override the scenario seed")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("process", help="capture -> phase and displacement CSV")
    s.add_argument("capture", nargs="+")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output prefix (directory when several captures)")
    s.add_argument("--range-window", type=_range_window, metavar="LO:HI")
    s.add_argument("--window", choices=("rect", "hann"), default="rect")
    s.add_argument("--no-dc-correct", action="store_true")
    s.add_argument("--detrend", choices=("none", "linear"), default="none")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_process)

    s = sub.add_parser("fit", help="fit the deformation-EMG model per contraction cycle")
    s.add_argument("results", help="results CSV written by 'process'")
    s.add_argument("emg", help="EMG CSV with header time_s,voltage_v")
    s.add_argument("--out", required=True, help="fit report JSON")
    s.add_argument("--emg-offset", type=float, default=0.0, help="seconds added to EMG timestamps")
    s.add_argument("--on-thresh", type=float, default=0.15)
    s.add_argument("--off-thresh", type=float, default=0.08)
    s.add_argument("--slope-thresh", type=float, default=0.25)
    s.add_argument(
        "--envelope-window",
        type=float,
        default=DEFAULT_ENVELOPE_WINDOW,
        help="moving-RMS window in seconds; 0 if the CSV already holds an envelope",
    )
    s.add_argument("--stage", choices=("on", "hold", "off"), default="on")
    s.add_argument("--normalize", choices=("segment", "cycle"), default="segment")
    s.add_argument("--experiment", default="")
    s.add_argument("--group", default="")
    s.add_argument("--aligned-out", help="also write the aligned CSV to this prefix")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("report", help="aggregate fit reports per group")
    s.add_argument("reports", nargs="+")
    s.add_argument("--out", required=True, help="prefix for <out>.csv and <out>.md")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "fit" and not 0 < args.off_thresh < args.on_thresh < 1:
        parser.error(f"need 0 < --off-thresh < --on-thresh < 1 (got {args.off_thresh}, {args.on_thresh})")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (RMGError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
