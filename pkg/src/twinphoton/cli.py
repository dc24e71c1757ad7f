"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numeric/convergence failure.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import fitmodel, phasematch, pipeline, tables
from .coinc import count_coincidences, g2_histogram
from .twinstream import SampleModel, simulate_gates

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _output(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _write_json(obj, path):
    fh = _output(path)
    fh.write(json.dumps(_jsonable(obj), indent=2) + "\n")
    _close(fh)


# -- subcommands -----------------------------------------------------------


def cmd_pm_curve(args):
    crystal = phasematch.load_crystal(
        args.crystal, cut_angle_psi=args.psi, pump_wavelength_nm=args.pump_nm,
        length_mm=args.length_mm, pump_angle_rule=args.pump_angle_rule,
    )
    points = phasematch.tuning_curve(args.from_nm, args.to_nm, args.steps, crystal)
    fh = _output(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda_s_nm", "lambda_i_nm", "theta_s_deg", "theta_i_deg", "residual"])
    for p in points:
        w.writerow([repr(p.lambda_signal), repr(p.lambda_idler), repr(p.theta_signal_out),
                    repr(p.theta_idler_out), repr(p.residual)])
    _close(fh)
    if not any(p.phase_matched for p in points):
        print("no phase-matched emission at any wavelength", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _run_config(args):
    overrides = {"seed": args.seed, "n_gates": getattr(args, "n_gates", None),
                 "true_transmittance": getattr(args, "transmittance", None)}
    if getattr(args, "out_dir", None) is not None:
        overrides["output_dir"] = args.out_dir
    if getattr(args, "level", None) is not None:
        overrides["level"] = args.level
    return pipeline.load_run_config(args.config, **overrides)


def cmd_simulate(args):
    cfg = _run_config(args)
    sample = cfg.sample if args.stream == pipeline.SAMPLE_STREAM else SampleModel(1.0)
    gates = simulate_gates(cfg.source, sample, args.stream, dead_time=not args.no_dead_time)
    fh = _output(args.out)
    pipeline.write_timestamps(fh, gates)
    _close(fh)
    return EXIT_OK


def cmd_count(args):
    gates = pipeline.read_timestamps(args.timestamps, args.gate_s)
    results = [count_coincidences(i, s, args.tau_cc_ns) for i, s in gates]
    fh = _output(args.out)
    pipeline.write_counts_csv(
        fh, *(np.array([getattr(r, k) for r in results]) for k in ("N1", "N2", "Ncc"))
    )
    _close(fh)
    return EXIT_OK


def cmd_g2(args):
    gates = pipeline.read_timestamps(args.timestamps, args.gate_s)
    if not gates:
        raise ValueError("timestamp file holds no gates")
    hist = None
    for idler, signal in gates:
        h = g2_histogram(idler, signal, args.bin_ns, args.range_ns)
        hist = h if hist is None else hist + h
    fh = _output(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["tau_ns", "g2"])
    for tau, g in zip(hist.centers_ns, hist.g2):
        w.writerow([repr(float(tau)), repr(float(g))])
    _close(fh)
    return EXIT_OK


def cmd_estimate(args):
    if args.paper_table is not None:
        rows = tables.reproduce_table(args.paper_table, args.reference_label)
        _write_json({"table": args.paper_table, "rows": rows}, args.out)
        return EXIT_OK
    if not (args.sample and args.reference and args.corrections):
        raise ValueError("estimate needs --sample, --reference and --corrections (or --paper-table)")
    corr = pipeline.Corrections.from_file(args.corrections)
    summaries = [
        pipeline.summarize(*pipeline.read_counts_csv(path), corr, args.standard_error,
                           args.literal_dead_time, label)
        for path, label in ((args.sample, "sample"), (args.reference, "reference"))
    ]
    report = pipeline.compare(summaries[0], summaries[1], args.label)
    _write_json(report, args.out)
    return EXIT_OK if report["valid"] else EXIT_VALIDATION


def cmd_fit(args):
    points = []
    with open(args.data, newline="") as fh:
        for rec in csv.DictReader(fh):
            dT = rec.get("dT_pct", "")
            points.append((float(rec["concentration_ng_ul"]), float(rec["transmittance_pct"]),
                           float(dT) if dT and dT.strip() else None))
    result = fitmodel.fit(points)
    _write_json(
        {
            "parameters": result.model.as_dict(),
            "uncertainties": result.uncertainties,
            "rss": result.rss,
            "converged": result.converged,
            "iterations": result.iterations,
        },
        args.out,
    )
    return EXIT_OK if result.converged else EXIT_NUMERIC


def cmd_concentration(args):
    with open(args.model) as fh:
        blob = json.load(fh)
    params = blob.get("parameters", blob)
    model = fitmodel.ConcentrationModel(**{k: float(params[k]) for k in ("T0", "C0", "Tinf", "Cinf")})
    c = fitmodel.invert(model, args.t)
    dc = fitmodel.concentration_uncertainty(model, args.t, args.dt)
    print(f"{c:.6g} +- {dc:.3g} ng/ul")
    return EXIT_OK


def cmd_reproduce_table(args):
    rows = tables.reproduce_table(args.table, args.reference_label)
    if args.format == "json":
        _write_json({"table": args.table, "rows": rows}, args.out)
        return EXIT_OK
    fh = _output(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["row", "label", "Tcc", "Tcc_printed", "dTcc", "dTcc_printed",
                "Tsc", "Tsc_printed", "dTsc", "dTsc_printed", "G_T", "G_T_printed",
                "G_N", "G_N_printed"])

    def fmt(x):
        return "" if x is None else f"{x:.2f}"

    for r in rows:
        p = r["printed"]
        w.writerow([r["row"], r["label"]] + [
            fmt(v) for k in ("Tcc", "dTcc", "Tsc", "dTsc", "G_T", "G_N") for v in (r[k], p[k])
        ])
    _close(fh)
    return EXIT_OK


def cmd_run(args):
    cfg = _run_config(args)
    if args.standard_error:
        cfg = replace(cfg, standard_error=True)
    report = pipeline.run_pipeline(cfg)
    if cfg.output_dir is None:
        sys.stdout.write(pipeline.dumps_report(_jsonable(report)))
    return EXIT_OK if report["valid"] else EXIT_VALIDATION


# -- parser ----------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="twinphoton", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pm-curve", help="type-I tuning curve as CSV")
    p.add_argument("--psi", type=float, default=29.3, help="cut angle, deg")
    p.add_argument("--pump-nm", type=float, default=405.0)
    p.add_argument("--from-nm", type=float, required=True)
    p.add_argument("--to-nm", type=float, required=True)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--crystal", default=None, help="coefficient file (default: bundled BBO)")
    p.add_argument("--length-mm", type=float, default=0.5)
    p.add_argument("--pump-angle-rule", choices=phasematch.PUMP_ANGLE_RULES, default="fixed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pm_curve)

    p = sub.add_parser("simulate", help="timestamp dump for one run")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-gates", type=int)
    p.add_argument("--transmittance", type=float)
    p.add_argument("--stream", type=int, choices=(0, 1), default=pipeline.SAMPLE_STREAM,
                   help="0 = reference run (no sample), 1 = sample run")
    p.add_argument("--no-dead-time", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("count", help="per-gate singles and coincidences")
    p.add_argument("--timestamps", required=True)
    p.add_argument("--tau-cc-ns", type=float, default=7.1)
    p.add_argument("--gate-s", type=float, default=0.3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("g2", help="binned cross-correlation g2")
    p.add_argument("--timestamps", required=True)
    p.add_argument("--bin-ns", type=float, required=True)
    p.add_argument("--range-ns", type=float, required=True)
    p.add_argument("--gate-s", type=float, default=0.3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_g2)

    p = sub.add_parser("estimate", help="CC/SC transmittance report")
    p.add_argument("--sample")
    p.add_argument("--reference")
    p.add_argument("--corrections")
    p.add_argument("--label", default="sample")
    p.add_argument("--standard-error", action="store_true")
    p.add_argument("--literal-dead-time", action="store_true",
                   help="multiply singles by gamma instead of dividing")
    p.add_argument("--paper-table", type=int, choices=tables.TABLE_IDS)
    p.add_argument("--reference-label")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("fit", help="fit the double-exponential concentration model")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("concentration", help="invert a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--t", type=float, required=True, help="transmittance, percent")
    p.add_argument("--dt", type=float, default=0.0, help="transmittance uncertainty, percent")
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("reproduce-table", help="recompute a bundled measurement table")
    p.add_argument("table", type=int, choices=tables.TABLE_IDS)
    p.add_argument("--reference-label")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce_table)

    p = sub.add_parser("run", help="simulate -> count -> estimate pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-gates", type=int)
    p.add_argument("--transmittance", type=float)
    p.add_argument("--level", choices=pipeline.LEVELS)
    p.add_argument("--standard-error", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
