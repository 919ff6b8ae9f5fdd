"""
Command line entry point.

Exit codes: 0 success, 1 usage or config error, 2 physics or geometry
error, 3 failed acceptance check (``reproduce-*`` and ``selftest``).
"""
import argparse
import json
import math
from dataclasses import replace
from pathlib import Path
import sys

from .config import build, load_config
from .elements import RFFlipper, propagate
from .errors import ConfigError, PolarimeterError
from .experiment import apply_parameter, configure, run_scan
from .figures import FIGURES, fit_scan, reproduce
from .oracle import oracle_propagate
from .scanio import read_scan_csv, write_scan_csv
from .spinor import polarization_of

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS, EXIT_ACCEPTANCE = 0, 1, 2, 3


def _num(x):
    return format(float(x), ".17g")


def _fit_report(fit):
    lines = [f"{k} = {_num(v) if isinstance(v, float) else v}" for k, v in fit.as_dict().items()]
    period = 2 * math.pi / fit.k
    lines.append(f"period = {_num(period)}")
    lines.append(f"period_err = {_num(period * fit.k_err / fit.k)}")
    return "\n".join(lines) + "\n"


def _load(args):
    cfg = load_config(args.config) if args.config else build({})
    scan = cfg.scan
    if args.seed is not None:
        scan = replace(scan, rng_seed=args.seed)
    if args.counts is not None:
        if args.counts < 1:
            raise ConfigError("--counts must be >= 1")
        scan = replace(scan, counts_per_point=args.counts)
    cfg.scan = scan
    if args.engine:
        cfg.engine = args.engine
    cfg.resolved = dict(cfg.resolved, engine=cfg.engine, seed=scan.rng_seed)
    cfg.resolved["scan"] = dict(cfg.resolved["scan"], counts_per_point=scan.counts_per_point)
    return cfg


def _say(args, text):
    if not args.quiet:
        sys.stdout.write(text)


def cmd_simulate(args):
    cfg = _load(args)
    bl = configure(cfg.beamline, cfg.scan.configuration)
    for name, value in cfg.scan.fixed.items():
        bl = apply_parameter(bl, name, value, cfg.scan.group)
    if cfg.engine == "oracle":
        state, intensity = oracle_propagate(bl, config=cfg.oracle, dc_width=cfg.dc_width)
    else:
        state, intensity = propagate(bl)
    p = polarization_of(state)
    sys.stdout.write(f"intensity = {_num(intensity)}\n")
    sys.stdout.write(f"polarization = {_num(p[0])} {_num(p[1])} {_num(p[2])}\n")
    return EXIT_OK


def cmd_scan(args):
    cfg = _load(args)
    result = run_scan(cfg.scan, cfg.beamline, cfg.engine, oracle_config=cfg.oracle)
    out = args.out or cfg.output.get("csv")
    if out:
        with open(out, "w", newline="") as fh:
            write_scan_csv(result, fh, cfg.resolved)
        _say(args, f"wrote {len(result)} rows to {out}\n")
    else:
        write_scan_csv(result, sys.stdout, cfg.resolved)
    return EXIT_OK


def cmd_fit(args):
    with open(args.input) as fh:
        result = read_scan_csv(fh)
    fit = fit_scan(result)
    sys.stdout.write(_fit_report(fit))
    if args.out:
        record = dict(fit.as_dict(), source=str(args.input), swept_name=result.swept_name,
                      period=2 * math.pi / fit.k)
        Path(args.out).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _reproduce(figure):
    def run(args):
        cfg = _load(args) if args.config else None
        kwargs = {}
        if cfg is not None:
            kwargs["beam"] = cfg.beamline.beam
            rf = cfg.beamline.of_type(RFFlipper)
            if rf:
                kwargs["coil_length"] = rf[0].coil_length
                kwargs["rf_polarization"] = rf[0].rf_polarization
        engine = args.engine or (cfg.engine if cfg else "analytic")
        seed = args.seed if args.seed is not None else (cfg.seed if cfg and cfg.seed is not None else 0)
        report = reproduce(figure, engine=engine, counts=args.counts, seed=seed,
                           oracle_config=cfg.oracle if cfg else None, **kwargs)
        out = Path(args.out or f"results/{figure}")
        out.mkdir(parents=True, exist_ok=True)
        for kind, group in (("shown", report.shown), ("regression", report.regression)):
            for i, sf in enumerate(group):
                stem = f"{kind}_{i}_{sf.label.replace('=', '_')}"
                with open(out / f"{stem}.csv", "w", newline="") as fh:
                    write_scan_csv(sf.scan, fh, {"figure": figure, "label": sf.label})
                (out / f"{stem}.fit.txt").write_text(_fit_report(sf.fit))
        (out / "regression.csv").write_text(report.regression_table())
        summary = "".join(f"{'PASS' if c.passed else 'FAIL'} {figure} {c.name}: {c.detail}\n" for c in report.checks)
        (out / "checks.txt").write_text(summary)
        _say(args, report.regression_table() + summary)
        return EXIT_OK if report.passed else EXIT_ACCEPTANCE
    return run


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        _say(args, f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_ACCEPTANCE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--engine", choices=("analytic", "oracle"))
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--counts", type=int, metavar="N", help="mean counts per point (Poisson noise)")
    common.add_argument("--quiet", action="store_true")

    parser = _Parser(prog="polarimeter", description="Zero-field and Larmor precession polarimeter simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="single propagation").set_defaults(func=cmd_simulate)
    sub.add_parser("scan", parents=[common], help="run the configured scan, emit CSV").set_defaults(func=cmd_scan)
    p = sub.add_parser("fit", parents=[common], help="fit a scan CSV")
    p.add_argument("input", metavar="CSV")
    p.set_defaults(func=cmd_fit)
    for fig in FIGURES:
        sub.add_parser(f"reproduce-{fig}", parents=[common],
                       help=f"scans, fits and regression behind {fig}").set_defaults(func=_reproduce(fig))
    sub.add_parser("selftest", parents=[common], help="invariant and oracle checks").set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except PolarimeterError as exc:
        sys.stderr.write(f"physics error: {exc}\n")
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
