"""Command line front end.

Subcommands: simulate (run a scenario config end to end), fit (refit a scan
CSV), selftest (built-in consistency suites), plot (scan CSV to SVG). Exit
codes: 0 success, 2 config problem, 3 fit failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import importlib.resources
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import ScenarioConfig, load_scenario
from .circuit import ThermoOpticCalibration
from .errors import ConfigError, FitError
from .experiment import (
    BackgroundEstimate,
    measure_background,
    run_hom_scan,
    run_noon_scan,
    run_singles_scan,
    scan_rng,
    subtract_background,
)
from .fitting import (
    FitResult,
    classical_fringe_calibrate,
    fit_fringe_free_frequency,
    fit_gaussian_dip,
    fit_two_phi_fringe,
)
from .scanio import read_report, read_scan_csv, write_report, write_scan_csv
from .selftest import run_selftest

_RUNNERS = {"hom": run_hom_scan, "noon": run_noon_scan, "singles": run_singles_scan}
_FIT_KIND = {"dip": "hom", "fringe": "noon", "fringe-free": "noon", "classical": "singles"}


def resolve_config(name: str) -> Path:
    """A literal path, or the name of a config bundled with the package."""
    direct = Path(name)
    if direct.is_file():
        return direct
    bundled = importlib.resources.files("mzsim").joinpath("configs", name)
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"no such config file or bundled config: {name}")


def _load_background_table(cfg: ScenarioConfig, raw) -> list[BackgroundEstimate]:
    table = read_scan_csv(cfg.background_table, kind="background")
    if len(table.records) != len(raw.records):
        raise ConfigError(
            f"background table has {len(table.records)} rows for "
            f"{len(raw.records)} scan points",
            location=str(cfg.background_table),
        )
    for trec, rrec in zip(table.records, raw.records):
        if not math.isclose(trec.setting, rrec.setting, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(
                f"table setting {trec.setting} does not match scan setting {rrec.setting}",
                location=str(cfg.background_table),
            )
    return [BackgroundEstimate(rate=r.rate, rate_err=r.rate_err) for r in table.records]


def run_scenario(cfg: ScenarioConfig, out_dir: Path) -> dict:
    """Simulate, subtract, fit, and write every artifact for one scenario."""
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = out_dir / cfg.prefix
    files: dict[str, str] = {}
    report: dict = {
        "scenario": {
            "kind": cfg.kind,
            "seed": cfg.seed,
            "expectation_mode": cfg.expectation,
            "config": str(cfg.source_path) if cfg.source_path else None,
        },
        "background": None,
        "fits": {"raw": None, "subtracted": None},
        "files": files,
    }

    if cfg.kind == "background":
        estimate = measure_background(
            cfg.source, cfg.background_time_per_side_s, expectation=cfg.expectation
        )
        path = f"{prefix}_background.csv"
        write_scan_csv(estimate.as_scan(), path)
        files["background_csv"] = path
        report["background"] = {
            "rate_per_s": estimate.rate,
            "rate_err_per_s": estimate.rate_err,
            "time_per_side_s": estimate.time_per_side_s,
        }
        report_path = f"{prefix}_report.json"
        write_report(report, report_path)
        files["report"] = report_path
        return report

    raw = _RUNNERS[cfg.kind](cfg.build_scan_config())
    raw_csv = f"{prefix}_raw.csv"
    write_scan_csv(raw, raw_csv)
    files["raw_csv"] = raw_csv

    background = None
    if cfg.measure_background:
        estimate = measure_background(
            cfg.source,
            cfg.background_time_per_side_s,
            rng=scan_rng(cfg.source, stream=1),
            expectation=cfg.expectation,
        )
        bg_csv = f"{prefix}_background.csv"
        write_scan_csv(estimate.as_scan(), bg_csv)
        files["background_csv"] = bg_csv
        report["background"] = {
            "rate_per_s": estimate.rate,
            "rate_err_per_s": estimate.rate_err,
            "time_per_side_s": estimate.time_per_side_s,
        }
        background = estimate
    elif cfg.background_table is not None:
        background = _load_background_table(cfg, raw)
        report["background"] = {"table": str(cfg.background_table)}

    subtracted = None
    if background is not None:
        subtracted = subtract_background(raw, background)
        sub_csv = f"{prefix}_subtracted.csv"
        write_scan_csv(subtracted, sub_csv)
        files["subtracted_csv"] = sub_csv

    def fit_one(scan) -> FitResult:
        if cfg.kind == "hom":
            return fit_gaussian_dip(scan)
        if cfg.kind == "noon":
            return fit_two_phi_fringe(scan, cfg.calibration)
        cal, fit = classical_fringe_calibrate(scan, cfg.calibration.resistance)
        report.setdefault("calibration", {})[
            "subtracted" if scan is subtracted else "raw"
        ] = {
            "alpha_deg_per_mw": cal.alpha,
            "resistance_ohm": cal.resistance,
            "phi0_rad": cal.phi0,
        }
        return fit

    raw_fit = fit_one(raw)
    report["fits"]["raw"] = raw_fit.to_dict()
    sub_fit = None
    if subtracted is not None:
        sub_fit = fit_one(subtracted)
        report["fits"]["subtracted"] = sub_fit.to_dict()

    if cfg.plot:
        from .plotting import emit_plot

        raw_svg = f"{prefix}_raw.svg"
        emit_plot(raw, raw_fit, raw_svg, title=f"{cfg.kind} scan (raw)")
        files["raw_svg"] = raw_svg
        if subtracted is not None:
            sub_svg = f"{prefix}_subtracted.svg"
            emit_plot(subtracted, sub_fit, sub_svg, title=f"{cfg.kind} scan (subtracted)")
            files["subtracted_svg"] = sub_svg

    report_path = f"{prefix}_report.json"
    write_report(report, report_path)
    files["report"] = report_path
    return report


def _cmd_simulate(args) -> int:
    cfg = load_scenario(resolve_config(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.source = dataclasses.replace(cfg.source, seed=args.seed)
    if args.expectation_mode:
        cfg.expectation = True
    report = run_scenario(cfg, _out_dir(args))
    for label in ("raw", "subtracted"):
        fit = report["fits"][label] if "fits" in report else None
        if fit:
            print(
                f"{label}: visibility {fit['visibility']:.4f} "
                f"+/- {fit['visibility_err']:.4f}"
                + (" [flagged]" if fit["flagged"] else "")
            )
    if report.get("background") and "rate_per_s" in report["background"]:
        bg = report["background"]
        print(f"background: {bg['rate_per_s']:.3f} +/- {bg['rate_err_per_s']:.3f} 1/s")
    print(f"report: {report['files']['report']}")
    return 0


def _cmd_fit(args) -> int:
    scan = read_scan_csv(args.csv, kind=_FIT_KIND[args.model])
    cal = None
    if args.alpha is not None or args.resistance is not None:
        if args.model in ("fringe", "fringe-free"):
            if args.alpha is None or args.resistance is None:
                raise ConfigError("voltage-axis fits need both --alpha and --resistance")
            cal = ThermoOpticCalibration(alpha=args.alpha, resistance=args.resistance)

    if args.model == "dip":
        fit = fit_gaussian_dip(scan)
    elif args.model == "fringe":
        fit = fit_two_phi_fringe(scan, cal)
    elif args.model == "fringe-free":
        fit = fit_fringe_free_frequency(scan, cal)
    else:
        if args.resistance is None:
            raise ConfigError("classical calibration needs --resistance")
        cal_out, fit = classical_fringe_calibrate(scan, args.resistance)
        print(
            f"alpha {cal_out.alpha:.4f} deg/mW, phi0 {cal_out.phi0:.4f} rad "
            f"(R = {cal_out.resistance:.1f} ohm)"
        )

    out = args.out or str(Path(args.csv).with_suffix("")) + "_fit.json"
    write_report(fit.to_dict(), out)
    print(
        f"{fit.model}: visibility {fit.visibility:.4f} +/- {fit.visibility_err:.4f}"
        + (" [flagged]" if fit.flagged else "")
    )
    print(f"report: {out}")
    return 0


def _cmd_selftest(args) -> int:
    results = run_selftest(bias=args.bias)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def _cmd_plot(args) -> int:
    from .plotting import emit_plot

    scan = read_scan_csv(args.csv, kind=args.kind)
    fit = None
    if args.fit:
        fit = FitResult.from_dict(read_report(args.fit))
    out = args.out or str(Path(args.csv).with_suffix(".svg"))
    emit_plot(scan, fit, out, title=Path(args.csv).stem)
    print(f"plot: {out}")
    return 0


def _out_dir(args) -> Path:
    if args.out_dir:
        return Path(args.out_dir)
    env = os.environ.get("MZSIM_OUT_DIR")
    return Path(env) if env else Path.cwd()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mzsim",
        description="Simulate and fit two-photon interference scans on an "
        "integrated Mach-Zehnder circuit.",
    )
    parser.add_argument("--version", action="version", version=f"mzsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario config end to end")
    sim.add_argument("config", help="path to a scenario file, or a bundled config name")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument(
        "--expectation-mode", action="store_true",
        help="store Poisson means instead of sampling",
    )
    sim.add_argument("--out-dir", default=None, help="output directory (or $MZSIM_OUT_DIR)")
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="fit a scan CSV")
    fit.add_argument("csv")
    fit.add_argument(
        "--model", required=True, choices=("dip", "fringe", "fringe-free", "classical")
    )
    fit.add_argument("--alpha", type=float, default=None, help="heater slope, deg/mW")
    fit.add_argument("--resistance", type=float, default=None, help="heater resistance, ohm")
    fit.add_argument("--out", default=None, help="fit report path (JSON)")
    fit.set_defaults(func=_cmd_fit)

    st = sub.add_parser("selftest", help="run the built-in consistency suites")
    st.add_argument(
        "--bias", type=float, default=0.0,
        help="shift added to every measured deviation (test hook)",
    )
    st.set_defaults(func=_cmd_selftest)

    plot = sub.add_parser("plot", help="render a scan CSV to SVG")
    plot.add_argument("csv")
    plot.add_argument("--fit", default=None, help="fit report JSON to overlay")
    plot.add_argument(
        "--kind", default="hom", choices=("hom", "noon", "singles", "background")
    )
    plot.add_argument("--out", default=None)
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"error[fit]: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
