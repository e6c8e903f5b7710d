"""
Command-line front end.

    python cli.py curve --alpha 1 --rho 0 2 4 --stop 50 --count 501
    python cli.py figure 6
    python cli.py --out results --threads 4 figure 3
    python cli.py asymptotics --family breit-wigner --short-time
    python cli.py verify --slope-tol 0.001

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error,
3 numerical failure.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from utils import const
from utils.config import RunConfig, VerifyConfig, env_defaults
from utils.errors import ConfigError, ConvergenceFailure, DecayLabError, DomainError
from utils.logger import setup_logging

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _common_parser(suppress: bool = False) -> argparse.ArgumentParser:
    """
    Flags accepted both before and after the subcommand. The subcommand copy
    leaves unset flags out of the namespace so it does not mask global values.
    """
    default = argparse.SUPPRESS if suppress else None
    common = argparse.ArgumentParser(add_help=False, argument_default=default)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--threads", type=int)
    common.add_argument("--mass-scale", type=float, help="m_s: multiply masses and rates, divide times")
    common.add_argument("--tol", type=float, help="target absolute error of the quadrature")
    common.add_argument("--endpoint-rule", choices=["jacobi-weighted", "tanh-sinh"])
    common.add_argument("--form", choices=["xi", "eta"], help="integration variable")
    common.add_argument("--panel-order", type=int)
    common.add_argument("--max-panels", type=int)
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--quiet", action="store_true", help="no progress bars")
    return common


def _mdd_parser() -> argparse.ArgumentParser:
    mdd = argparse.ArgumentParser(add_help=False)
    mdd.add_argument("--family", choices=["toy", "breit-wigner", "tabulated"])
    mdd.add_argument("--alpha", type=float)
    mdd.add_argument("--xi0", type=float)
    mdd.add_argument("--m0", type=float)
    mdd.add_argument("--gamma-bar", type=float)
    mdd.add_argument("--table", help="CSV with header xi,omega")
    mdd.add_argument("--metadata", help="JSON sidecar of the table")
    mdd.add_argument("--rho", type=float, nargs="+")
    return mdd


def build_parser() -> argparse.ArgumentParser:
    common, mdd = _common_parser(suppress=True), _mdd_parser()
    parser = argparse.ArgumentParser(prog="decaylab", parents=[_common_parser()],
                                     description="Relativistic decay-law laboratory.")
    commands = parser.add_subparsers(dest="command", required=True)

    curve = commands.add_parser("curve", parents=[common, mdd], help="P, M, Gamma on a time grid")
    curve.add_argument("--grid-kind", choices=["linear", "geometric"])
    curve.add_argument("--start", type=float)
    curve.add_argument("--stop", type=float)
    curve.add_argument("--count", type=int)

    figure = commands.add_parser("figure", parents=[common], help="figure dataset")
    figure.add_argument("n", type=int, choices=range(1, len(const.FIGURES) + 1), metavar="N",
                        help=f"figure number 1..{len(const.FIGURES)}")

    asymptotics = commands.add_parser("asymptotics", parents=[common, mdd],
                                      help="closed-form constants")
    asymptotics.add_argument("--short-time", action="store_true",
                             help="include the short-time moments (fails when they diverge)")

    verify = commands.add_parser("verify", parents=[common, mdd], help="run the invariant suite")
    verify.add_argument("--check", action="append", help="run only this check (repeatable)")
    verify.add_argument("--user-mdd", action="store_true",
                        help="verify the configured density instead of the toy family")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--draws", type=int)
    verify.add_argument("--slope-tol", type=float)
    verify.add_argument("--kappa-tol", type=float)
    verify.add_argument("--asymptote-tol", type=float)
    verify.add_argument("--zeta-tol", type=float)
    verify.add_argument("--rate-tol", type=float)
    return parser


def _overrides(args: argparse.Namespace) -> Dict:
    def get(name):
        return getattr(args, name, None)

    overrides = {
        "out": get("out"),
        "format": get("format"),
        "threads": get("threads"),
        "mass_scale": get("mass_scale"),
        "rho": get("rho"),
        "quadrature": {
            "target_abs_error": get("tol"),
            "endpoint_rule": get("endpoint_rule"),
            "form": get("form"),
            "panel_order": get("panel_order"),
            "max_panels": get("max_panels"),
        },
        "mdd": {
            "family": get("family"),
            "alpha": get("alpha"),
            "xi0": get("xi0"),
            "m0": get("m0"),
            "gamma_bar": get("gamma_bar"),
            "table": get("table"),
            "metadata": get("metadata"),
        },
        "grid": {
            "kind": get("grid_kind"),
            "start": get("start"),
            "stop": get("stop"),
            "count": get("count"),
        },
    }
    return overrides


def _verify_config(args: argparse.Namespace, config: RunConfig) -> VerifyConfig:
    data = dict(config.options.get("verify", {}))
    scaling = dict(data.get("scaling", {}))
    for key, value in (("seed", args.seed), ("draws", args.draws)):
        if value is not None:
            data[key] = value
    if args.slope_tol is not None:
        data["slope_rel_tol"] = scaling["slope_rel_tol"] = args.slope_tol
    if args.asymptote_tol is not None:
        data["asymptote_rel_tol"] = scaling["asymptote_rel_tol"] = args.asymptote_tol
    if args.kappa_tol is not None:
        scaling["kappa_rel_tol"] = args.kappa_tol
    if args.zeta_tol is not None:
        data["zeta_rel_tol"] = args.zeta_tol
    if args.rate_tol is not None:
        data["rate_rel_tol"] = args.rate_tol
    data["scaling"] = scaling
    return VerifyConfig.model_validate(data)


def cmd_curve(config: RunConfig, progress: bool) -> int:
    from evaluators.observables import NOT_CONVERGED, decay_curve
    from model.kinematics import Kinematics
    from utils.output import write_csv, write_json

    mdd = config.mdd.build()
    grid = config.grid.points()
    status = EXIT_OK
    for rho in config.rho:
        curve = decay_curve(mdd, Kinematics.for_mdd(mdd, rho), grid, config.quadrature,
                            threads=config.threads, on_failure="flag", progress=progress)
        path = config.output_dir() / f"curve_rho_{rho:g}.{config.format}"
        if config.format == "csv":
            write_csv(path, const.CURVE_HEADER, curve.to_rows(config.mass_scale))
        else:
            write_json(path, curve.to_dict(config.mass_scale))
        logger.info("wrote %s (%d flagged points)", path, curve.flagged)
        if NOT_CONVERGED in curve.flags:
            status = EXIT_NUMERICAL
    return status


def cmd_figure(config: RunConfig, n: int, progress: bool) -> int:
    from get_datasets import GetDatasets

    datasets = GetDatasets(out=config.out, cfg=config.quadrature, threads=config.threads,
                           fmt=config.format, mass_scale=config.mass_scale, progress=progress)
    records = datasets.build_figure(n)
    return EXIT_OK if all(r["success"] for r in records) else EXIT_NUMERICAL


def cmd_asymptotics(config: RunConfig, short_time: bool) -> int:
    from evaluators.asymptotics import AsymptoticAnalyzer
    from utils.output import write_json

    analyzer = AsymptoticAnalyzer(config.quadrature)
    report = analyzer.analyze(config.mdd.build(), config.rho, short_time=short_time)
    path = write_json(config.output_dir() / "asymptotics.json", report)
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    from score import InvariantSuite, summary_json
    from utils.output import write_json

    verify_config = _verify_config(args, config)
    user_mdd = None
    if args.user_mdd or config.mdd.family == "tabulated":
        user_mdd = config.mdd.build()
    suite = InvariantSuite(verify_config, config.quadrature, config.threads, user_mdd)
    summary = suite.evaluate(args.check)
    path = write_json(config.output_dir() / "verify_summary.json", summary_json(summary))
    if summary["passed"]:
        logger.info("all checks passed, summary in %s", path)
        return EXIT_OK
    print(f"failed checks: {', '.join(summary['failed_checks'])}", file=sys.stderr)
    return EXIT_NUMERICAL if summary["numerical_failure"] else EXIT_VERIFY_FAILED


def _field_errors(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        field = ".".join(str(p) for p in item["loc"])
        parts.append(f"{field}: {item['msg']}")
    return "; ".join(parts)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging(args.log_level or env_defaults()["log_level"])
    progress = not args.quiet and sys.stderr.isatty()

    try:
        config = RunConfig.load(args.config, _overrides(args))
        if args.command == "curve":
            return cmd_curve(config, progress)
        if args.command == "figure":
            return cmd_figure(config, args.n, progress)
        if args.command == "asymptotics":
            return cmd_asymptotics(config, args.short_time)
        return cmd_verify(config, args)
    except ValidationError as e:
        print(f"invalid configuration: {_field_errors(e)}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, OSError, json.JSONDecodeError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        if args.command == "asymptotics" and args.short_time:
            print(f"numerical failure: {e}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"invalid argument: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceFailure, DecayLabError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
