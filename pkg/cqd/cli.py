"""
Command-line front end.

Every subcommand prints the resolved configuration to stderr and its result
to stdout (or ``--out``). Exit codes: 0 success, 1 usage error, 2 domain,
data, numeric or configuration error.
"""

import argparse
import math
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import structlog
from rich.console import Console

from . import __version__
from .config import RunConfig, Settings, load_run_config
from .dynamics import DynamicsConfig, SpinState, branch, integrate_spin, integrate_two_level
from .ensemble import by_name, flip_probability_mc
from .errors import CQDError, ConfigError, NumericError
from .expstats import fit_ki, load_dataset, stats_for_model
from .flipmodel import find_peak, flip_curve, predict, log_grid
from .hyperfine import kappa_table
from .logging_config import setup_logging
from .metrics import metrics_collector, write_metrics
from .models import FlipModel, KappaChoice, OutputFormat, Physics
from .output import emit, print_provenance, records_to_csv, to_csv, to_json, to_svg
from .verify import (
    CheckLevel,
    create_quantum_verifier,
    entangle_mc,
    two_stage_probability,
    two_stage_quadrature,
    uncertainty_grid,
)

logger = structlog.get_logger(__name__)

SCAN_HEADER = ("I", "k_m", "k0", "k1", "f_r1", "W_m", "W_rabi", "W1", "W2", "W3", "W4",
               "W_cqd", "W_R", "W_direct")
SCAN_PLOT_COLUMNS = ("W_m", "W_rabi", "W1", "W2", "W3", "W4", "W_cqd")
SIMULATE_HEADER = ("t", "theta_e", "phi_e", "theta_n", "phi_n")
SCHRODINGER_HEADER = ("k", "numeric", "closed_form", "relative_error", "norm")
_GLOBAL_KEYS = ("config", "seed", "out", "format", "command", "handler")


class CQDArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed: {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list: {text!r}")


def _add_global_options(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON or TOML run configuration")
    parser.add_argument("--seed", type=_u64, default=default, help="random seed (u64)")
    parser.add_argument("--out", default=default, help="output path (default: stdout)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=default,
                        help="output format")


def _output_format(config: RunConfig, default: OutputFormat,
                   allowed=(OutputFormat.CSV, OutputFormat.JSON)) -> OutputFormat:
    fmt = config.format or default
    if fmt not in allowed:
        raise ConfigError(f"{fmt.value} output is not available for this command",
                          {"allowed": ",".join(f.value for f in allowed)})
    return fmt


def cmd_scan(args: argparse.Namespace, config: RunConfig) -> str:
    atom, apparatus = config.build_atom(), config.build_apparatus()
    i_min = args.i_min if args.i_min is not None else apparatus.i_min
    i_max = args.i_max if args.i_max is not None else apparatus.i_max
    rows = flip_curve(i_min, i_max, args.points, atom, apparatus, config.theta_n_mean, config.k_i)
    table = [list(row.model_dump().values()) for row in rows]
    peak_current, peak_value = find_peak(FlipModel.W4, atom, apparatus, config.theta_n_mean, config.k_i)
    logger.info("Scan completed", points=len(rows), peak_current=peak_current, peak_w4=peak_value)

    fmt = _output_format(config, OutputFormat.CSV, tuple(OutputFormat))
    svg = None
    if fmt == OutputFormat.SVG or args.svg:
        curves = {name: ([row[0] for row in table], [row[SCAN_HEADER.index(name)] for row in table])
                  for name in SCAN_PLOT_COLUMNS}
        points = None
        if args.data:
            dataset = load_dataset(args.data)
            points = (dataset.currents, dataset.fractions)
        svg = to_svg(curves, points)
        if args.svg:
            emit(svg, args.svg)
    if fmt == OutputFormat.SVG:
        return svg
    if fmt == OutputFormat.JSON:
        return to_json({"rows": [dict(zip(SCAN_HEADER, row)) for row in table],
                        "peak": {"current": peak_current, "W4": peak_value}})
    return to_csv(SCAN_HEADER, table)


def cmd_stats(args: argparse.Namespace, config: RunConfig) -> str:
    dataset = load_dataset(args.data)
    atom, apparatus = config.build_atom(), config.build_apparatus()
    model = FlipModel(args.model)
    report = stats_for_model(dataset, model, atom, apparatus, config.theta_n_mean, config.k_i)
    fmt = _output_format(config, OutputFormat.JSON, tuple(OutputFormat))
    if fmt == OutputFormat.SVG:
        grid = log_grid(min(dataset.currents), max(dataset.currents), 200)
        curve = [predict(model, float(i), atom, apparatus, config.theta_n_mean, config.k_i) for i in grid]
        return to_svg({model.value: (grid, curve)}, (dataset.currents, dataset.fractions), log_y=True)
    if fmt == OutputFormat.CSV:
        return records_to_csv([report.model_dump()])
    return to_json(report)


def cmd_fit_ki(args: argparse.Namespace, config: RunConfig) -> str:
    dataset = load_dataset(args.data)
    report = fit_ki(dataset, config.build_atom(), config.build_apparatus(), config.theta_n_mean,
                    c_ri=args.c_ri)
    if _output_format(config, OutputFormat.JSON) == OutputFormat.CSV:
        return records_to_csv([report.model_dump()])
    return to_json(report)


def cmd_mc_collapse(args: argparse.Namespace, config: RunConfig) -> str:
    dist = by_name(args.dist)
    estimate = flip_probability_mc(args.theta_e, dist, args.n, config.seed, args.workers)
    result = {**estimate.model_dump(), "theta_e": args.theta_e, "dist": dist.kind.value}
    if _output_format(config, OutputFormat.JSON) == OutputFormat.CSV:
        return records_to_csv([result])
    return to_json(result)


def cmd_simulate(args: argparse.Namespace, config: RunConfig) -> str:
    if args.t_end <= 0.0:
        raise ConfigError("--t-end must be positive", {"t_end": args.t_end})
    dynamics = DynamicsConfig(k_i=config.k_i, physics=Physics(args.physics),
                              hold_nucleus=args.hold_nucleus)
    state0 = SpinState(args.theta_e, args.phi_e, args.theta_n, args.phi_n)
    field = (0.0, args.by, args.bz)
    times = np.linspace(0.0, args.t_end, args.samples)
    trajectory = integrate_spin(state0, lambda t: field, (0.0, args.t_end), dynamics,
                                atom=config.build_atom(), t_eval=times)
    rows = list(zip(trajectory.t, trajectory.theta_e, trajectory.phi_e,
                    trajectory.theta_n, trajectory.phi_n))
    final = trajectory.final
    logger.info("Trajectory integrated", steps=trajectory.steps, theta_e_final=final.theta_e,
                predicted_branch=branch(state0.theta_n, state0.theta_e))
    if _output_format(config, OutputFormat.CSV) == OutputFormat.JSON:
        return to_json({
            "rows": [dict(zip(SIMULATE_HEADER, row)) for row in rows],
            "predicted_branch": branch(state0.theta_n, state0.theta_e),
            "phase_e": float(trajectory.phase_e[-1]),
        })
    return to_csv(SIMULATE_HEADER, rows)


def cmd_schrodinger_check(args: argparse.Namespace, config: RunConfig) -> str:
    rows = []
    for k in args.k_values:
        if args.kind == "majorana":
            pair = integrate_two_level(k, 0.0, args.phi_n, 0.0)
        else:
            pair = integrate_two_level(0.0, k, args.phi_n, args.w_n)
        closed = math.exp(-math.pi * k / 2.0)
        numeric = pair.stay_probability
        rows.append((k, numeric, closed, abs(numeric - closed) / closed, pair.norm))
    if _output_format(config, OutputFormat.CSV) == OutputFormat.JSON:
        return to_json({"kind": args.kind, "rows": [dict(zip(SCHRODINGER_HEADER, row)) for row in rows]})
    return to_csv(SCHRODINGER_HEADER, rows)


def cmd_fields(args: argparse.Namespace, config: RunConfig) -> str:
    table = kappa_table(args.contact_convention or config.contact_convention)
    if _output_format(config, OutputFormat.CSV) == OutputFormat.JSON:
        return to_json({"kappa": table})
    return records_to_csv(table, ("density", "averaging", "kappa"))


def cmd_uncertainty(args: argparse.Namespace, config: RunConfig) -> str:
    records = uncertainty_grid(args.grid)
    margins = [record.delta_sz * record.delta_sx - abs(record.s_y_exp) for record in records]
    report = {
        "grid": args.grid,
        "points": len(records),
        "max_residual": max(record.residual for record in records),
        "inequality_violations": sum(1 for record in records if not record.inequality_holds),
        "min_margin": min(margins),
    }
    _output_format(config, OutputFormat.JSON, (OutputFormat.JSON,))
    return to_json(report)


def cmd_two_stage(args: argparse.Namespace, config: RunConfig) -> str:
    result = two_stage_probability(args.alpha, args.mc, config.seed)
    report = {**result.model_dump(), "p_quadrature": two_stage_quadrature(args.alpha)}
    _output_format(config, OutputFormat.JSON, (OutputFormat.JSON,))
    return to_json(report)


def cmd_entangle(args: argparse.Namespace, config: RunConfig) -> str:
    summary = entangle_mc(args.n, config.seed, args.correlated)
    _output_format(config, OutputFormat.JSON, (OutputFormat.JSON,))
    return to_json(summary)


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> str:
    verifier = create_quantum_verifier(args.samples)
    max_level = CheckLevel.STATISTICAL if args.statistical else CheckLevel.IDENTITY
    report = verifier.run({"seed": config.seed, "atom": config.build_atom(),
                           "apparatus": config.build_apparatus()}, max_level)
    _output_format(config, OutputFormat.JSON, (OutputFormat.JSON,))
    text = to_json(report.summary())
    if not report.passed:
        emit(text, config.out)
        raise NumericError("verification failed",
                           {"failed": ",".join(result.name for result in report.failed())})
    return text


def build_parser() -> CQDArgumentParser:
    parser = CQDArgumentParser(
        prog="cqd",
        description="Co-quantum dynamics toolkit: flip-fraction scans, Monte Carlo collapse "
                    "statistics, spin dynamics and quantum cross-checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global_options(parser, suppress=False)
    common = CQDArgumentParser(add_help=False)
    _add_global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        command.set_defaults(handler=handler)
        return command

    kappas = [k.value for k in KappaChoice]
    models = [m.value for m in FlipModel]

    scan = add("scan", cmd_scan, "Flip-fraction models over a log grid of wire currents (CSV).")
    scan.add_argument("--i-min", type=float, help="lowest current, A")
    scan.add_argument("--i-max", type=float, help="highest current, A")
    scan.add_argument("--points", type=_positive_int, default=50)
    scan.add_argument("--ki", type=float, dest="k_i", help="induction factor k_i")
    scan.add_argument("--kappa", choices=kappas, help="internal-field coefficient")
    scan.add_argument("--svg", help="also write a log-x plot to this path")
    scan.add_argument("--data", help="dataset drawn as points on the plot")

    stats = add("stats", cmd_stats, "Goodness of fit of one flip model against a dataset (JSON).")
    stats.add_argument("--data", help="current_A,flip_fraction CSV (default: shipped dataset)")
    stats.add_argument("--model", choices=models, default=FlipModel.W4.value)
    stats.add_argument("--ki", type=float, dest="k_i", help="induction factor k_i")
    stats.add_argument("--kappa", choices=kappas, help="internal-field coefficient")

    fit = add("fit-ki", cmd_fit_ki, "Fit the induction coefficient to a dataset (JSON).")
    fit.add_argument("--data", help="current_A,flip_fraction CSV (default: shipped dataset)")
    fit.add_argument("--c-ri", type=float, help="report at this c_ri instead of fitting")
    fit.add_argument("--kappa", choices=kappas, help="internal-field coefficient")

    mc = add("mc-collapse", cmd_mc_collapse, "Monte Carlo flip probability at a fixed electron angle (JSON).")
    mc.add_argument("--theta-e", type=float, required=True, help="electron polar angle, rad")
    mc.add_argument("--dist", choices=["iso", "heart", "heart_inverted"], default="iso")
    mc.add_argument("--n", type=_positive_int, default=100_000, help="samples")
    mc.add_argument("--workers", type=_positive_int, default=1)

    simulate = add("simulate", cmd_simulate, "Integrate one spin trajectory in a static field (CSV).")
    simulate.add_argument("--physics", choices=[p.value for p in Physics], default=Physics.CQD.value)
    simulate.add_argument("--ki", type=float, dest="k_i", help="induction factor k_i")
    simulate.add_argument("--theta-e", type=float, default=math.pi / 2.0)
    simulate.add_argument("--phi-e", type=float, default=0.0)
    simulate.add_argument("--theta-n", type=float, default=math.pi)
    simulate.add_argument("--phi-n", type=float, default=0.0)
    simulate.add_argument("--bz", type=float, default=1e-4, help="static B_z, T")
    simulate.add_argument("--by", type=float, default=0.0, help="static B_y, T")
    simulate.add_argument("--t-end", type=float, default=1e-5, help="duration, s")
    simulate.add_argument("--samples", type=_positive_int, default=201)
    simulate.add_argument("--hold-nucleus", action="store_true", help="keep the nuclear moment fixed")

    schrodinger = add("schrodinger-check", cmd_schrodinger_check,
                      "Numeric two-level passage against the closed-form flip probability (CSV).")
    schrodinger.add_argument("--k-values", type=_float_list, default=[0.1, 0.5, 1.0, 2.0])
    schrodinger.add_argument("--kind", choices=["majorana", "resonant"], default="majorana")
    schrodinger.add_argument("--phi-n", type=float, default=0.0)
    schrodinger.add_argument("--w-n", type=float, default=20.0, help="nuclear rate for --kind resonant")

    fields = add("fields", cmd_fields, "Internal-field coefficient for each density and averaging (CSV).")
    fields.add_argument("--contact-convention", choices=["published", "scaled"])

    uncertainty = add("uncertainty", cmd_uncertainty, "Sequential-measurement uncertainty relation on a grid (JSON).")
    uncertainty.add_argument("--grid", type=_positive_int, default=100)

    two_stage = add("two-stage", cmd_two_stage, "Second-stage probability of a tilted measurement (JSON).")
    two_stage.add_argument("--alpha", type=float, required=True, help="tilt, rad")
    two_stage.add_argument("--mc", type=_positive_int, help="Monte Carlo samples")

    entangle = add("entangle", cmd_entangle, "Branch statistics of entangled pairs (JSON).")
    entangle.add_argument("--n", type=_positive_int, default=100_000, help="pairs")
    entangle.add_argument("--correlated", action="store_true", help="parallel instead of antiparallel pair")

    verify = add("verify", cmd_verify, "Run the quantum cross-check suite (JSON).")
    verify.add_argument("--statistical", action="store_true", help="include Monte Carlo checks")
    verify.add_argument("--samples", type=_positive_int, default=200_000)

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {"seed": args.seed, "format": args.format, "out": args.out}
    for key in ("kappa", "k_i"):
        overrides[key] = getattr(args, key, None)
    return overrides


def _command_options(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: value for key, value in vars(args).items()
            if key not in _GLOBAL_KEYS and key not in ("kappa", "k_i") and value is not None}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = Settings()
    setup_logging(settings.log_level, settings.log_file)
    console = Console(stderr=True, highlight=False, soft_wrap=True)
    metrics_collector.set_build_info(__version__, args.command)

    try:
        config = load_run_config(args.config or settings.config_path, _overrides(args))
        print_provenance(args.command, __version__, config.provenance(), _command_options(args),
                         console=console)
        emit(args.handler(args, config), config.out)
        logger.info("Command completed", command=args.command)
        return 0
    except CQDError as e:
        logger.error("Command failed", command=args.command, error=str(e))
        console.print(f"cqd: error: {e}", markup=False)
        return 2
    finally:
        if settings.metrics_file:
            write_metrics(settings.metrics_file)
