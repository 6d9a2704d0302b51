"""
mwen command line.

Subcommands: fit-pump, solve-central, solve-admm, compare, validate.
Every failure maps to the exit code carried by its exception class.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from mwen import __version__
from mwen.admm import AdmmConfig, run_admm
from mwen.core.config import PwlConfig, SolverConfig, load_env_overrides, log_level_from_env
from mwen.core.errors import AdmmAborted, MwenError, ReportIOError, ScenarioValidationError
from mwen.model_ir import export_lp
from mwen.models import build_central, solve_central, water_power_bounds
from mwen.otel.telemetry import init_telemetry, otlp_endpoint_from_env, shutdown_telemetry
from mwen.pwl import FitDataset, fit_max_affine, fit_scenario_curves, sample_quadratic
from mwen.reporting import (
    ReportView,
    emit_admm,
    emit_central,
    emit_reports,
    load_sweep,
    run_compare,
)
from mwen.scenario import PumpQuadratic, ScenarioCatalog, ScenarioLoader, ScenarioValidator
from mwen.scenario.models import Scenario
from mwen.solver import solver_registry
from mwen.transport import WaterAck, run_agent

logger = logging.getLogger("mwen")

EPILOG = """
Examples:
  # Validate a scenario, list the bundled ones
  %(prog)s validate --scenario scenario_a
  %(prog)s validate --list

  # Fit a pump curve from samples or from a quadratic
  %(prog)s fit-pump --data pump.csv --segments 3 --out curves/
  %(prog)s fit-pump --quadratic 0.0002,0.05,1.5 --flow-range 0,400

  # Centralized benchmark with dispatch tables and an LP dump
  %(prog)s solve-central --scenario scenario_a --out out/central --dump-lp

  # OB-ADMM in one process
  %(prog)s solve-admm --scenario scenario_a --mode ob --rho 0.01 --ks 50 --out out/ob

  # Two processes over TCP
  %(prog)s solve-admm --scenario a.json --transport tcp --role mem --listen 127.0.0.1:7400
  %(prog)s solve-admm --scenario a.json --transport tcp --role mwm --connect 127.0.0.1:7400

  # Comparison sweep
  %(prog)s compare --scenario scenario_b --rhos 0.01,0.1,1 --modes standard,ob --out out/b
  %(prog)s compare --config sweep.yaml

Environment:
  MWEN_BACKEND, MWEN_NODE_LIMIT, ...   solver settings
  MWEN_RHO, MWEN_MAX_ITERS, ...        ADMM settings
  MWEN_LOG_LEVEL                       log level without --verbose
  OTLP_ENDPOINT                        export spans over OTLP/HTTP
"""


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _pair(text: str) -> List[float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got '{text}'")
    return values


def _global_options(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    # subcommand copies use SUPPRESS so they never overwrite values given before the subcommand
    def default(value: Any) -> Any:
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--scenario", "-s", default=default(None),
                        help="Bundled scenario name or path to a scenario JSON")
    parser.add_argument("--out", "-o", default=default(None), help="Output directory")
    parser.add_argument("--seed", type=int, default=default(None),
                        help="Reserved; no computation is randomized")
    parser.add_argument("--verbose", "-v", action="store_true", default=default(False),
                        help="Debug logging")
    parser.add_argument("--backend", default=default(None),
                        help="Solver backend (builtin, highs, brute_force)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwen",
        description="Micro water-energy nexus dispatch: centralized MILP and ADMM / OB-ADMM coordination",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    fit = commands.add_parser("fit-pump", help="Fit a max-affine pump curve")
    _global_options(fit, suppress=True)
    fit.add_argument("--data", help="Two-column CSV (flow, power)")
    fit.add_argument("--quadratic", type=_float_list, metavar="C1,C2,C3",
                     help="Sample P = c1*W^2 + c2*W + c3 instead of reading data")
    fit.add_argument("--flow-range", type=_pair, metavar="LO,HI", help="Sampling interval for --quadratic")
    fit.add_argument("--segments", type=int, default=3, help="Number of affine pieces (default: 3)")
    fit.add_argument("--samples", type=int, default=9, help="Samples for --quadratic (default: 9)")
    fit.add_argument("--method", choices=["exact_milp", "partition_heuristic", "auto"], default="auto")

    central = commands.add_parser("solve-central", help="Solve the centralized MWEN MILP")
    _global_options(central, suppress=True)
    central.add_argument("--dump-lp", action="store_true", help="Also write the model in LP text form")

    admm = commands.add_parser("solve-admm", help="Run standard ADMM or OB-ADMM")
    _global_options(admm, suppress=True)
    admm.add_argument("--mode", choices=["standard", "std", "objective_based", "ob"])
    admm.add_argument("--rho", type=float, help="Penalty parameter")
    admm.add_argument("--beta", type=float, help="OB objective change threshold")
    admm.add_argument("--ks", type=int, help="OB iteration window")
    admm.add_argument("--eps-th", type=float, help="Feasibility threshold")
    admm.add_argument("--max-iters", type=int)
    admm.add_argument("--order", choices=["mem_first", "mwm_first"])
    admm.add_argument("--with-central", action="store_true",
                      help="Also solve the centralized model and report the difference")
    admm.add_argument("--transport", choices=["inproc", "tcp"], default="inproc")
    admm.add_argument("--role", choices=["mem", "mwm"], help="Agent role with --transport tcp")
    admm.add_argument("--listen", metavar="ADDR", help="host:port the microgrid agent listens on")
    admm.add_argument("--connect", metavar="ADDR", help="host:port the water agent connects to")
    admm.add_argument("--coupling-bounds", type=_pair, metavar="LO,HI",
                      help="Shared coupling power range; required for --role mem, the water agent derives and prints it")
    admm.add_argument("--timeout", type=float, help="Seconds to wait per agent message")

    compare = commands.add_parser("compare", help="Centralized vs. decentralized sweep")
    _global_options(compare, suppress=True)
    compare.add_argument("--config", "-c", help="YAML sweep file")
    compare.add_argument("--rhos", type=_float_list, default=[0.01, 0.1, 1.0])
    compare.add_argument("--modes", type=_str_list, default=["standard", "objective_based"])
    compare.add_argument("--ks", type=_int_list, help="OB iteration windows to sweep")
    compare.add_argument("--gnuplot", action="store_true", help="Write a gnuplot script next to the CSVs")

    validate = commands.add_parser("validate", help="Validate a scenario file")
    _global_options(validate, suppress=True)
    validate.add_argument("--list", "-l", action="store_true", help="List bundled scenarios")

    return parser


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else log_level_from_env()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    config = load_env_overrides(SolverConfig())
    if args.backend:
        config = config.model_copy(update={"backend": args.backend})
    if config.backend not in solver_registry.list_backends():
        raise ScenarioValidationError([
            f"unknown solver backend '{config.backend}', available: {', '.join(solver_registry.list_backends())}"
        ])
    return config


def _require_scenario(args: argparse.Namespace) -> Scenario:
    if not args.scenario:
        raise ScenarioValidationError(["--scenario is required"])
    return ScenarioLoader().load(args.scenario)


def _write_json(path: Path, payload: Dict[str, Any]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportIOError(f"Cannot write {path.name}: {e}", str(path))


# commands

def cmd_fit_pump(args: argparse.Namespace) -> int:
    solver_config = _solver_config(args)
    pwl = PwlConfig(segments=args.segments, samples=args.samples, method=args.method)

    if args.data:
        payload = fit_max_affine(FitDataset.from_csv(args.data), pwl.segments, pwl.method, solver_config).to_json()
    elif args.quadratic:
        if len(args.quadratic) != 3 or not args.flow_range:
            raise ScenarioValidationError(["--quadratic needs C1,C2,C3 and --flow-range LO,HI"])
        c1, c2, c3 = args.quadratic
        data = sample_quadratic(PumpQuadratic(c1=c1, c2=c2, c3=c3), tuple(args.flow_range), pwl.samples)
        payload = fit_max_affine(data, pwl.segments, pwl.method, solver_config).to_json()
    elif args.scenario:
        curves = fit_scenario_curves(ScenarioLoader().load(args.scenario), pwl, solver_config)
        payload = {pump_id: curve.to_json() for pump_id, curve in curves.items()}
    else:
        raise ScenarioValidationError(["fit-pump needs --data, --quadratic or --scenario"])

    if args.out:
        path = Path(args.out) / "pump_curve.json"
        _write_json(path, payload)
        print(f"Wrote {path}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_solve_central(args: argparse.Namespace) -> int:
    scenario = _require_scenario(args)
    solver_config = _solver_config(args)
    curves = fit_scenario_curves(scenario, solver_config=solver_config)

    if args.dump_lp:
        text = export_lp(build_central(scenario, curves)[0])
        if args.out:
            path = Path(args.out) / "central.lp"
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text, encoding="utf-8")
            except OSError as e:
                raise ReportIOError(f"Cannot write LP dump: {e}", str(path))
        else:
            print(text)

    solution = solve_central(scenario, curves, solver_config)
    ReportView().render_central(solution)
    if args.out:
        for path in emit_central(solution, args.out):
            logger.info(f"Wrote {path}")
    return 0


def _admm_config(args: argparse.Namespace) -> AdmmConfig:
    config = load_env_overrides(AdmmConfig())
    explicit = {
        "mode": args.mode,
        "rho": args.rho,
        "ob_beta": args.beta,
        "ob_window": args.ks,
        "eps_threshold": args.eps_th,
        "max_iters": args.max_iters,
        "order": args.order,
        "timeout": args.timeout,
        "coupling_bounds": tuple(args.coupling_bounds) if args.coupling_bounds else None,
    }
    updates = {key: value for key, value in explicit.items() if value is not None}
    try:
        return AdmmConfig.model_validate({**config.model_dump(), **updates})
    except ValidationError as e:
        raise ScenarioValidationError([
            f"{'.'.join(str(p) for p in err['loc']) or 'admm'}: {err['msg']}" for err in e.errors()
        ])


def _run_tcp(args: argparse.Namespace, scenario: Scenario, config: AdmmConfig,
             solver_config: SolverConfig) -> int:
    if args.role is None:
        raise ScenarioValidationError(["--transport tcp needs --role mem or --role mwm"])
    endpoint = args.listen if args.role == "mem" else args.connect
    if not endpoint:
        flag = "--listen" if args.role == "mem" else "--connect"
        raise ScenarioValidationError([f"--role {args.role} needs {flag} ADDR"])

    if args.role == "mem":
        own = scenario.mem_view()
        if config.coupling_bounds is None:
            raise ScenarioValidationError(
                ["--role mem needs --coupling-bounds LO,HI (the water agent prints its range)"]
            )
        try:
            solution = run_agent("mem", endpoint, own, config, solver_config=solver_config)
        except AdmmAborted as e:
            if args.out:
                emit_admm(args.out, e.iterations, error=str(e))
            raise
        ReportView().render_admm(solution)
        if args.out:
            emit_admm(args.out, solution.iterations, solution)
        return 0

    own = scenario.mwm_view()
    curves = fit_scenario_curves(own, solver_config=solver_config)
    if config.coupling_bounds is None:
        config = config.model_copy(update={"coupling_bounds": water_power_bounds(own, curves)})
        lo, hi = config.coupling_bounds
        print(f"Coupling bounds {lo:g},{hi:g}")
    ack: WaterAck = run_agent("mwm", endpoint, own, config, curves, solver_config)
    print(f"Water agent done: {ack.iterations} iterations, stop code {ack.stop_code:g}, "
          f"{ack.energy_kwh:.3f} kWh")
    if args.out:
        _write_json(Path(args.out) / "summary.json", ack.model_dump(mode="json"))
    return 0


def cmd_solve_admm(args: argparse.Namespace) -> int:
    scenario = _require_scenario(args)
    solver_config = _solver_config(args)
    config = _admm_config(args)

    if args.transport == "tcp":
        return _run_tcp(args, scenario, config, solver_config)

    curves = fit_scenario_curves(scenario, solver_config=solver_config)
    central_cost = solve_central(scenario, curves, solver_config).cost if args.with_central else None
    try:
        solution = run_admm(scenario, curves, config, solver_config)
    except AdmmAborted as e:
        if args.out:
            emit_admm(args.out, e.iterations, central_cost=central_cost, error=str(e))
        raise
    ReportView().render_admm(solution, central_cost)
    if args.out:
        emit_admm(args.out, solution.iterations, solution, central_cost)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    solver_config = _solver_config(args)
    view = ReportView()
    base = load_env_overrides(AdmmConfig())

    if args.config:
        sweeps = load_sweep(args.config)
        loader = ScenarioLoader()
        for sweep in sweeps:
            # scenario paths in a sweep file are relative to the file
            local = Path(args.config).parent / sweep.scenario
            source = local if local.is_file() else sweep.scenario
            out = sweep.out or (str(Path(args.out) / sweep.scenario) if args.out else None)
            report = run_compare(
                loader.load(source),
                rhos=sweep.rhos,
                modes=sweep.modes,
                config=sweep.admm_config(base),
                solver_config=solver_config,
                ob_windows=sweep.ob_windows,
            )
            view.render_comparison(report)
            if out:
                emit_reports(report, out, gnuplot=sweep.gnuplot or args.gnuplot)
        return 0

    scenario = _require_scenario(args)
    report = run_compare(scenario, rhos=args.rhos, modes=args.modes, config=base,
                         solver_config=solver_config, ob_windows=args.ks)
    view.render_comparison(report)
    if args.out:
        emit_reports(report, args.out, gnuplot=args.gnuplot)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    if args.list:
        print("Bundled scenarios:")
        print("=" * 60)
        for info in ScenarioCatalog().list_all():
            print(f"\n{info['id']}")
            print(f"  Name: {info['name']}")
            print(f"  Description: {info['description']}")
            print(f"  Tags: {', '.join(info.get('tags', []))}")
        return 0

    loader = ScenarioLoader()
    if not args.scenario:
        raise ScenarioValidationError(["--scenario is required"])
    path = loader.resolve(args.scenario)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioValidationError([f"{path}: invalid JSON - {e}"])
    except OSError as e:
        raise ReportIOError(f"Cannot read scenario: {e}", str(path))

    valid, errors = ScenarioValidator().validate(record)
    if not valid:
        print(f"Validation errors for {path}:", file=sys.stderr)
        for error in errors:
            print(f"  - {error}", file=sys.stderr)
        return ScenarioValidationError.exit_code

    scenario = loader.load(path)
    print(f"{path}: valid (T={scenario.horizon}, dt={scenario.dt} h, "
          f"{'islanded' if scenario.islanded else 'grid-tied'})")
    return 0


COMMANDS = {
    "fit-pump": cmd_fit_pump,
    "solve-central": cmd_solve_central,
    "solve-admm": cmd_solve_admm,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for CLI"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    if args.seed is not None:
        logger.debug(f"--seed {args.seed} accepted; results do not depend on it")
    if otlp_endpoint_from_env():
        init_telemetry(role=getattr(args, "role", None))

    try:
        return COMMANDS[args.command](args)
    except MwenError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    finally:
        shutdown_telemetry()


if __name__ == "__main__":
    sys.exit(main())
