"""Command-line interface: ``lambdamem {solve,bound,optimize,sweep,compare,classify}``.

Exit codes: 0 success, 1 computation failure, 2 usage error. Every command
prints a ``# config {...}`` line first; saving that line to a file and
passing it back with ``--config`` reproduces the run.
"""
import argparse
import json
import logging
import math
import sys

from . import bound as bound_mod
from .errors import InvalidArgumentError
from .fields import ControlParams, MemoryParams
from .optimizer import optimize_control, optimize_theta_only
from .protocols import classify, reference_table
from .shapeopt import DEFAULT_BASIS
from .solver import DEFAULT_NZ, DEFAULT_STEP_DIVISOR, GridSpec, dump_fields, energy_balance, solve
from .sweep import COLUMNS, MODES, SweepSpec, default_workers, format_records, run_sweep

log = logging.getLogger("lambdamem")


def _number(check, what):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not math.isfinite(v) or not check(v):
            raise argparse.ArgumentTypeError(f"must be {what}, got {text}")
        return v

    return parse


positive = _number(lambda v: v > 0, "> 0")
nonnegative = _number(lambda v: v >= 0, ">= 0")
real = _number(lambda v: True, "finite")


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _grid_args(p):
    p.add_argument("--nz", type=_count, default=DEFAULT_NZ, help="Chebyshev points in z")
    p.add_argument("--step-divisor", type=positive, default=DEFAULT_STEP_DIVISOR,
                   help="tau step = min(sigma_sig, sigma_ctrl) / divisor")


def _memory_args(p, d_type=positive):
    p.add_argument("--d", type=d_type, required=True, help="resonant optical depth")
    p.add_argument("--tau", type=positive, required=True, help="signal FWHM in 1/gamma")
    p.add_argument("--delta", type=real, default=0.0, help="two-photon detuning in gamma")
    p.add_argument("--gamma-b", type=nonnegative, default=0.0, help="spin-wave decay in gamma")


def _control_args(p, required):
    area = p.add_mutually_exclusive_group(required=required)
    area.add_argument("--theta", type=nonnegative, help="control pulse area in radians")
    area.add_argument("--theta-pi", type=nonnegative, help="control pulse area in units of pi")
    p.add_argument("--delay", type=real, default=0.0, help="control delay in 1/gamma")
    p.add_argument("--tau-ctrl", type=positive, help="control FWHM in 1/gamma (default: --tau)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lambdamem", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file (or saved '# config' line) with option values")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="integrate one storage run")
    _memory_args(p, nonnegative)
    _control_args(p, required=True)
    _grid_args(p)
    p.add_argument("--dump", help="write A, P, B to this CSV file")

    p = sub.add_parser("bound", help="optimal storage efficiency at optical depth d")
    p.add_argument("--d", type=positive, required=True)
    p.add_argument("--n", type=_count, default=bound_mod.DEFAULT_BOUND_N, help="kernel grid size")
    p.add_argument("--square", action="store_true", help="report the total (squared) efficiency first")

    p = sub.add_parser("optimize", help="optimize the Gaussian control")
    _memory_args(p)
    _grid_args(p)
    p.add_argument("--theta-only", action="store_true",
                   help="optimize only the area at zero delay and tau_ctrl = tau")
    p.add_argument("--bound-n", type=_count, default=bound_mod.DEFAULT_BOUND_N)

    p = sub.add_parser("sweep", help="optimize over a parameter grid and write CSV")
    p.add_argument("--spec", help="JSON sweep spec (SweepSpec field names)")
    p.add_argument("--d-list", type=_float_list)
    p.add_argument("--tau-list", type=_float_list)
    p.add_argument("--delta-list", type=_float_list)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--out", help="output CSV (resumed if it exists)")
    p.add_argument("--workers", type=_count, default=None)
    p.add_argument("--nz", type=_count)
    p.add_argument("--step-divisor", type=positive)
    p.add_argument("--bound-n", type=_count)

    p = sub.add_parser("compare", help="Gaussian vs signal-shaped efficiency")
    p.add_argument("--d", type=positive, required=True)
    p.add_argument("--tau-list", type=_float_list, required=True)
    p.add_argument("--out", help="output CSV in the sweep schema")
    p.add_argument("--workers", type=_count, default=None)
    p.add_argument("--n-basis", type=_count, default=DEFAULT_BASIS)
    _grid_args(p)

    p = sub.add_parser("classify", help="protocol regime of a memory point")
    _memory_args(p)
    _control_args(p, required=False)
    _grid_args(p)
    p.add_argument("--c0-table", type=_float_list, metavar="D_LIST",
                   help="also print the ATS reference ratio C0 at these depths")
    return parser


def _load_config(path):
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("# config"):
        text = text[len("# config"):].strip()
    return json.loads(text)


def _explicit_keys(argv):
    """Destinations set on the command line itself."""
    parser = build_parser()
    _relax(parser)
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            action.default = argparse.SUPPRESS
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
    return set(vars(parser.parse_args(argv))) - {"command"}


def _relax(parser):
    """Drop required flags on every subcommand; returns what they were."""
    needed = {}
    for name, sub in _subparsers(parser).items():
        needed[name] = []
        for action in sub._actions:
            if action.required:
                action.required = False
                needed[name].append((action.dest,))
        for group in sub._mutually_exclusive_groups:
            if group.required:
                group.required = False
                needed[name].append(tuple(a.dest for a in group._group_actions))
    return needed


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def parse_args(argv):
    parser = build_parser()
    with_config = any(a == "--config" or a.startswith("--config=") for a in argv)
    needed = _relax(parser) if with_config else {}
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = _load_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if cfg.get("command", args.command) != args.command:
            parser.error(f"config is for command {cfg['command']!r}")
        # config values fill in anything not given explicitly on the command line
        given = _explicit_keys(argv)
        if given & {"theta", "theta_pi"}:
            cfg = {k: v for k, v in cfg.items() if k not in ("theta", "theta_pi")}
        for key, value in cfg.items():
            if key in ("command", "config"):
                continue
            if not hasattr(args, key):
                parser.error(f"unknown config key {key!r}")
            if key not in given:
                setattr(args, key, value)
    for dests in needed.get(args.command, ()):
        if all(getattr(args, k, None) is None for k in dests):
            opts = "/".join("--" + k.replace("_", "-") for k in dests)
            parser.error(f"{args.command}: {opts} is required")
    return parser, args


def _echo(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "verbose")}
    print("# config " + json.dumps(cfg, sort_keys=True))


def _grids(args):
    return GridSpec(int(args.nz), float(args.step_divisor))


def _theta(args):
    if args.theta_pi is not None:
        return args.theta_pi * math.pi
    return args.theta


def _memory(args):
    return MemoryParams(args.d, args.tau, args.delta, args.gamma_b)


def cmd_solve(args):
    m = _memory(args)
    g = ControlParams(_theta(args), args.delay, args.tau_ctrl or args.tau)
    grids = _grids(args)
    res = solve(m, g, grids)
    print(f"eta = {res.eta:.10f}")
    print(f"eta_total = {res.eta_total:.10f}")
    print(f"energy_residual = {energy_balance(res):.3e}")
    led = res.energy_ledger
    print(f"ledger input={led.input:.10f} transmitted={led.transmitted:.10f} "
          f"residual={led.residual:.10f} decay={led.decay:.10f}")
    print(f"tau_steps = {res.tgrid.n_steps}")
    print(f"grid_fingerprint = {grids.fingerprint}")
    if args.dump:
        dump_fields(res, args.dump)
        print(f"fields written to {args.dump}")


def cmd_bound(args):
    rep = bound_mod.bound_report(args.d, args.n)
    if args.square:
        print(f"eta_opt^2 = {rep.eta_opt_total:.6f}")
        print(f"eta_opt = {rep.eta_opt:.6f}")
    else:
        print(f"eta_opt = {rep.eta_opt:.6f}")
        print(f"eta_opt^2 = {rep.eta_opt_total:.6f}")
    print(f"grid_n = {rep.n}")
    print(f"richardson_delta = {rep.richardson_delta:.3e}")


def _print_opt(m, opt):
    g = opt.best_g
    print(f"theta = {g.theta:.6f} ({g.theta / math.pi:.4f} pi)")
    print(f"delay = {g.delay:.6f} ({g.delay / m.tau_sig:.4f} tau_sig)")
    print(f"tau_ctrl = {g.tau_ctrl:.6f} ({g.tau_ctrl / m.tau_sig:.4f} tau_sig)")
    print(f"eta = {opt.eta:.8f}")
    print(f"eta_opt = {opt.eta_opt:.8f}")
    print(f"eta_ratio = {opt.eta_ratio:.6f}" + ("  [exceeds bound]" if opt.exceeds_bound else ""))
    print(f"seed = {opt.seed_label}  evals = {opt.n_evals}  converged = {opt.converged}")


def cmd_optimize(args):
    m = _memory(args)
    grids = _grids(args)
    if args.theta_only:
        opt = optimize_theta_only(m, grids, bound_n=args.bound_n)
    else:
        opt = optimize_control(m, grids, bound_n=args.bound_n)
    _print_opt(m, opt)
    diag = classify(m, opt, grids=grids)
    print(f"label = {diag.label}  c_tilde = {diag.normalized_character:.4f}")


def _sweep_spec(args, mode=None):
    data = {}
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            data = json.load(fh)
    flags = {
        "d_values": getattr(args, "d_list", None),
        "tau_values": getattr(args, "tau_list", None),
        "delta_values": getattr(args, "delta_list", None),
        "mode": mode or getattr(args, "mode", None),
        "n_z": getattr(args, "nz", None),
        "step_divisor": getattr(args, "step_divisor", None),
        "bound_n": getattr(args, "bound_n", None),
        "output": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    data.setdefault("workers", default_workers())
    if "d_values" not in data or "tau_values" not in data:
        raise InvalidArgumentError("sweep needs d and tau lists (--spec or --d-list/--tau-list)")
    return SweepSpec.from_dict(data)


def _report_records(spec, records):
    if spec.output:
        print(f"wrote {len(records)} records to {spec.output}")
    else:
        sys.stdout.write(format_records(spec, records))


def cmd_sweep(args):
    spec = _sweep_spec(args)
    print(f"# points {spec.n_points}")
    _report_records(spec, run_sweep(spec))


def cmd_compare(args):
    spec = _sweep_spec(argparse.Namespace(
        d_list=[args.d], tau_list=sorted(args.tau_list), out=args.out, workers=args.workers,
        nz=args.nz, step_divisor=args.step_divisor,
    ), mode="compare_shapes")
    records = run_sweep(spec)
    print(f"{'tau_sig':>8} {'gaussian':>10} {'shaped':>10} {'eta_opt':>10}")
    for r in records:
        gauss = dict(kv.split("=", 1) for kv in r.reason.split(";")).get("gaussian_eta", "nan")
        print(f"{r.tau_sig:8.3f} {float(gauss):10.6f} {r.eta:10.6f} {r.eta_opt:10.6f}")
    if spec.output:
        print(f"wrote {len(records)} records to {spec.output}")


def cmd_classify(args):
    m = _memory(args)
    grids = _grids(args)
    theta = _theta(args)
    if theta is None:
        opt = optimize_control(m, grids)
    else:
        from .optimizer import OptResult, cached_eta_opt, objective

        g = ControlParams(theta, args.delay, args.tau_ctrl or args.tau)
        opt = OptResult(g, objective(m, g, grids), cached_eta_opt(m.d), 1, True, "given")
    diag = classify(m, opt, grids=grids)
    print(f"adiabaticity = {diag.adiabaticity:.6f}")
    print(f"effective_depth = {diag.effective_depth:.6f}")
    print(f"character_ratio = {diag.character_ratio:.6e}")
    print(f"c_tilde = {diag.normalized_character:.6f}")
    print(f"label = {diag.label}")
    print(f"flags = {','.join(diag.flags) or '-'}")
    if args.c0_table:
        for d, c0 in reference_table(args.c0_table, m.delta, grids).items():
            print(f"c0 d={d:g} {c0:.12e}")


COMMANDS = {
    "solve": cmd_solve,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "classify": cmd_classify,
}


def main(argv=None):
    parser, args = parse_args(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    _echo(args)
    try:
        COMMANDS[args.command](args)
    except InvalidArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(f"lambdamem: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"lambdamem: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0
