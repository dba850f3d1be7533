"""Command-line front end.

Subcommands: iv (device I-V trace), read (single paired read), and the
sweep family (sweep-size, sweep-wire, sweep-ron, sweep-ratio,
sweep-selector, sweep-linear). Every model constant can come from a
plain key=value config file; explicit flags override the file, which
overrides the built-in defaults. Unknown config keys are hard errors.
"""

import argparse
import math
import os
import sys

from .crossbar import CrossbarConfig, InvalidConfig
from .device import (
    DeviceParams,
    DeviceState,
    SelectorParams,
    SeriesSolveFailure,
    trace_iv,
)
from .readout import ReadError, read
from .solver import SolveOptions, SolverError
from . import sweep as sweeps

CONFIG_ENV = "XBARSIM_CONFIG"

# key: (type, default, help). None defaults mean "derived elsewhere".
CONFIG_KEYS = {
    "r_off": (float, 5e8, "high resistance state (ohm)"),
    "r_on": (float, 5e5, "low resistance state (ohm)"),
    "r_sense": (float, None, "sense resistor (ohm); default sqrt(r_on*r_off)"),
    "r_wire": (float, 5.0, "interconnect resistance per segment (ohm)"),
    "v_th": (float, 1.5, "switching threshold voltage (V)"),
    "alpha": (float, 2.5e8, "programming rate above threshold (1/(V*s))"),
    "beta": (float, 0.0, "programming rate below threshold (1/(V*s))"),
    "ratio": (float, 1e3, "r_off/r_on window held fixed by sweep-ron"),
    "gamma": (float, 1e-8, "selector conductance prefactor (A)"),
    "k": (float, 1.0, "selector nonlinearity multiplier"),
    "p": (float, 18.4, "selector nonlinearity base (1/V)"),
    "variant": (str, "rectifying", "cell variant: rectifying|linear|selector"),
    "n": (int, 64, "rows and columns of the square array"),
    "scheme": (str, "v2", "read scheme for single reads: v2|v3|ff"),
    "schemes": (str, "", "comma list of schemes for sweeps (empty: per-sweep default)"),
    "v_ws": (float, 1.0, "read voltage on the selected word line (V)"),
    "pattern": (str, "all_lrs", "stored bits: all_lrs|all_hrs|checkerboard|random"),
    "target": (str, "", "target cell as row,col (empty: worst case)"),
    "seed": (int, 0, "global seed for random patterns"),
    "v_tol": (float, 1e-9, "Newton voltage-update tolerance (V)"),
    "i_tol": (float, 1e-12, "Newton KCL residual tolerance (A)"),
    "max_iters": (int, 50, "Newton iteration cap"),
    "damping": (float, 1.0, "initial Newton step scale in (0,1]"),
    "jobs": (int, 1, "worker processes for sweep rows"),
    "amplitude": (float, 2.0, "iv drive amplitude, peak (V)"),
    "freq": (float, 1e7, "iv drive frequency (Hz)"),
    "cycles": (int, 1, "iv drive cycles"),
    "steps_per_cycle": (int, 10000, "iv integration steps per cycle"),
    "w0": (float, 0.0, "iv initial state in [0,1]"),
    "values": (str, "", "comma list overriding the sweep axis grid"),
}


class CliError(Exception):
    pass


def _parse_value(key, raw, where):
    kind = CONFIG_KEYS[key][0]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise CliError(f"{where}: bad value for {key!r}: {raw!r}") from exc


def load_config_file(path) -> dict:
    """Parse a key=value config file; unknown keys are hard errors."""
    values = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise CliError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw, f"{path}:{lineno}")
    return values


def effective_config(args) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = {key: default for key, (_, default, _) in CONFIG_KEYS.items()}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        cfg.update(load_config_file(path))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    return cfg


def _device(cfg) -> DeviceParams:
    return DeviceParams(
        r_off=cfg["r_off"],
        r_on=cfg["r_on"],
        v_th=cfg["v_th"],
        alpha=cfg["alpha"],
        beta=cfg["beta"],
        rectifying=cfg["variant"] != "linear",
    )


def _selector(cfg) -> SelectorParams | None:
    if cfg["variant"] != "selector":
        return None
    return SelectorParams(gamma=cfg["gamma"], k=cfg["k"], p=cfg["p"])


def _options(cfg) -> SolveOptions:
    return SolveOptions(
        max_iters=cfg["max_iters"],
        v_tol=cfg["v_tol"],
        i_tol=cfg["i_tol"],
        damping=cfg["damping"],
    )


def _target(cfg):
    if not cfg["target"]:
        return None
    try:
        row, col = (int(part) for part in cfg["target"].split(","))
    except ValueError as exc:
        raise CliError(f"bad target {cfg['target']!r}, expected row,col") from exc
    return (row, col)


def _crossbar_config(cfg) -> CrossbarConfig:
    return CrossbarConfig(
        n_rows=cfg["n"],
        n_cols=cfg["n"],
        r_wire=cfg["r_wire"],
        pattern=cfg["pattern"],
        pattern_seed=cfg["seed"],
        target=_target(cfg),
        scheme=cfg["scheme"],
        v_ws=cfg["v_ws"],
        r_sense=cfg["r_sense"],
    )


def _schemes(cfg):
    if not cfg["schemes"]:
        return None
    return tuple(s.strip() for s in cfg["schemes"].split(",") if s.strip())


def _values(cfg, kind=float):
    if not cfg["values"]:
        return None
    try:
        return tuple(kind(v) for v in cfg["values"].split(","))
    except ValueError as exc:
        raise CliError(f"bad values list {cfg['values']!r}") from exc


def _sweep_spec(cfg, values_kind=float) -> sweeps.SweepSpec:
    return sweeps.SweepSpec(
        values=_values(cfg, values_kind),
        schemes=_schemes(cfg),
        device=_device(cfg),
        selector=SelectorParams(gamma=cfg["gamma"], k=cfg["k"], p=cfg["p"]),
        n=cfg["n"],
        r_wire=cfg["r_wire"],
        v_ws=cfg["v_ws"],
        pattern=cfg["pattern"],
        seed=cfg["seed"],
        options=_options(cfg),
        jobs=cfg["jobs"],
    )


def _cmd_iv(args, cfg) -> int:
    trace = trace_iv(
        _device(cfg),
        DeviceState(cfg["w0"]),
        amplitude=cfg["amplitude"],
        frequency=cfg["freq"],
        cycles=cfg["cycles"],
        steps_per_cycle=cfg["steps_per_cycle"],
    )
    lines = ["t,v,i,w"]
    for t, v, i, w in zip(trace.t, trace.v, trace.i, trace.w):
        lines.append(f"{t:.17g},{v:.17g},{i:.17g},{w:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"iv: {len(trace)} samples, final w={trace.w[-1]:.6f},"
        f" peak |i|={float(abs(trace.i).max()):.6e} A",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return 0


def _cmd_read(args, cfg) -> int:
    result = read(_crossbar_config(cfg), _device(cfg), _options(cfg), _selector(cfg))
    print(result)
    if args.out:
        device = _device(cfg)
        row = sweeps.SweepRow(
            scheme=cfg["scheme"],
            variant=cfg["variant"],
            n=cfg["n"],
            r_wire=cfg["r_wire"],
            r_on=device.r_on,
            r_off=device.r_off,
            ratio=device.ratio,
            k=cfg["k"] if cfg["variant"] == "selector" else math.nan,
            v_out_lrs=result.v_out_lrs,
            v_out_hrs=result.v_out_hrs,
            read_margin=result.read_margin,
            power_lrs=result.power_lrs,
            power_hrs=result.power_hrs,
        )
        sweeps.write_csv([row], args.out)
    return 0


def _sweep_command(name, runner, axis, values_kind=float):
    def handler(args, cfg) -> int:
        spec = _sweep_spec(cfg, values_kind)
        rows = runner(spec, cfg)
        out = args.out or f"{name}.csv"
        sweeps.write_csv(rows, out)
        failed = [row for row in rows if row.error]
        print(f"{name}: wrote {len(rows)} rows to {out}" + (
            f" ({len(failed)} failed)" if failed else ""
        ))
        if args.plot_script:
            script = sweeps.plot_script(out, axis, f"{name} of {out}")
            with open(args.plot_script, "w", encoding="ascii", newline="\n") as fh:
                fh.write(script)
        return 1 if failed else 0

    return handler


_SWEEPS = {
    "sweep-size": (lambda spec, cfg: sweeps.sweep_size(spec), "n", int),
    "sweep-wire": (lambda spec, cfg: sweeps.sweep_wire(spec), "r_wire", float),
    "sweep-ron": (
        lambda spec, cfg: sweeps.sweep_ron(spec, ratio=cfg["ratio"]),
        "r_on",
        float,
    ),
    "sweep-ratio": (lambda spec, cfg: sweeps.sweep_ratio(spec), "ratio", float),
    "sweep-selector": (lambda spec, cfg: sweeps.sweep_selector(spec), "k", float),
    "sweep-linear": (
        lambda spec, cfg: sweeps.sweep_linear_comparison(spec),
        "n",
        int,
    ),
}

_FLAG_KEYS = {
    "iv": (
        "r_off", "r_on", "v_th", "alpha", "beta", "variant",
        "amplitude", "freq", "cycles", "steps_per_cycle", "w0",
    ),
    "read": (
        "r_off", "r_on", "r_sense", "r_wire", "v_th", "alpha", "beta",
        "gamma", "k", "p", "variant", "n", "scheme", "v_ws", "pattern",
        "target", "seed", "v_tol", "i_tol", "max_iters", "damping",
    ),
    "sweep": (
        "r_off", "r_on", "r_wire", "v_th", "alpha", "beta", "ratio",
        "gamma", "k", "p", "n", "schemes", "v_ws", "pattern", "seed",
        "v_tol", "i_tol", "max_iters", "damping", "jobs", "values",
    ),
}


def _add_config_flags(parser, keys):
    for key in keys:
        kind, default, text = CONFIG_KEYS[key]
        parser.add_argument(
            "--" + key.replace("_", "-"),
            dest=key,
            type=kind,
            default=None,
            help=f"{text} (default: {default if default is not None else 'auto'})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xbarsim",
        description=(
            "Crossbar memory read simulator: device traces, single reads"
            " and parameter sweeps with sneak-path currents resolved."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=None,
        help=f"key=value config file (or set ${CONFIG_ENV})",
    )
    common.add_argument("--out", default=None, help="output file path")

    sub = parser.add_subparsers(dest="command")

    p_iv = sub.add_parser(
        "iv", parents=[common], help="trace the cell I-V loop under a sine drive"
    )
    _add_config_flags(p_iv, _FLAG_KEYS["iv"])
    p_iv.set_defaults(handler=_cmd_iv)

    p_read = sub.add_parser(
        "read", parents=[common], help="run one paired LRS/HRS read"
    )
    _add_config_flags(p_read, _FLAG_KEYS["read"])
    p_read.set_defaults(handler=_cmd_read)

    for name, (runner, axis, kind) in _SWEEPS.items():
        p_sweep = sub.add_parser(
            name, parents=[common], help=f"sweep {axis} and write a CSV"
        )
        _add_config_flags(p_sweep, _FLAG_KEYS["sweep"])
        p_sweep.add_argument(
            "--plot-script",
            default=None,
            help="also write a gnuplot script for the sweep figures",
        )
        p_sweep.set_defaults(handler=_sweep_command(name, runner, axis, kind))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 2
    try:
        cfg = effective_config(args)
        return args.handler(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidConfig, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ReadError, SolverError, SeriesSolveFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
