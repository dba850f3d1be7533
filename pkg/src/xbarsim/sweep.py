"""Declarative parameter sweeps over crossbar read experiments.

Each sweep_* function maps one axis (array size, interconnect resistance,
r_on, resistance window, selector nonlinearity) to a list of SweepRow
records, one read per (axis value, scheme) pair, and can fan rows out
over worker processes. Rows are independent, collected in axis order,
and reproducible bit-for-bit for a fixed seed.
"""

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .crossbar import CrossbarConfig, SCHEMES
from .device import DeviceParams, SelectorParams
from .readout import ReadError, read
from .solver import SolveOptions, SolverError

SIZE_GRID = (4, 8, 16, 32, 64, 128)
WIRE_GRID = (5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0)
RON_GRID = (5e3, 5e4, 5e5, 5e6)
RATIO_GRID = (1e1, 1e2, 1e3, 1e4)
K_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0)

CSV_HEADER = (
    "scheme,variant,n,r_wire,r_on,r_off,ratio,k,"
    "v_out_lrs,v_out_hrs,read_margin,power_lrs,power_hrs"
)


@dataclass(frozen=True)
class SweepSpec:
    """Shared knobs for a sweep; values=None picks the axis default grid."""

    values: tuple | None = None
    schemes: tuple | None = None
    device: DeviceParams = DeviceParams()
    selector: SelectorParams = SelectorParams()
    n: int = 64
    r_wire: float = 5.0
    v_ws: float = 1.0
    pattern: str = "all_lrs"
    seed: int = 0
    options: SolveOptions | None = None
    jobs: int = 1


@dataclass
class SweepRow:
    """One read outcome; result fields are NaN when the row failed."""

    scheme: str
    variant: str
    n: int
    r_wire: float
    r_on: float
    r_off: float
    ratio: float
    k: float
    v_out_lrs: float = math.nan
    v_out_hrs: float = math.nan
    read_margin: float = math.nan
    power_lrs: float = math.nan
    power_hrs: float = math.nan
    error: str = field(default="", compare=False)


@dataclass(frozen=True)
class _RowTask:
    scheme: str
    variant: str
    n: int
    r_wire: float
    device: DeviceParams
    selector: SelectorParams | None
    v_ws: float
    pattern: str
    pattern_seed: int
    options: SolveOptions | None
    k: float


def _execute(task: _RowTask) -> SweepRow:
    row = SweepRow(
        scheme=task.scheme,
        variant=task.variant,
        n=task.n,
        r_wire=task.r_wire,
        r_on=task.device.r_on,
        r_off=task.device.r_off,
        ratio=task.device.ratio,
        k=task.k,
    )
    config = CrossbarConfig(
        n_rows=task.n,
        n_cols=task.n,
        r_wire=task.r_wire,
        pattern=task.pattern,
        pattern_seed=task.pattern_seed,
        scheme=task.scheme,
        v_ws=task.v_ws,
    )
    try:
        res = read(config, task.device, task.options, selector=task.selector)
    except (ReadError, SolverError, ValueError) as exc:
        row.error = str(exc)
        return row
    row.v_out_lrs = res.v_out_lrs
    row.v_out_hrs = res.v_out_hrs
    row.read_margin = res.read_margin
    row.power_lrs = res.power_lrs
    row.power_hrs = res.power_hrs
    return row


def _run(tasks, jobs) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        rows = [_execute(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_execute, tasks))
    for row in rows:
        if row.error:
            print(
                f"sweep row failed ({row.scheme}, n={row.n}, r_on={row.r_on:g},"
                f" k={row.k:g}): {row.error}",
                file=sys.stderr,
            )
    return rows


def _tasks(spec, axis_values, build_one):
    """Expand (value, scheme) grid into row tasks, seeding patterns per row."""
    values = tuple(axis_values)
    if not values:
        raise ValueError("sweep needs at least one axis value")
    steps = [b - a for a, b in zip(values, values[1:])]
    if steps and not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
        raise ValueError(f"axis values must be strictly monotone, got {values}")
    schemes = tuple(spec.schemes) if spec.schemes else SCHEMES
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    tasks = []
    for value in values:
        for scheme in schemes:
            tasks.append(build_one(value, scheme, len(tasks)))
    return tasks


def _row_seed(spec, index):
    return spec.seed * 1_000_003 + index


def sweep_size(spec: SweepSpec | None = None) -> list:
    """Read margin and power versus square array size."""
    spec = spec or SweepSpec()
    sizes = SIZE_GRID if spec.values is None else tuple(spec.values)

    def one(n, scheme, idx):
        return _RowTask(
            scheme=scheme,
            variant="rectifying" if spec.device.rectifying else "linear",
            n=int(n),
            r_wire=spec.r_wire,
            device=spec.device,
            selector=None,
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=math.nan,
        )

    return _run(_tasks(spec, sizes, one), spec.jobs)


def sweep_wire(spec: SweepSpec | None = None) -> list:
    """Read margin and power versus per-segment interconnect resistance."""
    spec = spec or SweepSpec(schemes=("v2",))
    values = WIRE_GRID if spec.values is None else tuple(spec.values)

    def one(r_wire, scheme, idx):
        return _RowTask(
            scheme=scheme,
            variant="rectifying" if spec.device.rectifying else "linear",
            n=spec.n,
            r_wire=float(r_wire),
            device=spec.device,
            selector=None,
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=math.nan,
        )

    return _run(_tasks(spec, values, one), spec.jobs)


def sweep_ron(spec: SweepSpec | None = None, ratio: float = 1e3) -> list:
    """Sweep r_on at a fixed resistance window; r_off and the sense resistor
    track each value (r_off = ratio * r_on, r_sense = sqrt(r_on * r_off))."""
    spec = spec or SweepSpec(schemes=("v2",))
    values = RON_GRID if spec.values is None else tuple(spec.values)

    def one(r_on, scheme, idx):
        device = replace(spec.device, r_on=float(r_on), r_off=float(r_on) * ratio)
        return _RowTask(
            scheme=scheme,
            variant="rectifying" if device.rectifying else "linear",
            n=spec.n,
            r_wire=spec.r_wire,
            device=device,
            selector=None,
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=math.nan,
        )

    return _run(_tasks(spec, values, one), spec.jobs)


def sweep_ratio(spec: SweepSpec | None = None) -> list:
    """Sweep the resistance window (equal to the rectification ratio in this
    model) at fixed r_on; r_off and the sense resistor track each value."""
    spec = spec or SweepSpec()
    values = RATIO_GRID if spec.values is None else tuple(spec.values)

    def one(ratio, scheme, idx):
        device = replace(spec.device, r_off=spec.device.r_on * float(ratio))
        return _RowTask(
            scheme=scheme,
            variant="rectifying" if device.rectifying else "linear",
            n=spec.n,
            r_wire=spec.r_wire,
            device=device,
            selector=None,
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=math.nan,
        )

    return _run(_tasks(spec, values, one), spec.jobs)


def sweep_selector(spec: SweepSpec | None = None) -> list:
    """Sweep the selector nonlinearity k for selector+resistor cells."""
    spec = spec or SweepSpec()
    values = K_GRID if spec.values is None else tuple(spec.values)

    def one(k, scheme, idx):
        return _RowTask(
            scheme=scheme,
            variant="selector",
            n=spec.n,
            r_wire=spec.r_wire,
            device=spec.device,
            selector=replace(spec.selector, k=float(k)),
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=float(k),
        )

    return _run(_tasks(spec, values, one), spec.jobs)


def sweep_linear_comparison(spec: SweepSpec | None = None) -> list:
    """Size sweep run for both the linear and the rectifying device so the
    two variants can be differenced row by row."""
    spec = spec or SweepSpec()
    sizes = SIZE_GRID if spec.values is None else tuple(spec.values)

    def one(n, scheme, idx):
        return _RowTask(
            scheme=scheme,
            variant="linear",
            n=int(n),
            r_wire=spec.r_wire,
            device=replace(spec.device, rectifying=False),
            selector=None,
            v_ws=spec.v_ws,
            pattern=spec.pattern,
            pattern_seed=_row_seed(spec, idx),
            options=spec.options,
            k=math.nan,
        )

    tasks = _tasks(spec, sizes, one)
    tasks += [
        replace(t, variant="rectifying", device=replace(t.device, rectifying=True))
        for t in tasks
    ]
    return _run(tasks, spec.jobs)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def rows_to_csv(rows) -> str:
    """Render rows under the fixed header at full double precision."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.scheme,
                    r.variant,
                    r.n,
                    r.r_wire,
                    r.r_on,
                    r.r_off,
                    r.ratio,
                    r.k,
                    r.v_out_lrs,
                    r.v_out_hrs,
                    r.read_margin,
                    r.power_lrs,
                    r.power_hrs,
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(rows_to_csv(rows))


_AXIS_COLUMNS = {"n": 3, "r_wire": 4, "r_on": 5, "ratio": 7, "k": 8}


def plot_script(csv_path: str, axis: str, title: str) -> str:
    """Gnuplot commands that chart read margin and power against one axis."""
    col = _AXIS_COLUMNS[axis] + 1  # gnuplot columns are 1-based
    lines = [
        f"# {title}",
        "set datafile separator ','",
        "set key outside",
        "set logscale x",
        f"set xlabel '{axis}'",
        "set ylabel 'read margin'",
        "set term push",
    ]
    margin = ", ".join(
        f"'{csv_path}' using (strcol(1) eq '{s}' ? ${col} : NaN):11 "
        f"with linespoints title 'RM {s}'"
        for s in SCHEMES
    )
    power = ", ".join(
        f"'{csv_path}' using (strcol(1) eq '{s}' ? ${col} : NaN):12 "
        f"with linespoints title 'P(lrs) {s}'"
        for s in SCHEMES
    )
    lines.append(f"plot {margin}")
    lines.append("pause -1 'read margin: press enter for power'")
    lines.append("set ylabel 'power (W)'")
    lines.append("set logscale y")
    lines.append(f"plot {power}")
    lines.append("pause -1 'done'")
    return "\n".join(lines) + "\n"
