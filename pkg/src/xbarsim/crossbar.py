"""Crossbar network construction.

Builds the resistive-network graph of an n_rows x n_cols crossbar: one
interconnect ladder per word line and bit line, a cell at every
crosspoint, bias sources according to the selected read scheme, and a
sense resistor terminating the selected bit line.

Geometry conventions: word lines run horizontally and are driven from
the left edge; bit lines run vertically and terminate at the bottom,
where the selected one meets the sense resistor. A word line has one
wire segment ahead of each crosspoint (n_cols segments from its driver);
a bit line has one behind each crosspoint (n_rows segments down to its
terminal). With r_wire = 0 every line collapses to a single electrical
node, which keeps small test networks exactly equivalent to their
ideal-line analytic models.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .device import (
    DeviceParams,
    SelectorParams,
    memristor_current,
    memristor_conductance,
    series_current,
    series_conductance,
    series_current_and_conductance,
)

LRS = "lrs"
HRS = "hrs"
SCHEMES = ("v2", "v3", "ff")
PATTERNS = ("all_lrs", "all_hrs", "checkerboard", "random")


class InvalidConfig(ValueError):
    """A crossbar configuration violates its preconditions."""


def sense_resistance(r_on: float, r_off: float) -> float:
    """Sense resistor value that maximizes read margin: sqrt(r_on * r_off)."""
    if not (r_off >= r_on > 0.0):
        raise InvalidConfig(
            f"need r_off >= r_on > 0, got r_on={r_on}, r_off={r_off}"
        )
    return math.sqrt(r_on * r_off)


@dataclass(frozen=True, eq=False)
class CrossbarConfig:
    """Array geometry, stored data, read scheme and biasing for one read."""

    n_rows: int = 64
    n_cols: int = 64
    r_wire: float = 5.0
    pattern: object = "all_lrs"  # pattern name or explicit bool array (True = LRS)
    pattern_seed: int = 0
    target: tuple | None = None  # None selects the worst-case cell
    scheme: str = "v2"
    v_ws: float = 1.0
    r_sense: float | None = None  # None derives sqrt(r_on * r_off) at build time

    def validate(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise InvalidConfig(
                f"array must be at least 1x1, got {self.n_rows}x{self.n_cols}"
            )
        if self.r_wire < 0.0:
            raise InvalidConfig(f"r_wire must be nonnegative, got {self.r_wire}")
        if self.v_ws < 0.0:
            raise InvalidConfig(f"v_ws must be nonnegative, got {self.v_ws}")
        if self.r_sense is not None and self.r_sense <= 0.0:
            raise InvalidConfig(f"r_sense must be positive, got {self.r_sense}")
        if self.scheme not in SCHEMES:
            raise InvalidConfig(f"unknown read scheme {self.scheme!r}")
        if isinstance(self.pattern, str) and self.pattern not in PATTERNS:
            raise InvalidConfig(f"unknown pattern {self.pattern!r}")
        if self.target is not None:
            r, c = self.target
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise InvalidConfig(
                    f"target {self.target} outside {self.n_rows}x{self.n_cols} array"
                )


def worst_case_target(config: CrossbarConfig) -> tuple:
    """Cell farthest from both the word-line driver and the sense node."""
    return (0, config.n_cols - 1)


def pattern_bits(config: CrossbarConfig) -> np.ndarray:
    """Stored-bit map as a bool array, True for LRS."""
    shape = (config.n_rows, config.n_cols)
    if isinstance(config.pattern, np.ndarray):
        bits = np.asarray(config.pattern, dtype=bool)
        if bits.shape != shape:
            raise InvalidConfig(
                f"pattern array shape {bits.shape} does not match {shape}"
            )
        return bits.copy()
    if config.pattern == "all_lrs":
        return np.ones(shape, dtype=bool)
    if config.pattern == "all_hrs":
        return np.zeros(shape, dtype=bool)
    if config.pattern == "checkerboard":
        i, j = np.indices(shape)
        return (i + j) % 2 == 0
    if config.pattern == "random":
        rng = np.random.default_rng(config.pattern_seed)
        return rng.random(shape) < 0.5
    raise InvalidConfig(f"unknown pattern {config.pattern!r}")


class MemristorBank:
    """All memristor cells of one network, evaluated as arrays."""

    def __init__(self, params: DeviceParams, w: np.ndarray):
        self.params = params
        self.w = np.asarray(w, dtype=float)

    def __len__(self):
        return self.w.size

    def current(self, dv):
        return memristor_current(self.params, self.w, dv)

    def conductance(self, dv):
        return memristor_conductance(self.params, self.w, dv)

    def current_and_conductance(self, dv):
        return self.current(dv), self.conductance(dv)


class SelectorBank:
    """All selector+resistor cells of one network, evaluated as arrays."""

    def __init__(self, selector: SelectorParams, r_series: np.ndarray):
        self.selector = selector
        self.r_series = np.asarray(r_series, dtype=float)

    def __len__(self):
        return self.r_series.size

    def current(self, dv):
        return series_current(self.selector, self.r_series, dv)

    def conductance(self, dv):
        return series_conductance(self.selector, self.r_series, dv)

    def current_and_conductance(self, dv):
        return series_current_and_conductance(self.selector, self.r_series, dv)


@dataclass(eq=False)
class Network:
    """Flat node/branch description of one crossbar read setup.

    Branches come in two groups: linear wire branches (interconnect
    segments plus the sense resistor, stored as conductances) and the
    nonlinear cell population. Sources are (node, voltage) stamps; the
    ground reference is one of them. Built networks are treated as
    immutable by the solver.
    """

    n_nodes: int
    wire_a: np.ndarray
    wire_b: np.ndarray
    wire_g: np.ndarray
    cell_a: np.ndarray
    cell_b: np.ndarray
    cells: object
    source_nodes: np.ndarray
    source_values: np.ndarray
    ground: int
    sense_node: int
    linear_guess_g: float
    # Layout handles for inspection and tests.
    wl_nodes: np.ndarray = field(repr=False, default=None)
    bl_nodes: np.ndarray = field(repr=False, default=None)
    wl_drivers: np.ndarray = field(repr=False, default=None)
    bl_terminals: np.ndarray = field(repr=False, default=None)
    target: tuple = (0, 0)
    scheme: str = "v2"
    r_sense: float = 0.0
    v_ws: float = 0.0

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_wires(self) -> int:
        return self.wire_g.size

    def node_name(self, idx: int) -> str:
        if idx == self.ground:
            return "gnd"
        hit = np.argwhere(self.wl_nodes == idx)
        if hit.size:
            return f"wl[{hit[0][0]},{hit[0][1]}]"
        hit = np.argwhere(self.bl_nodes == idx)
        if hit.size:
            return f"bl[{hit[0][0]},{hit[0][1]}]"
        hit = np.argwhere(self.wl_drivers == idx)
        if hit.size:
            return f"wl_drv[{hit[0][0]}]"
        hit = np.argwhere(self.bl_terminals == idx)
        if hit.size:
            return f"bl_term[{hit[0][0]}]"
        return f"n{idx}"

    def adjacency_listing(self) -> str:
        """Text dump of every branch and source stamp, for debugging."""
        lines = []
        for a, b, g in zip(self.wire_a, self.wire_b, self.wire_g):
            lines.append(
                f"wire {self.node_name(int(a))} -- {self.node_name(int(b))}"
                f" g={g:.6e} S"
            )
        for a, b in zip(self.cell_a, self.cell_b):
            lines.append(
                f"cell {self.node_name(int(a))} -> {self.node_name(int(b))}"
            )
        for n, v in zip(self.source_nodes, self.source_values):
            lines.append(f"source {self.node_name(int(n))} = {v:.6e} V")
        return "\n".join(lines)


def build(
    config: CrossbarConfig,
    device: DeviceParams,
    target_state: str,
    selector: SelectorParams | None = None,
) -> Network:
    """Assemble the network for one read of the target cell.

    target_state fixes the state of the cell under read ("lrs" or "hrs");
    every other cell takes its state from the stored pattern. Passing a
    SelectorParams switches every crosspoint to a selector in series with
    the device's r_on/r_off resistance instead of a memristor.
    """
    config.validate()
    if target_state not in (LRS, HRS):
        raise InvalidConfig(f"target_state must be 'lrs' or 'hrs', got {target_state!r}")
    rows, cols = config.n_rows, config.n_cols
    tr, tc = config.target if config.target is not None else worst_case_target(config)
    if not (0 <= tr < rows and 0 <= tc < cols):
        raise InvalidConfig(f"target ({tr}, {tc}) outside {rows}x{cols} array")

    bits = pattern_bits(config)
    bits[tr, tc] = target_state == LRS
    r_sense = (
        config.r_sense
        if config.r_sense is not None
        else sense_resistance(device.r_on, device.r_off)
    )

    if config.r_wire > 0.0:
        wl_nodes = np.arange(rows * cols).reshape(rows, cols)
        bl_nodes = rows * cols + np.arange(rows * cols).reshape(rows, cols)
        wl_drivers = 2 * rows * cols + np.arange(rows)
        bl_terminals = 2 * rows * cols + rows + np.arange(cols)
        ground = 2 * rows * cols + rows + cols
        g_seg = 1.0 / config.r_wire
        # Word ladders: driver -> first crosspoint -> ... -> last crosspoint.
        word_a = np.concatenate([wl_drivers[:, None], wl_nodes[:, :-1]], axis=1)
        # Bit ladders: first crosspoint -> ... -> last crosspoint -> terminal.
        bit_b = np.concatenate([bl_nodes[1:, :], bl_terminals[None, :]], axis=0)
        wire_a = np.concatenate(
            [word_a.ravel(), bl_nodes.ravel(), [bl_terminals[tc]]]
        )
        wire_b = np.concatenate(
            [wl_nodes.ravel(), bit_b.ravel(), [ground]]
        )
        wire_g = np.concatenate(
            [np.full(2 * rows * cols, g_seg), [1.0 / r_sense]]
        )
    else:
        # Ideal lines: each line is one node.
        wl_line = np.arange(rows)
        bl_line = rows + np.arange(cols)
        ground = rows + cols
        wl_nodes = np.broadcast_to(wl_line[:, None], (rows, cols)).copy()
        bl_nodes = np.broadcast_to(bl_line[None, :], (rows, cols)).copy()
        wl_drivers = wl_line
        bl_terminals = bl_line
        wire_a = np.array([bl_terminals[tc]])
        wire_b = np.array([ground])
        wire_g = np.array([1.0 / r_sense])

    cell_a = wl_nodes.ravel()
    cell_b = bl_nodes.ravel()

    src_nodes = [int(wl_drivers[tr])]
    src_values = [config.v_ws]
    if config.scheme == "v2":
        word_bias = bit_bias = config.v_ws / 2.0
    elif config.scheme == "v3":
        word_bias = config.v_ws / 3.0
        bit_bias = 2.0 * config.v_ws / 3.0
    else:  # ff: unselected lines float
        word_bias = bit_bias = None
    if word_bias is not None:
        for i in range(rows):
            if i != tr:
                src_nodes.append(int(wl_drivers[i]))
                src_values.append(word_bias)
        for j in range(cols):
            if j != tc:
                src_nodes.append(int(bl_terminals[j]))
                src_values.append(bit_bias)
    src_nodes.append(int(ground))
    src_values.append(0.0)

    if selector is None:
        bank = MemristorBank(device, bits.astype(float).ravel())
    else:
        bank = SelectorBank(
            selector, np.where(bits, device.r_on, device.r_off).ravel()
        )

    return Network(
        n_nodes=int(ground) + 1,
        wire_a=np.asarray(wire_a, dtype=np.intp),
        wire_b=np.asarray(wire_b, dtype=np.intp),
        wire_g=np.asarray(wire_g, dtype=float),
        cell_a=np.asarray(cell_a, dtype=np.intp),
        cell_b=np.asarray(cell_b, dtype=np.intp),
        cells=bank,
        source_nodes=np.asarray(src_nodes, dtype=np.intp),
        source_values=np.asarray(src_values, dtype=float),
        ground=int(ground),
        sense_node=int(bl_terminals[tc]),
        linear_guess_g=1.0 / sense_resistance(device.r_on, device.r_off),
        wl_nodes=wl_nodes,
        bl_nodes=bl_nodes,
        wl_drivers=np.asarray(wl_drivers, dtype=np.intp),
        bl_terminals=np.asarray(bl_terminals, dtype=np.intp),
        target=(tr, tc),
        scheme=config.scheme,
        r_sense=r_sense,
        v_ws=config.v_ws,
    )
