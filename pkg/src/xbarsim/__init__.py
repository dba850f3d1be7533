"""Crossbar memory read simulator.

Computes read margin and read power of resistive crossbar arrays under
sneak-path currents, for rectifying/linear memristor cells and
selector+resistor cells, across read schemes, array sizes and device
parameter sweeps.
"""

from .crossbar import (
    CrossbarConfig,
    InvalidConfig,
    Network,
    build,
    pattern_bits,
    sense_resistance,
    worst_case_target,
)
from .device import (
    CellModel,
    DeviceParams,
    DeviceState,
    IVTrace,
    LinearMemristor,
    RectifyingMemristor,
    SelectorParams,
    SelectorPlusResistor,
    SeriesSolveFailure,
    cell_conductance,
    cell_current,
    memristance,
    step_state,
    trace_iv,
)
from .readout import ReadError, ReadResult, power, read
from .solver import (
    NonConvergence,
    SingularSystem,
    Solution,
    SolveOptions,
    SolverError,
    linearized_initial_guess,
    solve,
)
from .sweep import (
    SweepRow,
    SweepSpec,
    sweep_linear_comparison,
    sweep_ratio,
    sweep_ron,
    sweep_selector,
    sweep_size,
    sweep_wire,
    write_csv,
)

__version__ = "0.1.0"
