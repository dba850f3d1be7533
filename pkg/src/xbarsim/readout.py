"""Paired LRS/HRS read solves, read margin and read power.

A read means: solve the same array twice, once with the target cell in
its low-resistance state and once in its high-resistance state, take the
sense-node voltage from each, and normalize the difference by the drive
voltage. Power is accounted at the sources, which by conservation equals
the total dissipation in wires, cells and leak paths.
"""

from dataclasses import dataclass

import numpy as np

from .crossbar import CrossbarConfig, DeviceParams, InvalidConfig, Network, build
from .device import SelectorParams
from .solver import LEAK_G, Solution, SolveOptions, SolverError, solve


class ReadError(RuntimeError):
    """A read failed; target_state says which of the two solves broke."""

    def __init__(self, target_state: str, cause: Exception):
        super().__init__(f"{target_state} solve failed: {cause}")
        self.target_state = target_state


@dataclass(frozen=True)
class ReadResult:
    """Outputs of one paired read."""

    v_out_lrs: float
    v_out_hrs: float
    read_margin: float
    power_lrs: float
    power_hrs: float
    iterations: tuple

    def __str__(self):
        return (
            f"RM={self.read_margin:.4f}"
            f" v_out_lrs={self.v_out_lrs:.6f}"
            f" v_out_hrs={self.v_out_hrs:.6f}"
            f" power_lrs={self.power_lrs:.6e}"
            f" power_hrs={self.power_hrs:.6e}"
        )


def power(solution: Solution, network: Network) -> float:
    """Total power delivered by all voltage sources (W).

    Computed as sum(V_source * I_delivered); matches the dissipation in
    every branch plus the leak paths to within the solver residual.
    """
    a = np.concatenate([network.wire_a, network.cell_a])
    b = np.concatenate([network.wire_b, network.cell_b])
    out = np.zeros(network.n_nodes)
    np.add.at(out, a, solution.branch_currents)
    np.add.at(out, b, -solution.branch_currents)
    out += LEAK_G * solution.node_voltages
    delivered = out[network.source_nodes]
    return float(np.dot(network.source_values, delivered))


def read(
    config: CrossbarConfig,
    device: DeviceParams,
    options: SolveOptions | None = None,
    selector: SelectorParams | None = None,
) -> ReadResult:
    """Run the LRS and HRS solves for one configuration and summarize."""
    config.validate()
    if config.v_ws <= 0.0:
        raise InvalidConfig("read margin needs a positive drive voltage")
    outputs = {}
    powers = {}
    iters = {}
    for state in ("lrs", "hrs"):
        network = build(config, device, state, selector=selector)
        try:
            solution = solve(network, options)
        except SolverError as exc:
            raise ReadError(state, exc) from exc
        outputs[state] = float(solution.node_voltages[network.sense_node])
        powers[state] = power(solution, network)
        iters[state] = solution.iterations
    return ReadResult(
        v_out_lrs=outputs["lrs"],
        v_out_hrs=outputs["hrs"],
        read_margin=(outputs["lrs"] - outputs["hrs"]) / config.v_ws,
        power_lrs=powers["lrs"],
        power_hrs=powers["hrs"],
        iterations=(iters["lrs"], iters["hrs"]),
    )
