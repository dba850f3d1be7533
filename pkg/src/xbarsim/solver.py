"""DC operating-point solver for crossbar networks.

Newton-Raphson over the nodal equations: source-stamped nodes are
eliminated (their voltages are known), every remaining node contributes
one KCL equation, and each nonlinear cell is relinearized from its
current/conductance at every iteration. The Jacobian is factored with a
sparse direct LU each step; a residual-monitored step halving handles
the steep selector characteristics.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .crossbar import Network

# Tiny conductance to ground on every node. Keeps floating lines (F-F
# scheme) away from exact singularity without perturbing voltages above
# one part in 1e6.
LEAK_G = 1e-15

_MAX_HALVINGS = 8


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    """Newton iteration exhausted max_iters without meeting tolerances."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"no convergence after {iterations} iterations"
            f" (KCL residual {residual:.3e} A)"
        )
        self.iterations = iterations
        self.residual = residual


class SingularSystem(SolverError):
    """The nodal matrix could not be factored."""


@dataclass
class SolveOptions:
    """Newton controls; damping is the initial step scale in (0, 1]."""

    max_iters: int = 50
    v_tol: float = 1e-9
    i_tol: float = 1e-12
    damping: float = 1.0
    initial_guess: object = "linearized"  # "linearized", "zero", or a node vector

    def validate(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.v_tol <= 0.0 or self.i_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class Solution:
    """Converged operating point: full node-voltage and branch-current vectors.

    Branch currents are ordered wires first, then cells, matching the
    network's branch arrays.
    """

    node_voltages: np.ndarray
    branch_currents: np.ndarray
    iterations: int
    converged: bool


class _Plan:
    """Precomputed index arrays for residual and Jacobian assembly."""

    def __init__(self, network: Network):
        self.net = network
        known = np.zeros(network.n_nodes, dtype=bool)
        known[network.source_nodes] = True
        self.unknown = np.flatnonzero(~known)
        self.n_unknown = self.unknown.size
        pos = np.full(network.n_nodes, -1, dtype=np.intp)
        pos[self.unknown] = np.arange(self.n_unknown)

        self.a = np.concatenate([network.wire_a, network.cell_a])
        self.b = np.concatenate([network.wire_b, network.cell_b])
        self.ua = pos[self.a]
        self.ub = pos[self.b]
        self.n_wire = network.wire_g.size

        mask_a = self.ua >= 0
        mask_b = self.ub >= 0
        mask_ab = mask_a & mask_b
        self._mask_a = mask_a
        self._mask_b = mask_b
        self._mask_ab = mask_ab
        diag = np.arange(self.n_unknown)
        self._rows = np.concatenate(
            [self.ua[mask_a], self.ub[mask_b], self.ua[mask_ab], self.ub[mask_ab], diag]
        )
        self._cols = np.concatenate(
            [self.ua[mask_a], self.ub[mask_b], self.ub[mask_ab], self.ua[mask_ab], diag]
        )

    def base_voltages(self) -> np.ndarray:
        x = np.zeros(self.net.n_nodes)
        x[self.net.source_nodes] = self.net.source_values
        return x

    def branch_currents(self, x: np.ndarray) -> np.ndarray:
        dv = x[self.a] - x[self.b]
        i_wire = self.net.wire_g * dv[: self.n_wire]
        i_cell = self.net.cells.current(dv[self.n_wire :])
        return np.concatenate([i_wire, np.atleast_1d(i_cell)])

    def residual(self, x: np.ndarray, i_all: np.ndarray | None = None) -> np.ndarray:
        if i_all is None:
            i_all = self.branch_currents(x)
        f = np.bincount(
            self.ua[self._mask_a], i_all[self._mask_a], minlength=self.n_unknown
        )
        f -= np.bincount(
            self.ub[self._mask_b], i_all[self._mask_b], minlength=self.n_unknown
        )
        f += LEAK_G * x[self.unknown]
        return f

    def currents_and_conductances(self, x: np.ndarray):
        dv = x[self.a] - x[self.b]
        i_cell, g_cell = self.net.cells.current_and_conductance(dv[self.n_wire :])
        i_all = np.concatenate(
            [self.net.wire_g * dv[: self.n_wire], np.atleast_1d(i_cell)]
        )
        g_all = np.concatenate([self.net.wire_g, np.atleast_1d(g_cell)])
        return i_all, g_all

    def jacobian(self, g_all: np.ndarray) -> sp.csc_matrix:
        vals = np.concatenate(
            [
                g_all[self._mask_a],
                g_all[self._mask_b],
                -g_all[self._mask_ab],
                -g_all[self._mask_ab],
                np.full(self.n_unknown, LEAK_G),
            ]
        )
        return sp.coo_matrix(
            (vals, (self._rows, self._cols)),
            shape=(self.n_unknown, self.n_unknown),
        ).tocsc()

    def factor(self, g_all: np.ndarray):
        # The pattern is structurally symmetric, so a symmetric fill-reducing
        # ordering roughly halves the LU fill relative to SuperLU's default.
        try:
            lu = splu(
                self.jacobian(g_all),
                permc_spec="MMD_AT_PLUS_A",
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise SingularSystem(f"nodal matrix factorization failed: {exc}") from exc
        return lu

    def linear_solve(self, g_cell: float) -> np.ndarray:
        """Solve with every cell replaced by the fixed conductance g_cell."""
        g_all = np.concatenate(
            [self.net.wire_g, np.full(len(self.net.cells), g_cell)]
        )
        x = self.base_voltages()
        # Linear residual at zero unknowns gives the source-driven RHS.
        dv = x[self.a] - x[self.b]
        i_all = g_all * dv
        f0 = self.residual(x, i_all)
        lu = self.factor(g_all)
        x[self.unknown] = lu.solve(-f0)
        if not np.all(np.isfinite(x)):
            raise SingularSystem("linearized solve produced non-finite voltages")
        return x


def linearized_initial_guess(network: Network) -> np.ndarray:
    """Node voltages of the network with each cell at its midband conductance.

    Every cell is replaced by 1/sqrt(r_on * r_off), turning the system
    linear; the result seeds the Newton iteration.
    """
    return _Plan(network).linear_solve(network.linear_guess_g)


def solve(network: Network, options: SolveOptions | None = None) -> Solution:
    """Newton-Raphson DC operating point of a crossbar network.

    Converged means both the voltage update and the KCL residual meet
    their tolerances. Raises NonConvergence or SingularSystem otherwise.
    """
    opts = options if options is not None else SolveOptions()
    opts.validate()
    plan = _Plan(network)

    guess = opts.initial_guess
    if isinstance(guess, str):
        if guess == "zero":
            x = plan.base_voltages()
        elif guess == "linearized":
            x = plan.linear_solve(network.linear_guess_g)
        else:
            raise ValueError(f"unknown initial guess {guess!r}")
    else:
        arr = np.asarray(guess, dtype=float)
        if arr.shape != (network.n_nodes,):
            raise ValueError(
                f"initial guess must have shape ({network.n_nodes},), got {arr.shape}"
            )
        x = plan.base_voltages()
        x[plan.unknown] = arr[plan.unknown]

    f = plan.residual(x)
    f_norm = float(np.max(np.abs(f), initial=0.0))
    for iteration in range(1, opts.max_iters + 1):
        _, g_all = plan.currents_and_conductances(x)
        lu = plan.factor(g_all)
        dx = lu.solve(-f)
        if not np.all(np.isfinite(dx)):
            raise SingularSystem("Newton update is non-finite")
        scale = opts.damping
        for _ in range(_MAX_HALVINGS + 1):
            x_try = x.copy()
            x_try[plan.unknown] += scale * dx
            f_try = plan.residual(x_try)
            f_try_norm = float(np.max(np.abs(f_try), initial=0.0))
            if f_try_norm < f_norm or f_try_norm <= opts.i_tol:
                break
            scale *= 0.5
        x, f, f_norm = x_try, f_try, f_try_norm
        step = scale * float(np.max(np.abs(dx), initial=0.0))
        if step <= opts.v_tol and f_norm <= opts.i_tol:
            return Solution(
                node_voltages=x,
                branch_currents=plan.branch_currents(x),
                iterations=iteration,
                converged=True,
            )
    raise NonConvergence(opts.max_iters, f_norm)
