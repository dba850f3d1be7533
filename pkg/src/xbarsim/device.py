"""Crosspoint cell models for resistive crossbar memory simulation.

Three cell flavors live here: a memristor with built-in reverse
rectification, the same memristor without rectification, and a nonlinear
(sinh-type) selector in series with a fixed resistor. The module also
carries the threshold-driven state dynamics used to produce transient
I-V traces.

All current/conductance helpers accept scalars or numpy arrays and
evaluate elementwise, so the network solver can drive whole cell
populations in one call.
"""

import math
from dataclasses import dataclass

import numpy as np

# Width (V) of the forward turn-on ramp of rectifying cells. The reverse
# branch formula applies exactly for all v <= 0 and the forward one for
# v >= RECT_EPS; on (0, RECT_EPS) a C1 monotone ramp joins them so Newton
# sees a continuous Jacobian. 1 mV is far below any bias of interest, so
# array-level results are unaffected.
RECT_EPS = 1e-3

# Absolute residual (A) required of the internal selector series solve.
SERIES_TOL = 1e-12

_SERIES_MAX_ITERS = 200


class SeriesSolveFailure(RuntimeError):
    """Internal root find for a selector+resistor cell did not converge."""


@dataclass(frozen=True)
class DeviceParams:
    """Memristor constants; r_off/r_on are the HRS/LRS resistances."""

    r_off: float = 5.0e8
    r_on: float = 5.0e5
    v_th: float = 1.5
    alpha: float = 2.5e8
    beta: float = 0.0
    rectifying: bool = True

    def __post_init__(self):
        if not (self.r_off >= self.r_on > 0.0):
            raise ValueError(
                f"need r_off >= r_on > 0, got r_off={self.r_off}, r_on={self.r_on}"
            )
        if self.v_th <= 0.0:
            raise ValueError(f"threshold voltage must be positive, got {self.v_th}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("programming rates alpha and beta must be nonnegative")

    @property
    def ratio(self) -> float:
        """Resistance window r_off / r_on."""
        return self.r_off / self.r_on


@dataclass(frozen=True)
class DeviceState:
    """Normalized internal state; w = 0 is fully OFF, w = 1 fully ON."""

    w: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"state variable must stay in [0, 1], got {self.w}")


@dataclass(frozen=True)
class SelectorParams:
    """Constants of the sinh selector: i = gamma * sinh(k * p * v)."""

    gamma: float = 1e-8
    k: float = 1.0
    p: float = 18.4

    def __post_init__(self):
        if self.gamma <= 0.0 or self.k <= 0.0 or self.p <= 0.0:
            raise ValueError("gamma, k and p must all be positive")

    @property
    def slope(self) -> float:
        """Small-signal exponent k * p (1/V)."""
        return self.k * self.p


def forward_resistance(params: DeviceParams, w):
    """Resistance of the memristive element in the conducting direction."""
    return params.r_off * (params.r_on / params.r_off) ** np.asarray(w, dtype=float)


def memristance(params: DeviceParams, state: DeviceState, v: float) -> float:
    """Cell resistance at state w under bias v.

    Rectifying devices present r_off for any negative bias; otherwise the
    resistance interpolates geometrically between r_off (w=0) and r_on (w=1).
    """
    if params.rectifying and v < 0.0:
        return params.r_off
    return float(forward_resistance(params, state.w))


# Turn-on ramp shape on x = v / RECT_EPS in [0, 1]. _ramp_shape integrates
# _ramp_slope; the coefficients are fixed by _ramp_shape(1) = 1 (current is
# exact at the window edge), _ramp_slope(0) = 0 and _ramp_slope(1) = 1
# (conductance is continuous at both ends). The slope peaks at 1.25 inside
# the window and never goes negative, so the cell I-V stays monotone.


def _ramp_shape(x):
    return x * x * (3.0 + x * (-3.0 + x))


def _ramp_slope(x):
    return x * (6.0 + x * (-9.0 + 4.0 * x))


def memristor_current(params: DeviceParams, w, v, rectifying=None):
    """Elementwise memristor current at state(s) w and bias(es) v.

    `rectifying=None` defers to params.rectifying. For rectifying cells the
    reverse formula v/r_off holds exactly for every v <= 0 and the forward
    one v/r_fwd for every v >= RECT_EPS; the turn-on ramp joins them.
    """
    rect = params.rectifying if rectifying is None else rectifying
    v = np.asarray(v, dtype=float)
    i_fwd = v / forward_resistance(params, w)
    if not rect:
        return i_fwd
    i_rev = v / params.r_off
    g_gap = 1.0 / forward_resistance(params, w) - 1.0 / params.r_off
    x = np.clip(v / RECT_EPS, 0.0, 1.0)
    ramp = i_rev + g_gap * RECT_EPS * _ramp_shape(x)
    return np.where(v <= 0.0, i_rev, np.where(v >= RECT_EPS, i_fwd, ramp))


def memristor_conductance(params: DeviceParams, w, v, rectifying=None):
    """Elementwise dI/dv of memristor_current (continuous everywhere)."""
    rect = params.rectifying if rectifying is None else rectifying
    v = np.asarray(v, dtype=float)
    g_fwd = 1.0 / forward_resistance(params, w)
    if not rect:
        return np.broadcast_to(g_fwd, np.broadcast(g_fwd, v).shape).copy()
    g_rev = 1.0 / params.r_off
    x = np.clip(v / RECT_EPS, 0.0, 1.0)
    ramp = g_rev + (g_fwd - g_rev) * _ramp_slope(x)
    return np.where(v <= 0.0, g_rev, np.where(v >= RECT_EPS, g_fwd, ramp))


def selector_current(sel: SelectorParams, v):
    """Bare selector current gamma * sinh(k*p*v)."""
    return sel.gamma * np.sinh(sel.slope * np.asarray(v, dtype=float))


def selector_conductance(sel: SelectorParams, v):
    """dI/dv of the bare selector."""
    return sel.gamma * sel.slope * np.cosh(sel.slope * np.asarray(v, dtype=float))


def series_selector_voltage(sel: SelectorParams, r_series, v):
    """Voltage taken by the selector inside a selector+resistor pair.

    Solves gamma*sinh(k*p*u) = (v - u)/r for u with a bracketed Newton
    iteration (bisection fallback) to a residual below SERIES_TOL. The
    solve runs on |v| and the sign is restored afterwards, so the result
    is exactly odd in v. The bracket is capped by both |v| and the
    arcsinh bound on the selector drop at maximum current, which keeps
    sinh away from overflow.
    """
    v_arr, r_arr = np.broadcast_arrays(
        np.asarray(v, dtype=float), np.asarray(r_series, dtype=float)
    )
    if np.any(r_arr <= 0.0):
        raise ValueError("series resistance must be positive")
    sign = np.where(v_arr < 0.0, -1.0, 1.0)
    av = np.abs(v_arr)
    c = sel.slope
    cap = np.minimum(av, np.arcsinh(av / (r_arr * sel.gamma)) / c)
    lo = np.zeros_like(av)
    hi = cap.copy()
    u = 0.5 * cap

    def residual(x):
        return sel.gamma * np.sinh(c * x) - (av - x) / r_arr

    f = residual(u)
    done = np.abs(f) <= SERIES_TOL
    converged = bool(done.all())
    for _ in range(_SERIES_MAX_ITERS):
        if converged:
            break
        pos = f > 0.0
        hi = np.where(~done & pos, u, hi)
        lo = np.where(~done & ~pos, u, lo)
        fp = sel.gamma * c * np.cosh(c * u) + 1.0 / r_arr
        u_new = u - f / fp
        fallback = ~np.isfinite(u_new) | (u_new <= lo) | (u_new >= hi)
        u_new = np.where(fallback, 0.5 * (lo + hi), u_new)
        u = np.where(done, u, u_new)
        f = np.where(done, f, residual(u))
        done = done | (np.abs(f) <= SERIES_TOL)
        converged = bool(done.all())
    if not converged:
        worst = float(np.max(np.abs(f)))
        raise SeriesSolveFailure(
            f"selector series solve stalled at residual {worst:.3e} A"
        )
    # Two polishing Newton steps push the root to machine accuracy so that
    # conductance formulas line up with finite differences of the current.
    for _ in range(2):
        fp = sel.gamma * c * np.cosh(c * u) + 1.0 / r_arr
        u = np.clip(u - residual(u) / fp, 0.0, cap)
    return sign * u


def series_current(sel: SelectorParams, r_series, v):
    """Current through a selector in series with a fixed resistor."""
    u = series_selector_voltage(sel, r_series, v)
    return sel.gamma * np.sinh(sel.slope * u)


def series_conductance(sel: SelectorParams, r_series, v):
    """dI/dv of the series pair (selector conductance behind the resistor)."""
    u = series_selector_voltage(sel, r_series, v)
    g_sel = sel.gamma * sel.slope * np.cosh(sel.slope * u)
    return g_sel / (1.0 + np.asarray(r_series, dtype=float) * g_sel)


def series_current_and_conductance(sel: SelectorParams, r_series, v):
    """One series solve returning (current, dI/dv); used by the solver."""
    u = series_selector_voltage(sel, r_series, v)
    i = sel.gamma * np.sinh(sel.slope * u)
    g_sel = sel.gamma * sel.slope * np.cosh(sel.slope * u)
    return i, g_sel / (1.0 + np.asarray(r_series, dtype=float) * g_sel)


@dataclass(frozen=True)
class RectifyingMemristor:
    """Memristor cell that blocks reverse conduction at r_off."""

    params: DeviceParams
    state: DeviceState

    def current(self, v: float) -> float:
        return float(memristor_current(self.params, self.state.w, v, rectifying=True))

    def conductance(self, v: float) -> float:
        return float(
            memristor_conductance(self.params, self.state.w, v, rectifying=True)
        )


@dataclass(frozen=True)
class LinearMemristor:
    """Memristor cell with symmetric (non-rectifying) conduction."""

    params: DeviceParams
    state: DeviceState

    def current(self, v: float) -> float:
        return float(memristor_current(self.params, self.state.w, v, rectifying=False))

    def conductance(self, v: float) -> float:
        return float(
            memristor_conductance(self.params, self.state.w, v, rectifying=False)
        )


@dataclass(frozen=True)
class SelectorPlusResistor:
    """Nonlinear selector in series with a fixed memory resistance."""

    selector: SelectorParams
    resistance: float

    def __post_init__(self):
        if self.resistance <= 0.0:
            raise ValueError("series resistance must be positive")

    def current(self, v: float) -> float:
        return float(series_current(self.selector, self.resistance, v))

    def conductance(self, v: float) -> float:
        return float(series_conductance(self.selector, self.resistance, v))


CellModel = RectifyingMemristor | LinearMemristor | SelectorPlusResistor


def cell_current(model: CellModel, v: float) -> float:
    """Current through any cell variant at terminal voltage v."""
    return model.current(v)


def cell_conductance(model: CellModel, v: float) -> float:
    """dI/dv of any cell variant at terminal voltage v."""
    return model.conductance(v)


def state_rate(params: DeviceParams, v: float) -> float:
    """dw/dt under bias v: threshold-gated fast switching, slow drift below."""
    if v >= params.v_th:
        return params.alpha * (v - params.v_th)
    if v <= -params.v_th:
        return params.alpha * (v + params.v_th)
    return params.beta * v


def step_state(
    params: DeviceParams, state: DeviceState, v: float, dt: float
) -> DeviceState:
    """Advance the state by one explicit Euler step of length dt.

    The rails latch while the drive keeps pushing outward (w held at 1
    while v > 0, at 0 while v < 0); otherwise the integrated value is
    clamped into [0, 1].
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.w >= 1.0 and v > 0.0:
        return DeviceState(1.0)
    if state.w <= 0.0 and v < 0.0:
        return DeviceState(0.0)
    w = state.w + state_rate(params, v) * dt
    return DeviceState(min(1.0, max(0.0, w)))


@dataclass(frozen=True)
class IVTrace:
    """Sampled transient sweep: time, drive voltage, current, state."""

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    w: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


def trace_iv(
    params: DeviceParams,
    initial: DeviceState,
    amplitude: float = 2.0,
    frequency: float = 1e7,
    cycles: int = 1,
    steps_per_cycle: int = 10_000,
) -> IVTrace:
    """Trace the I-V loop of a memristor under a sinusoidal drive.

    Fixed-step explicit Euler integration of the state equation with the
    current sampled before each step, which is enough to resolve the
    hysteresis loop of a first-order rate model.
    """
    if steps_per_cycle < 1000:
        raise ValueError("steps_per_cycle must be at least 1000")
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    if frequency <= 0.0:
        raise ValueError("frequency must be positive")
    n = cycles * steps_per_cycle
    dt = 1.0 / (frequency * steps_per_cycle)
    t = np.arange(n) * dt
    v = amplitude * np.sin(2.0 * math.pi * frequency * t)
    w = np.empty(n)
    state = initial
    for idx in range(n):
        w[idx] = state.w
        state = step_state(params, state, float(v[idx]), dt)
    i = memristor_current(params, w, v)
    return IVTrace(t=t, v=v, i=i, w=w)
