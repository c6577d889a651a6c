"""Controlled averaging dynamics.

Assembles the effective system matrix under adversary breaks and designer
boosts, integrates state and adjoint trajectories with fixed-step classical
fourth-order Runge-Kutta, and evaluates the kernel-weighted quadratic
disagreement cost.

Controls are piecewise-constant on equal switching intervals, so the system
matrix is constant within each interval and fixed stepping is structurally
exact. The consensus target is computed once from the initial state and
never re-estimated along the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .graph import EdgeId, Graph

KERNEL_KINDS = ("constant", "exponential")


@dataclass(frozen=True)
class Kernel:
    """Cost kernel k(t): positive and integrable on any finite horizon.

    ``constant`` uses k(t) = parameter with parameter > 0; ``exponential``
    uses k(t) = exp(parameter * t), positive for any rate. Both families
    satisfy k(t0 + t) = k(t0) * k(t) / k(0), which the brute-force oracle
    relies on to reuse per-interval quadrature forms across stages.
    """

    kind: str = "constant"
    parameter: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "constant" and not self.parameter > 0.0:
            raise ValueError("constant kernel requires a positive parameter")

    def sample(self, times: np.ndarray) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        if self.kind == "constant":
            return np.full(t.shape, self.parameter)
        return np.exp(self.parameter * t)

    def at(self, t: float) -> float:
        if self.kind == "constant":
            return self.parameter
        return float(np.exp(self.parameter * t))


UNIT_KERNEL = Kernel("constant", 1.0)


@dataclass(frozen=True)
class ControlPair:
    """One switching interval's actions: broken links plus additive boosts."""

    break_set: frozenset[EdgeId] = frozenset()
    boosts: Mapping[EdgeId, float] = field(default_factory=dict)

    @classmethod
    def null(cls) -> "ControlPair":
        return cls()


def validate_control(
    g: Graph,
    control: ControlPair,
    budget: Optional[int] = None,
    boost_cap: Optional[float] = None,
) -> None:
    """Check a control pair against the graph and, when given, the budgets."""
    for edge in control.break_set:
        if not g.has_edge(edge):
            raise ValueError(f"break set contains non-edge {edge}")
    nonzero = 0
    for edge, value in control.boosts.items():
        if not g.has_edge(edge):
            raise ValueError(f"boost on non-edge {edge}")
        if value < 0.0:
            raise ValueError(f"negative boost {value} on edge {edge}")
        if boost_cap is not None and value > boost_cap:
            raise ValueError(f"boost {value} on edge {edge} exceeds cap {boost_cap}")
        if value > 0.0:
            nonzero += 1
    if budget is not None:
        if len(control.break_set) > budget:
            raise ValueError(f"break set size {len(control.break_set)} exceeds budget {budget}")
        if nonzero > budget:
            raise ValueError(f"{nonzero} nonzero boosts exceed budget {budget}")


def assemble_matrix(g: Graph, control: ControlPair) -> np.ndarray:
    """Effective system matrix: offdiag (a_ij + v_ij) * (1 - u_ij), zero row sums."""
    n = g.node_count
    a = np.zeros((n, n))
    for i, j, w in g.edges:
        if (i, j) in control.break_set:
            continue
        w_eff = w + control.boosts.get((i, j), 0.0)
        a[i - 1, j - 1] = w_eff
        a[j - 1, i - 1] = w_eff
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -a.sum(axis=1))
    return a


def check_system_matrix(a: np.ndarray, tol: float = 1e-9) -> None:
    """Raise unless ``a`` is symmetric with nonnegative offdiagonals and zero row sums."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("system matrix must be square")
    if not np.allclose(a, a.T, atol=tol, rtol=0.0):
        raise ValueError("system matrix is not symmetric")
    off = a - np.diag(np.diag(a))
    if off.min() < -tol:
        raise ValueError("system matrix has a negative offdiagonal entry")
    if np.abs(a.sum(axis=1)).max() > tol:
        raise ValueError("system matrix row sums are not zero")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on a uniform grid plus the controls realized per interval."""

    times: np.ndarray
    states: np.ndarray
    controls: Tuple[ControlPair, ...]
    steps_per_interval: int
    cumulative_cost: np.ndarray
    kernel: Kernel

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def interval_count(self) -> int:
        return len(self.controls)


@dataclass(frozen=True, eq=False)
class AdjointTrajectory:
    """Costates on the same grid as the state trajectory; p(T) = 0 exactly."""

    times: np.ndarray
    costates: np.ndarray


def steps_per_interval(horizon: float, intervals: int, dt: float) -> int:
    """Integer steps per switching interval; dt must align with the grid."""
    if not dt > 0.0:
        raise ValueError(f"integration step must be positive, got {dt}")
    if intervals < 1:
        raise ValueError(f"need at least one switching interval, got {intervals}")
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    raw = (horizon / intervals) / dt
    steps = int(round(raw))
    if steps < 1 or abs(raw - steps) > 1e-9 * max(1.0, raw):
        raise ValueError(
            f"dt={dt} does not align with the switching grid "
            f"(horizon={horizon}, intervals={intervals})"
        )
    return steps


def advance_interval(a_mat: np.ndarray, x: np.ndarray, steps: int, h: float) -> np.ndarray:
    """Classical RK4 under a constant matrix; returns the state after each step."""
    out = np.empty((steps, x.size))
    for idx in range(steps):
        k1 = a_mat @ x
        k2 = a_mat @ (x + 0.5 * h * k1)
        k3 = a_mat @ (x + 0.5 * h * k2)
        k4 = a_mat @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[idx] = x
    return out


def _rk4_half_step(a_mat: np.ndarray, x: np.ndarray, h2: float) -> np.ndarray:
    k1 = a_mat @ x
    k2 = a_mat @ (x + 0.5 * h2 * k1)
    k3 = a_mat @ (x + 0.5 * h2 * k2)
    k4 = a_mat @ (x + h2 * k3)
    return x + (h2 / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _cumulative_quadrature(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative fourth-order quadrature of uniformly sampled y.

    Even prefixes use Simpson pairs; odd prefixes close with a 3/8 rule
    (or a single trapezoid at the very first point). The final entry is
    the segment integral used everywhere as "the" quadrature value.
    """
    npts = y.size
    out = np.zeros(npts)
    even = np.arange(2, npts, 2)
    if even.size:
        pair_inc = (h / 3.0) * (y[even - 2] + 4.0 * y[even - 1] + y[even])
        out[even] = np.cumsum(pair_inc)
    if npts >= 2:
        out[1] = 0.5 * h * (y[0] + y[1])
    odd = np.arange(3, npts, 2)
    if odd.size:
        out[odd] = out[odd - 3] + (0.375 * h) * (
            y[odd - 3] + 3.0 * y[odd - 2] + 3.0 * y[odd - 1] + y[odd]
        )
    return out


def segment_weights(steps: int, h: float) -> np.ndarray:
    """Quadrature weights matching ``_cumulative_quadrature`` over one segment."""
    if steps < 1:
        raise ValueError("segment needs at least one step")
    if steps == 1:
        return np.array([0.5 * h, 0.5 * h])
    w = np.zeros(steps + 1)
    even_part = steps if steps % 2 == 0 else steps - 3
    if even_part > 0:
        w[0] += h / 3.0
        w[even_part] += h / 3.0
        w[1:even_part:2] += 4.0 * h / 3.0
        w[2:even_part:2] += 2.0 * h / 3.0
    if steps % 2 == 1:
        w[steps - 3] += 0.375 * h
        w[steps - 2] += 1.125 * h
        w[steps - 1] += 1.125 * h
        w[steps] += 0.375 * h
    return w


def cumulative_cost_profile(
    times: np.ndarray,
    states: np.ndarray,
    steps: int,
    kernel: Kernel,
) -> np.ndarray:
    """Running integral of k(t) |x(t) - xbar|^2, segment by segment.

    Quadrature is applied per switching interval so that corners in the
    integrand at control switches never sit inside a Simpson pair.
    """
    xbar = float(states[0].mean())
    dev = states - xbar
    integrand = kernel.sample(times) * np.einsum("ij,ij->i", dev, dev)
    h = float(times[1] - times[0])
    out = np.zeros(times.size)
    intervals = (times.size - 1) // steps
    for k in range(intervals):
        lo = k * steps
        hi = lo + steps
        out[lo : hi + 1] = out[lo] + _cumulative_quadrature(integrand[lo : hi + 1], h)
    return out


def build_trajectory(
    times: np.ndarray,
    states: np.ndarray,
    controls: Tuple[ControlPair, ...],
    steps: int,
    kernel: Kernel,
) -> Trajectory:
    return Trajectory(
        times=times,
        states=states,
        controls=controls,
        steps_per_interval=steps,
        cumulative_cost=cumulative_cost_profile(times, states, steps, kernel),
        kernel=kernel,
    )


def integrate(
    g: Graph,
    x0: Sequence[float],
    schedule: Sequence[ControlPair],
    horizon: float,
    dt: float,
    kernel: Kernel = UNIT_KERNEL,
) -> Trajectory:
    """Integrate the averaging dynamics under a piecewise-constant schedule.

    Args:
        g: The underlying network.
        x0: Initial node states, length n.
        schedule: One control pair per switching interval; the horizon is
            split into ``len(schedule)`` equal intervals.
        horizon: Final time T.
        dt: Fixed integration step; must divide the interval length.
        kernel: Cost kernel used for the cumulative-cost samples.

    Returns:
        The full trajectory on the uniform grid.
    """
    x = np.asarray(x0, dtype=float)
    if x.ndim != 1 or x.size != g.node_count:
        raise ValueError(f"x0 must have length {g.node_count}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    if not schedule:
        raise ValueError("schedule must contain at least one control pair")
    steps = steps_per_interval(horizon, len(schedule), dt)
    for control in schedule:
        validate_control(g, control)
    total = steps * len(schedule)
    times = np.linspace(0.0, horizon, total + 1)
    h = float(times[1] - times[0])
    states = np.empty((total + 1, g.node_count))
    states[0] = x
    for k, control in enumerate(schedule):
        a_mat = assemble_matrix(g, control)
        block = advance_interval(a_mat, x, steps, h)
        states[k * steps + 1 : (k + 1) * steps + 1] = block
        x = block[-1]
    return build_trajectory(times, states, tuple(schedule), steps, kernel)


def cost(traj: Trajectory, kernel: Kernel) -> float:
    """Quadrature of k(t) |x(t) - xbar|^2 over the trajectory grid."""
    profile = cumulative_cost_profile(
        traj.times, traj.states, traj.steps_per_interval, kernel
    )
    return float(profile[-1])


def adjoint_integrate(
    g: Graph,
    traj: Trajectory,
    kernel: Kernel = UNIT_KERNEL,
) -> AdjointTrajectory:
    """Back-solve the costate equation p' = -2 k (x - xbar) - A p from p(T) = 0.

    Uses the same grid and the realized per-interval matrices as the state
    trajectory. Stage states at half steps are reconstructed with an RK4
    half step from the stored grid states, preserving fourth order.
    """
    times = traj.times
    states = traj.states
    steps = traj.steps_per_interval
    h = float(times[1] - times[0])
    xbar = float(states[0].mean())
    p = np.zeros(states.shape[1])
    costates = np.empty_like(states)
    costates[-1] = p
    idx = times.size - 1
    hb = -h
    for k in range(len(traj.controls) - 1, -1, -1):
        a_mat = assemble_matrix(g, traj.controls[k])
        for _ in range(steps):
            t_hi = float(times[idx])
            t_lo = float(times[idx - 1])
            x_hi = states[idx]
            x_lo = states[idx - 1]
            x_mid = _rk4_half_step(a_mat, x_lo, 0.5 * h)
            k_hi = kernel.at(t_hi)
            k_mid = kernel.at(t_lo + 0.5 * h)
            k_lo = kernel.at(t_lo)
            k1 = -2.0 * k_hi * (x_hi - xbar) - a_mat @ p
            k2 = -2.0 * k_mid * (x_mid - xbar) - a_mat @ (p + 0.5 * hb * k1)
            k3 = -2.0 * k_mid * (x_mid - xbar) - a_mat @ (p + 0.5 * hb * k2)
            k4 = -2.0 * k_lo * (x_lo - xbar) - a_mat @ (p + hb * k3)
            p = p + (hb / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            idx -= 1
            costates[idx] = p
    return AdjointTrajectory(times=times, costates=costates)


def sensitivity_values(x: Sequence[float], p: Sequence[float], g: Graph) -> dict[EdgeId, float]:
    """Per-edge sensitivity (p_j - p_i) (x_i - x_j)."""
    xa = np.asarray(x, dtype=float)
    pa = np.asarray(p, dtype=float)
    if xa.size != g.node_count or pa.size != g.node_count:
        raise ValueError(f"state and costate must have length {g.node_count}")
    return {
        (i, j): float((pa[j - 1] - pa[i - 1]) * (xa[i - 1] - xa[j - 1]))
        for i, j in g.edge_ids
    }


def negative_gaps(x: Sequence[float], g: Graph) -> dict[EdgeId, float]:
    """Per-edge negative squared potential difference -(x_i - x_j)^2."""
    xa = np.asarray(x, dtype=float)
    if xa.size != g.node_count:
        raise ValueError(f"state must have length {g.node_count}")
    return {(i, j): float(-((xa[i - 1] - xa[j - 1]) ** 2)) for i, j in g.edge_ids}


def trajectory_to_csv(traj: Trajectory) -> str:
    """Render a trajectory as CSV: t, x_1..x_n, integrand, J_cumulative."""
    n = traj.states.shape[1]
    xbar = float(traj.states[0].mean())
    dev = traj.states - xbar
    integrand = traj.kernel.sample(traj.times) * np.einsum("ij,ij->i", dev, dev)
    header = "t," + ",".join(f"x_{k}" for k in range(1, n + 1)) + ",integrand,J_cumulative"
    lines = [header]
    for row in range(traj.times.size):
        cells = [f"{traj.times[row]:.17g}"]
        cells.extend(f"{v:.17g}" for v in traj.states[row])
        cells.append(f"{integrand[row]:.17g}")
        cells.append(f"{traj.cumulative_cost[row]:.17g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
