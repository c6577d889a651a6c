"""Ground-truth machinery for validating the ranking strategies.

Provides exhaustive game values at desk scale, closed-form two-node
solutions, the uniform sensitivity bound and its runtime check, the
meeting-time horizon heuristic, and the saddle-point-equilibrium
sufficient-condition certificate.

The brute force is a validation oracle, not a production path: the number
of per-interval action pairs raised to the number of intervals grows
exponentially, so every call is protected by an enumeration guard.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import GameConfig
from .dynamics import (
    ControlPair,
    Kernel,
    Trajectory,
    AdjointTrajectory,
    assemble_matrix,
    cost,
    sensitivity_values,
    integrate,
    segment_weights,
    steps_per_interval,
)
from .graph import EdgeId, Graph
from .strategies import EnumerationGuardError

DEFAULT_BRUTE_FORCE_GUARD = 10_000_000
_PRECOMPUTE_BYTES_CAP = 256 * 1024 * 1024


def two_node_cost(a: float, boost: float, delta0: float, horizon: float) -> float:
    """Closed-form cost of the two-node system with constant unit kernel.

    With effective weight w = a + boost the state gap decays as
    delta0 * exp(-2 w t), giving J = delta0^2 (1 - exp(-4 w T)) / (8 w).
    """
    w = a + boost
    if not w > 0.0:
        raise ValueError(f"effective weight a + boost must be positive, got {w}")
    return delta0 ** 2 * (1.0 - math.exp(-4.0 * w * horizon)) / (8.0 * w)


def sensitivity_bound(n: int, horizon: float, x0: Sequence[float]) -> float:
    """Uniform bound 4 n T (max|x0| + |mean x0|) max|x0| on every link sensitivity."""
    x = np.asarray(x0, dtype=float)
    if x.size != n:
        raise ValueError(f"x0 must have length {n}")
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    x_inf = float(np.abs(x).max())
    return 4.0 * n * horizon * (x_inf + abs(float(x.mean()))) * x_inf


@dataclass(frozen=True)
class SensitivityBoundReport:
    """Outcome of checking the link sensitivities against the uniform bound."""

    ok: bool
    worst_ratio: float
    max_abs_f: float
    worst_edge: Optional[EdgeId]
    worst_time: Optional[float]


def sensitivity_bound_check(
    traj: Trajectory, adj: AdjointTrajectory, g: Graph, bound_m: float
) -> SensitivityBoundReport:
    """Compare the largest |sensitivity| over grid points and edges to the bound."""
    if traj.times.shape != adj.times.shape or not np.array_equal(traj.times, adj.times):
        raise ValueError("state and adjoint trajectories must share one grid")
    x = traj.states
    p = adj.costates
    max_abs = 0.0
    worst_edge: Optional[EdgeId] = None
    worst_time: Optional[float] = None
    for i, j in g.edge_ids:
        f_t = (p[:, j - 1] - p[:, i - 1]) * (x[:, i - 1] - x[:, j - 1])
        idx = int(np.argmax(np.abs(f_t)))
        value = abs(float(f_t[idx]))
        if value > max_abs:
            max_abs = value
            worst_edge = (i, j)
            worst_time = float(traj.times[idx])
    if bound_m > 0.0:
        ratio = max_abs / bound_m
    else:
        ratio = 0.0 if max_abs == 0.0 else math.inf
    return SensitivityBoundReport(
        ok=max_abs <= bound_m,
        worst_ratio=ratio,
        max_abs_f=max_abs,
        worst_edge=worst_edge,
        worst_time=worst_time,
    )


@dataclass(frozen=True)
class MeetingTimeReport:
    """Per-adjacent-pair crossing-time candidates and the suggested horizon cap.

    Candidate k (0-based) covers the sorted-state pair (k+1, k+2); None marks
    a pair outside the formula's domain (equal coupling sums or a ratio that
    leaves the logarithm's domain).
    """

    candidates: Tuple[Optional[float], ...]
    suggested_horizon: Optional[float]


def meeting_time_bound(
    matrix: np.ndarray, x_t0: Sequence[float], t0: float
) -> MeetingTimeReport:
    """Candidate times at which adjacent sorted states could first meet.

    For each adjacent pair with distinct coupling sums a_{i-1} != a_i and a
    positive extreme-state ratio, the candidate is
    ln(x_1 / x_n) / (a_{i-1} - a_i) + t0. The minimum candidate beyond t0 is
    the suggested horizon cap; choosing T below it keeps the sorted gaps
    bounded away from zero on the interval.
    """
    a_mat = np.asarray(matrix, dtype=float)
    x = np.asarray(x_t0, dtype=float)
    if a_mat.ndim != 2 or a_mat.shape[0] != a_mat.shape[1] or a_mat.shape[0] != x.size:
        raise ValueError("matrix and state dimensions disagree")
    if not np.all(np.diff(x) < 0.0):
        raise ValueError("state must be strictly sorted descending")
    coupling = a_mat.sum(axis=1) - np.diag(a_mat)
    ratio = float(x[0]) / float(x[-1]) if x[-1] != 0.0 else math.inf
    candidates: list[Optional[float]] = []
    for i in range(1, x.size):
        denom = float(coupling[i - 1] - coupling[i])
        if denom == 0.0 or not ratio > 0.0 or not math.isfinite(ratio):
            candidates.append(None)
            continue
        candidates.append(math.log(ratio) / denom + t0)
    viable = [c for c in candidates if c is not None and c > t0]
    return MeetingTimeReport(
        candidates=tuple(candidates),
        suggested_horizon=min(viable) if viable else None,
    )


@dataclass(frozen=True)
class SpeCertificate:
    """Verdict of the weight-diversity sufficient condition for equilibrium."""

    bound_m: float
    epsilon: float
    gamma: float
    bound_b: Optional[float]
    b: float
    side_conditions_ok: bool
    satisfied: bool
    degenerate: bool = False
    witness: Optional[Tuple[EdgeId, EdgeId]] = None

    def verdict_line(self) -> str:
        if self.degenerate:
            return (
                "SPE condition DEGENERATE: fewer than two edges, "
                "no pairwise bound to certify"
            )
        status = "SATISFIED" if self.satisfied else "NOT SATISFIED"
        detail = (
            f"b={self.b:.6g} vs bound {self.bound_b:.6g}, gamma={self.gamma:.6g}, "
            f"M={self.bound_m:.6g}, eps={self.epsilon:.6g}"
        )
        if not self.side_conditions_ok and self.witness is not None:
            detail += f", side condition fails on {self.witness[0]} / {self.witness[1]}"
        return f"SPE condition {status}: {detail}"

    def to_record(self) -> dict:
        return {
            "M": self.bound_m,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "bound_b": self.bound_b,
            "b": self.b,
            "side_conditions_ok": self.side_conditions_ok,
            "satisfied": self.satisfied,
            "degenerate": self.degenerate,
            "witness": None
            if self.witness is None
            else [list(self.witness[0]), list(self.witness[1])],
        }


def spe_check(
    g: Graph, x0: Sequence[float], horizon: float, epsilon: float, b: float
) -> SpeCertificate:
    """Evaluate the sufficient condition for the two play orders to agree.

    Computes gamma = M / epsilon^2 from the uniform bound (gamma must come
    out above one, else a smaller epsilon is required), then checks
    b <= min over ordered edge pairs of |gamma a_ij - a_kl| together with
    the side conditions: all weights pairwise distinct, and a_ij > gamma a_kl
    whenever a_ij > a_kl. Single-edge graphs are reported degenerate rather
    than certified.
    """
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    bound_m = sensitivity_bound(g.node_count, horizon, x0)
    gamma = bound_m / epsilon ** 2
    if not gamma > 1.0:
        raise ValueError(
            f"gamma={gamma:.6g} must exceed 1; choose a smaller epsilon"
        )
    if g.edge_count < 2:
        return SpeCertificate(
            bound_m=bound_m,
            epsilon=epsilon,
            gamma=gamma,
            bound_b=None,
            b=b,
            side_conditions_ok=False,
            satisfied=False,
            degenerate=True,
        )
    weights = g.weights
    edges = g.edge_ids
    side_ok = True
    witness: Optional[Tuple[EdgeId, EdgeId]] = None
    for e1, e2 in itertools.permutations(edges, 2):
        a1, a2 = weights[e1], weights[e2]
        if a1 == a2:
            side_ok = False
            witness = (e1, e2)
            break
        if a1 > a2 and not a1 > gamma * a2:
            side_ok = False
            witness = (e1, e2)
            break
    bound_b = math.inf
    bound_pair: Optional[Tuple[EdgeId, EdgeId]] = None
    for e1 in edges:
        for e2 in edges:
            value = abs(gamma * weights[e1] - weights[e2])
            if value < bound_b:
                bound_b = value
                bound_pair = (e1, e2)
    satisfied = side_ok and 0.0 <= b <= bound_b
    if not satisfied and witness is None:
        witness = bound_pair
    return SpeCertificate(
        bound_m=bound_m,
        epsilon=epsilon,
        gamma=gamma,
        bound_b=bound_b,
        b=b,
        side_conditions_ok=side_ok,
        satisfied=satisfied,
        witness=None if satisfied else witness,
    )


@dataclass(frozen=True)
class BruteForceReport:
    """Exact game value with the optimizing action sequence."""

    mode: str
    value: float
    action_sequence: Tuple[
        Tuple[Tuple[EdgeId, ...], Tuple[Tuple[EdgeId, float], ...]], ...
    ]
    enumerated: int
    guard: int

    def to_record(self) -> dict:
        return {
            "mode": self.mode,
            "value": self.value,
            "action_sequence": [
                {
                    "broken": [list(edge) for edge in broken],
                    "boosted": [[list(edge), value] for edge, value in boosted],
                }
                for broken, boosted in self.action_sequence
            ],
            "enumerated": self.enumerated,
            "guard": self.guard,
        }


def _rk4_step_matrix(a_mat: np.ndarray, h: float) -> np.ndarray:
    """One-step propagator of classical RK4 on a linear system (degree-4 Taylor)."""
    n = a_mat.shape[0]
    eye = np.eye(n)
    ha = h * a_mat
    return eye + ha @ (eye + 0.5 * ha @ (eye + (ha / 3.0) @ (eye + 0.25 * ha)))


def _subset_actions(edges: Tuple[EdgeId, ...], budget: int) -> list:
    out = []
    for size in range(budget + 1):
        out.extend(itertools.combinations(edges, size))
    return out


def brute_force_value(
    g: Graph, cfg: GameConfig, guard: int = DEFAULT_BRUTE_FORCE_GUARD
) -> BruteForceReport:
    """Exact nested optimization over all per-interval action sequences.

    Backward induction over the switching grid with the mode's stage order
    (first mover commits, second mover best-responds, both observe the
    state). Designer actions are restricted to bang-bang boosts in {0, b},
    matching the structure of the optimal strategies. Per-interval costs
    and propagators reuse the integrator's RK4 polynomial and quadrature
    weights; the reported value re-integrates the equilibrium path through
    the actual dynamics integrator.

    Raises EnumerationGuardError when the number of strategy sequences
    (action pairs per interval, raised to the interval count) exceeds
    ``guard``, or when the per-pair precomputation would not fit in memory.
    """
    if len(cfg.x0) != g.node_count:
        raise ValueError(f"x0 has length {len(cfg.x0)}, expected {g.node_count}")
    edges = g.edge_ids
    budget = min(cfg.ell, g.edge_count)
    adv_actions = (
        [()]
        if cfg.mode in ("designer_only", "uncontrolled")
        else _subset_actions(edges, budget)
    )
    des_actions = (
        [()]
        if cfg.mode in ("adversary_only", "uncontrolled")
        else _subset_actions(edges, budget)
    )
    choices = len(adv_actions) * len(des_actions)
    intervals = cfg.switching_count
    enumerated = choices ** intervals
    if enumerated > guard:
        raise EnumerationGuardError(
            f"{choices} action pairs over {intervals} intervals enumerate "
            f"{enumerated} sequences, above the guard {guard}"
        )
    n = g.node_count
    if choices * 2 * n * n * 8 > _PRECOMPUTE_BYTES_CAP:
        raise EnumerationGuardError(
            f"propagator table for {choices} action pairs exceeds the memory cap"
        )
    steps = steps_per_interval(cfg.horizon, intervals, cfg.dt)
    total = steps * intervals
    times = np.linspace(0.0, cfg.horizon, total + 1)
    h = float(times[1] - times[0])
    coeffs = segment_weights(steps, h) * cfg.kernel.sample(times[: steps + 1])

    pairs = [(u, v) for u in adv_actions for v in des_actions]
    prop = np.empty((len(pairs), n, n))
    quad = np.empty((len(pairs), n, n))
    for idx, (u, v) in enumerate(pairs):
        control = ControlPair(
            break_set=frozenset(u), boosts={edge: cfg.b for edge in v}
        )
        step = _rk4_step_matrix(assemble_matrix(g, control), h)
        m = np.eye(n)
        q = np.zeros((n, n))
        for j in range(steps + 1):
            q += coeffs[j] * (m.T @ m)
            if j < steps:
                m = step @ m
        prop[idx] = m
        quad[idx] = q
    pair_index = {pair: idx for idx, pair in enumerate(pairs)}

    # Multiplicative kernel family: k(t_start + tau) = scale(t_start) * k(tau).
    k0 = cfg.kernel.at(0.0)
    stage_scale = [cfg.kernel.at(float(times[k * steps])) / k0 for k in range(intervals)]

    adversary_outer = cfg.mode in ("maxmin", "adversary_only", "uncontrolled")
    outer_actions, inner_actions = (
        (adv_actions, des_actions) if adversary_outer else (des_actions, adv_actions)
    )
    outer_maximizes = adversary_outer

    def best(k: int, y: np.ndarray):
        if k == intervals:
            return 0.0, ()
        best_total = None
        best_path = None
        for outer in outer_actions:
            inner_total = None
            inner_path = None
            for inner in inner_actions:
                u, v = (outer, inner) if adversary_outer else (inner, outer)
                idx = pair_index[(u, v)]
                stage = stage_scale[k] * float(y @ quad[idx] @ y)
                cont, tail = best(k + 1, prop[idx] @ y)
                total_value = stage + cont
                if inner_total is None or (
                    total_value > inner_total
                    if not outer_maximizes
                    else total_value < inner_total
                ):
                    inner_total = total_value
                    inner_path = ((u, v),) + tail
            if best_total is None or (
                inner_total > best_total if outer_maximizes else inner_total < best_total
            ):
                best_total = inner_total
                best_path = inner_path
        return best_total, best_path

    x0 = np.asarray(cfg.x0, dtype=float)
    y0 = x0 - x0.mean()
    tree_value, path = best(0, y0)

    schedule = [
        ControlPair(break_set=frozenset(u), boosts={edge: cfg.b for edge in v})
        for u, v in path
    ]
    traj = integrate(g, cfg.x0, schedule, cfg.horizon, cfg.dt, cfg.kernel)
    value = cost(traj, cfg.kernel)
    if abs(value - tree_value) > 1e-8 * max(1.0, abs(value)):
        raise RuntimeError(
            f"brute-force bookkeeping mismatch: tree {tree_value} vs "
            f"re-integrated {value}"
        )
    action_sequence = tuple(
        (tuple(sorted(u)), tuple((edge, cfg.b) for edge in sorted(v)))
        for u, v in path
    )
    return BruteForceReport(
        mode=cfg.mode,
        value=value,
        action_sequence=action_sequence,
        enumerated=enumerated,
        guard=guard,
    )
