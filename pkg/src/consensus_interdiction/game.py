"""Closed-loop play of the link game over the switching grid.

Strategies are re-evaluated from the current state at the start of each of
the K equal switching intervals and frozen within the interval; that grid
is the discretization of the instantaneous-action model, and K is the knob.
In maxmin order the designer observes the realized break set; in minmax
order the adversary observes the declared boosts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .config import GameConfig
from .dynamics import (
    ControlPair,
    Trajectory,
    advance_interval,
    assemble_matrix,
    build_trajectory,
    cost,
    steps_per_interval,
)
from .graph import Graph
from .strategies import (
    StrategyOutcome,
    adversary_first_move_maxmin,
    adversary_response_minmax,
    designer_first_move_minmax,
    designer_response_maxmin,
)


@dataclass(frozen=True)
class IntervalPlay:
    """Both players' outcomes for one switching interval."""

    t_start: float
    adversary: Optional[StrategyOutcome]
    designer: Optional[StrategyOutcome]
    control: ControlPair

    def to_record(self) -> dict:
        return {
            "t_start": self.t_start,
            "adversary": None if self.adversary is None else self.adversary.to_record(),
            "designer": None if self.designer is None else self.designer.to_record(),
        }


@dataclass(frozen=True, eq=False)
class GameResult:
    """Realized value, trajectory, and per-interval actions for one mode."""

    mode: str
    value: float
    trajectory: Trajectory
    interval_plays: Tuple[IntervalPlay, ...]

    def to_record(self) -> dict:
        return {
            "mode": self.mode,
            "J": self.value,
            "intervals": [play.to_record() for play in self.interval_plays],
        }


def _choose_actions(
    g: Graph, x: np.ndarray, cfg: GameConfig
) -> Tuple[Optional[StrategyOutcome], Optional[StrategyOutcome]]:
    if cfg.mode == "maxmin":
        adv = adversary_first_move_maxmin(g, x, cfg.ell, cfg.b)
        des = designer_response_maxmin(g, adv.control.break_set, x, cfg.ell, cfg.b)
        return adv, des
    if cfg.mode == "minmax":
        des = designer_first_move_minmax(
            g, x, cfg.ell, cfg.b, guard=cfg.subset_guard, slack=cfg.ranking_slack
        )
        adv = adversary_response_minmax(g, des.control.boosts, x, cfg.ell)
        return adv, des
    if cfg.mode == "adversary_only":
        # No opponent to anticipate: b = 0 collapses the paired ranking
        # onto the plain power-dissipation order weight * gap.
        return adversary_first_move_maxmin(g, x, cfg.ell, 0.0), None
    if cfg.mode == "designer_only":
        return None, designer_response_maxmin(g, frozenset(), x, cfg.ell, cfg.b)
    return None, None


def run(g: Graph, cfg: GameConfig) -> GameResult:
    """Play one full game in the configured mode and return its value.

    The result's value is exactly the cost of its own trajectory under the
    configured kernel (same quadrature path).
    """
    if len(cfg.x0) != g.node_count:
        raise ValueError(f"x0 has length {len(cfg.x0)}, expected {g.node_count}")
    if cfg.ell > g.edge_count:
        raise ValueError(f"budget ell={cfg.ell} exceeds edge count {g.edge_count}")
    steps = steps_per_interval(cfg.horizon, cfg.switching_count, cfg.dt)
    total = steps * cfg.switching_count
    times = np.linspace(0.0, cfg.horizon, total + 1)
    h = float(times[1] - times[0])
    states = np.empty((total + 1, g.node_count))
    x = np.asarray(cfg.x0, dtype=float)
    states[0] = x
    plays = []
    controls = []
    for k in range(cfg.switching_count):
        adv, des = _choose_actions(g, x, cfg)
        control = ControlPair(
            break_set=adv.control.break_set if adv is not None else frozenset(),
            boosts=dict(des.control.boosts) if des is not None else {},
        )
        a_mat = assemble_matrix(g, control)
        block = advance_interval(a_mat, x, steps, h)
        states[k * steps + 1 : (k + 1) * steps + 1] = block
        x = block[-1]
        plays.append(IntervalPlay(float(times[k * steps]), adv, des, control))
        controls.append(control)
    traj = build_trajectory(times, states, tuple(controls), steps, cfg.kernel)
    return GameResult(
        mode=cfg.mode,
        value=cost(traj, cfg.kernel),
        trajectory=traj,
        interval_plays=tuple(plays),
    )


def upper_lower_values(g: Graph, cfg: GameConfig) -> Tuple[float, float]:
    """(lower value, upper value): adversary-first and designer-first play.

    No ordering between the two is implied; the strategy spaces are not
    rectangular, so the usual inequality need not hold.
    """
    lower = run(g, replace(cfg, mode="maxmin")).value
    upper = run(g, replace(cfg, mode="minmax")).value
    return lower, upper
