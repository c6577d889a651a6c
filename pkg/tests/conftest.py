"""Shared builders for graphs, configs, randomized instances, and the
single-instant stage oracle used to cross-check the ranking strategies."""

from __future__ import annotations

import itertools

import numpy as np

from consensus_interdiction import ControlPair, GameConfig, Graph, negative_gaps, select_most_negative


def two_node(a: float = 1.0) -> Graph:
    return Graph(2, ((1, 2, a),))


def path3(a12: float = 1.0, a23: float = 2.0) -> Graph:
    return Graph(3, ((1, 2, a12), (2, 3, a23)))


def triangle(a: float = 1.0) -> Graph:
    return Graph(3, ((1, 2, a), (1, 3, a), (2, 3, a)))


def base_config(g: Graph, **overrides) -> GameConfig:
    n = g.node_count
    defaults = dict(
        x0=tuple(np.linspace(1.0, -1.0, n)),
        ell=1,
        b=1.0,
        horizon=1.0,
        dt=1e-3,
        switching_count=1,
        mode="uncontrolled",
    )
    defaults.update(overrides)
    return GameConfig(**defaults)


def random_connected_graph(rng: np.random.Generator, n: int, m: int) -> Graph:
    """Random spanning tree plus extra edges, weights uniform in [0.5, 2]."""
    all_pairs = list(itertools.combinations(range(1, n + 1), 2))
    perm = list(rng.permutation(np.arange(1, n + 1)))
    tree = set()
    for k in range(1, n):
        a = int(perm[k])
        b = int(perm[int(rng.integers(0, k))])
        tree.add((min(a, b), max(a, b)))
    extra = [p for p in all_pairs if p not in tree]
    rng.shuffle(extra)
    chosen = sorted(tree | set(extra[: max(0, m - len(tree))]))
    return Graph(n, tuple((i, j, float(rng.uniform(0.5, 2.0))) for i, j in chosen))


def random_schedule(
    rng: np.random.Generator, g: Graph, ell: int, b: float, intervals: int
) -> list[ControlPair]:
    """Admissible piecewise controls: random break sets and boosts in [0, b]."""
    edges = list(g.edge_ids)
    schedule = []
    for _ in range(intervals):
        n_break = int(rng.integers(0, ell + 1))
        broken = [edges[i] for i in rng.choice(len(edges), size=n_break, replace=False)]
        n_boost = int(rng.integers(0, ell + 1))
        boosted = [edges[i] for i in rng.choice(len(edges), size=n_boost, replace=False)]
        boosts = {e: float(rng.uniform(0.0, b)) for e in boosted}
        schedule.append(ControlPair(break_set=frozenset(broken), boosts=boosts))
    return schedule


# --------------------------------------------------------------------------
# Single-instant stage oracle: enumerate every first-mover action, apply the
# opponent's exact best response, and score the kept Hamiltonian control term
# sum over surviving edges of (a + v) * gaps.
# --------------------------------------------------------------------------


def subsets_up_to(edges, budget):
    out = []
    for size in range(budget + 1):
        out.extend(itertools.combinations(edges, size))
    return out


def stage_value(g: Graph, gaps, boosts, break_set) -> float:
    return sum(
        (g.weight(e) + boosts.get(e, 0.0)) * gaps[e]
        for e in g.edge_ids
        if e not in break_set
    )


def designer_first_stage_merits(g: Graph, x, ell: int, b: float) -> list[float]:
    """Realized stage value of every designer-first boost subset, ascending."""
    gaps = negative_gaps(x, g)
    merits = []
    for subset in subsets_up_to(g.edge_ids, ell):
        boosts = {e: b for e in subset}
        values = {e: (g.weight(e) + boosts.get(e, 0.0)) * gaps[e] for e in g.edge_ids}
        broken = set(select_most_negative(values, ell).links)
        merits.append(stage_value(g, gaps, boosts, broken))
    merits.sort()
    return merits


def adversary_first_stage_merits(g: Graph, x, ell: int, b: float) -> list[float]:
    """Realized stage value of every adversary-first break subset, descending."""
    gaps = negative_gaps(x, g)
    merits = []
    for subset in subsets_up_to(g.edge_ids, ell):
        broken = set(subset)
        surviving = {e: gaps[e] for e in g.edge_ids if e not in broken}
        boosts = {e: b for e in select_most_negative(surviving, ell).links}
        merits.append(stage_value(g, gaps, boosts, broken))
    merits.sort(reverse=True)
    return merits


def exhaustive_designer_first_move(g: Graph, x, ell: int, b: float) -> float:
    return designer_first_stage_merits(g, x, ell, b)[0]


def exhaustive_adversary_first_move(g: Graph, x, ell: int, b: float) -> float:
    return adversary_first_stage_merits(g, x, ell, b)[0]
