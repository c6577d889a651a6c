"""Ranking-based optimal play for both orders of the link game.

All rankings run on the adjoint-free link gap values -(x_i - x_j)^2, which
order links exactly like the costate-based sensitivities and make the
strategies computable without solving the costate equations. Interpreted
electrically, (a_ij + v_ij) (x_i - x_j)^2 is the power dissipated across a
link: the designer raises conductance where dissipation is highest, the
adversary cuts those same links.

Deterministic conventions used throughout:
  - only strictly negative values are ever ranked; links with a zero gap
    value are never acted on (the null action is optimal there);
  - ties in any ranking break lexicographically by canonical edge id;
  - when fewer than ``ell`` negative links exist, all of them are taken.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import AbstractSet, Mapping, Optional, Tuple

from .dynamics import ControlPair, negative_gaps
from .graph import EdgeId, Graph

DEFAULT_SUBSET_GUARD = 1_000_000


class EnumerationGuardError(RuntimeError):
    """A subset search would exceed its configured enumeration budget."""


@dataclass(frozen=True)
class RankedLinks:
    """Strictly negative link values in ascending order, ties by edge id."""

    entries: Tuple[Tuple[EdgeId, float], ...]

    @property
    def links(self) -> Tuple[EdgeId, ...]:
        return tuple(edge for edge, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, edge: EdgeId) -> bool:
        return any(e == edge for e, _ in self.entries)


@dataclass(frozen=True)
class StrategyOutcome:
    """A computed action plus the ranked sets that produced it."""

    control: ControlPair
    ranked: Mapping[str, tuple]
    subset: Optional[Tuple[EdgeId, ...]] = None
    loop_index: Optional[int] = None
    fallback: bool = False
    selection: Optional[str] = None

    def to_record(self) -> dict:
        record = {
            "broken": [list(edge) for edge in sorted(self.control.break_set)],
            "boosted": [
                [list(edge), value]
                for edge, value in sorted(self.control.boosts.items())
            ],
            "ranked": {
                name: [[list(entry[0]), *entry[1:]] for entry in entries]
                for name, entries in sorted(self.ranked.items())
            },
            "fallback": self.fallback,
        }
        if self.subset is not None:
            record["subset"] = [list(edge) for edge in self.subset]
        if self.loop_index is not None:
            record["loop_index"] = self.loop_index
        if self.selection is not None:
            record["selection"] = self.selection
        return record


def select_most_negative(values: Mapping[EdgeId, float], budget: int) -> RankedLinks:
    """The at-most-``budget`` most negative entries, ascending.

    Only strictly negative values participate; a budget of zero selects
    nothing. Ties break lexicographically by edge id.
    """
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    ranked = sorted((value, edge) for edge, value in values.items() if value < 0.0)
    return RankedLinks(tuple((edge, value) for value, edge in ranked[:budget]))


def adversary_first_move_maxmin(
    g: Graph, x, ell: int, b: float
) -> StrategyOutcome:
    """First-moving adversary: break the links that can hurt him most.

    For every link with a negative gap value, both the plain product
    weight * gap and the boost-anticipating product (weight + b) * gap join
    one ranked pool; walking the pool in ascending order breaks each newly
    seen link until the budget is spent. A link consumes one budget slot
    even when both of its values rank among the smallest.
    """
    gaps = negative_gaps(x, g)
    pool = []
    for edge in g.edge_ids:
        value = gaps[edge]
        if value < 0.0:
            w = g.weight(edge)
            pool.append(((w + b) * value, edge, "boosted"))
            pool.append((w * value, edge, "plain"))
    pool.sort()
    chosen: list[EdgeId] = []
    seen: set[EdgeId] = set()
    for value, edge, _family in pool:
        if len(chosen) >= ell:
            break
        if edge in seen:
            continue
        seen.add(edge)
        chosen.append(edge)
    ranked = tuple((edge, value, family) for value, edge, family in pool)
    return StrategyOutcome(
        control=ControlPair(break_set=frozenset(chosen)),
        ranked={"break_candidates": ranked},
    )


def designer_response_maxmin(
    g: Graph, break_set: AbstractSet[EdgeId], x, ell: int, b: float
) -> StrategyOutcome:
    """Second-moving designer: boost the worst surviving links.

    Only links that survived the realized break set are ranked, so a broken
    link is never boosted.
    """
    gaps = negative_gaps(x, g)
    surviving = {edge: gaps[edge] for edge in g.edge_ids if edge not in break_set}
    selection = select_most_negative(surviving, ell)
    boosts = {edge: b for edge in selection.links} if b > 0.0 else {}
    return StrategyOutcome(
        control=ControlPair(boosts=boosts),
        ranked={"boost_candidates": selection.entries},
    )


def adversary_response_minmax(
    g: Graph, boosts: Mapping[EdgeId, float], x, ell: int
) -> StrategyOutcome:
    """Second-moving adversary: break the worst links under the declared boosts."""
    gaps = negative_gaps(x, g)
    values = {
        edge: (g.weight(edge) + boosts.get(edge, 0.0)) * gaps[edge]
        for edge in g.edge_ids
    }
    selection = select_most_negative(values, ell)
    return StrategyOutcome(
        control=ControlPair(break_set=frozenset(selection.links)),
        ranked={"break_candidates": selection.entries},
    )


def _displaced(
    target: EdgeId, target_value: float, ranking: RankedLinks, slack: float
) -> bool:
    if target in ranking:
        return False
    if slack > 0.0 and len(ranking) > 0:
        threshold = ranking.entries[-1][1]
        return target_value - threshold >= slack
    return True


def designer_first_move_minmax(
    g: Graph,
    x,
    ell: int,
    b: float,
    guard: int = DEFAULT_SUBSET_GUARD,
    slack: float = 0.0,
) -> StrategyOutcome:
    """First-moving designer: pick the boost set with the best realized value.

    Candidates come from three families, in preference order for ties:

    1. Displacement. Walk the unboosted break list from its most negative
       member down; at loop index i search, in lexicographic order, every
       sacrifice set S of i links outside the break list (with weight * gap < 0)
       whose boosted values push the i-th ranked member out of the
       adversary's top-ell list. Each success is completed with the
       (ell - i) most negative remaining links not about to be broken
       (duplicates skipped, no backfill). The first loop index with any
       success contributes its best-scoring candidate.
    2. Fallback: boost the ell most negative links outside the unboosted
       break list.
    3. Direct: every boost subset of size at most ell, in size-then-
       lexicographic order. This family covers allocations that neither
       displace nor chase the most negative links, e.g. strengthening a
       link the adversary will leave alone.

    Every candidate is scored by the stage value it realizes under the
    adversary's best response to the full boost, and the best score wins
    (strictly better only, so earlier families keep ties). The exhaustive
    family is what makes the routine agree with brute-force search over
    boost subsets at a single switching instant.

    Raises EnumerationGuardError once more than ``guard`` candidate subsets
    have been examined; the instance is then too large for the exact search.
    """
    gaps = negative_gaps(x, g)
    weights = g.weights

    def break_ranking(boosted: AbstractSet[EdgeId]) -> RankedLinks:
        values = {
            edge: (weights[edge] + (b if edge in boosted else 0.0)) * gaps[edge]
            for edge in g.edge_ids
        }
        return select_most_negative(values, ell)

    def realized_stage_value(boost_edges: AbstractSet[EdgeId]) -> float:
        response = set(break_ranking(boost_edges).links)
        return sum(
            (weights[edge] + (b if edge in boost_edges else 0.0)) * gaps[edge]
            for edge in g.edge_ids
            if edge not in response
        )

    base = break_ranking(frozenset())
    base_links = set(base.links)
    sacrifice_pool = sorted(
        edge
        for edge in g.edge_ids
        if weights[edge] * gaps[edge] < 0.0 and edge not in base_links
    )
    diagnostics: dict[str, tuple] = {
        "break_list_unboosted": base.entries,
        "sacrifice_pool": tuple(
            (edge, weights[edge] * gaps[edge]) for edge in sacrifice_pool
        ),
    }
    examined = 0

    def bump_guard() -> None:
        nonlocal examined
        examined += 1
        if examined > guard:
            raise EnumerationGuardError(
                f"boost-subset search examined more than {guard} subsets"
            )

    best_score = None
    best_outcome = None

    def consider(score: float, outcome: StrategyOutcome) -> None:
        nonlocal best_score, best_outcome
        if best_score is None or score < best_score:
            best_score = score
            best_outcome = outcome

    # Displacement family. b == 0 cannot move any value, so skip the search.
    if b > 0.0:
        for i in range(min(ell, len(base)), 0, -1):
            target, _ = base.entries[len(base) - i]
            target_value = weights[target] * gaps[target]
            found = None
            for sacrifice in itertools.combinations(sacrifice_pool, i):
                bump_guard()
                shifted = break_ranking(frozenset(sacrifice))
                if not _displaced(target, target_value, shifted, slack):
                    continue
                shifted_links = set(shifted.links)
                spare = select_most_negative(
                    {
                        edge: gaps[edge]
                        for edge in g.edge_ids
                        if edge not in shifted_links
                    },
                    ell - i,
                )
                boost_edges = frozenset(sacrifice) | frozenset(spare.links)
                score = realized_stage_value(boost_edges)
                if found is None or score < found[0]:
                    found = (score, sacrifice, boost_edges, shifted, spare)
            if found is not None:
                score, sacrifice, boost_edges, shifted, spare = found
                info = dict(diagnostics)
                info["post_sacrifice_break_list"] = shifted.entries
                info["spare_candidates"] = spare.entries
                consider(
                    score,
                    StrategyOutcome(
                        control=ControlPair(
                            boosts={edge: b for edge in sorted(boost_edges)}
                        ),
                        ranked=info,
                        subset=sacrifice,
                        loop_index=i,
                        selection="displacement",
                    ),
                )
                break

    # Fallback family.
    fallback = select_most_negative(
        {edge: gaps[edge] for edge in g.edge_ids if edge not in base_links}, ell
    )
    fallback_edges = frozenset(fallback.links) if b > 0.0 else frozenset()
    info = dict(diagnostics)
    info["fallback_candidates"] = fallback.entries
    consider(
        realized_stage_value(fallback_edges),
        StrategyOutcome(
            control=ControlPair(boosts={edge: b for edge in sorted(fallback_edges)}),
            ranked=info,
            fallback=True,
            selection="fallback",
        ),
    )

    # Direct family: all remaining bang-bang allocations.
    if b > 0.0:
        for size in range(ell + 1):
            for subset in itertools.combinations(g.edge_ids, size):
                boost_edges = frozenset(
                    edge for edge in subset if gaps[edge] < 0.0
                )
                bump_guard()
                consider(
                    realized_stage_value(boost_edges),
                    StrategyOutcome(
                        control=ControlPair(
                            boosts={edge: b for edge in sorted(boost_edges)}
                        ),
                        ranked=dict(diagnostics),
                        selection="direct",
                    ),
                )
    assert best_outcome is not None
    return best_outcome
