"""Pareto machinery: dominance, non-dominated sorting, crowding, NSGA-II
environmental selection and exact hypervolume (S-metric).

All objectives are minimized. The hypervolume is computed exactly by a
recursive dimension sweep with dominance pruning at every level; at the
population sizes used here (fronts of ~20 points in 5D) this stays well
below a millisecond-to-seconds budget and needs no approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .evolution import (
    EvolutionConfig,
    Individual,
    MutationRates,
    UniquenessRegistry,
    evaluate_individuals,
    generate_offspring,
)
from .metrics import ObjectiveVector
from .molgraph import MolecularGraph
from .selfies import Alphabet

Point = Sequence[float]


def dominates(a: Point, b: Point) -> bool:
    """True iff a is componentwise <= b with at least one strict <."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def non_dominated_sort(points: Sequence[Point]) -> list[list[int]]:
    """Fronts of point indices by non-domination rank (rank 0 first)."""
    n = len(points)
    if n == 0:
        raise ValueError("non_dominated_sort needs at least one point")
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    n_dominating = [0] * n
    for p in range(n):
        for q in range(p + 1, n):
            if dominates(points[p], points[q]):
                dominated_by[p].append(q)
                n_dominating[q] += 1
            elif dominates(points[q], points[p]):
                dominated_by[q].append(p)
                n_dominating[p] += 1
    fronts = [[p for p in range(n) if n_dominating[p] == 0]]
    while True:
        nxt: list[int] = []
        for p in fronts[-1]:
            for q in dominated_by[p]:
                n_dominating[q] -= 1
                if n_dominating[q] == 0:
                    nxt.append(q)
        if not nxt:
            return fronts
        fronts.append(nxt)


def crowding_distance(points: Sequence[Point]) -> list[float]:
    """NSGA-II crowding distances for the members of one front.

    Boundary members per objective get infinity; interior members accumulate
    (next - prev) / (max - min); objectives with zero range contribute 0.
    """
    n = len(points)
    if n == 0:
        raise ValueError("crowding_distance needs a nonempty front")
    m = len(points[0])
    dist = [0.0] * n
    for obj in range(m):
        order = sorted(range(n), key=lambda i: (points[i][obj], i))
        dist[order[0]] = dist[order[-1]] = math.inf
        vmin = points[order[0]][obj]
        vmax = points[order[-1]][obj]
        if vmax == vmin:
            continue
        span = vmax - vmin
        for k in range(1, n - 1):
            i = order[k]
            if dist[i] == math.inf:
                continue
            dist[i] += (points[order[k + 1]][obj] - points[order[k - 1]][obj]) / span
    return dist


def nsga2_select(candidates: Sequence[Individual], mu: int) -> list[Individual]:
    """Environmental selection: fill by rank, split the last front by crowding.

    Candidates are ordered canonically by phenotype key first, so the result
    does not depend on input permutation; crowding ties break by key.
    """
    if len(candidates) < mu:
        raise ValueError(f"need at least mu={mu} candidates, got {len(candidates)}")
    pool = sorted(candidates, key=lambda ind: ind.phenotype_key)
    points = [ind.objectives.as_tuple() for ind in pool]
    survivors: list[Individual] = []
    for front in non_dominated_sort(points):
        if len(survivors) + len(front) <= mu:
            survivors.extend(pool[i] for i in front)
            if len(survivors) == mu:
                break
        else:
            room = mu - len(survivors)
            dists = crowding_distance([points[i] for i in front])
            ranked = sorted(
                zip(front, dists),
                key=lambda t: (-t[1], pool[t[0]].phenotype_key),
            )
            survivors.extend(pool[i] for i, _ in ranked[:room])
            break
    return survivors


# ---------------------------------------------------------------------------
# hypervolume
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypervolumeRef:
    """Reference corner; defaults to the worst point of the unit cube."""

    point: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)


def _prune(points: list[tuple[float, ...]]) -> list[tuple[float, ...]]:
    """Drop duplicates and dominated points (keeps the union volume intact)."""
    uniq = sorted(set(points))
    keep: list[tuple[float, ...]] = []
    for p in uniq:
        dominated = False
        for q in uniq:
            if q != p and all(qx <= px for qx, px in zip(q, p)):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return keep


def _hv(points: list[tuple[float, ...]], ref: tuple[float, ...]) -> float:
    points = _prune(points)
    if not points:
        return 0.0
    d = len(ref)
    if d == 1:
        return ref[0] - min(p[0] for p in points)
    order = sorted(points, key=lambda p: p[-1])
    volume = 0.0
    for i, p in enumerate(order):
        z0 = p[-1]
        z1 = order[i + 1][-1] if i + 1 < len(order) else ref[-1]
        if z1 > z0:
            active = [q[:-1] for q in order[: i + 1]]
            volume += (z1 - z0) * _hv(active, ref[:-1])
    return volume


def hypervolume(
    points: Sequence[Point], ref: HypervolumeRef | Sequence[float] = HypervolumeRef()
) -> float:
    """Exact dominated hypervolume of a point set against a reference corner.

    Points worse than the reference in some coordinate are clipped to it
    (contributing zero measure along that axis). Empty input gives 0.
    """
    ref_point = tuple(ref.point if isinstance(ref, HypervolumeRef) else ref)
    if not points:
        return 0.0
    clipped = []
    for p in points:
        if len(p) != len(ref_point):
            raise ValueError("point/reference dimension mismatch")
        clipped.append(tuple(min(float(x), r) for x, r in zip(p, ref_point)))
    return _hv(clipped, ref_point)


# ---------------------------------------------------------------------------
# NSGA-II generation step
# ---------------------------------------------------------------------------


def step_nsga2(
    parents: Sequence[Individual],
    cfg: EvolutionConfig,
    rates: MutationRates,
    alphabet: Alphabet,
    evaluator: Callable[[MolecularGraph], ObjectiveVector],
    registry: UniquenessRegistry,
    rng: np.random.Generator,
    generation: int,
    on_evaluated: Optional[Callable[[Individual], None]] = None,
) -> list[Individual]:
    """One NSGA-II generation: same offspring scheme, Pareto selection."""
    offspring = generate_offspring(
        parents, cfg, rates, alphabet, registry, rng, generation
    )
    evaluate_individuals(offspring, evaluator, on_evaluated=on_evaluated)
    return nsga2_select(list(parents) + offspring, cfg.mu)


def rank0_front(population: Sequence[Individual]) -> list[Individual]:
    """Non-dominated members of a population, in phenotype-key order."""
    pool = sorted(population, key=lambda ind: ind.phenotype_key)
    points = [ind.objectives.as_tuple() for ind in pool]
    return [pool[i] for i in non_dominated_sort(points)[0]]
