"""Genotype lifecycle: initialization, mutation and (mu+lambda) selection.

Uniqueness is enforced at the phenotype level: every decoded molecule's
canonical key goes into an insert-only registry, and candidates whose key was
seen before are regenerated (bounded by a retry limit). Selection is elitist
plus-selection with deterministic tie-breaking (age before key), so identical
seeds reproduce identical runs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .metrics import MetricConfig, ObjectiveVector, scalarize
from .molgraph import MolecularGraph, canonical_form
from .selfies import Alphabet, SelfiesString, decode, random_string

logger = logging.getLogger(__name__)


class InitializationError(RuntimeError):
    pass


class MutationError(RuntimeError):
    pass


@dataclass
class Individual:
    genotype: SelfiesString
    phenotype_key: str
    objectives: Optional[ObjectiveVector] = None
    fitness: Optional[float] = None
    birth_generation: int = 0
    graph: Optional[MolecularGraph] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class MutationRates:
    p_r: float = 0.05  # per-symbol replacement
    p_i: float = 0.10  # one insertion per child
    p_d: float = 0.10  # one deletion per child

    def __post_init__(self):
        for name in ("p_r", "p_i", "p_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class EvolutionConfig:
    mu: int = 10
    lambda_: int = 100
    max_generations: int = 200
    max_tokens: int = 80
    init_length: int = 20
    duplicate_retry_limit: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.mu < 1 or self.lambda_ < 1:
            raise ValueError("mu and lambda must be >= 1")
        if not 1 <= self.init_length <= self.max_tokens:
            raise ValueError("init_length must lie in [1, max_tokens]")


class UniquenessRegistry:
    """Insert-only set of phenotype keys evaluated during one run."""

    def __init__(self):
        self._keys: set[str] = set()
        # genotype -> phenotype key memo; avoids re-decoding candidates the
        # mutation retry loop has produced before (outcome-neutral cache)
        self._genotype_memo: dict[tuple, str] = {}

    def add(self, key: str) -> bool:
        """Register a key; False if it was already present."""
        if key in self._keys:
            return False
        self._keys.add(key)
        return True

    def __contains__(self, key: str) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)


@dataclass(frozen=True)
class MutationStats:
    replaced: int
    inserted: bool
    deleted: bool


def mutate_genotype(
    genotype: SelfiesString,
    rates: MutationRates,
    alphabet: Alphabet,
    rng: np.random.Generator,
    max_tokens: int = 80,
) -> tuple[SelfiesString, MutationStats]:
    """Apply replacement, then one insertion, then one deletion.

    Each symbol is replaced independently with probability p_r; one insertion
    at a uniform position fires with probability p_i (skipped at max_tokens);
    one deletion of a uniform symbol fires with probability p_d (skipped at
    length 1). Pure given the rng.
    """
    symbols = list(genotype.symbols)
    mask = rng.random(len(symbols)) < rates.p_r
    replaced = int(mask.sum())
    for pos in np.flatnonzero(mask):
        symbols[pos] = alphabet.sample(rng)

    inserted = False
    if rng.random() < rates.p_i and len(symbols) < max_tokens:
        pos = int(rng.integers(0, len(symbols) + 1))
        symbols.insert(pos, alphabet.sample(rng))
        inserted = True

    deleted = False
    if rng.random() < rates.p_d and len(symbols) > 1:
        pos = int(rng.integers(0, len(symbols)))
        del symbols[pos]
        deleted = True

    return SelfiesString(tuple(symbols)), MutationStats(replaced, inserted, deleted)


def _make_individual(genotype: SelfiesString, generation: int) -> Individual:
    graph = decode(genotype)
    key = canonical_form(graph, check=False)
    return Individual(
        genotype=genotype,
        phenotype_key=key,
        birth_generation=generation,
        graph=graph,
    )


def init_population(
    cfg: EvolutionConfig,
    alphabet: Alphabet,
    registry: UniquenessRegistry,
    rng: np.random.Generator,
) -> list[Individual]:
    """mu individuals with pairwise-distinct phenotype keys, all registered."""
    population: list[Individual] = []
    for _ in range(cfg.mu):
        for _attempt in range(cfg.duplicate_retry_limit):
            candidate = _make_individual(
                random_string(cfg.init_length, alphabet, rng), generation=0
            )
            if registry.add(candidate.phenotype_key):
                population.append(candidate)
                break
        else:
            raise InitializationError(
                f"could not draw a unique phenotype within "
                f"{cfg.duplicate_retry_limit} attempts"
            )
    return population


def mutate(
    parent: Individual,
    rates: MutationRates,
    alphabet: Alphabet,
    registry: UniquenessRegistry,
    rng: np.random.Generator,
    max_tokens: int = 80,
    retry_limit: int = 100,
    generation: int = 0,
    enforce_unique: bool = True,
) -> Individual:
    """Derive a child whose phenotype was never seen before (and register it).

    With ``enforce_unique=False`` a single mutation pass is returned without
    touching the registry (useful for operator-level statistics).
    """
    if not enforce_unique:
        genotype, _ = mutate_genotype(parent.genotype, rates, alphabet, rng, max_tokens)
        return _make_individual(genotype, generation)
    memo = registry._genotype_memo
    for _attempt in range(retry_limit):
        genotype, _ = mutate_genotype(parent.genotype, rates, alphabet, rng, max_tokens)
        if genotype.symbols == parent.genotype.symbols:
            continue  # no-op mutation: the parent's phenotype is registered
        known_key = memo.get(genotype.symbols)
        if known_key is not None and known_key in registry:
            continue
        child = _make_individual(genotype, generation)
        memo[genotype.symbols] = child.phenotype_key
        if registry.add(child.phenotype_key):
            return child
    raise MutationError(
        f"no unseen phenotype within {retry_limit} mutation attempts"
    )


def generate_offspring(
    parents: Sequence[Individual],
    cfg: EvolutionConfig,
    rates: MutationRates,
    alphabet: Alphabet,
    registry: UniquenessRegistry,
    rng: np.random.Generator,
    generation: int,
) -> list[Individual]:
    """lambda offspring from uniformly drawn parents; exhausted slots are skipped."""
    offspring: list[Individual] = []
    for _ in range(cfg.lambda_):
        parent = parents[int(rng.integers(0, len(parents)))]
        try:
            child = mutate(
                parent,
                rates,
                alphabet,
                registry,
                rng,
                max_tokens=cfg.max_tokens,
                retry_limit=cfg.duplicate_retry_limit,
                generation=generation,
            )
        except MutationError as exc:
            logger.warning("offspring slot skipped: %s", exc)
            continue
        offspring.append(child)
    return offspring


def evaluate_individuals(
    individuals: Sequence[Individual],
    evaluator: Callable[[MolecularGraph], ObjectiveVector],
    scalarizer: Optional[Callable[[ObjectiveVector], float]] = None,
    on_evaluated: Optional[Callable[[Individual], None]] = None,
) -> None:
    """Evaluate in index order; a failing evaluator yields the worst vector."""
    for ind in individuals:
        if ind.objectives is not None:
            continue
        graph = ind.graph if ind.graph is not None else decode(ind.genotype)
        try:
            ind.objectives = evaluator(graph)
        except Exception as exc:  # noqa: BLE001 - contract: degrade, don't abort
            logger.warning(
                "evaluation failed for %s (%s); assigning worst objectives",
                ind.phenotype_key,
                exc,
            )
            ind.objectives = ObjectiveVector.worst()
        if scalarizer is not None:
            ind.fitness = scalarizer(ind.objectives)
        if on_evaluated is not None:
            on_evaluated(ind)


def plus_selection(pool: Sequence[Individual], mu: int) -> list[Individual]:
    """Best mu by ascending fitness; ties: older birth generation, then key."""
    ranked = sorted(
        pool, key=lambda ind: (ind.fitness, ind.birth_generation, ind.phenotype_key)
    )
    return ranked[:mu]


def step_single_objective(
    parents: Sequence[Individual],
    cfg: EvolutionConfig,
    rates: MutationRates,
    alphabet: Alphabet,
    evaluator: Callable[[MolecularGraph], ObjectiveVector],
    registry: UniquenessRegistry,
    rng: np.random.Generator,
    generation: int,
    metric_config: Optional[MetricConfig] = None,
    on_evaluated: Optional[Callable[[Individual], None]] = None,
) -> list[Individual]:
    """One (mu+lambda) generation of the weighted-sum mode."""
    mcfg = metric_config or MetricConfig()
    scalarizer = lambda v: scalarize(v, mcfg)  # noqa: E731
    offspring = generate_offspring(
        parents, cfg, rates, alphabet, registry, rng, generation
    )
    evaluate_individuals(offspring, evaluator, scalarizer, on_evaluated)
    return plus_selection(list(parents) + offspring, cfg.mu)
