"""Evolutionary multi-objective molecule design on SELFIES-style strings."""

__version__ = "0.1.0"

from .molgraph import (
    Atom,
    Bond,
    MolecularGraph,
    ValidityReport,
    canonical_form,
    validate,
)
from .selfies import (
    Alphabet,
    SelfiesParseError,
    SelfiesString,
    SelfiesSymbol,
    decode,
    default_alphabet,
    parse_symbols,
    random_string,
    render,
)
from .descriptors import DescriptorSet, descriptors
from .patterns import DEFAULT_ALERTS, SubstructurePattern, matches
from .metrics import (
    DesirabilityParams,
    MetricConfig,
    ObjectiveEvaluator,
    ObjectiveVector,
    filters,
    normalize_docking,
    np_score,
    qed,
    sa_score,
    scalarize,
    soft_clip,
)
from .gateway import (
    DockingConfig,
    DockingGateway,
    GatewayError,
    ScoreRequest,
    ScoreResponse,
    score_batch,
    surrogate_score,
)
from .evolution import (
    EvolutionConfig,
    Individual,
    InitializationError,
    MutationError,
    MutationRates,
    UniquenessRegistry,
    init_population,
    mutate,
    step_single_objective,
)
from .moea import (
    HypervolumeRef,
    crowding_distance,
    dominates,
    hypervolume,
    non_dominated_sort,
    nsga2_select,
    step_nsga2,
)
from .harness import ExperimentConfig, RunArtifacts, run_experiment

__all__ = [
    "Alphabet",
    "Atom",
    "Bond",
    "DEFAULT_ALERTS",
    "DescriptorSet",
    "DesirabilityParams",
    "DockingConfig",
    "DockingGateway",
    "EvolutionConfig",
    "ExperimentConfig",
    "GatewayError",
    "HypervolumeRef",
    "Individual",
    "InitializationError",
    "MetricConfig",
    "MolecularGraph",
    "MutationError",
    "MutationRates",
    "ObjectiveEvaluator",
    "ObjectiveVector",
    "RunArtifacts",
    "ScoreRequest",
    "ScoreResponse",
    "SelfiesParseError",
    "SelfiesString",
    "SelfiesSymbol",
    "SubstructurePattern",
    "UniquenessRegistry",
    "ValidityReport",
    "canonical_form",
    "crowding_distance",
    "decode",
    "default_alphabet",
    "descriptors",
    "dominates",
    "filters",
    "hypervolume",
    "init_population",
    "matches",
    "mutate",
    "non_dominated_sort",
    "normalize_docking",
    "np_score",
    "nsga2_select",
    "parse_symbols",
    "qed",
    "random_string",
    "render",
    "run_experiment",
    "sa_score",
    "scalarize",
    "score_batch",
    "soft_clip",
    "step_nsga2",
    "step_single_objective",
    "surrogate_score",
    "validate",
]
