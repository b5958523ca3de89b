"""The five molecule objectives, unified to [0, 1] with 0 as the optimum.

Raw metric scales differ (docking energy in kcal/mol with -inf optimal,
synthetic accessibility in [1, 10] with 1 optimal, drug-likeness in [0, 1]
with 1 optimal, natural-product likeness in [-5, 5] with 5 optimal, filters
pass/fail). Every normalizer here maps its raw scale onto the unified
0-is-best unit interval and documents the affine map it applies.

Weighted-sum scalarization uses weights (0.4, 0.15, 0.15, 0.15, 0.15) over
(docking, SA, QED, NP, filters) by default.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import yaml

from .descriptors import DescriptorSet, atom_signature, descriptors
from .molgraph import MolecularGraph
from .patterns import DEFAULT_ALERTS, SubstructurePattern
from . import selfies as sf

logger = logging.getLogger(__name__)

OBJECTIVE_NAMES = ("docking", "sa", "qed", "np", "filters")
PAPER_WEIGHTS = (0.4, 0.15, 0.15, 0.15, 0.15)


@dataclass(frozen=True)
class ObjectiveVector:
    """Five unified objective values, each in [0, 1], 0 = best."""

    docking: float
    sa: float
    qed: float
    np: float
    filters: float

    def __post_init__(self):
        for name in OBJECTIVE_NAMES:
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"objective {name}={v} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.docking, self.sa, self.qed, self.np, self.filters)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @staticmethod
    def worst() -> "ObjectiveVector":
        return ObjectiveVector(1.0, 1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class MetricConfig:
    """Normalization and scalarization settings."""

    weights: tuple[float, float, float, float, float] = PAPER_WEIGHTS
    docking_min: float = -15.0  # kcal/mol mapped to ~0
    docking_max: float = 1.0  # kcal/mol mapped to ~1
    softclip_sharpness: float = 50.0

    def __post_init__(self):
        if len(self.weights) != 5 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be 5 nonnegative values")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if not self.docking_min < self.docking_max:
            raise ValueError("docking_min must be below docking_max")
        if self.softclip_sharpness <= 0:
            raise ValueError("softclip sharpness must be positive")


# ---------------------------------------------------------------------------
# docking normalization
# ---------------------------------------------------------------------------


def soft_clip(t: float, sharpness: float = 50.0) -> float:
    """Smooth clip of the real line onto (0, 1).

    sc(t) = (1/a) * ln[(1 + exp(a*t)) / (1 + exp(a*(t-1)))]. Strictly
    increasing, symmetric about t = 0.5 where it equals 0.5 exactly.
    """
    a = sharpness
    return float((np.logaddexp(0.0, a * t) - np.logaddexp(0.0, a * (t - 1.0))) / a)


def normalize_docking(energy: float, config: Optional[MetricConfig] = None) -> float:
    """Map a docking energy (kcal/mol) onto (0, 1), lower energy -> lower score.

    Affine map t = (e - docking_min) / (docking_max - docking_min) followed by
    the soft clip; with the default range, -15 kcal/mol scores ~0.014 and the
    midpoint -7 kcal/mol scores exactly 0.5.
    """
    cfg = config or MetricConfig()
    if not math.isfinite(energy):
        raise ValueError(f"docking energy must be finite, got {energy}")
    t = (energy - cfg.docking_min) / (cfg.docking_max - cfg.docking_min)
    return soft_clip(t, cfg.softclip_sharpness)


# ---------------------------------------------------------------------------
# drug-likeness (QED-style)
# ---------------------------------------------------------------------------

QED_DESCRIPTORS = ("mw", "alogp", "hba", "hbd", "psa", "rotb", "arom", "alerts")

# Asymmetric double sigmoid rows: (a, b, c, d, e, f, peak_x, peak_value).
# The raw curve is a + b * rise((x-c+d/2)/e) * (1 - rise((x-c-d/2)/f)) with
# rise = logistic; desirability = raw / peak_value clipped into (0, 1].
_DEFAULT_DESIRABILITY_ROWS = {
    "mw": (0.02, 1.0, 300.0, 250.0, 35.0, 65.0, 277.644, 0.880294),
    "alogp": (0.02, 1.0, 1.8, 3.0, 0.6, 0.9, 1.665, 0.799986),
    "hba": (0.05, 1.0, 2.5, 3.0, 0.7, 1.0, 2.4066, 0.782845),
    "hbd": (0.05, 1.0, 1.0, 1.6, 0.45, 0.6, 0.9755, 0.727194),
    "psa": (0.03, 1.0, 75.0, 80.0, 12.0, 22.0, 68.354, 0.870678),
    "rotb": (0.05, 1.0, 3.5, 4.5, 0.8, 1.2, 3.2644, 0.871829),
    "arom": (0.08, 1.0, 1.5, 1.6, 0.4, 0.5, 1.469, 0.813272),
    "alerts": (0.0, 1.0, 0.0, 0.0, 1.0e6, 0.4, 0.0, 0.25),
}

_DESIRABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class DesirabilityParams:
    """Double-sigmoid desirability rows, one per QED descriptor."""

    rows: dict[str, tuple[float, float, float, float, float, float, float, float]]

    def __post_init__(self):
        missing = set(QED_DESCRIPTORS) - set(self.rows)
        if missing:
            raise ValueError(f"missing desirability rows: {sorted(missing)}")
        for name, row in self.rows.items():
            if len(row) != 8:
                raise ValueError(f"row {name} must hold 8 parameters")

    @staticmethod
    def default() -> "DesirabilityParams":
        return DesirabilityParams(dict(_DEFAULT_DESIRABILITY_ROWS))

    @classmethod
    def from_yaml(cls, path: str | Path) -> "DesirabilityParams":
        with open(path) as fh:
            raw = yaml.safe_load(fh)
        return cls({k: tuple(float(x) for x in v) for k, v in raw.items()})

    def desirability(self, name: str, x: float) -> float:
        a, b, c, d, e, f, _, peak = self.rows[name]
        rise = 1.0 / (1.0 + np.exp(-(x - c + d / 2.0) / e))
        fall = 1.0 - 1.0 / (1.0 + np.exp(-(x - c - d / 2.0) / f))
        raw = a + b * rise * fall
        return float(min(1.0, max(_DESIRABILITY_FLOOR, raw / peak)))


def qed(
    d: DescriptorSet, params: Optional[DesirabilityParams] = None
) -> float:
    """Unified drug-likeness score: 1 - geometric mean of 8 desirabilities.

    The geometric mean lives in (0, 1] with 1 = ideal; the inversion puts the
    optimum at 0 like every other objective.
    """
    p = params or DesirabilityParams.default()
    values = [
        p.desirability(name, float(getattr(d, name))) for name in QED_DESCRIPTORS
    ]
    log_mean = sum(math.log(v) for v in values) / len(values)
    return min(1.0, max(0.0, 1.0 - math.exp(log_mean)))


# ---------------------------------------------------------------------------
# synthetic accessibility
# ---------------------------------------------------------------------------


def normalize_sa(raw: float) -> float:
    """Affine map of the raw [1, 10] scale onto [0, 1] (1 -> 0, 10 -> 1)."""
    return min(1.0, max(0.0, (raw - 1.0) / 9.0))


def raw_sa(g: MolecularGraph, fragment_table: Optional[dict] = None) -> float:
    """Raw synthetic-accessibility estimate on the 1 (easy) .. 10 (hard) scale.

    Combines a fragment-contribution term (mean table value over atom
    2-neighborhood signatures; 0 without a table) with complexity penalties
    for size, ring count and macrocycles (smallest ring >= 8 atoms).
    """
    heavy = g.n_atoms
    frag_term = 0.0
    if fragment_table:
        contributions = [
            fragment_table.get(atom_signature(g, i), -0.5) for i in range(heavy)
        ]
        frag_term = sum(contributions) / max(1, len(contributions))

    size_penalty = heavy**1.005 - heavy
    ring_penalty = math.log10(g.ring_count() + 1.0)
    macro_penalty = (
        math.log10(2.0) if any(s >= 8 for s in g.smallest_ring_sizes()) else 0.0
    )
    score = frag_term - size_penalty - ring_penalty - macro_penalty

    # map the empirical raw range [-4, 2.5] onto [1, 10], smooth the top
    sa = 11.0 - (score + 5.0) / 6.5 * 9.0
    if sa > 8.0:
        sa = 8.0 + math.log(sa - 8.0 + 1.0)
    return min(10.0, max(1.0, sa))


def sa_score(g: MolecularGraph, fragment_table: Optional[dict] = None) -> float:
    return normalize_sa(raw_sa(g, fragment_table))


def load_fragment_table(path: str | Path) -> dict:
    """Signature -> contribution mapping from YAML."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return {str(k): float(v) for k, v in raw.items()}


# ---------------------------------------------------------------------------
# natural-product likeness
# ---------------------------------------------------------------------------

# Reference set loosely shaped like natural products (polyols, phenolics,
# simple heteroaromatics, small terpenoid fragments) written in the package's
# own symbol dialect. The default fragment table is derived from it.
_NP_REFERENCE_SELFIES = (
    "[C][Branch1_1][C][O][C][Branch1_1][C][O][C][Branch1_1][C][O][C][Branch1_1][C][O][C][O]",
    "[C][C][Branch1_1][C][O][C][Branch1_1][C][O][C][Branch1_1][C][O][C][O]",
    "[C][O][C][Branch1_1][C][O][C][Branch1_1][C][O][C][Ring1][Branch1_1][O]",
    "[Benzene][O]",
    "[O][c][c][c][c][c][c][Ring1][Branch1_1][O]",
    "[C][O][c][c][c][c][c][c][Ring1][Branch1_1][O]",
    "[Benzene][C][C][=C]",
    "[Benzene][C][=C][C][=O]",
    "[n][c][c][c][c][Ring1][Ring3]",
    "[o][c][c][c][c][Ring1][Ring3]",
    "[n][c][c][c][c][c][Ring1][Branch1_1]",
    "[C][C][=C][C][Branch1_1][C][C][C][C][Ring1][Branch1_2]",
    "[C][Branch1_1][C][C][C][C][C][Branch1_1][C][O][C][C][Ring1][Branch1_2]",
    "[C][C][Branch1_1][C][C][=C][C][C][=C][Branch1_1][C][C][C]",
    "[C][=O][O]",
    "[C][C][Branch1_1][C][N][C][Branch1_1][C][O][=O]",
    "[C][N][C][=O]",
    "[Benzene][C][Branch1_1][C][N][C][Branch1_1][C][O][=O]",
)

_NP_UNSEEN_CONTRIBUTION = -0.5
_default_np_table: Optional[dict] = None


def build_np_table(reference: Sequence[str]) -> dict:
    """Fragment table from a reference set: log2(1 + count) per signature."""
    counts: dict[str, int] = {}
    for text in reference:
        g = sf.decode(sf.parse_symbols(text))
        for i in range(g.n_atoms):
            sig = atom_signature(g, i)
            counts[sig] = counts.get(sig, 0) + 1
    return {sig: math.log2(1.0 + c) for sig, c in counts.items()}


def default_np_table() -> dict:
    global _default_np_table
    if _default_np_table is None:
        _default_np_table = build_np_table(_NP_REFERENCE_SELFIES)
    return _default_np_table


def normalize_np(raw: float) -> float:
    """Affine map of the raw [-5, 5] scale onto [0, 1] (5 -> 0, -5 -> 1)."""
    return min(1.0, max(0.0, (5.0 - raw) / 10.0))


def raw_np(g: MolecularGraph, table: Optional[dict] = None) -> float:
    """Raw natural-product likeness: mean fragment contribution, in [-5, 5]."""
    tab = table if table is not None else default_np_table()
    total = sum(
        tab.get(atom_signature(g, i), _NP_UNSEEN_CONTRIBUTION)
        for i in range(g.n_atoms)
    )
    raw = total / max(1, g.n_atoms)
    return min(5.0, max(-5.0, raw))


def np_score(g: MolecularGraph, table: Optional[dict] = None) -> float:
    return normalize_np(raw_np(g, table))


def load_np_table(path: str | Path) -> dict:
    return load_fragment_table(path)


# ---------------------------------------------------------------------------
# filters
# ---------------------------------------------------------------------------


def filters(
    g: MolecularGraph, patterns: Optional[Sequence[SubstructurePattern]] = None
) -> float:
    """0 when no alert pattern matches (passes), 1 when any does (fails)."""
    from .patterns import matches

    pats = DEFAULT_ALERTS if patterns is None else patterns
    return 1.0 if any(matches(g, p) for p in pats) else 0.0


# ---------------------------------------------------------------------------
# scalarization
# ---------------------------------------------------------------------------


def scalarize(v: ObjectiveVector, config: Optional[MetricConfig] = None) -> float:
    """Weighted sum over (docking, SA, QED, NP, filters)."""
    cfg = config or MetricConfig()
    return float(np.dot(cfg.weights, v.as_tuple()))


# ---------------------------------------------------------------------------
# composite evaluator
# ---------------------------------------------------------------------------


class ObjectiveEvaluator:
    """Evaluate a molecular graph into the five unified objectives.

    ``docking_fn`` maps a graph to an energy in kcal/mol (the surrogate by
    default). A docking failure is absorbed: the docking objective takes the
    worst value 1.0 with a logged warning and the run continues.
    """

    def __init__(
        self,
        metric_config: Optional[MetricConfig] = None,
        desirability: Optional[DesirabilityParams] = None,
        alert_patterns: Optional[Sequence[SubstructurePattern]] = None,
        docking_fn: Optional[Callable[[MolecularGraph], float]] = None,
        sa_fragments: Optional[dict] = None,
        np_table: Optional[dict] = None,
    ):
        from .gateway import surrogate_score

        self.metric_config = metric_config or MetricConfig()
        self.desirability = desirability or DesirabilityParams.default()
        self.alert_patterns = (
            DEFAULT_ALERTS if alert_patterns is None else tuple(alert_patterns)
        )
        self.docking_fn = docking_fn or surrogate_score
        self.sa_fragments = sa_fragments
        self.np_table = np_table if np_table is not None else default_np_table()

    def __call__(self, g: MolecularGraph) -> ObjectiveVector:
        d = descriptors(g, alert_patterns=self.alert_patterns)
        try:
            energy = self.docking_fn(g)
            docking = normalize_docking(energy, self.metric_config)
        except Exception as exc:  # noqa: BLE001 - degraded scoring by contract
            logger.warning("docking failed (%s); substituting worst score", exc)
            docking = 1.0
        return ObjectiveVector(
            docking=docking,
            sa=sa_score(g, self.sa_fragments),
            qed=qed(d, self.desirability),
            np=np_score(g, self.np_table),
            filters=1.0 if d.alerts > 0 else 0.0,
        )
