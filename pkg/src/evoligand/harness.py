"""Experiment orchestration: seeded multi-run execution and artifact export.

A single experiment configuration drives `repeats` independent runs (each
with its own registry and RNG stream split off a master seed), collects the
per-generation records matching the analysis artifacts (metric development,
Pareto front snapshots, S-metric trajectory, final populations, radar
records) and writes everything as CSV plus a machine-readable manifest.

Artifacts are byte-reproducible: no timestamps, fixed row ordering, repr
float formatting, sorted JSON keys.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .evolution import (
    EvolutionConfig,
    Individual,
    MutationRates,
    UniquenessRegistry,
    evaluate_individuals,
    init_population,
    step_single_objective,
)
from .gateway import DockingConfig, DockingGateway, gateway_docking_fn
from .metrics import (
    DesirabilityParams,
    MetricConfig,
    ObjectiveEvaluator,
    OBJECTIVE_NAMES,
    load_fragment_table,
    load_np_table,
    scalarize,
)
from .moea import crowding_distance, hypervolume, rank0_front, step_nsga2
from .patterns import load_patterns
from .selfies import Alphabet, default_alphabet, render
from .descriptors import load_alogp_table, load_psa_table

logger = logging.getLogger(__name__)

SLICE_METRICS = ("qed", "np", "sa")  # docking is the common axis


@dataclass(frozen=True)
class DataPaths:
    """Optional data file overrides; None means built-in defaults."""

    alphabet: Optional[str] = None
    desirability: Optional[str] = None
    alert_patterns: Optional[str] = None
    sa_fragments: Optional[str] = None
    np_table: Optional[str] = None
    alogp: Optional[str] = None
    psa: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "single"  # "single" | "nsga2"
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    rates: MutationRates = field(default_factory=MutationRates)
    metrics: MetricConfig = field(default_factory=MetricConfig)
    docking: DockingConfig = field(default_factory=DockingConfig)
    repeats: int = 20
    snapshot_every: int = 10
    reference_point: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    write_transcripts: bool = True
    data: DataPaths = field(default_factory=DataPaths)

    def __post_init__(self):
        if self.mode not in ("single", "nsga2"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    @staticmethod
    def default(mode: str = "single", **overrides) -> "ExperimentConfig":
        evo = EvolutionConfig(mu=20 if mode == "nsga2" else 10)
        return ExperimentConfig(mode=mode, evolution=evo, **overrides)

    def to_dict(self) -> dict:
        """Round-trippable plain dict (inverse of :meth:`from_dict`)."""
        d = asdict(self)
        d["evolution"]["lambda"] = d["evolution"].pop("lambda_")
        d["mutation"] = d.pop("rates")
        d["reference_point"] = list(self.reference_point)
        d["docking"]["grid_size"] = list(self.docking.grid_size)
        if self.docking.grid_center is not None:
            d["docking"]["grid_center"] = list(self.docking.grid_center)
        d["metrics"]["weights"] = list(self.metrics.weights)
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        mode = raw.get("mode", "single")
        evo_raw = dict(raw.get("evolution", {}))
        if "lambda" in evo_raw:
            evo_raw["lambda_"] = evo_raw.pop("lambda")
        evo_raw.setdefault("mu", 20 if mode == "nsga2" else 10)
        evolution = EvolutionConfig(**evo_raw)
        rates = MutationRates(**raw.get("mutation", {}))
        met_raw = dict(raw.get("metrics", {}))
        if "weights" in met_raw:
            met_raw["weights"] = tuple(met_raw["weights"])
        metrics = MetricConfig(**met_raw)
        dock_raw = dict(raw.get("docking", {}))
        for key in ("grid_center", "grid_size"):
            if dock_raw.get(key) is not None:
                dock_raw[key] = tuple(dock_raw[key])
        docking = DockingConfig(**dock_raw)
        data = DataPaths(**raw.get("data", {}))
        return cls(
            mode=mode,
            evolution=evolution,
            rates=rates,
            metrics=metrics,
            docking=docking,
            repeats=int(raw.get("repeats", 20)),
            snapshot_every=int(raw.get("snapshot_every", 10)),
            reference_point=tuple(raw.get("reference_point", (1.0,) * 5)),
            write_transcripts=bool(raw.get("write_transcripts", True)),
            data=data,
        )

    @classmethod
    def from_yaml(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        return cls.from_dict(raw)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunArtifacts:
    out_dir: Path
    metric_rows: list[dict]
    smetric_rows: list[dict]
    front_rows: list[dict]
    final_rows: list[dict]
    radar_rows: list[dict]
    summary_rows: list[dict]
    run_status: list[dict]
    files: dict[str, Path]


# ---------------------------------------------------------------------------
# component wiring
# ---------------------------------------------------------------------------


def build_alphabet(cfg: ExperimentConfig) -> Alphabet:
    if cfg.data.alphabet:
        return Alphabet.from_yaml(cfg.data.alphabet)
    return default_alphabet()


def build_evaluator(
    cfg: ExperimentConfig, gateway: Optional[DockingGateway] = None
) -> ObjectiveEvaluator:
    desirability = (
        DesirabilityParams.from_yaml(cfg.data.desirability)
        if cfg.data.desirability
        else None
    )
    patterns = (
        load_patterns(cfg.data.alert_patterns) if cfg.data.alert_patterns else None
    )
    sa_fragments = (
        load_fragment_table(cfg.data.sa_fragments) if cfg.data.sa_fragments else None
    )
    np_table = load_np_table(cfg.data.np_table) if cfg.data.np_table else None
    docking_fn = None
    if cfg.docking.backend == "external":
        if gateway is None:
            raise ValueError("external backend needs a gateway instance")
        docking_fn = gateway_docking_fn(gateway)
    return ObjectiveEvaluator(
        metric_config=cfg.metrics,
        desirability=desirability,
        alert_patterns=patterns,
        docking_fn=docking_fn,
        sa_fragments=sa_fragments,
        np_table=np_table,
    )


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------


def _objective_row(v) -> dict:
    return {name: getattr(v, name) for name in OBJECTIVE_NAMES}


def _run_one(
    cfg: ExperimentConfig,
    run_index: int,
    rng: np.random.Generator,
    alphabet: Alphabet,
    evaluator: ObjectiveEvaluator,
    transcript: Optional[Callable[[dict], None]],
) -> dict:
    registry = UniquenessRegistry()
    evo = cfg.evolution
    on_eval = None
    if transcript is not None:

        def on_eval(ind: Individual):
            transcript(
                {
                    "generation": ind.birth_generation,
                    "phenotype_key": ind.phenotype_key,
                    "objectives": list(ind.objectives.as_tuple()),
                    "fitness": ind.fitness,
                }
            )

    population = init_population(evo, alphabet, registry, rng)
    scalarizer = lambda v: scalarize(v, cfg.metrics)  # noqa: E731
    evaluate_individuals(population, evaluator, scalarizer, on_eval)

    metric_rows: list[dict] = []
    smetric_rows: list[dict] = []
    front_rows: list[dict] = []

    def record(generation: int):
        if cfg.mode == "single":
            best = min(
                population,
                key=lambda i: (i.fitness, i.birth_generation, i.phenotype_key),
            )
            row = {
                "run": run_index,
                "generation": generation,
                "best_fitness": best.fitness,
                "mean_fitness": float(
                    np.mean([i.fitness for i in population])
                ),
            }
            for name in OBJECTIVE_NAMES:
                row[f"best_{name}"] = getattr(best.objectives, name)
            metric_rows.append(row)
        else:
            row = {"run": run_index, "generation": generation}
            for idx, name in enumerate(OBJECTIVE_NAMES):
                row[f"best_{name}"] = min(
                    i.objectives.as_tuple()[idx] for i in population
                )
            metric_rows.append(row)
            front = rank0_front(population)
            points = [i.objectives.as_tuple() for i in front]
            smetric_rows.append(
                {
                    "run": run_index,
                    "generation": generation,
                    "front_size": len(front),
                    "hypervolume": hypervolume(points, cfg.reference_point),
                }
            )
            is_snapshot = (
                generation % cfg.snapshot_every == 0
                or generation == evo.max_generations
            )
            if is_snapshot:
                dists = crowding_distance(points)
                for member, dist in zip(front, dists):
                    row = {
                        "run": run_index,
                        "generation": generation,
                        "rank": 0,
                        "crowding": dist,
                        "phenotype_key": member.phenotype_key,
                    }
                    row.update(_objective_row(member.objectives))
                    front_rows.append(row)

    record(0)
    for generation in range(1, evo.max_generations + 1):
        if cfg.mode == "single":
            population = step_single_objective(
                population,
                evo,
                cfg.rates,
                alphabet,
                evaluator,
                registry,
                rng,
                generation,
                metric_config=cfg.metrics,
                on_evaluated=on_eval,
            )
        else:
            population = step_nsga2(
                population,
                evo,
                cfg.rates,
                alphabet,
                evaluator,
                registry,
                rng,
                generation,
                on_evaluated=on_eval,
            )
        record(generation)

    final_rows = []
    for ind in sorted(population, key=lambda i: i.phenotype_key):
        row = {
            "run": run_index,
            "phenotype_key": ind.phenotype_key,
            "genotype": render(ind.genotype),
            "fitness": ind.fitness if ind.fitness is not None else "",
            "birth_generation": ind.birth_generation,
        }
        row.update(_objective_row(ind.objectives))
        final_rows.append(row)

    return {
        "metric_rows": metric_rows,
        "smetric_rows": smetric_rows,
        "front_rows": front_rows,
        "final_rows": final_rows,
        "population": population,
    }


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path) -> RunArtifacts:
    """Execute `repeats` seeded runs and write all artifact files."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise RuntimeError(f"output directory {out} is not writable: {exc}") from exc

    alphabet = build_alphabet(cfg)
    gateway = (
        DockingGateway(cfg.docking) if cfg.docking.backend == "external" else None
    )

    metric_rows: list[dict] = []
    smetric_rows: list[dict] = []
    front_rows: list[dict] = []
    final_rows: list[dict] = []
    radar_rows: list[dict] = []
    run_status: list[dict] = []

    seed_seq = np.random.SeedSequence(cfg.evolution.seed)
    children = seed_seq.spawn(cfg.repeats)

    try:
        for run_index in range(cfg.repeats):
            rng = np.random.Generator(np.random.PCG64(children[run_index]))
            evaluator = build_evaluator(cfg, gateway)
            transcript_sink = None
            transcript_fh = None
            if cfg.write_transcripts:
                transcript_path = out / f"transcript_run{run_index:02d}.jsonl"
                transcript_fh = transcript_path.open("w")

                def transcript_sink(rec, fh=transcript_fh):
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

            try:
                result = _run_one(
                    cfg, run_index, rng, alphabet, evaluator, transcript_sink
                )
            except Exception as exc:  # noqa: BLE001 - isolate run failures
                logger.warning("run %d failed: %s", run_index, exc)
                run_status.append(
                    {"run": run_index, "status": "failed", "error": str(exc)}
                )
                continue
            finally:
                if transcript_fh is not None:
                    transcript_fh.close()
            metric_rows.extend(result["metric_rows"])
            smetric_rows.extend(result["smetric_rows"])
            front_rows.extend(result["front_rows"])
            final_rows.extend(result["final_rows"])
            radar_rows.extend(
                export_radar(result["population"], run_index=run_index)
            )
            run_status.append({"run": run_index, "status": "ok", "error": ""})
    finally:
        if gateway is not None:
            gateway.close()

    summary_rows = _summarize(cfg, metric_rows, smetric_rows)

    files: dict[str, Path] = {}
    files["metric_development"] = _write_csv(
        out / "metric_development.csv", metric_rows
    )
    if smetric_rows:
        files["smetric"] = _write_csv(out / "smetric.csv", smetric_rows)
    if front_rows:
        files["fronts"] = _write_csv(out / "fronts.csv", front_rows)
        files.update(export_front_slices(front_rows, out))
    files["final_population"] = _write_csv(out / "final_population.csv", final_rows)
    files["radar"] = _write_csv(out / "radar.csv", radar_rows)
    files["summary"] = _write_csv(out / "summary.csv", summary_rows)

    manifest = {
        "version": __version__,
        "mode": cfg.mode,
        "master_seed": cfg.evolution.seed,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed_scheme": "numpy SeedSequence(master).spawn(repeats)",
        "runs": run_status,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    files["manifest"] = manifest_path

    return RunArtifacts(
        out_dir=out,
        metric_rows=metric_rows,
        smetric_rows=smetric_rows,
        front_rows=front_rows,
        final_rows=final_rows,
        radar_rows=radar_rows,
        summary_rows=summary_rows,
        run_status=run_status,
        files=files,
    )


def _summarize(
    cfg: ExperimentConfig, metric_rows: list[dict], smetric_rows: list[dict]
) -> list[dict]:
    """Across-run mean and std for every per-generation column."""
    by_gen: dict[int, list[dict]] = {}
    for row in metric_rows:
        by_gen.setdefault(row["generation"], []).append(row)
    hv_by_gen: dict[int, list[float]] = {}
    for row in smetric_rows:
        hv_by_gen.setdefault(row["generation"], []).append(row["hypervolume"])

    value_cols = [
        c for c in (metric_rows[0].keys() if metric_rows else []) if c not in ("run", "generation")
    ]
    out = []
    for gen in sorted(by_gen):
        rows = by_gen[gen]
        srow: dict = {"generation": gen, "n_runs": len(rows)}
        for col in value_cols:
            vals = np.array([r[col] for r in rows], dtype=float)
            srow[f"{col}_mean"] = float(np.mean(vals))
            srow[f"{col}_std"] = float(np.std(vals))
        if gen in hv_by_gen:
            vals = np.array(hv_by_gen[gen])
            srow["hypervolume_mean"] = float(np.mean(vals))
            srow["hypervolume_std"] = float(np.std(vals))
        out.append(srow)
    return out


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def export_front_slices(
    front_rows: Sequence[dict], out_dir: str | Path
) -> dict[str, Path]:
    """2D projections of front snapshots: docking vs. each of QED/NP/SA.

    Values are copied from the stored objective components, never recomputed.
    """
    out = Path(out_dir)
    files: dict[str, Path] = {}
    for metric in SLICE_METRICS:
        rows = [
            {
                "run": r["run"],
                "generation": r["generation"],
                "docking": r["docking"],
                metric: r[metric],
            }
            for r in front_rows
        ]
        path = _write_csv(out / f"slices_docking_vs_{metric}.csv", rows)
        files[f"slices_{metric}"] = path
    return files


def export_radar(
    population: Sequence[Individual], run_index: Optional[int] = None
) -> list[dict]:
    """Radar records: one row per individual, values flipped so 1 = best."""
    rows = []
    for ind in sorted(population, key=lambda i: i.phenotype_key):
        row: dict = {}
        if run_index is not None:
            row["run"] = run_index
        row["phenotype_key"] = ind.phenotype_key
        for name in OBJECTIVE_NAMES:
            row[name] = 1.0 - getattr(ind.objectives, name)
        rows.append(row)
    return rows


def _write_csv(path: Path, rows: Sequence[dict]) -> Path:
    if rows:
        fieldnames = list(rows[0].keys())
    else:
        fieldnames = []
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        if fieldnames:
            writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    return path


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
