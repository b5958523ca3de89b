"""Command-line interface.

Subcommands:
  run     execute an experiment from a YAML config (surrogate docking by
          default) and write analysis artifacts
  decode  translate a SELFIES-style symbol string to its canonical SMILES key
  score   evaluate one symbol string into the five unified objectives
  hv      hypervolume of a front file (CSV of objective rows)

Exit code 0 on success; nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .harness import ExperimentConfig, run_experiment
from .metrics import OBJECTIVE_NAMES, ObjectiveEvaluator, scalarize
from .moea import hypervolume
from .molgraph import canonical_form
from .selfies import decode, parse_symbols


def _cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_yaml(args.config)
    else:
        cfg = ExperimentConfig.default(args.mode or "single")
    raw = cfg.to_dict()
    if args.mode:
        raw["mode"] = args.mode  # parent count stays as configured
    if args.seed is not None:
        raw["evolution"]["seed"] = args.seed
    if args.repeats is not None:
        raw["repeats"] = args.repeats
    if args.generations is not None:
        raw["evolution"]["max_generations"] = args.generations
    cfg = ExperimentConfig.from_dict(raw)
    artifacts = run_experiment(cfg, args.out)
    ok = sum(1 for r in artifacts.run_status if r["status"] == "ok")
    print(f"{ok}/{cfg.repeats} runs completed; artifacts in {artifacts.out_dir}")
    for name, path in sorted(artifacts.files.items()):
        print(f"  {name}: {path}")
    return 0 if ok == cfg.repeats else 1


def _cmd_decode(args) -> int:
    graph = decode(parse_symbols(args.selfies))
    print(canonical_form(graph))
    return 0


def _cmd_score(args) -> int:
    graph = decode(parse_symbols(args.selfies))
    evaluator = ObjectiveEvaluator()
    vector = evaluator(graph)
    payload = {name: getattr(vector, name) for name in OBJECTIVE_NAMES}
    payload["fitness"] = scalarize(vector)
    payload["canonical"] = canonical_form(graph)
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")
    return 0


def _cmd_hv(args) -> int:
    points = _read_front(Path(args.front))
    if not points:
        print("front file holds no points", file=sys.stderr)
        return 1
    ref = tuple(float(x) for x in args.ref.split(","))
    print(hypervolume(points, ref))
    return 0


def _read_front(path: Path) -> list[tuple[float, ...]]:
    """Objective rows from a CSV; uses objective-named columns if present."""
    with path.open() as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return []
    header = rows[0]
    try:
        [float(x) for x in header]
        data_rows, columns = rows, None
    except ValueError:
        data_rows = rows[1:]
        if set(OBJECTIVE_NAMES) <= set(header):
            columns = [header.index(name) for name in OBJECTIVE_NAMES]
        else:
            columns = [
                i
                for i, name in enumerate(header)
                if _is_float_column(data_rows, i)
            ]
    points = []
    for row in data_rows:
        if not row:
            continue
        if columns is None:
            points.append(tuple(float(x) for x in row))
        else:
            points.append(tuple(float(row[i]) for i in columns))
    return points


def _is_float_column(rows: list[list[str]], idx: int) -> bool:
    for row in rows:
        if idx >= len(row):
            return False
        try:
            float(row[idx])
        except ValueError:
            return False
    return True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoligand", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", help="YAML experiment configuration")
    p_run.add_argument("--mode", choices=("single", "nsga2"))
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--repeats", type=int)
    p_run.add_argument("--generations", type=int)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_dec = sub.add_parser("decode", help="SELFIES -> canonical SMILES")
    p_dec.add_argument("selfies")
    p_dec.set_defaults(func=_cmd_decode)

    p_score = sub.add_parser("score", help="SELFIES -> objective vector")
    p_score.add_argument("selfies")
    p_score.add_argument("--json", action="store_true")
    p_score.set_defaults(func=_cmd_score)

    p_hv = sub.add_parser("hv", help="hypervolume of a front file")
    p_hv.add_argument("front")
    p_hv.add_argument("--ref", default="1,1,1,1,1")
    p_hv.set_defaults(func=_cmd_hv)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
