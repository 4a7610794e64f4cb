"""Command-line pipeline: ingest -> evolve -> select -> analyze -> evolve (reduced)
-> select -> ensemble -> predict -> report.

Exit codes: 0 success, 2 input error, 3 missing upstream artifact.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import (
    ModelSet,
    filter_robust,
    niche_by_variable_combination,
    select_model_set,
    variable_contribution,
    variable_presence,
)
from .data import AlignedDataset, FormatSpec, align, parse_table, split_by_date
from .ensemble import Ensemble, create_ensemble, ensemble_predict, evaluate_ensemble
from .errors import ArtifactMissingError, InputError
from .evolution import EvolutionConfig, evolve_many, merge_runs
from .evolution.models import models_from_dict, models_to_dict, read_json, write_json
from .fitness import scaled_correlation_error
from .synthetic import write_wind_demo

log = logging.getLogger("paretogp")

EXIT_INPUT = 2
EXIT_MISSING = 3


@dataclass
class SelectionSpec:
    max_error: float = 0.30
    max_complexity: float = 350
    retain_fraction: float = 1.0


@dataclass
class ProjectConfig:
    base: Path
    predictors: dict = field(default_factory=dict)
    response: dict = field(default_factory=dict)
    timezone: str = "UTC"
    train_range: Optional[list] = None
    test_range: Optional[list] = None
    missing_fraction_threshold: float = 0.75
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    stage1: SelectionSpec = field(default_factory=SelectionSpec)
    stage2: SelectionSpec = field(default_factory=lambda: SelectionSpec(0.30, 250, 0.25))
    ensemble_size: int = 6
    ensemble_complexity_cap: int = 150
    stage2_variables: Optional[list] = None
    out: Path = Path("out")
    seed: int = 0
    jobs: int = 1

    @classmethod
    def load(cls, path) -> "ProjectConfig":
        path = Path(path)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
        base = path.resolve().parent
        cfg = cls(base=base)
        for key in ("predictors", "response", "timezone", "train_range", "test_range",
                    "missing_fraction_threshold", "stage2_variables", "seed", "jobs"):
            if key in d:
                setattr(cfg, key, d[key])
        if "evolution" in d:
            cfg.evolution = EvolutionConfig.from_dict(d["evolution"])
        for key in ("stage1", "stage2"):
            if key in d:
                setattr(cfg, key, SelectionSpec(**{**vars(getattr(cfg, key)), **d[key]}))
        ens = d.get("ensemble", {})
        cfg.ensemble_size = int(ens.get("size", cfg.ensemble_size))
        cfg.ensemble_complexity_cap = int(ens.get("complexity_cap", cfg.ensemble_complexity_cap))
        cfg.out = base / d.get("out", "out")
        for spec in (cfg.stage1, cfg.stage2):
            if spec.max_error <= 0 or spec.max_complexity <= 0 or spec.retain_fraction <= 0:
                raise InputError("selection thresholds must be positive")
        return cfg

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p


# -- file layout ---------------------------------------------------------------

def _paths(out: Path) -> dict:
    return {
        "aligned": out / "data" / "aligned.csv",
        "train": out / "data" / "train.csv",
        "test": out / "data" / "test.csv",
        "ensemble": out / "ensemble" / "ensemble.json",
        "members": out / "ensemble" / "members.csv",
        "predictions": out / "predict" / "predictions.csv",
        "report": out / "report",
    }


def _stage_dir(out: Path, stage: int) -> Path:
    return out / f"stage{stage}"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _need(path: Path) -> Path:
    if not path.exists():
        raise ArtifactMissingError(f"missing upstream artifact: {path}")
    return path


def _load_dataset(path: Path) -> AlignedDataset:
    _need(path)
    return AlignedDataset.load(path)


def _stage_data(cfg: ProjectConfig, stage: int, which: str = "train") -> AlignedDataset:
    ds = _load_dataset(_paths(cfg.out)[which])
    if stage == 2:
        if not cfg.stage2_variables:
            raise InputError("stage 2 needs 'stage2_variables' in the config")
        ds = ds.with_variables(cfg.stage2_variables)
    return ds


# -- commands ------------------------------------------------------------------

def cmd_ingest(cfg: ProjectConfig, args) -> None:
    if not cfg.predictors or not cfg.response:
        raise InputError("config needs 'predictors' and 'response' sections")
    pspec = FormatSpec.from_dict(cfg.predictors)
    rspec = FormatSpec.from_dict(cfg.response)
    predictors = parse_table(cfg.resolve(cfg.predictors["path"]), pspec, cfg.timezone)
    response = parse_table(cfg.resolve(cfg.response["path"]), rspec, cfg.timezone)
    ds = align(predictors, response, cfg.response.get("column"),
               cfg.missing_fraction_threshold)
    ds.drop_log = [{"file": "predictors", "note": n} for n in predictors.log] + \
                  [{"file": "response", "note": n} for n in response.log] + ds.drop_log
    paths = _paths(cfg.out)
    ds.save(paths["aligned"])
    if cfg.train_range and cfg.test_range:
        train, test = split_by_date(ds, cfg.train_range, cfg.test_range)
    else:
        train, test = ds, None
    train.save(paths["train"])
    if test is not None:
        test.save(paths["test"])
    print(f"aligned {len(ds)} rows x {len(ds.names)} inputs; train {len(train)}"
          + (f", test {len(test)}" if test is not None else ""))


def cmd_evolve(cfg: ProjectConfig, args) -> None:
    ds = _stage_data(cfg, args.stage)
    archives = evolve_many(ds, cfg.evolution, jobs=cfg.jobs, seed=cfg.seed)
    sdir = _stage_dir(cfg.out, args.stage)
    for a in archives:
        a.save(sdir / "runs" / f"run_{a.run_id:02d}.json")
    superset = merge_runs(archives)
    write_json(sdir / "superset.json",
               models_to_dict(superset, ds.names, ds.ranges,
                              runs=[len(a.models) for a in archives]))
    print(f"stage {args.stage}: {len(archives)} runs, superset of {len(superset)} models")


def _load_superset(cfg: ProjectConfig, stage: int):
    path = _need(_stage_dir(cfg.out, stage) / "superset.json")
    return models_from_dict(read_json(path))


def _load_model_set(cfg: ProjectConfig, stage: int) -> ModelSet:
    path = _need(_stage_dir(cfg.out, stage) / "model_set.json")
    return ModelSet.from_dict(read_json(path))


def _pareto_rows(superset, robust, selected):
    robust_keys = {m.expression for m in robust}
    selected_keys = {m.expression for m in selected}
    rows = sorted(((m.complexity, m.error, int(m.expression in robust_keys),
                    int(m.expression in selected_keys), m.expression) for m in superset),
                  key=lambda r: (r[0], r[1], r[4]))
    return rows


def cmd_select(cfg: ProjectConfig, args) -> None:
    superset = _load_superset(cfg, args.stage)
    robust = filter_robust(superset)
    spec = cfg.stage1 if args.stage == 1 else cfg.stage2
    ms = select_model_set(robust, spec.max_error, spec.max_complexity, spec.retain_fraction)
    sdir = _stage_dir(cfg.out, args.stage)
    d = ms.to_dict()
    d["robust_size"] = len(robust)
    if not ms.models and superset:
        d["variables"] = list(superset[0].variables)
        d["ranges"] = [list(r) for r in superset[0].ranges]
    write_json(sdir / "model_set.json", d)
    _write_csv(sdir / "pareto.csv", ["complexity", "error", "robust", "selected", "expression"],
               _pareto_rows(superset, robust, ms.models))
    print(f"stage {args.stage}: superset {len(superset)}, robust {len(robust)}, "
          f"selected {len(ms)}" + (f" ({ms.diagnostics})" if ms.diagnostics else ""))


def suggest_drivers(contribution, fraction: float = 0.1) -> list[str]:
    """Variables whose median contribution is at least ``fraction`` of the largest."""
    vals = [s.value for s in contribution if s.value is not None]
    if not vals or max(vals) <= 0:
        return []
    top = max(vals)
    return [s.name for s in contribution if s.value is not None and s.value >= fraction * top]


def cmd_analyze(cfg: ProjectConfig, args) -> None:
    ms = _load_model_set(cfg, args.stage)
    if not ms.models:
        raise InputError(f"stage {args.stage} model set is empty: {ms.diagnostics}")
    train = _stage_data(cfg, args.stage)
    presence = variable_presence(ms, train.names)
    contribution = variable_contribution(ms, train)
    niches = niche_by_variable_combination(ms)
    adir = _stage_dir(cfg.out, args.stage) / "analysis"
    _write_csv(adir / "presence.csv", ["rank", "variable", "presence", "models"],
               [(s.rank, s.name, s.value, s.n_models) for s in presence])
    _write_csv(adir / "contribution.csv", ["rank", "variable", "median_contribution", "models"],
               [(s.rank, s.name, s.value, s.n_models) for s in contribution])
    _write_csv(adir / "niches.csv", ["variables", "models", "best_error", "best_expression"],
               [(" ".join(n.variables), n.count, n.best_error, n.best_expression)
                for n in niches])
    drivers = suggest_drivers(contribution)
    write_json(adir / "analysis.json", {
        "model_set_size": len(ms),
        "presence_ranking": [s.name for s in presence],
        "contribution_ranking": [s.name for s in contribution],
        "suggested_drivers": drivers,
    })
    print(f"stage {args.stage}: presence top {[s.name for s in presence[:3]]}, "
          f"suggested drivers {drivers}")


def cmd_ensemble(cfg: ProjectConfig, args) -> None:
    ms = _load_model_set(cfg, args.stage)
    train = _stage_data(cfg, args.stage)
    e = create_ensemble(ms, train, cfg.ensemble_size, cfg.ensemble_complexity_cap)
    paths = _paths(cfg.out)
    write_json(paths["ensemble"], {"stage": args.stage, **e.to_dict()})
    test_path = paths["test"]
    test = _stage_data(cfg, args.stage, "test") if test_path.exists() else None
    rows = []
    for k, m in enumerate(e.members):
        te = None
        if test is not None:
            te = scaled_correlation_error(m.predict(test.X), test.y)
        rows.append((k, m.complexity, e.train_errors[k], te, m.expression))
    _write_csv(paths["members"], ["member", "complexity", "train_error", "test_error",
                                  "expression"], rows)
    print(f"ensemble of {len(e.members)} models, complexities "
          f"{[m.complexity for m in e.members]}")


def _load_ensemble(cfg: ProjectConfig) -> tuple[Ensemble, int]:
    d = read_json(_need(_paths(cfg.out)["ensemble"]))
    return Ensemble.from_dict(d), int(d.get("stage", 2))


def _prediction_data(cfg: ProjectConfig, e: Ensemble, data: Optional[str]) -> AlignedDataset:
    ds = _load_dataset(Path(data) if data else _paths(cfg.out)["test"])
    return ds.with_variables(e.variables)


def cmd_predict(cfg: ProjectConfig, args) -> None:
    e, _ = _load_ensemble(cfg)
    ds = _prediction_data(cfg, e, args.data)
    band = ensemble_predict(e, ds.X)
    _write_csv(_paths(cfg.out)["predictions"],
               ["row", "timestamp", "point", "spread", "observed"],
               [(i, t.isoformat(), p, s, o) for i, (t, p, s, o)
                in enumerate(zip(ds.timestamps, band.point, band.spread, ds.y))])
    print(f"predicted {len(ds)} rows ({int(band.valid.sum())} valid)")


def cmd_report(cfg: ProjectConfig, args) -> None:
    paths = _paths(cfg.out)
    rdir = paths["report"]
    e, stage = _load_ensemble(cfg)
    test = _prediction_data(cfg, e, args.data)
    train = _stage_data(cfg, stage)
    summary: dict = {}
    for s in (1, 2):
        pareto = _stage_dir(cfg.out, s) / "pareto.csv"
        if pareto.exists():
            (rdir / f"pareto_stage{s}.csv").parent.mkdir(parents=True, exist_ok=True)
            (rdir / f"pareto_stage{s}.csv").write_text(pareto.read_text())
        analysis = _stage_dir(cfg.out, s) / "analysis" / "analysis.json"
        if analysis.exists():
            summary[f"stage{s}_analysis"] = read_json(analysis)
    rep = evaluate_ensemble(e, test, train)
    pairs = rep["pairs"]
    _write_csv(rdir / "predicted_vs_actual.csv",
               ["row", "timestamp", "observed", "point", "spread"],
               [(i, t.isoformat(), o, p, s) for i, (t, o, p, s)
                in enumerate(zip(test.timestamps, pairs["observed"], pairs["point"],
                                 pairs["spread"]))])
    _write_csv(rdir / "members.csv", ["complexity", "train_error", "test_error", "expression"],
               [(m["complexity"], m["train_error"], m["test_error"], m["expression"])
                for m in rep["members"]])
    stage1 = summary.get("stage1_analysis", {})
    summary.update({
        "normalized_rmse_test": rep["normalized_rmse"],
        "valid_rows": rep["valid_rows"],
        "ensemble_variables": sorted({m.variables[i] for m in e.members for i in m.used}),
        "selected_variables": list(cfg.stage2_variables or e.variables),
        "suggested_drivers": stage1.get("suggested_drivers", []),
        "members": [{k: m[k] for k in ("complexity", "train_error", "test_error", "expression")}
                    for m in rep["members"]],
    })
    write_json(rdir / "summary.json", summary)
    print(f"normalized test RMSE {rep['normalized_rmse']:.4f}; report in {rdir}")


def cmd_synth(args) -> None:
    path = write_wind_demo(args.dir, args.start, args.end, args.test_start, args.seed_value)
    print(f"wrote synthetic wind-farm data and {path}")


COMMANDS = {
    "ingest": cmd_ingest,
    "evolve": cmd_evolve,
    "select": cmd_select,
    "analyze": cmd_analyze,
    "ensemble": cmd_ensemble,
    "predict": cmd_predict,
    "report": cmd_report,
}


def _add_common(p: argparse.ArgumentParser, default=None) -> None:
    p.add_argument("--config", default=default, help="project config (JSON)")
    p.add_argument("--seed", type=int, default=default,
                   help="root random seed (overrides config)")
    p.add_argument("--out", default=default, help="output directory (overrides config)")
    p.add_argument("--max-generations", type=int, default=default,
                   help="generation budget per run; disables the time budget")
    p.add_argument("--jobs", type=int, default=default, help="parallel independent evolutions")
    p.add_argument("-v", "--verbose", action="store_true",
                   default=False if default is None else default, help="per-generation log")


def build_parser() -> argparse.ArgumentParser:
    """Common flags are accepted before or after the subcommand."""
    # SUPPRESS keeps subcommand defaults from clobbering values given up front
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="paretogp", description=__doc__.splitlines()[0])
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="align raw files into train/test sets")
    for name, text in (("evolve", "run independent evolutions"),
                       ("select", "robust screening and model-set selection"),
                       ("analyze", "variable presence, contribution and niches"),
                       ("ensemble", "pick an ensemble from a model set")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--stage", type=int, choices=(1, 2),
                       default=1 if name in ("evolve", "select", "analyze") else 2)
    for name, text in (("predict", "ensemble predictions with spread"),
                       ("report", "bundle plot data and a summary")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--data", help="aligned dataset CSV (default: the test split)")
    p = sub.add_parser("synth", help="write the bundled synthetic wind-farm dataset")
    p.add_argument("dir")
    p.add_argument("--start", default="2010-10-01")
    p.add_argument("--end", default="2011-08-01")
    p.add_argument("--test-start", default="2011-07-01")
    p.add_argument("--seed", dest="seed_value", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "synth" and not args.config:
        parser.error("--config is required")
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "synth":
            cmd_synth(args)
            return 0
        cfg = ProjectConfig.load(args.config)
        if args.out:
            cfg.out = Path(args.out)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs is not None:
            cfg.jobs = args.jobs
        if args.max_generations is not None:
            cfg.evolution = replace(cfg.evolution, max_generations=args.max_generations,
                                    time_budget_seconds=None)
        COMMANDS[args.command](cfg, args)
    except ArtifactMissingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
