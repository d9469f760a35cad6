"""Command-line entry point.

Subcommands walk the full pipeline:

    config      write the default lab config to a JSON file
    serve       run the registry service over HTTP
    collect     generate + execute requests, writing a raw JSON-lines log
    prepare     refine a raw log into a dataset CSV and feature schema
    train       train the forest (optionally after a hyperparameter search)
    eval-model  compare the forest against the baselines on one dataset
    campaign    run one filtered or unfiltered campaign
    experiment  run the factorial experiment from the lab config
    report      render CSV reports from an experiment result store
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import baselines, forest, metrics, search
from .catalog import generate_catalog
from .config import ExperimentConfig, LabConfig, auth_token
from .experiment import load_results, render_reports, run_experiment
from .features import (
    FeatureSchema,
    build_features,
    load_dataset,
    refine_file,
    save_dataset,
    select_features,
    split,
)
from .gate import audit_filtered, run_filtered_campaign, stats_csv_row, TABLE_COLUMNS
from .generator import run_collection
from .schema import default_api_schema
from .service import RegistryHttpServer, RegistryService, ServiceConfig
from .transport import HttpTransport, InProcessTransport


def _load_config(path: str | None) -> LabConfig:
    if path is None:
        return LabConfig()
    return LabConfig.load(path)


def _service(config: LabConfig, version: str, environment: str) -> RegistryService:
    catalog = generate_catalog(config.catalog_seed)
    return RegistryService(
        catalog.ruleset(version, environment),
        ServiceConfig(versionId=version, environment=environment, authToken=auth_token()),
    )


def _cmd_config(args) -> int:
    LabConfig().save(args.out)
    print(f"wrote default config to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    config = _load_config(args.config)
    service = _service(config, args.version, args.env)
    server = RegistryHttpServer(service, port=args.port)
    print(f"registry {args.version}/{args.env} listening on {server.base_url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _transport_for(args, config: LabConfig, version: str, environment: str):
    if getattr(args, "base_url", None):
        return HttpTransport(args.base_url)
    return InProcessTransport(_service(config, version, environment))


def _cmd_collect(args) -> int:
    config = _load_config(args.config)
    budget = args.budget or config.collection_budget
    seed = args.seed if args.seed is not None else config.collection_seed
    version = args.version or config.collection_version
    environment = args.env or config.collection_environment
    transport = _transport_for(args, config, version, environment)
    generator_config = config.generator_config(budget=budget, seed=seed)
    records = run_collection(
        default_api_schema(), generator_config, transport, auth_token(),
        environment, version, args.out,
    )
    tallies: dict[int, int] = {}
    for record in records:
        tallies[record.statusCode] = tallies.get(record.statusCode, 0) + 1
    print(f"collected {len(records)} records to {args.out}; status tallies {tallies}")
    return 0


def _cmd_prepare(args) -> int:
    flats, skipped = refine_file(args.raw)
    if skipped:
        print(f"skipped {skipped} malformed lines", file=sys.stderr)
    matrix, schema = build_features(flats)
    save_dataset(matrix, schema, args.dataset)
    schema.save(args.schema)
    print(f"dataset: {matrix.X.shape[0]} rows x {matrix.X.shape[1]} features -> {args.dataset}")
    return 0


def _train_importance_fn(hp, seed):
    def importance_fn(matrix):
        model = forest.train_forest(matrix, hp, seed)
        return model.feature_importances()

    return importance_fn


def _cmd_train(args) -> int:
    config = _load_config(args.config)
    schema = FeatureSchema.load(args.schema)
    matrix = load_dataset(args.dataset, schema)
    seed = args.seed if args.seed is not None else config.train_seed
    train, test = split(matrix, ratio=0.8, seed=config.split_seed)

    hp = forest.ForestHyperparams()
    if args.search:
        hp = search.hyperparameter_search(train, search.DEFAULT_SEARCH_SPACE, args.search, seed)
        print(f"search picked {hp}")

    selection_fn = _train_importance_fn(hp, seed)
    train, schema = select_features(train, schema, selection_fn)
    kept = set(schema.names())
    test_columns = [i for i, spec in enumerate(FeatureSchema.load(args.schema).features)
                    if spec.name in kept]
    from .features import FeatureMatrix
    test = FeatureMatrix(test.X[:, test_columns], test.y, test.requestIds)

    model = forest.train_forest(train, hp, seed, schema_fingerprint=schema.fingerprint())
    forest.save_model(model, args.model)
    schema.save(args.schema)

    report = metrics.evaluate(model, test)
    print(f"held-out accuracy {report['accuracy']:.4f}, AUC {report['auc']:.4f}")
    print(f"model -> {args.model}; schema (after selection) -> {args.schema}")
    return 0


def _cmd_eval_model(args) -> int:
    config = _load_config(args.config)
    schema = FeatureSchema.load(args.schema)
    matrix = load_dataset(args.dataset, schema)
    seed = args.seed if args.seed is not None else config.train_seed
    train, test = split(matrix, ratio=0.8, seed=config.split_seed)

    rows = []
    model = forest.train_forest(train, forest.ForestHyperparams(), seed)
    rows.append(("random_forest", metrics.evaluate(model, test)))
    for kind in baselines.BASELINE_KINDS:
        baseline = baselines.train_baseline(kind, train)
        rows.append((kind, metrics.evaluate(baseline, test)))

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("model,accuracy,precision,recall,f1,auc\n")
        for name, report in rows:
            cells = [name] + [
                "" if report[key] is None else f"{report[key] * 100.0:.2f}"
                for key in ("accuracy", "precision", "recall", "f1", "auc")
            ]
            fh.write(",".join(cells) + "\n")
            print(f"{name}: acc={report['accuracy']:.4f} auc={report['auc']:.4f}")
    print(f"comparison -> {args.out}")
    return 0


def _cmd_campaign(args) -> int:
    config = _load_config(args.config)
    budget = args.budget or config.campaign_budget
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    generator_config = config.generator_config(budget=budget, seed=args.seed)
    token = auth_token()

    if args.filter == "off":
        transport = _transport_for(args, config, args.version, args.env)
        records = run_collection(
            default_api_schema(), generator_config, transport, token,
            args.env, args.version, out_dir / "executed.jsonl",
        )
        failures = sum(1 for r in records if r.statusCode != 200)
        print(f"unfiltered campaign: {len(records)} executed, {failures} failures")
        return 0

    schema = FeatureSchema.load(args.schema)
    model = forest.load_model(args.model)
    transport = _transport_for(args, config, args.version, args.env)
    stats, _, filtered = run_filtered_campaign(
        default_api_schema(), generator_config, model, schema, transport, token,
        args.env, args.version,
        executed_log=out_dir / "executed.jsonl",
        filtered_log=out_dir / "filtered.jsonl",
    )
    would_be = audit_filtered(
        filtered, lambda: _service(config, args.version, args.env), token,
        args.env, args.version,
    )
    fn = would_be.get("200", 0)
    row = stats_csv_row(args.env, args.version, stats, fn)
    with open(out_dir / "filter_stats.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(TABLE_COLUMNS) + "\n")
        fh.write(",".join(str(cell) for cell in row) + "\n")
    print(
        f"filtered campaign: {stats.totalGenerated} generated, "
        f"{stats.predictedSuccess} executed, {stats.predictedFailure} filtered, "
        f"{stats.executedButFailed} executed-but-failed, {fn} would-have-succeeded"
    )
    print(f"stats -> {out_dir / 'filter_stats.csv'}")
    return 0


def _cmd_experiment(args) -> int:
    config = _load_config(args.config)
    catalog = generate_catalog(config.catalog_seed)
    schema = FeatureSchema.load(args.schema)
    model = forest.load_model(args.model)
    experiment_config = config.experiment
    if args.repetitions:
        experiment_config = ExperimentConfig(
            versions=experiment_config.versions,
            environments=experiment_config.environments,
            repetitions=args.repetitions,
            budget=args.budget or experiment_config.budget,
            master_seed=args.seed if args.seed is not None else experiment_config.master_seed,
            approaches=experiment_config.approaches,
        )
    base_generator = config.generator_config(budget=experiment_config.budget, seed=0)

    done = {"count": 0}

    def progress(result):
        done["count"] += 1
        print(
            f"[{done['count']}] {result.approach} {result.environment}/{result.version} "
            f"rep {result.repetition}: executed {result.executed}, "
            f"coverageApplied {result.coverageApplied}"
        )

    results = run_experiment(
        experiment_config, catalog, base_generator, args.out_dir,
        model=model, feature_schema=schema,
        progress=progress if args.verbose else None,
    )
    print(f"{len(results)} runs -> {Path(args.out_dir) / 'results.jsonl'}")
    return 0


def _cmd_report(args) -> int:
    results = load_results(args.store)
    paths = render_reports(results, args.out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzgate", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="lab config JSON (defaults are used otherwise)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="write the default lab config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_config)

    p = sub.add_parser("serve", help="serve the registry over HTTP")
    p.add_argument("--version", default="v1")
    p.add_argument("--env", default="dev", choices=("dev", "test", "prod"))
    p.add_argument("--port", type=int, default=8420)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("collect", help="run a collection campaign, log raw records")
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--version")
    p.add_argument("--env", choices=("dev", "test", "prod"))
    p.add_argument("--base-url", help="target an HTTP registry instead of in-process")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_collect)

    p = sub.add_parser("prepare", help="refine a raw log into a dataset")
    p.add_argument("--raw", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--schema", required=True)
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("train", help="train the forest model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--search", type=int, default=0, metavar="TRIALS")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval-model", help="compare classifiers on one dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_model)

    p = sub.add_parser("campaign", help="run one campaign")
    p.add_argument("--filter", choices=("on", "off"), required=True)
    p.add_argument("--version", required=True)
    p.add_argument("--env", required=True, choices=("dev", "test", "prod"))
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--model")
    p.add_argument("--schema")
    p.add_argument("--base-url")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("experiment", help="run the factorial experiment")
    p.add_argument("--model", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("report", help="render CSV reports from results")
    p.add_argument("--store", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "campaign" and args.filter == "on":
        if not args.model or not args.schema:
            print("campaign --filter on needs --model and --schema", file=sys.stderr)
            return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
