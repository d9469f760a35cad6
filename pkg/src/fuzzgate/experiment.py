"""Factorial experiment harness.

Runs approaches x environments x versions x repetitions, each repetition
against a fresh in-process service, and persists one result row per run.
Per-run seeds derive from the master seed and the cell coordinates, so
any subset of cells reproduces identically regardless of run order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .catalog import Catalog
from .config import ExperimentConfig, auth_token
from .features import FeatureSchema
from .gate import FilterStats, audit_filtered, campaign_metrics, cost_reduction, run_filtered_campaign
from .generator import GeneratorConfig, run_collection
from .schema import default_api_schema
from .service import RegistryService, ServiceConfig
from .stats import compare_samples, coverage
from .transport import InProcessTransport

RESULTS_FILE = "results.jsonl"


def derive_seed(master: int, *parts) -> int:
    key = ":".join([str(master), *map(str, parts)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:6], "big")


@dataclass
class RunResult:
    approach: str
    environment: str
    version: str
    repetition: int
    seed: int
    totalGenerated: int
    executed: int
    predictedFailure: int
    executedButFailed: int
    falseNegatives: int | None  # audit result; None for the unfiltered approach
    status200: int
    status302: int
    status500: int
    totalHits: int
    applied: int
    notApplied: int
    coverageApplied: float | None
    coverageNotApplied: float | None
    costReduction: float

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "RunResult":
        return cls(**doc)


def _coverage_fields(service: RegistryService) -> tuple[int, int, int, float | None, float | None]:
    counters = service.snapshot_counters()
    if counters.totalHits == 0:
        return 0, 0, 0, None, None
    report = coverage(counters.applied, counters.notApplied)
    return (
        counters.totalHits,
        counters.applied,
        counters.notApplied,
        report.coverageApplied,
        report.coverageNotApplied,
    )


def run_cell_repetition(
    approach: str,
    environment: str,
    version: str,
    repetition: int,
    seed: int,
    budget: int,
    catalog: Catalog,
    base_generator: GeneratorConfig,
    model=None,
    feature_schema: FeatureSchema | None = None,
) -> RunResult:
    """One repetition of one cell against a fresh service."""
    token = auth_token()
    config = GeneratorConfig(
        seed=seed,
        budget=budget,
        mix=base_generator.mix,
        messages_min=base_generator.messages_min,
        messages_max=base_generator.messages_max,
    )
    api_schema = default_api_schema()

    def service_factory() -> RegistryService:
        return RegistryService(
            catalog.ruleset(version, environment),
            ServiceConfig(versionId=version, environment=environment, authToken=token),
        )

    service = service_factory()
    transport = InProcessTransport(service)

    if approach == "unfiltered":
        records = run_collection(
            api_schema, config, transport, token, environment, version, log_path=None,
        )
        tallies: dict[int, int] = {}
        for record in records:
            tallies[record.statusCode] = tallies.get(record.statusCode, 0) + 1
        hits, applied, not_applied, cov_a, cov_na = _coverage_fields(service)
        return RunResult(
            approach=approach, environment=environment, version=version,
            repetition=repetition, seed=seed,
            totalGenerated=config.budget, executed=config.budget,
            predictedFailure=0,
            executedButFailed=config.budget - tallies.get(200, 0),
            falseNegatives=None,
            status200=tallies.get(200, 0), status302=tallies.get(302, 0),
            status500=tallies.get(500, 0),
            totalHits=hits, applied=applied, notApplied=not_applied,
            coverageApplied=cov_a, coverageNotApplied=cov_na,
            costReduction=0.0,
        )

    if model is None or feature_schema is None:
        raise ValueError("the filtered approach needs a model and feature schema")
    stats, _, filtered = run_filtered_campaign(
        api_schema, config, model, feature_schema, transport, token,
        environment, version,
    )
    would_be = audit_filtered(filtered, service_factory, token, environment, version)
    false_negatives = would_be.get("200", 0)
    hits, applied, not_applied, cov_a, cov_na = _coverage_fields(service)
    return RunResult(
        approach=approach, environment=environment, version=version,
        repetition=repetition, seed=seed,
        totalGenerated=stats.totalGenerated, executed=stats.predictedSuccess,
        predictedFailure=stats.predictedFailure,
        executedButFailed=stats.executedButFailed,
        falseNegatives=false_negatives,
        status200=stats.statusTallies.get(200, 0),
        status302=stats.statusTallies.get(302, 0),
        status500=stats.statusTallies.get(500, 0),
        totalHits=hits, applied=applied, notApplied=not_applied,
        coverageApplied=cov_a, coverageNotApplied=cov_na,
        costReduction=cost_reduction(stats),
    )


def run_experiment(
    config: ExperimentConfig,
    catalog: Catalog,
    base_generator: GeneratorConfig,
    out_dir: str | Path,
    model=None,
    feature_schema: FeatureSchema | None = None,
    progress=None,
) -> list[RunResult]:
    """Run the full factorial design and persist one JSON line per run.

    A repetition that fails is recorded with an ``error`` field and the
    run continues.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[RunResult] = []
    with open(out_dir / RESULTS_FILE, "w", encoding="utf-8") as fh:
        for environment in config.environments:
            for version in config.versions:
                for approach in config.approaches:
                    for repetition in range(config.repetitions):
                        seed = derive_seed(
                            config.master_seed, approach, environment, version, repetition
                        )
                        try:
                            result = run_cell_repetition(
                                approach, environment, version, repetition, seed,
                                config.budget, catalog, base_generator,
                                model=model, feature_schema=feature_schema,
                            )
                        except Exception as exc:  # record, then keep going
                            fh.write(json.dumps({
                                "approach": approach, "environment": environment,
                                "version": version, "repetition": repetition,
                                "error": f"{type(exc).__name__}: {exc}",
                            }) + "\n")
                            continue
                        results.append(result)
                        fh.write(json.dumps(result.to_json()) + "\n")
                        if progress is not None:
                            progress(result)
    return results


def load_results(out_dir: str | Path) -> list[RunResult]:
    results = []
    with open(Path(out_dir) / RESULTS_FILE, encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            if "error" in doc:
                continue
            results.append(RunResult.from_json(doc))
    return results


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _cells(results: list[RunResult]) -> list[tuple[str, str]]:
    seen = []
    for result in results:
        cell = (result.environment, result.version)
        if cell not in seen:
            seen.append(cell)
    return seen


def render_reports(results: list[RunResult], out_dir: str | Path) -> dict[str, Path]:
    """Write the cost-reduction table, the coverage comparison table and
    the per-cell statistical summary.  Cells with no data are skipped with
    a warning line on stderr."""
    import sys

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "cost": out_dir / "cost_reduction.csv",
        "coverage": out_dir / "coverage_comparison.csv",
        "stats": out_dir / "stats_summary.csv",
    }

    by_cell: dict[tuple[str, str, str], list[RunResult]] = {}
    for result in results:
        by_cell.setdefault(
            (result.approach, result.environment, result.version), []
        ).append(result)

    with open(paths["cost"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "environment", "version", "total_requests", "pred_success",
            "pred_failure", "pred_success_failure", "accuracy", "precision",
            "recall", "f1", "cost_reduction",
        ])
        for environment, version in _cells(results):
            runs = by_cell.get(("filtered", environment, version))
            if not runs:
                print(f"warning: no filtered runs for {environment}/{version}", file=sys.stderr)
                continue
            stats = FilterStats(
                totalGenerated=sum(r.totalGenerated for r in runs),
                predictedSuccess=sum(r.executed for r in runs),
                predictedFailure=sum(r.predictedFailure for r in runs),
                executedButFailed=sum(r.executedButFailed for r in runs),
            )
            fn = sum(r.falseNegatives or 0 for r in runs)
            report = campaign_metrics(stats, fn)

            def pct(value):
                return "" if value is None else f"{value * 100.0:.2f}"

            writer.writerow([
                environment, version, stats.totalGenerated, stats.predictedSuccess,
                stats.predictedFailure, stats.executedButFailed,
                pct(report.accuracy), pct(report.precision), pct(report.recall),
                pct(report.f1), f"{cost_reduction(stats):.2f}",
            ])

    with open(paths["coverage"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "environment", "version",
            "requests_ours", "requests_baseline",
            "rule_hits_ours", "rule_hits_baseline",
            "applied_ours", "applied_baseline",
            "not_applied_ours", "not_applied_baseline",
            "coverage_applied_ours", "coverage_applied_baseline",
            "coverage_not_applied_ours", "coverage_not_applied_baseline",
        ])
        for environment, version in _cells(results):
            ours = by_cell.get(("filtered", environment, version))
            baseline = by_cell.get(("unfiltered", environment, version))
            if not ours or not baseline:
                print(f"warning: incomplete cell {environment}/{version}", file=sys.stderr)
                continue

            def aggregate(runs):
                applied = sum(r.applied for r in runs)
                not_applied = sum(r.notApplied for r in runs)
                report = coverage(applied, not_applied)
                return {
                    "requests": sum(r.executed for r in runs),
                    "hits": report.totalHits,
                    "applied": applied,
                    "not_applied": not_applied,
                    "cov_a": report.coverageApplied,
                    "cov_na": report.coverageNotApplied,
                }

            a, b = aggregate(ours), aggregate(baseline)
            writer.writerow([
                environment, version,
                a["requests"], b["requests"], a["hits"], b["hits"],
                a["applied"], b["applied"], a["not_applied"], b["not_applied"],
                f"{a['cov_a']:.2f}", f"{b['cov_a']:.2f}",
                f"{a['cov_na']:.2f}", f"{b['cov_na']:.2f}",
            ])

    with open(paths["stats"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "environment", "version", "metric", "mann_whitney_u", "p_value", "a12",
        ])
        for environment, version in _cells(results):
            ours = by_cell.get(("filtered", environment, version))
            baseline = by_cell.get(("unfiltered", environment, version))
            if not ours or not baseline:
                continue
            xs = [r.coverageApplied for r in ours if r.coverageApplied is not None]
            ys = [r.coverageApplied for r in baseline if r.coverageApplied is not None]
            if not xs or not ys:
                continue
            stat = compare_samples(xs, ys)
            writer.writerow([
                environment, version, "coverage_applied",
                f"{stat.mannWhitneyU:.1f}", f"{stat.pValue:.4f}", f"{stat.a12:.4f}",
            ])

    return paths
