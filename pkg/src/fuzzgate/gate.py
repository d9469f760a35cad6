"""Filter gate: predict each generated request's outcome, execute only
predicted successes.

Featurization happens strictly before execution, from request data alone,
through the same refine/encode path the training pipeline uses; there is
no status or response information to leak.  Filtered requests never reach
the campaign transport but are logged with their predicted probability so
the books balance.

Ground truth for filtered requests (needed for honest recall numbers)
comes from a separate audit replay against a fresh service instance, not
from the campaign transport.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .features import FeatureSchema, feature_row, refine
from .forest import SchemaMismatchError
from .generator import (
    GeneratedRequest,
    GeneratorConfig,
    RequestRecord,
    execute_request,
    generate_request,
)
from .metrics import ClassificationMetrics, ConfusionCounts, classification_metrics
from .schema import ApiSchema


@dataclass
class FilterStats:
    totalGenerated: int = 0
    predictedSuccess: int = 0  # executed
    predictedFailure: int = 0  # filtered out, never executed
    executedButFailed: int = 0  # false positives among executed
    statusTallies: dict[int, int] = field(default_factory=dict)

    def check(self) -> None:
        assert self.totalGenerated == self.predictedSuccess + self.predictedFailure
        assert self.executedButFailed <= self.predictedSuccess


@dataclass(frozen=True)
class Executed:
    record: RequestRecord
    probability: float


@dataclass(frozen=True)
class Filtered:
    request: GeneratedRequest
    features: np.ndarray
    probability: float


def request_flat_view(request: GeneratedRequest, environment: str,
                      version_id: str) -> dict[str, Any]:
    """Pre-execution flat record for one request.

    Deliberately built from generation-time data only; there is no status
    code or response to include.
    """
    pre_record = {
        "requestId": request.requestId,
        "endpoint": request.endpoint,
        "method": "POST",
        "authPresent": request.authPresent,
        "body": request.body,
        "user": request.user,
        "environment": environment,
        "versionId": version_id,
    }
    return refine([pre_record])[0]


def featurize_request(request: GeneratedRequest, schema: FeatureSchema,
                      environment: str, version_id: str) -> np.ndarray:
    return feature_row(request_flat_view(request, environment, version_id), schema)


def _check_model_schema(model, schema: FeatureSchema) -> None:
    if model.schema_fingerprint and model.schema_fingerprint != schema.fingerprint():
        raise SchemaMismatchError(
            f"model was trained against schema {model.schema_fingerprint}, "
            f"gate is using {schema.fingerprint()}"
        )


def gated_execute(request: GeneratedRequest, model, schema: FeatureSchema,
                  transport, auth_token: str, environment: str,
                  version_id: str) -> Executed | Filtered:
    """Predict, then either execute through *transport* or withhold."""
    _check_model_schema(model, schema)
    row = featurize_request(request, schema, environment, version_id)
    p = model.predict_proba(row)
    if p >= 0.5:
        record = execute_request(request, transport, auth_token, environment, version_id)
        return Executed(record=record, probability=p)
    return Filtered(request=request, features=row, probability=p)


def run_filtered_campaign(
    api_schema: ApiSchema,
    config: GeneratorConfig,
    model,
    schema: FeatureSchema,
    transport,
    auth_token: str,
    environment: str,
    version_id: str,
    executed_log: str | Path | None = None,
    filtered_log: str | Path | None = None,
) -> tuple[FilterStats, list[RequestRecord], list[Filtered]]:
    """Generate ``config.budget`` requests, execute only predicted successes.

    Predictions are batched for speed; because generation never depends on
    responses, the outcome is identical to gating requests one at a time.
    """
    _check_model_schema(model, schema)
    rng = random.Random(config.seed)
    requests = [generate_request(api_schema, config, rng, i) for i in range(config.budget)]
    rows = np.vstack(
        [featurize_request(req, schema, environment, version_id) for req in requests]
    )
    probabilities = model.predict_proba_batch(rows)

    stats = FilterStats(totalGenerated=len(requests))
    executed_records: list[RequestRecord] = []
    filtered: list[Filtered] = []
    for index, request in enumerate(requests):
        p = float(probabilities[index])
        if p >= 0.5:
            record = execute_request(request, transport, auth_token, environment, version_id)
            stats.predictedSuccess += 1
            stats.statusTallies[record.statusCode] = (
                stats.statusTallies.get(record.statusCode, 0) + 1
            )
            if record.statusCode != 200:
                stats.executedButFailed += 1
            executed_records.append(record)
        else:
            stats.predictedFailure += 1
            filtered.append(Filtered(request=request, features=rows[index], probability=p))
    stats.check()

    if executed_log is not None:
        path = Path(executed_log)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for record in executed_records:
                fh.write(record.to_json_line() + "\n")
    if filtered_log is not None:
        path = Path(filtered_log)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for item in filtered:
                fh.write(json.dumps({
                    "requestId": item.request.requestId,
                    "endpoint": item.request.endpoint,
                    "authPresent": item.request.authPresent,
                    "body": item.request.body,
                    "user": item.request.user,
                    "probability": item.probability,
                }) + "\n")
    return stats, executed_records, filtered


def cost_reduction(stats: FilterStats) -> float:
    """Percentage of generated requests withheld from execution."""
    if stats.totalGenerated <= 0:
        raise ValueError("no requests generated")
    return (stats.totalGenerated - stats.predictedSuccess) / stats.totalGenerated * 100.0


def audit_filtered(filtered: list[Filtered], service_factory, auth_token: str,
                   environment: str, version_id: str) -> dict[str, int]:
    """Replay filtered requests against a fresh service to learn their fate.

    Returns the would-be status tally.  Uses its own service instance so
    campaign counters and the no-filtered-request-on-the-wire invariant
    stay intact.
    """
    from .transport import InProcessTransport

    transport = InProcessTransport(service_factory())
    tally: dict[str, int] = {}
    for item in filtered:
        record = execute_request(item.request, transport, auth_token, environment, version_id)
        key = str(record.statusCode)
        tally[key] = tally.get(key, 0) + 1
    return tally


def campaign_metrics(stats: FilterStats, false_negatives: int) -> ClassificationMetrics:
    """Table-style gate metrics; *false_negatives* comes from the audit."""
    tp = stats.predictedSuccess - stats.executedButFailed
    fp = stats.executedButFailed
    fn = false_negatives
    tn = stats.predictedFailure - fn
    return classification_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))


TABLE_COLUMNS = [
    "environment", "version", "total_requests", "pred_success", "pred_failure",
    "pred_success_failure", "accuracy", "precision", "recall", "f1", "cost_reduction",
]


def stats_csv_row(environment: str, version: str, stats: FilterStats,
                  false_negatives: int) -> list:
    """One CSV row in the comparison table's column order."""
    report = campaign_metrics(stats, false_negatives)

    def pct(value: float | None) -> str:
        return "" if value is None else f"{value * 100.0:.2f}"

    return [
        environment, version, stats.totalGenerated, stats.predictedSuccess,
        stats.predictedFailure, stats.executedButFailed,
        pct(report.accuracy), pct(report.precision), pct(report.recall), pct(report.f1),
        f"{cost_reduction(stats):.2f}",
    ]
