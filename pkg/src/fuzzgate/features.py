"""Refines raw request logs into a model-ready dataset.

The pipeline is two functions with a persisted schema between them:

* :func:`refine` flattens raw records into dotted-key dictionaries and
  strips everything that only exists after execution (generator internals,
  response bodies).  The status code survives because the target needs it.
* :func:`build_features` turns flat records into a numeric matrix.  Label
  encodings are assigned in first-occurrence order during the training
  pass and persisted in the schema; at inference the stored tables are
  used verbatim and unseen categories map to the sentinel code
  ``len(table)``.

The target is binary: 1 for a 200 response, 0 for everything else.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .dates import is_format_valid

log = logging.getLogger(__name__)

SCHEMA_FORMAT_VERSION = 1

BINARY = "binary"
COUNT = "count"
LABEL = "label"

_MESSAGE_INDEX_RE = re.compile(r"^(?:cancerCase\.)?messages\.(\d+)\.")

#: Keys that only exist once a request has been executed (minus the status
#: code, which the target definition consumes).
_POST_EXECUTION_KEYS = ("generatorInternals", "responseBody")


# ---------------------------------------------------------------------------
# Refinement: extraction, transformation, cleaning
# ---------------------------------------------------------------------------

def _flatten(prefix: str, value, out: dict[str, Any]) -> None:
    if isinstance(value, Mapping):
        for key, sub in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), sub, out)
    elif isinstance(value, list):
        for index, sub in enumerate(value):
            _flatten(f"{prefix}.{index}", sub, out)
    else:
        out[prefix] = value


def refine(records: Iterable[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Flatten raw records and drop post-execution-only information."""
    flats = []
    for record in records:
        flat: dict[str, Any] = {}
        for key, value in record.items():
            if key in _POST_EXECUTION_KEYS or key.split(".", 1)[0] in _POST_EXECUTION_KEYS:
                continue
            if key == "endpoint":
                flat["url"] = value
                continue
            if key == "body":
                _flatten("", value, flat)
                continue
            _flatten(key, value, flat)
        flats.append(flat)
    return flats


def refine_file(path: str | Path) -> tuple[list[dict[str, Any]], int]:
    """Refine a JSON-lines raw log; malformed lines are skipped and counted."""
    raw, skipped = [], 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                skipped += 1
                log.warning("skipping malformed log line %d", line_no)
                continue
            raw.append(record)
    return refine(raw), skipped


# ---------------------------------------------------------------------------
# Feature schema
# ---------------------------------------------------------------------------

@dataclass
class FeatureSpec:
    name: str
    kind: str  # BINARY, COUNT or LABEL
    table: dict[str, int] = field(default_factory=dict)  # label encoders only


@dataclass
class FeatureSchema:
    features: list[FeatureSpec]
    target: str = "statusCode==200"

    def names(self) -> list[str]:
        return [spec.name for spec in self.features]

    def fingerprint(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_json(), sort_keys=True).encode()
        ).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "format_version": SCHEMA_FORMAT_VERSION,
            "target": self.target,
            "features": [
                {"name": s.name, "kind": s.kind, **({"table": s.table} if s.kind == LABEL else {})}
                for s in self.features
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "FeatureSchema":
        if doc.get("format_version") != SCHEMA_FORMAT_VERSION:
            raise ValueError(f"unsupported schema version: {doc.get('format_version')!r}")
        features = [
            FeatureSpec(f["name"], f["kind"], dict(f.get("table", {})))
            for f in doc["features"]
        ]
        return cls(features=features, target=doc.get("target", "statusCode==200"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class FeatureMatrix:
    X: np.ndarray  # (n_rows, n_features) float64
    y: np.ndarray  # (n_rows,) int, values in {0, 1}
    requestIds: list[str]

    def __post_init__(self):
        if len(self.X) != len(self.y):
            raise ValueError("X and y row counts differ")


# ---------------------------------------------------------------------------
# Raw feature extraction (value level, before encoding)
# ---------------------------------------------------------------------------

_MESSAGE_PREFIXES = ("messages.0.", "cancerCase.messages.0.")


def _first_message_value(flat: Mapping[str, Any], field_name: str):
    for prefix in _MESSAGE_PREFIXES:
        key = prefix + field_name
        if key in flat:
            return flat[key]
    return None


def _message_indices(flat: Mapping[str, Any]) -> set[str]:
    indices = set()
    for key in flat:
        m = _MESSAGE_INDEX_RE.match(key)
        if m:
            indices.add(m.group(1))
    return indices


def _all_message_values(flat: Mapping[str, Any], field_name: str) -> list:
    values = []
    for key, value in flat.items():
        m = _MESSAGE_INDEX_RE.match(key)
        if m and key.endswith("." + field_name):
            values.append(value)
    return values


def _digits_format_ok(value) -> bool:
    return isinstance(value, str) and value.isdigit()


def extract_raw_value(flat: Mapping[str, Any], name: str):
    """Raw (pre-encoding) value of feature *name* for one flat record.

    Pure in the record: no status or response information is consulted,
    so the same extraction runs before execution at the filter gate.
    """
    if name == "is_no_auth":
        return 0 if flat.get("authPresent") else 1
    if name == "endpoint":
        return flat.get("url")
    if name in ("method", "environment", "versionId", "user"):
        return flat.get(name)
    if name == "cancerMessagesNr":
        return len(_message_indices(flat))
    if name == "cancerTypesNr":
        types = {v for v in _all_message_values(flat, "cancerType") if v is not None}
        return len(types)
    if name == "message.diagnosedato_format_valid":
        values = [v for v in _all_message_values(flat, "diagnosedato") if v is not None]
        return 1 if all(is_format_valid(v) for v in values) else 0
    if name == "cancerCase.diagnosedato_format_valid":
        value = flat.get("cancerCase.diagnosedato")
        return 1 if value is None or is_format_valid(value) else 0
    if name == "message.topografi_format_valid":
        values = [v for v in _all_message_values(flat, "topografi") if v is not None]
        return 1 if all(_digits_format_ok(v) for v in values) else 0
    if name == "message.ekstralokalisasjon_format_valid":
        values = [v for v in _all_message_values(flat, "ekstralokalisasjon") if v is not None]
        return 1 if all(_digits_format_ok(v) for v in values) else 0
    if name.startswith("message."):
        return _first_message_value(flat, name[len("message."):])
    return flat.get(name)


def default_feature_specs() -> list[FeatureSpec]:
    """The full candidate feature set, before importance-based selection."""
    return [
        FeatureSpec("is_no_auth", BINARY),
        FeatureSpec("endpoint", LABEL),
        FeatureSpec("method", LABEL),
        FeatureSpec("environment", LABEL),
        FeatureSpec("versionId", LABEL),
        FeatureSpec("user", LABEL),
        FeatureSpec("cancerMessagesNr", COUNT),
        FeatureSpec("cancerTypesNr", COUNT),
        FeatureSpec("message.meldingstype", LABEL),
        FeatureSpec("message.topografi", LABEL),
        FeatureSpec("message.metastase", LABEL),
        FeatureSpec("message.ekstralokalisasjon", LABEL),
        FeatureSpec("message.cancerType", LABEL),
        FeatureSpec("message.diagnosedato_format_valid", BINARY),
        FeatureSpec("cancerCase.diagnosedato_format_valid", BINARY),
        FeatureSpec("message.topografi_format_valid", BINARY),
        FeatureSpec("message.ekstralokalisasjon_format_valid", BINARY),
    ]


def _label_key(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"<{type(value).__name__}>{value}"


def encode_value(spec: FeatureSpec, value, *, building: bool) -> float:
    if spec.kind in (BINARY, COUNT):
        return float(value)
    key = _label_key(value)
    if key in spec.table:
        return float(spec.table[key])
    if building:
        code = len(spec.table)
        spec.table[key] = code
        return float(code)
    return float(len(spec.table))  # unseen-category sentinel


def feature_row(flat: Mapping[str, Any], schema: FeatureSchema) -> np.ndarray:
    """Encode one flat record with a frozen schema (inference path)."""
    return np.array(
        [encode_value(spec, extract_raw_value(flat, spec.name), building=False)
         for spec in schema.features],
        dtype=np.float64,
    )


def build_features(
    records: Sequence[Mapping[str, Any]], schema: FeatureSchema | None = None
) -> tuple[FeatureMatrix, FeatureSchema]:
    """Encode flat records into a numeric matrix.

    Without a schema this is the training pass: encoder tables are built
    in first-occurrence order.  With a schema the stored tables are used
    verbatim and never mutated.
    """
    building = schema is None
    if building:
        schema = FeatureSchema(features=default_feature_specs())
    rows = np.empty((len(records), len(schema.features)), dtype=np.float64)
    y = np.empty(len(records), dtype=np.int64)
    request_ids = []
    for i, flat in enumerate(records):
        for j, spec in enumerate(schema.features):
            rows[i, j] = encode_value(spec, extract_raw_value(flat, spec.name), building=building)
        y[i] = 1 if flat.get("statusCode") == 200 else 0
        request_ids.append(str(flat.get("requestId", f"row-{i}")))
    return FeatureMatrix(rows, y, request_ids), schema


# ---------------------------------------------------------------------------
# Importance-based selection and the train/test split
# ---------------------------------------------------------------------------

def select_features(matrix: FeatureMatrix, schema: FeatureSchema, importance_fn,
                    importances: np.ndarray | None = None
                    ) -> tuple[FeatureMatrix, FeatureSchema]:
    """Iteratively drop features whose importance is exactly zero.

    ``importance_fn(matrix)`` must train on the matrix's current feature
    set and return one importance per column.  The loop re-trains after
    every drop until no zero-importance feature remains.  Refuses to drop
    the last remaining feature.
    """
    current = importances if importances is not None else importance_fn(matrix)
    while True:
        current = np.asarray(current, dtype=np.float64)
        if len(current) != matrix.X.shape[1]:
            raise ValueError("importances length does not match feature count")
        zero = np.flatnonzero(current == 0.0)
        if len(zero) == 0:
            return matrix, schema
        if len(zero) >= matrix.X.shape[1]:
            raise ValueError("refusing to drop every feature")
        keep = np.flatnonzero(current != 0.0)
        matrix = FeatureMatrix(matrix.X[:, keep], matrix.y, matrix.requestIds)
        schema = FeatureSchema(
            features=[schema.features[int(i)] for i in keep], target=schema.target
        )
        current = importance_fn(matrix)


def split(matrix: FeatureMatrix, ratio: float = 0.8, seed: int = 0
          ) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Shuffled, disjoint, exhaustive train/test split (floor(ratio*n) train rows)."""
    n = len(matrix.y)
    if n < 5:
        raise ValueError(f"need at least 5 rows to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(ratio * n))
    train_idx, test_idx = order[:n_train], order[n_train:]

    def take(idx):
        return FeatureMatrix(
            matrix.X[idx], matrix.y[idx], [matrix.requestIds[int(i)] for i in idx]
        )

    return take(train_idx), take(test_idx)


# ---------------------------------------------------------------------------
# Dataset file I/O
# ---------------------------------------------------------------------------

def save_dataset(matrix: FeatureMatrix, schema: FeatureSchema, path: str | Path) -> None:
    """CSV with header = feature names + ``target``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.names() + ["target"])
        for row, target in zip(matrix.X, matrix.y):
            writer.writerow([_format_number(v) for v in row] + [int(target)])


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def load_dataset(path: str | Path, schema: FeatureSchema) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != schema.names() + ["target"]:
            raise ValueError("dataset header does not match feature schema")
        rows, targets = [], []
        for record in reader:
            rows.append([float(v) for v in record[:-1]])
            targets.append(int(record[-1]))
    X = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(schema.features)))
    y = np.array(targets, dtype=np.int64)
    return FeatureMatrix(X, y, [f"row-{i}" for i in range(len(targets))])
