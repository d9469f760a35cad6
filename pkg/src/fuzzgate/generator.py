"""Schema-driven random request generator with execution and raw logging.

Each generated request is either fully valid or carries exactly one
injected corruption class:

* ``no_auth``            -- drop the bearer token (service answers 302)
* ``format_invalid_date``-- dates that fail the ISO format check (500)
* ``calendar_invalid``   -- format-valid dates that do not exist (500,
                            and invisible to the feature set by design)
* ``type_confusion``     -- a number where a digit-string is expected (500)
* ``wrong_enum``         -- enum fields set to junk values (still 200)

The default mix is calibrated so that a collection run lands close to the
observed production status distribution (roughly 60% / 35% / 5% for
200 / 500 / 302) while leaving the calendar fault as the only failure the
downstream model cannot see.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Mapping

from .schema import DATE, DIGITS, ENUM, ApiSchema, FieldSpec
from .service import AUTH_HEADER

CONFIG_FORMAT_VERSION = 1

VALID = "valid"
NO_AUTH = "no_auth"
FORMAT_INVALID_DATE = "format_invalid_date"
CALENDAR_INVALID = "calendar_invalid"
TYPE_CONFUSION = "type_confusion"
WRONG_ENUM = "wrong_enum"

CORRUPTION_CLASSES = (
    NO_AUTH,
    FORMAT_INVALID_DATE,
    CALENDAR_INVALID,
    TYPE_CONFUSION,
    WRONG_ENUM,
)

USERS = ("svc-web", "svc-batch", "ui-client")

_BAD_DATE_SHAPES = ("12/2017", "2017-1-1", "notadate", "01-02-2017", "20171201", "2017.12.01")


@dataclass(frozen=True)
class MixProbabilities:
    no_auth: float = 0.048
    format_invalid_date: float = 0.19
    calendar_invalid: float = 0.08
    type_confusion: float = 0.082
    wrong_enum: float = 0.39

    def __post_init__(self):
        for name, p in asdict(self).items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"mix probability {name}={p} outside [0, 1]")
        if self.total() > 1.0 + 1e-9:
            raise ValueError("mix probabilities sum above 1")

    def total(self) -> float:
        return (
            self.no_auth
            + self.format_invalid_date
            + self.calendar_invalid
            + self.type_confusion
            + self.wrong_enum
        )


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    budget: int = 1000
    mix: MixProbabilities = field(default_factory=MixProbabilities)
    messages_min: int = 1
    messages_max: int = 3

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0 < self.messages_min <= self.messages_max:
            raise ValueError("bad messagesPerRequest range")

    def to_json(self) -> dict:
        doc = {"format_version": CONFIG_FORMAT_VERSION, **asdict(self)}
        return doc

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "GeneratorConfig":
        if doc.get("format_version") != CONFIG_FORMAT_VERSION:
            raise ValueError(f"unsupported generator config version: {doc.get('format_version')!r}")
        return cls(
            seed=doc["seed"],
            budget=doc["budget"],
            mix=MixProbabilities(**doc["mix"]),
            messages_min=doc["messages_min"],
            messages_max=doc["messages_max"],
        )


@dataclass(frozen=True)
class GeneratedRequest:
    requestId: str
    endpoint: str
    authPresent: bool
    body: Mapping[str, Any]
    user: str
    corruption: str  # one of VALID / CORRUPTION_CLASSES
    internals: Mapping[str, Any]  # generator-only metrics, cleaned away downstream

    def body_bytes(self) -> bytes:
        return json.dumps(self.body).encode("utf-8")


@dataclass
class RequestRecord:
    requestId: str
    endpoint: str
    method: str
    authPresent: bool
    body: Mapping[str, Any]
    user: str
    environment: str
    versionId: str
    statusCode: int
    responseBody: Mapping[str, Any]
    generatorInternals: Mapping[str, Any]

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "requestId": self.requestId,
                "endpoint": self.endpoint,
                "method": self.method,
                "authPresent": self.authPresent,
                "body": self.body,
                "user": self.user,
                "environment": self.environment,
                "versionId": self.versionId,
                "statusCode": self.statusCode,
                "responseBody": self.responseBody,
                "generatorInternals": self.generatorInternals,
            }
        )


# ---------------------------------------------------------------------------
# Payload construction
# ---------------------------------------------------------------------------

def _valid_value(rng: random.Random, spec: FieldSpec) -> str:
    if spec.kind == ENUM:
        return rng.choice(spec.values)
    if spec.kind == DIGITS:
        return "".join(rng.choice("0123456789") for _ in range(spec.length))
    if spec.kind == DATE:
        return f"{rng.randint(1990, 2023):04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
    raise ValueError(f"unknown field kind {spec.kind!r}")


def _valid_message(rng: random.Random, schema: ApiSchema) -> dict[str, str]:
    return {spec.name: _valid_value(rng, spec) for spec in schema.message_fields}


def _format_invalid_date(rng: random.Random) -> str:
    return rng.choice(_BAD_DATE_SHAPES)


def _calendar_invalid_date(rng: random.Random) -> str:
    # format-valid by construction, never a real day
    if rng.random() < 0.5:
        return f"{rng.randint(1990, 2023):04d}-{rng.randint(13, 19):02d}-{rng.randint(1, 28):02d}"
    return f"{rng.randint(1990, 2023):04d}-{rng.randint(1, 12):02d}-{rng.randint(32, 39):02d}"


def _wrong_enum_value(rng: random.Random, spec: FieldSpec) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyzXYZQW"
    while True:
        token = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
        if token not in spec.values:
            return token


def _corrupt_messages(rng: random.Random, schema: ApiSchema, messages: list[dict], how: str) -> None:
    """Apply one corruption class to every message (kept homogeneous per request)."""
    if how == FORMAT_INVALID_DATE:
        bad = _format_invalid_date(rng)
        for msg in messages:
            msg["diagnosedato"] = bad
    elif how == CALENDAR_INVALID:
        bad = _calendar_invalid_date(rng)
        for msg in messages:
            msg["diagnosedato"] = bad
    elif how == TYPE_CONFUSION:
        digit_specs = [s for s in schema.message_fields if s.kind == DIGITS]
        spec = rng.choice(digit_specs)
        for msg in messages:
            msg[spec.name] = rng.randint(0, 10 ** spec.length - 1)
    elif how == WRONG_ENUM:
        enum_specs = [s for s in schema.message_fields if s.kind == ENUM]
        for spec in enum_specs:
            bad = _wrong_enum_value(rng, spec)
            for msg in messages:
                msg[spec.name] = bad


def generate_request(schema: ApiSchema, config: GeneratorConfig, rng: random.Random,
                     index: int) -> GeneratedRequest:
    """Draw one request; deterministic given the rng state at this index."""
    endpoint = rng.choice(schema.endpoints)
    user = rng.choice(USERS)
    n_messages = rng.randint(config.messages_min, config.messages_max)
    messages = [_valid_message(rng, schema) for _ in range(n_messages)]

    draw = rng.random()
    corruption = VALID
    cumulative = 0.0
    mix = config.mix
    for name, p in (
        (NO_AUTH, mix.no_auth),
        (FORMAT_INVALID_DATE, mix.format_invalid_date),
        (CALENDAR_INVALID, mix.calendar_invalid),
        (TYPE_CONFUSION, mix.type_confusion),
        (WRONG_ENUM, mix.wrong_enum),
    ):
        cumulative += p
        if draw < cumulative:
            corruption = name
            break

    auth_present = corruption != NO_AUTH

    if endpoint.body_kind == "messages":
        if corruption not in (VALID, NO_AUTH):
            _corrupt_messages(rng, schema, messages, corruption)
        body: dict[str, Any] = {"messages": messages}
    else:
        case_date = _valid_value(rng, schema.field("diagnosedato"))
        if corruption == FORMAT_INVALID_DATE:
            case_date = _format_invalid_date(rng)
        elif corruption == CALENDAR_INVALID:
            case_date = _calendar_invalid_date(rng)
        elif corruption in (TYPE_CONFUSION, WRONG_ENUM):
            _corrupt_messages(rng, schema, messages, corruption)
        body = {
            "cancerCase": {
                "caseId": f"case-{rng.randrange(10 ** 8):08d}",
                "diagnosedato": case_date,
                "messages": messages,
            }
        }

    internals = {"novelty": round(rng.random(), 6), "candidateRank": rng.randrange(100)}
    return GeneratedRequest(
        requestId=f"req-{index:06d}",
        endpoint=endpoint.path,
        authPresent=auth_present,
        body=body,
        user=user,
        corruption=corruption,
        internals=internals,
    )


# ---------------------------------------------------------------------------
# Execution and collection
# ---------------------------------------------------------------------------

def request_headers(request: GeneratedRequest, auth_token: str) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    if request.authPresent:
        headers[AUTH_HEADER] = f"Bearer {auth_token}"
    return headers


def execute_request(request: GeneratedRequest, transport, auth_token: str,
                    environment: str, version_id: str) -> RequestRecord:
    """Send one request through *transport* and capture the outcome.

    Transport failures propagate as :class:`fuzzgate.transport.TransportError`.
    """
    status, response_body = transport.post(
        request.endpoint, request_headers(request, auth_token), request.body_bytes()
    )
    return RequestRecord(
        requestId=request.requestId,
        endpoint=request.endpoint,
        method="POST",
        authPresent=request.authPresent,
        body=request.body,
        user=request.user,
        environment=environment,
        versionId=version_id,
        statusCode=status,
        responseBody=response_body,
        generatorInternals=request.internals,
    )


def run_collection(schema: ApiSchema, config: GeneratorConfig, transport,
                   auth_token: str, environment: str, version_id: str,
                   log_path: str | Path | None) -> list[RequestRecord]:
    """Generate and execute ``config.budget`` requests, appending JSON lines.

    The run is reproducible from the seed.  On an I/O failure the records
    written so far are flushed before the error propagates.  ``log_path``
    may be None to skip logging.
    """
    rng = random.Random(config.seed)
    records: list[RequestRecord] = []
    if log_path is None:
        for index in range(config.budget):
            request = generate_request(schema, config, rng, index)
            records.append(
                execute_request(request, transport, auth_token, environment, version_id)
            )
        return records
    log_path = Path(log_path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, "w", encoding="utf-8") as fh:
        for index in range(config.budget):
            request = generate_request(schema, config, rng, index)
            record = execute_request(request, transport, auth_token, environment, version_id)
            fh.write(record.to_json_line() + "\n")
            records.append(record)
    return records
