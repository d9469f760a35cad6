"""Simulated registry service.

Exposes the two POST endpoints and reproduces the observed status-code
behaviour: every response is exactly one of 200, 302 or 500.

* 302 -- missing or wrong bearer token, checked before anything else.
* 500 -- a server-fault condition: unparseable body, a type-confused
  field (number where a string is expected), a format-invalid date
  anywhere in the payload, or a format-valid date that is not a real
  calendar day.
* 200 -- rules were evaluated; the body carries one rule message per hit.

Rule-hit counters (total / applied / not applied) accumulate over the
service lifetime and are updated atomically.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping

from .dates import is_calendar_valid, is_format_valid
from .rules import (
    AggregationFault,
    CancerCase,
    CancerMessage,
    RuleSet,
    aggregate_case,
    outcome_message,
    validate_message,
)
from .schema import AGGREGATION_PATH, VALIDATION_PATH

AUTH_HEADER = "Authorization"


@dataclass(frozen=True)
class ServiceConfig:
    versionId: str
    environment: str
    authToken: str = "local-dev-token"


@dataclass(frozen=True)
class ApiResponse:
    statusCode: int  # 200 | 302 | 500
    body: Mapping[str, Any]


@dataclass
class Counters:
    totalHits: int = 0
    applied: int = 0
    notApplied: int = 0


class _Fault(Exception):
    """Internal marker for a 500-producing payload problem."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _scan_message(raw: Mapping[str, Any]) -> None:
    for name, value in raw.items():
        if value is not None and not isinstance(value, str):
            raise _Fault(f"type-confused field {name!r}")
    _scan_date(raw.get("diagnosedato"))


def _scan_date(value) -> None:
    if value is None:
        return
    if not is_format_valid(value):
        raise _Fault("format-invalid date")
    if not is_calendar_valid(value):
        raise _Fault("calendar-invalid date")


class RegistryService:
    """In-process registry for one (version, environment) rule set."""

    def __init__(self, ruleset: RuleSet, config: ServiceConfig):
        self.ruleset = ruleset
        self.config = config
        self._counters = Counters()
        self._lock = threading.Lock()

    # -- counters -----------------------------------------------------------

    def snapshot_counters(self) -> Counters:
        with self._lock:
            return Counters(
                totalHits=self._counters.totalHits,
                applied=self._counters.applied,
                notApplied=self._counters.notApplied,
            )

    def _record_hits(self, outcomes) -> None:
        applied = sum(1 for _, outcome in outcomes if outcome.applied)
        with self._lock:
            self._counters.totalHits += len(outcomes)
            self._counters.applied += applied
            self._counters.notApplied += len(outcomes) - applied

    # -- request handling ---------------------------------------------------

    def handle(self, path: str, headers: Mapping[str, str], body: bytes) -> ApiResponse:
        """Route one request; auth wins over everything else."""
        if not self._authorized(headers):
            return ApiResponse(302, {"redirect": "/login", "notice": "authorization required"})
        try:
            if path == VALIDATION_PATH:
                return self._validation(body)
            if path == AGGREGATION_PATH:
                return self._aggregation(body)
            raise _Fault(f"unroutable path {path!r}")
        except _Fault as fault:
            return self._server_error(body, fault.reason)

    def _authorized(self, headers: Mapping[str, str]) -> bool:
        for name, value in headers.items():
            if name.lower() == AUTH_HEADER.lower():
                return value == f"Bearer {self.config.authToken}"
        return False

    def _server_error(self, body: bytes, reason: str) -> ApiResponse:
        error_id = hashlib.sha1(body + reason.encode()).hexdigest()[:10]
        return ApiResponse(500, {"errorId": f"E-{error_id}"})

    def _parse_body(self, body: bytes) -> Any:
        try:
            return json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise _Fault("unparseable body") from None

    def _validation(self, body: bytes) -> ApiResponse:
        document = self._parse_body(body)
        if isinstance(document, Mapping) and "messages" in document:
            raw_messages = document["messages"]
        elif isinstance(document, Mapping):
            raw_messages = [document]  # a single bare message is accepted
        else:
            raise _Fault("body is not a message document")
        if not isinstance(raw_messages, list) or not all(
            isinstance(m, Mapping) for m in raw_messages
        ):
            raise _Fault("messages is not a list of objects")

        for raw in raw_messages:
            _scan_message(raw)

        rule_messages = []
        for raw in raw_messages:
            outcomes = validate_message(self.ruleset, CancerMessage.from_dict(raw))
            self._record_hits(outcomes)
            rule_messages.extend(outcome_message(rid, out) for rid, out in outcomes)
        return ApiResponse(
            200, {"ruleMessages": rule_messages, "validated": {"messages": list(raw_messages)}}
        )

    def _aggregation(self, body: bytes) -> ApiResponse:
        document = self._parse_body(body)
        if isinstance(document, Mapping) and "cancerCase" in document:
            raw_case = document["cancerCase"]
        elif isinstance(document, Mapping):
            raw_case = document
        else:
            raise _Fault("body is not a case document")
        if not isinstance(raw_case, Mapping):
            raise _Fault("cancerCase is not an object")
        raw_messages = raw_case.get("messages", [])
        if not isinstance(raw_messages, list) or not all(
            isinstance(m, Mapping) for m in raw_messages
        ):
            raise _Fault("case messages is not a list of objects")

        _scan_date(raw_case.get("diagnosedato"))
        for raw in raw_messages:
            _scan_message(raw)

        case = CancerCase.from_dict(raw_case)
        try:
            aggregated, outcomes = aggregate_case(self.ruleset, case)
        except AggregationFault as fault:
            raise _Fault(fault.reason) from None
        self._record_hits(outcomes)
        return ApiResponse(
            200,
            {
                "ruleMessages": [outcome_message(rid, out) for rid, out in outcomes],
                "aggregatedCase": {
                    "caseId": aggregated.caseId,
                    "messageCount": aggregated.messageCount,
                    "ruleSatisfied": dict(aggregated.ruleSatisfied),
                },
            },
        )


# ---------------------------------------------------------------------------
# HTTP front-end
# ---------------------------------------------------------------------------

class _Handler(BaseHTTPRequestHandler):
    service: RegistryService  # set on the server class

    def do_POST(self):  # noqa: N802 (fixed by http.server)
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        response = self.server.service.handle(self.path, dict(self.headers.items()), body)
        payload = json.dumps(response.body).encode("utf-8")
        self.send_response(response.statusCode)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        if response.statusCode == 302:
            self.send_header("Location", "/login")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):  # silence per-request stderr noise
        return


class RegistryHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, service: RegistryService, port: int = 0, host: str = "127.0.0.1"):
        super().__init__((host, port), _Handler)
        self.service = service

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
