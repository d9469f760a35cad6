"""Transports carrying generated requests to a registry service.

Both transports expose the same contract: ``post(path, headers, body)``
returning ``(status_code, body_document)``.  A network problem raises
:class:`TransportError`; it is never conflated with a 500 response.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

import requests

from .service import RegistryService


class TransportError(Exception):
    """The request never produced a response (connection trouble etc.)."""


class InProcessTransport:
    """Calls a :class:`RegistryService` directly, no sockets involved."""

    def __init__(self, service: RegistryService):
        self.service = service
        self.calls = 0

    def post(self, path: str, headers: Mapping[str, str], body: bytes) -> tuple[int, Any]:
        self.calls += 1
        response = self.service.handle(path, headers, body)
        # round-trip through JSON so both transports deliver identical documents
        return response.statusCode, json.loads(json.dumps(response.body))


class HttpTransport:
    """Talks to a registry served over HTTP."""

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.calls = 0
        self._session = requests.Session()

    def post(self, path: str, headers: Mapping[str, str], body: bytes) -> tuple[int, Any]:
        self.calls += 1
        try:
            response = self._session.post(
                self.base_url + path,
                data=body,
                headers=dict(headers),
                timeout=self.timeout,
                allow_redirects=False,
            )
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        try:
            document = response.json()
        except ValueError as exc:
            raise TransportError(f"non-JSON response: {exc}") from exc
        return response.status_code, document
