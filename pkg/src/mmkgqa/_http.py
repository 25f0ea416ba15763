"""JSON-over-HTTP helper shared by the remote clients."""
from __future__ import annotations

import threading

import httpx

from .errors import TransportError, ValidationError


class JsonService:
    """POST JSON, get JSON back, with bounded concurrency.

    4xx answers raise :class:`ValidationError`; 5xx, connection failures and
    unparseable bodies raise :class:`TransportError`.
    """

    def __init__(self, base_url: str, timeout: float = 30.0, max_in_flight: int = 8,
                 transport: httpx.BaseTransport | None = None):
        if max_in_flight < 1:
            raise ValidationError("max_in_flight must be >= 1")
        self.base_url = base_url
        self._sem = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(base_url=base_url, timeout=timeout, transport=transport)

    def post(self, route: str, payload: dict) -> dict:
        with self._sem:
            try:
                resp = self._client.post(route, json=payload)
            except httpx.HTTPError as exc:
                raise TransportError(f"{route}: {exc}") from exc
        if 400 <= resp.status_code < 500:
            raise ValidationError(f"{route}: service rejected input ({resp.status_code}): {resp.text}")
        if resp.status_code >= 500:
            raise TransportError(f"{route}: service error {resp.status_code}", resp.status_code)
        try:
            body = resp.json()
        except ValueError as exc:
            raise TransportError(f"{route}: response is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise TransportError(f"{route}: response is not a JSON object")
        return body

    def field(self, route: str, payload: dict, key: str):
        body = self.post(route, payload)
        if key not in body:
            raise TransportError(f"{route}: response lacks {key!r}")
        return body[key]

    def close(self) -> None:
        self._client.close()
