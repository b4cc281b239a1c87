"""Chat-completion backends: live HTTP, transcript replay, and scripted.

Every backend funnels calls through a concurrency gate, so no more than
``max_concurrent`` requests are in flight at once regardless of how many
workers share it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from collections.abc import Callable, Iterable, Mapping
from pathlib import Path
from typing import Any

import httpx

from .prompts import PromptRequest

logger = logging.getLogger(__name__)

API_KEY_ENV = "REVDIST_API_KEY"
API_BASE_ENV = "REVDIST_API_BASE"
DEFAULT_API_BASE = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4"


class BackendError(Exception):
    """A backend call failed (network, HTTP status, auth, bad payload)."""

    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


class RateLimited(BackendError):
    pass


class ReplayMiss(BackendError):
    pass


def fingerprint(request: PromptRequest, model_name: str, temperature: float) -> str:
    payload = json.dumps(
        [request.template_id, request.system, request.rendered_prompt, model_name, float(temperature)],
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def read_transcript(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict) or "fingerprint" not in record or "response" not in record:
                raise ValueError(f"{path}:{line_no}: transcript record needs fingerprint and response")
            records.append(record)
    return records


class TranscriptWriter:
    """Append-only JSON Lines transcript, safe under concurrent writers."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, fp: str, request: PromptRequest, model: str, temperature: float, response: str) -> None:
        record = {
            "fingerprint": fp,
            "template_id": request.template_id,
            "model": model,
            "temperature": temperature,
            "response": response,
        }
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)


class LLMBackend:
    kind = "abstract"

    def __init__(
        self,
        model_name: str = DEFAULT_MODEL,
        temperature: float = 0.0,
        max_retries: int = 3,
        max_concurrent: int = 4,
    ) -> None:
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        if max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        self.model_name = model_name
        self.temperature = temperature
        self.max_retries = max_retries
        self.max_concurrent = max_concurrent
        self._gate = threading.BoundedSemaphore(max_concurrent)

    def fingerprint(self, request: PromptRequest) -> str:
        return fingerprint(request, self.model_name, self.temperature)

    def complete(self, request: PromptRequest) -> str:
        with self._gate:
            return self._complete(request)

    def _complete(self, request: PromptRequest) -> str:
        raise NotImplementedError


class ReplayBackend(LLMBackend):
    """Serves responses from a recorded transcript; never touches the network."""

    kind = "replay"

    def __init__(
        self,
        records: Iterable[Mapping[str, Any]],
        model_name: str = DEFAULT_MODEL,
        temperature: float = 0.0,
        max_concurrent: int = 4,
    ) -> None:
        super().__init__(model_name, temperature, max_retries=0, max_concurrent=max_concurrent)
        self._responses: dict[str, str] = {}
        for record in records:
            self._responses.setdefault(record["fingerprint"], record["response"])

    @classmethod
    def from_file(cls, path: str | Path, **kwargs: Any) -> ReplayBackend:
        return cls(read_transcript(path), **kwargs)

    def _complete(self, request: PromptRequest) -> str:
        fp = self.fingerprint(request)
        try:
            return self._responses[fp]
        except KeyError:
            raise ReplayMiss(
                f"no recorded response for {request.template_id} request "
                f"(document {request.document_id or '?'}, fingerprint {fp[:12]})"
            ) from None


class ScriptedBackend(LLMBackend):
    """Answers from a callable or a fixed response sequence.

    Records every request and the peak number of concurrent calls, which
    makes it the instrumentation point for concurrency tests.
    """

    kind = "scripted"

    def __init__(
        self,
        responder: Callable[[PromptRequest], str] | Iterable[str],
        model_name: str = "scripted",
        temperature: float = 0.0,
        max_concurrent: int = 4,
        delay: float = 0.0,
    ) -> None:
        super().__init__(model_name, temperature, max_retries=0, max_concurrent=max_concurrent)
        if callable(responder):
            self._responder = responder
        else:
            queue = list(responder)
            pop_lock = threading.Lock()

            def _next(_: PromptRequest) -> str:
                with pop_lock:
                    if not queue:
                        raise BackendError("scripted backend ran out of responses")
                    return queue.pop(0)

            self._responder = _next
        self.delay = delay
        self.requests: list[PromptRequest] = []
        self.in_flight = 0
        self.peak_in_flight = 0
        self._lock = threading.Lock()

    def _complete(self, request: PromptRequest) -> str:
        with self._lock:
            self.requests.append(request)
            self.in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
        try:
            if self.delay:
                time.sleep(self.delay)
            return self._responder(request)
        finally:
            with self._lock:
                self.in_flight -= 1


class TokenBucket:
    """Thread-safe token bucket; ``acquire`` blocks until a token is free."""

    def __init__(
        self,
        per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if per_minute <= 0:
            raise ValueError("rate must be positive")
        self.rate = per_minute / 60.0
        self.capacity = max(1.0, self.rate)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._stamp = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


class LiveBackend(LLMBackend):
    """OpenAI-compatible chat-completions client with retry and rate limiting."""

    kind = "live"

    def __init__(
        self,
        model_name: str = DEFAULT_MODEL,
        temperature: float = 0.0,
        max_retries: int = 3,
        max_concurrent: int = 4,
        *,
        api_key: str | None = None,
        base_url: str | None = None,
        requests_per_minute: float | None = None,
        timeout: float = 120.0,
        backoff: float = 1.0,
        record_to: str | Path | None = None,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        super().__init__(model_name, temperature, max_retries, max_concurrent)
        api_key = api_key or os.environ.get(API_KEY_ENV)
        if not api_key:
            raise BackendError(f"{API_KEY_ENV} is not set")
        self.base_url = (base_url or os.environ.get(API_BASE_ENV) or DEFAULT_API_BASE).rstrip("/")
        self._client = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}"},
        )
        self._bucket = TokenBucket(requests_per_minute) if requests_per_minute else None
        self._backoff = backoff
        self._sleep = sleep
        self.transcript = TranscriptWriter(record_to) if record_to else None

    def close(self) -> None:
        self._client.close()

    def _payload(self, request: PromptRequest) -> dict[str, Any]:
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.rendered_prompt})
        return {"model": self.model_name, "temperature": self.temperature, "messages": messages}

    def _complete(self, request: PromptRequest) -> str:
        url = f"{self.base_url}/chat/completions"
        payload = self._payload(request)
        error: BackendError = BackendError("no attempt made")
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self._backoff * 2 ** (attempt - 1)
                logger.warning("retrying %s after %.1fs: %s", request.document_id or "request", delay, error)
                self._sleep(delay)
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                response = self._client.post(url, json=payload)
            except httpx.HTTPError as exc:
                error = BackendError(f"{type(exc).__name__}: {exc}")
                continue
            if response.status_code == 429:
                error = RateLimited("rate limited (HTTP 429)", status=429)
                continue
            if response.status_code >= 500:
                error = BackendError(f"server error (HTTP {response.status_code})", status=response.status_code)
                continue
            if response.status_code >= 400:
                raise BackendError(
                    f"HTTP {response.status_code}: {response.text[:200]}", status=response.status_code
                )
            try:
                text = response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion payload: {exc}", status=response.status_code) from exc
            if not isinstance(text, str):
                raise BackendError("completion payload has no text content", status=response.status_code)
            if self.transcript is not None:
                self.transcript.append(self.fingerprint(request), request, self.model_name, self.temperature, text)
            return text
        raise error
