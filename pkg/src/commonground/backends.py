"""Completion backends and the registry that names them.

Everything that can answer a prompt implements one method,
``complete(request) -> str``. Remote chat endpoints, deterministic test
doubles, and replay tapes are interchangeable behind that contract.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol

import requests

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown message role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 256
    model: str | None = None
    timeout: float = 60.0

    def cache_key(self) -> str:
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "messages": [[m.role, m.content] for m in self.messages],
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


class BackendError(Exception):
    pass


class BackendExhausted(BackendError):
    pass


class AuthError(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class TapeExhausted(BackendError):
    pass


class UnknownBackend(KeyError):
    pass


class TokenBucket:
    """Simple blocking rate limiter: at most ``rate`` requests per second
    with bursts up to ``capacity``."""

    def __init__(self, rate: float, capacity: float | None = None):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._stamp) * self.rate
                )
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


@dataclass
class HttpBackendConfig:
    base_url: str
    model: str
    api_key_env: str = "CHAT_API_KEY"
    max_attempts: int = 4
    backoff_base: float = 0.5
    requests_per_second: float | None = None


class HttpChatBackend:
    """Client for chat-completions style HTTP endpoints.

    The API key is read from the environment, never from configuration
    files or command lines. Transient failures (timeouts, 429, 5xx) retry
    with exponential backoff; auth failures do not retry.
    """

    def __init__(self, config: HttpBackendConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()
        self._bucket = (
            TokenBucket(config.requests_per_second)
            if config.requests_per_second
            else None
        )
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": request.model or self.config.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Exception | None = None
        for attempt in range(self.config.max_attempts):
            if self._bucket:
                self._bucket.acquire()
            try:
                self.calls += 1
                started = time.perf_counter()
                response = self._session.post(
                    url, json=payload, headers=headers, timeout=request.timeout
                )
                latency = time.perf_counter() - started
            except requests.RequestException as exc:
                last_error = exc
                log.warning("request failed (attempt %d): %s", attempt + 1, exc)
                time.sleep(self.config.backoff_base * (2**attempt))
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({response.status_code})")
            if response.status_code == 429 or response.status_code >= 500:
                last_error = BackendError(f"status {response.status_code}")
                log.warning(
                    "retryable status %d (attempt %d)", response.status_code, attempt + 1
                )
                time.sleep(self.config.backoff_base * (2**attempt))
                continue
            if response.status_code != 200:
                raise MalformedResponse(
                    f"unexpected status {response.status_code}: {response.text[:200]}"
                )
            try:
                data = response.json()
                content = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse(f"cannot read completion: {exc}") from exc
            if not isinstance(content, str):
                raise MalformedResponse("completion content is not a string")
            log.debug("completion ok in %.2fs (%d messages)", latency, len(request.messages))
            return content
        raise BackendExhausted(
            f"gave up after {self.config.max_attempts} attempts: {last_error}"
        )


class EchoBackend:
    """Returns the last user message verbatim. Handy in plumbing tests."""

    def __init__(self) -> None:
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        return request.last_user_content()


class ReplayBackend:
    """Plays back an ordered tape of responses, byte for byte."""

    def __init__(self, tape: Iterable[str]):
        self._tape = list(tape)
        self._index = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayBackend":
        tape = []
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    tape.append(json.loads(line)["response"])
        return cls(tape)

    @property
    def remaining(self) -> int:
        return len(self._tape) - self._index

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            if self._index >= len(self._tape):
                raise TapeExhausted(
                    f"tape of {len(self._tape)} responses has no entry "
                    f"for call {self._index + 1}"
                )
            response = self._tape[self._index]
            self._index += 1
            return response


class RecordingBackend:
    """Wraps a backend and keeps every response, in order, for later replay."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.tape: list[str] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        with self._lock:
            self.tape.append(response)
        return response

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for response in self.tape:
                fh.write(json.dumps({"response": response}, ensure_ascii=False) + "\n")


class CachingBackend:
    """Memoizes identical requests.

    Sampling at nonzero temperature is not cached unless ``force`` is set,
    since repeated draws are supposed to differ.
    """

    def __init__(self, inner: Backend, *, force: bool = False):
        self.inner = inner
        self.force = force
        self._cache: dict[str, str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def complete(self, request: ChatRequest) -> str:
        if request.temperature > 0 and not self.force:
            return self.inner.complete(request)
        key = request.cache_key()
        with self._lock:
            if key in self._cache:
                self.hits += 1
                return self._cache[key]
        response = self.inner.complete(request)
        with self._lock:
            self.misses += 1
            self._cache[key] = response
        return response


@dataclass
class BackendEntry:
    backend: Backend
    deterministic: bool = False
    billable: bool = False


class BackendRegistry:
    def __init__(self) -> None:
        self._entries: dict[str, BackendEntry] = {}

    def register(
        self,
        backend_id: str,
        backend: Backend,
        *,
        deterministic: bool = False,
        billable: bool = False,
    ) -> None:
        self._entries[backend_id] = BackendEntry(backend, deterministic, billable)

    def get(self, backend_id: str) -> Backend:
        try:
            return self._entries[backend_id].backend
        except KeyError:
            raise UnknownBackend(
                f"no backend registered as {backend_id!r}; have {sorted(self._entries)}"
            ) from None

    def entry(self, backend_id: str) -> BackendEntry:
        if backend_id not in self._entries:
            raise UnknownBackend(f"no backend registered as {backend_id!r}")
        return self._entries[backend_id]

    def ids(self) -> list[str]:
        return sorted(self._entries)
