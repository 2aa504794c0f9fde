"""Chat-completions client with retries and cassette record/replay.

Modes:

* ``live``   - call the endpoint.
* ``record`` - call the endpoint and append every exchange to a cassette.
* ``replay`` - never touch the network; answer from the cassette by prompt
  digest and fail with :class:`CassetteMiss` for unknown prompts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import httpx
from filelock import FileLock

from ..core import ConfigError, CorefError

logger = logging.getLogger(__name__)

MODES = ("live", "record", "replay")
_RETRYABLE_STATUS = {408, 500, 502, 503, 504}


class TransportError(CorefError):
    def __init__(self, message: str, attempts: int = 0, retryable: bool = True):
        super().__init__(message)
        self.attempts = attempts
        self.retryable = retryable


class RateLimited(TransportError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class CassetteMiss(CorefError):
    pass


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 5
    base_delay: float = 1.0
    max_delay: float = 30.0
    jitter: float = 0.5  # fraction of the delay that is randomized

    def delay(self, attempt: int, rng: random.Random) -> float:
        """Back-off before retry number ``attempt`` (1-based)."""
        d = min(self.max_delay, self.base_delay * 2 ** (attempt - 1))
        return d * (1 - self.jitter * rng.random())


@dataclass(frozen=True)
class ModelConfig:
    model: str = "gpt-4"
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_tokens: int | None = None
    timeout: float = 120.0
    mode: str = "live"
    cassette: Path | None = None
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "live" and self.cassette is None:
            raise ConfigError(f"mode {self.mode!r} needs a cassette path")
        if self.retry.max_attempts < 1:
            raise ConfigError("retry.max_attempts must be >= 1")


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Completion:
    text: str
    attempts: int
    latency_s: float
    replayed: bool = False


class Cassette:
    """JSON-lines store of exchanges keyed by prompt digest.

    Append-only; when a digest was recorded more than once the latest
    record wins.  Use as a context manager while recording to hold the
    file lock for the whole run.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._records: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._file_lock = FileLock(str(self.path) + ".lock")
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        rec = json.loads(line)
                        self._records[rec["digest"]] = rec
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise ConfigError(f"{self.path}:{lineno}: bad cassette record ({exc})") from exc

    def __enter__(self) -> "Cassette":
        self._file_lock.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self._file_lock.release()

    def __len__(self) -> int:
        return len(self._records)

    def lookup(self, prompt: str) -> dict:
        rec = self._records.get(prompt_digest(prompt))
        if rec is None:
            raise CassetteMiss(f"no recorded response for prompt {prompt_digest(prompt)[:12]} in {self.path}")
        return rec

    def append(self, prompt: str, response: str, **metadata) -> dict:
        rec = {"digest": prompt_digest(prompt), "prompt": prompt, "response": response, **metadata}
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            self._records[rec["digest"]] = rec
        return rec


def _post_once(client: httpx.Client, cfg: ModelConfig, prompt: str, api_key: str) -> str:
    payload: dict = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
    }
    if cfg.max_tokens is not None:
        payload["max_tokens"] = cfg.max_tokens
    try:
        resp = client.post("/chat/completions", json=payload, headers={"Authorization": f"Bearer {api_key}"})
    except httpx.TransportError as exc:
        raise TransportError(f"{type(exc).__name__}: {exc}") from exc
    if resp.status_code == 429:
        retry_after = resp.headers.get("retry-after")
        try:
            wait = float(retry_after) if retry_after else None
        except ValueError:
            wait = None
        raise RateLimited("rate limited (HTTP 429)", wait)
    if resp.status_code in _RETRYABLE_STATUS:
        raise TransportError(f"HTTP {resp.status_code}")
    if resp.status_code >= 400:
        raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", retryable=False)
    try:
        return resp.json()["choices"][0]["message"]["content"] or ""
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"unexpected response body: {resp.text[:200]}") from exc


def complete(
    prompt: str,
    cfg: ModelConfig,
    *,
    cassette: Cassette | None = None,
    transport: httpx.BaseTransport | None = None,
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> Completion:
    """Send one prompt and return the reply text.

    Transient failures (connection errors, 408/5xx, 429) are retried with
    exponential back-off and jitter; a 429 ``Retry-After`` header is honored
    when it asks for longer.  Raises TransportError once ``max_attempts``
    is spent, and CassetteMiss for unknown prompts in replay mode.
    """
    if cfg.mode != "live" and cassette is None:
        cassette = Cassette(cfg.cassette)
    if cfg.mode == "replay":
        rec = cassette.lookup(prompt)
        return Completion(rec["response"], int(rec.get("attempts", 1)), float(rec.get("latency_s", 0.0)), True)

    api_key = os.environ.get(cfg.api_key_env)
    if not api_key:
        raise ConfigError(f"environment variable {cfg.api_key_env} is not set")
    rng = rng or random.Random()
    policy = cfg.retry
    with httpx.Client(base_url=cfg.base_url, timeout=cfg.timeout, transport=transport) as client:
        attempt = 0
        while True:
            attempt += 1
            t0 = time.perf_counter()
            try:
                text = _post_once(client, cfg, prompt, api_key)
            except TransportError as exc:
                if not exc.retryable or attempt >= policy.max_attempts:
                    raise TransportError(f"giving up after {attempt} attempt(s): {exc}", attempt) from exc
                wait = policy.delay(attempt, rng)
                if isinstance(exc, RateLimited) and exc.retry_after:
                    wait = max(wait, min(exc.retry_after, policy.max_delay))
                logger.warning("attempt %d failed (%s); retrying in %.2fs", attempt, exc, wait)
                sleep(wait)
                continue
            latency = time.perf_counter() - t0
            break
    if cfg.mode == "record":
        cassette.append(prompt, text, model=cfg.model, attempts=attempt, latency_s=round(latency, 3))
    return Completion(text, attempt, latency)
