"""Remote provider clients: multimodal chat completion and plain MT.

Two client families, each with an HTTP implementation and a deterministic
local mock so the whole pipeline (and every test) can run offline:

- ``ChatProviderClient``: chat-style completion with optional image parts,
  used by the AD translator and the LLM quality estimator.
- ``MtProviderClient``: plain text translation, used for synthetic corpus
  generation.

Message shape is provider-neutral: ``{"role": ..., "content": str | parts}``
where an image part is ``{"type": "image", "data": bytes, "format": "jpeg"}``.
The HTTP chat client maps this onto an OpenAI-compatible wire format.
"""

from __future__ import annotations

import base64
import json
import math
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

import httpx

ENV_API_KEY = "ADTRANS_API_KEY"
ENV_BASE_URL = "ADTRANS_BASE_URL"
ENV_MT_API_KEY = "ADTRANS_MT_API_KEY"
ENV_MT_BASE_URL = "ADTRANS_MT_BASE_URL"

LANGUAGE_NAMES = {"en": "English", "de": "German", "fr": "French", "it": "Italian"}
LANGUAGE_CODES = {name: code for code, name in LANGUAGE_NAMES.items()}


class ProviderError(RuntimeError):
    """Provider call failed after retries. Keeps the raw payload for debugging."""

    def __init__(self, message: str, *, payload: object = None, retryable: bool = False):
        super().__init__(message)
        self.payload = payload
        self.retryable = retryable


@dataclass(frozen=True)
class ProviderReply:
    text: str
    input_tokens: int
    output_tokens: int
    latency_ms: int
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RetryPolicy:
    """Bounded exponential backoff. ``attempts`` counts the first try."""

    attempts: int = 3
    base_delay_s: float = 0.5
    multiplier: float = 2.0

    def run(self, fn):
        last: Exception | None = None
        for attempt in range(self.attempts):
            try:
                result = fn()
                return result, attempt
            except ProviderError as exc:
                last = exc
                if not exc.retryable or attempt == self.attempts - 1:
                    raise
                time.sleep(self.base_delay_s * (self.multiplier ** attempt))
        raise last  # unreachable, keeps type checkers calm


@runtime_checkable
class ChatProviderClient(Protocol):
    provider_id: str

    def complete(self, messages: list[dict], *, model_id: str,
                 temperature: float = 0.0) -> ProviderReply: ...


@runtime_checkable
class MtProviderClient(Protocol):
    provider_id: str

    def translate_text(self, text: str, source_lang: str, target_lang: str) -> str: ...


def flatten_text(content: str | list[dict]) -> str:
    if isinstance(content, str):
        return content
    return "\n".join(part.get("text", "") for part in content if part.get("type") == "text")


def count_images(content: str | list[dict]) -> int:
    if isinstance(content, str):
        return 0
    return sum(1 for part in content if part.get("type") == "image")


# --- deterministic mocks -------------------------------------------------------

_PROMPT_LANGS_RE = re.compile(
    r"from (English|German|French|Italian) to (English|German|French|Italian)")
_PROMPT_AD_RE = re.compile(r"to translate:\s*(.*)\Z", re.DOTALL)


class MockChatProvider:
    """Offline stand-in for a chat provider.

    Replies are resolved in priority order: a scripted queue (strings are
    replies, exceptions are raised), then ``fail_times`` transient failures,
    then a pseudo-translation derived from the default prompt wording
    (``"[<lang-code>] <audio description>"``), falling back to an echo.
    Token counts are synthetic: ~4 characters per text token plus a flat
    1,100 tokens per attached image.
    """

    provider_id = "mock-chat"

    def __init__(self, scripted: list[str | Exception] | None = None, fail_times: int = 0):
        self._scripted = deque(scripted or [])
        self._fail_remaining = fail_times
        self._lock = threading.Lock()
        self.calls: list[dict] = []

    def complete(self, messages: list[dict], *, model_id: str,
                 temperature: float = 0.0) -> ProviderReply:
        prompt_text = "\n".join(flatten_text(m["content"]) for m in messages)
        n_images = sum(count_images(m["content"]) for m in messages)
        with self._lock:
            self.calls.append({"model_id": model_id, "temperature": temperature,
                               "text": prompt_text, "images": n_images})
            if self._scripted:
                item = self._scripted.popleft()
                if isinstance(item, Exception):
                    raise item
                reply = item
            elif self._fail_remaining > 0:
                self._fail_remaining -= 1
                raise ProviderError("scripted transient failure", retryable=True)
            else:
                reply = self._default_reply(prompt_text)
        input_tokens = math.ceil(len(prompt_text) / 4) + 1_100 * n_images
        return ProviderReply(text=reply, input_tokens=input_tokens,
                             output_tokens=math.ceil(len(reply) / 4), latency_ms=0,
                             meta={"provider": self.provider_id})

    @staticmethod
    def _default_reply(prompt_text: str) -> str:
        langs = _PROMPT_LANGS_RE.search(prompt_text)
        ad = _PROMPT_AD_RE.search(prompt_text)
        if langs and ad:
            return f"[{LANGUAGE_CODES[langs.group(2)]}] {ad.group(1).strip()}"
        return f"echo: {prompt_text.strip()}"


class MockMtProvider:
    """Offline MT provider: tags the text with the target language code."""

    provider_id = "mock-mt"

    def __init__(self, fail_segments: dict[str, int] | None = None,
                 empty_for: set[str] | None = None):
        # fail_segments maps a text to a number of transient failures to emit
        self._fail_segments = dict(fail_segments or {})
        self._empty_for = set(empty_for or ())
        self._lock = threading.Lock()
        self.call_count = 0

    def translate_text(self, text: str, source_lang: str, target_lang: str) -> str:
        with self._lock:
            self.call_count += 1
            remaining = self._fail_segments.get(text, 0)
            if remaining > 0:
                self._fail_segments[text] = remaining - 1
                raise ProviderError("scripted MT failure", retryable=True)
        if text in self._empty_for:
            return ""
        return f"[{target_lang}] {text}"


# --- HTTP implementations ------------------------------------------------------

def _image_part_to_wire(part: dict) -> dict:
    fmt = part.get("format", "jpeg")
    encoded = base64.b64encode(part["data"]).decode("ascii")
    return {"type": "image_url",
            "image_url": {"url": f"data:image/{fmt};base64,{encoded}"}}


def _messages_to_wire(messages: list[dict]) -> list[dict]:
    wire = []
    for msg in messages:
        content = msg["content"]
        if isinstance(content, str):
            wire.append({"role": msg["role"], "content": content})
            continue
        parts = []
        for part in content:
            if part.get("type") == "text":
                parts.append({"type": "text", "text": part["text"]})
            elif part.get("type") == "image":
                parts.append(_image_part_to_wire(part))
            else:
                raise ProviderError(f"unsupported message part {part.get('type')!r}")
        wire.append({"role": msg["role"], "content": parts})
    return wire


class HttpChatProvider:
    """OpenAI-compatible chat-completions client.

    Credentials come from ``ADTRANS_API_KEY`` and the endpoint from
    ``ADTRANS_BASE_URL`` unless passed explicitly. Transient failures
    (timeouts, 429, 5xx) are retried with exponential backoff.
    """

    provider_id = "http-chat"

    def __init__(self, base_url: str | None = None, api_key: str | None = None,
                 timeout_s: float = 60.0, retry: RetryPolicy = RetryPolicy()):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"no chat provider base URL; set {ENV_BASE_URL}")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.timeout_s = timeout_s
        self.retry = retry
        self._client = httpx.Client(timeout=timeout_s)

    def complete(self, messages: list[dict], *, model_id: str,
                 temperature: float = 0.0) -> ProviderReply:
        body = {"model": model_id, "temperature": temperature,
                "messages": _messages_to_wire(messages)}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        def attempt() -> ProviderReply:
            started = time.monotonic()
            try:
                resp = self._client.post(f"{self.base_url}/chat/completions",
                                         json=body, headers=headers)
            except httpx.HTTPError as exc:
                raise ProviderError(f"transport error: {exc}", retryable=True) from exc
            latency_ms = int((time.monotonic() - started) * 1000)
            if resp.status_code == 401 or resp.status_code == 403:
                raise ProviderError(f"authentication failed ({resp.status_code})",
                                    payload=resp.text)
            if resp.status_code == 429 or resp.status_code >= 500:
                raise ProviderError(f"provider unavailable ({resp.status_code})",
                                    payload=resp.text, retryable=True)
            if resp.status_code != 200:
                raise ProviderError(f"unexpected status {resp.status_code}", payload=resp.text)
            try:
                doc = resp.json()
                text = doc["choices"][0]["message"]["content"]
                usage = doc.get("usage", {})
            except (ValueError, LookupError, TypeError) as exc:
                raise ProviderError(f"malformed provider reply: {exc}",
                                    payload=resp.text) from exc
            if text is None:
                raise ProviderError("provider returned no content", payload=resp.text)
            return ProviderReply(
                text=text,
                input_tokens=int(usage.get("prompt_tokens", 0)),
                output_tokens=int(usage.get("completion_tokens", 0)),
                latency_ms=latency_ms,
                meta={"provider": self.provider_id, "model": doc.get("model", model_id)},
            )

        reply, retries = self.retry.run(attempt)
        if retries:
            meta = dict(reply.meta)
            meta["retry_count"] = retries
            reply = ProviderReply(reply.text, reply.input_tokens, reply.output_tokens,
                                  reply.latency_ms, meta)
        return reply


class HttpMtProvider:
    """Minimal REST MT client: ``POST {base}/translate`` with a JSON body
    ``{"text", "source_lang", "target_lang"}`` returning ``{"translation"}``."""

    provider_id = "http-mt"

    def __init__(self, base_url: str | None = None, api_key: str | None = None,
                 timeout_s: float = 30.0, retry: RetryPolicy = RetryPolicy()):
        self.base_url = (base_url or os.environ.get(ENV_MT_BASE_URL, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"no MT provider base URL; set {ENV_MT_BASE_URL}")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_MT_API_KEY, "")
        self.retry = retry
        self._client = httpx.Client(timeout=timeout_s)

    def translate_text(self, text: str, source_lang: str, target_lang: str) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        def attempt() -> str:
            try:
                resp = self._client.post(
                    f"{self.base_url}/translate",
                    json={"text": text, "source_lang": source_lang, "target_lang": target_lang},
                    headers=headers)
            except httpx.HTTPError as exc:
                raise ProviderError(f"transport error: {exc}", retryable=True) from exc
            if resp.status_code == 429 or resp.status_code >= 500:
                raise ProviderError(f"provider unavailable ({resp.status_code})",
                                    payload=resp.text, retryable=True)
            if resp.status_code != 200:
                raise ProviderError(f"unexpected status {resp.status_code}", payload=resp.text)
            try:
                return resp.json()["translation"]
            except (ValueError, KeyError) as exc:
                raise ProviderError(f"malformed MT reply: {exc}", payload=resp.text) from exc

        result, _ = self.retry.run(attempt)
        return result


class JsonlAudit:
    """Thread-safe JSONL appender for request/response audit records."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def record(self, event: dict) -> None:
        line = json.dumps(event, ensure_ascii=False, sort_keys=True)
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
