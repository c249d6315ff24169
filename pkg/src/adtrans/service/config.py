"""Service configuration: JSON config file plus environment overrides.

Credentials never live in the config file; the HTTP providers read
``ADTRANS_API_KEY`` / ``ADTRANS_MT_API_KEY`` from the environment.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..frames import CommandDecoder, DecoderAdapter, SamplerConfig, StubDecoder
from ..grounding import FallbackGrounder, GroundingBackend, HttpGroundingBackend
from ..providers import (
    HttpChatProvider,
    HttpMtProvider,
    MockChatProvider,
    MockMtProvider,
    RetryPolicy,
)

ENV_PREFIX = "ADTRANS_"


@dataclass(frozen=True)
class ServiceConfig:
    store_root: Path = Path("./adtrans-store")
    worker_count: int = 4
    source_language: str = "en"
    model_id: str = "gpt-4o"
    temperature: float = 0.0
    buffer_s: float = 10.0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    chat_provider: str = "mock"  # mock | http
    chat_base_url: str | None = None
    mt_provider: str = "mock"  # mock | http
    mt_base_url: str | None = None
    grounder: str = "fallback"  # fallback | http
    grounder_url: str | None = None
    decoder: str = "stub"  # stub | command
    decoder_extract_template: str = CommandDecoder.DEFAULT_EXTRACT
    decoder_probe_template: str = CommandDecoder.DEFAULT_PROBE
    retry_attempts: int = 3
    retry_base_delay_s: float = 0.5
    max_upload_bytes: int = 512 * 1024 * 1024
    request_timeout_s: float = 60.0

    @property
    def retry(self) -> RetryPolicy:
        return RetryPolicy(attempts=self.retry_attempts,
                           base_delay_s=self.retry_base_delay_s)


_FIELD_PARSERS = {
    "store_root": Path,
    "worker_count": int,
    "source_language": str,
    "model_id": str,
    "temperature": float,
    "buffer_s": float,
    "chat_provider": str,
    "chat_base_url": str,
    "mt_provider": str,
    "mt_base_url": str,
    "grounder": str,
    "grounder_url": str,
    "decoder": str,
    "decoder_extract_template": str,
    "decoder_probe_template": str,
    "retry_attempts": int,
    "retry_base_delay_s": float,
    "max_upload_bytes": int,
    "request_timeout_s": float,
}


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> ServiceConfig:
    """Build the config from an optional JSON file, then apply ``ADTRANS_*``
    environment overrides (e.g. ``ADTRANS_WORKER_COUNT=8``)."""
    env = dict(os.environ if env is None else env)
    config = ServiceConfig()
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        sampler_doc = doc.pop("sampler", None)
        overrides = {key: _FIELD_PARSERS[key](value) for key, value in doc.items()
                     if key in _FIELD_PARSERS}
        config = replace(config, **overrides)
        if sampler_doc:
            config = replace(config, sampler=SamplerConfig(**sampler_doc))
    env_overrides = {}
    for key, parser in _FIELD_PARSERS.items():
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            env_overrides[key] = parser(env[env_key])
    if env_overrides:
        config = replace(config, **env_overrides)
    return config


def make_chat_provider(config: ServiceConfig):
    if config.chat_provider == "mock":
        return MockChatProvider()
    if config.chat_provider == "http":
        return HttpChatProvider(base_url=config.chat_base_url,
                                timeout_s=config.request_timeout_s, retry=config.retry)
    raise ValueError(f"unknown chat provider {config.chat_provider!r}")


def make_mt_provider(config: ServiceConfig):
    if config.mt_provider == "mock":
        return MockMtProvider()
    if config.mt_provider == "http":
        return HttpMtProvider(base_url=config.mt_base_url,
                              timeout_s=config.request_timeout_s, retry=config.retry)
    raise ValueError(f"unknown MT provider {config.mt_provider!r}")


def make_grounder(config: ServiceConfig) -> GroundingBackend:
    if config.grounder == "fallback":
        return FallbackGrounder()
    if config.grounder == "http":
        if not config.grounder_url:
            raise ValueError("grounder=http requires grounder_url")
        return HttpGroundingBackend(config.grounder_url,
                                    timeout_s=config.request_timeout_s, retry=config.retry)
    raise ValueError(f"unknown grounder {config.grounder!r}")


def make_decoder(config: ServiceConfig) -> DecoderAdapter:
    if config.decoder == "stub":
        return StubDecoder()
    if config.decoder == "command":
        return CommandDecoder(extract_template=config.decoder_extract_template,
                              probe_template=config.decoder_probe_template,
                              timeout_s=config.request_timeout_s)
    raise ValueError(f"unknown decoder {config.decoder!r}")
