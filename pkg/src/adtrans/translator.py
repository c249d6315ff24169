"""Prompt construction, zero-shot translation calls, and cost estimation.

Translation is single-turn with no exemplars. Non-English source languages
route through English (``translate_with_pivot``): the English intermediate
doubles as the grounding query downstream, so the pivot stage is always
text-only and any frames attach to the second stage.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path

from .frames import FrameSet
from .providers import (
    LANGUAGE_NAMES,
    ChatProviderClient,
    JsonlAudit,
    ProviderError,
    ProviderReply,
)
from .srt import AdSegment

TEXT_ONLY = "text_only"
TEXT_PLUS_FRAMES = "text_plus_frames"
MODALITIES = (TEXT_ONLY, TEXT_PLUS_FRAMES)

# Default wordings, including the duplicated "Respond with a translation only."
# sentence in the frames variant. Do not "fix" the duplication: downstream
# results were produced with exactly this phrasing.
DEFAULT_TEXT_ONLY_TEMPLATE = (
    "Translate the following audio description from {source_language} to "
    "{target_language}. Respond with the translation only. "
    "This is the audio description to translate:\n{audio_description}"
)
DEFAULT_FRAMES_TEMPLATE = (
    "Translate the following audio description for the frames of this video from "
    "{source_language} to {target_language}. Respond with the translation only. "
    "If the audio description does not match the image, please ignore the image. "
    "Respond with a translation only. "
    "This is the audio description to translate:\n{audio_description}"
)

_REQUIRED_PLACEHOLDERS = {"source_language", "target_language", "audio_description"}
_PLACEHOLDER_RE = re.compile(r"\{([a-zA-Z_]+)\}")


class ConfigurationError(ValueError):
    pass


class TranslationError(RuntimeError):
    """Translation failed; ``stage`` distinguishes pivot and target calls."""

    def __init__(self, message: str, *, stage: str = "translate",
                 payload: object = None):
        super().__init__(message)
        self.stage = stage
        self.payload = payload


@dataclass(frozen=True)
class PromptTemplate:
    modality: str
    template_text: str

    def __post_init__(self) -> None:
        if self.modality not in MODALITIES:
            raise ConfigurationError(f"unknown modality {self.modality!r}")
        found = set(_PLACEHOLDER_RE.findall(self.template_text))
        missing = _REQUIRED_PLACEHOLDERS - found
        unknown = found - _REQUIRED_PLACEHOLDERS
        if missing:
            raise ConfigurationError(f"template is missing placeholders: {sorted(missing)}")
        if unknown:
            raise ConfigurationError(f"template has unknown placeholders: {sorted(unknown)}")

    def render(self, source_lang: str, target_lang: str, audio_description: str) -> str:
        return self.template_text.format(
            source_language=LANGUAGE_NAMES[source_lang],
            target_language=LANGUAGE_NAMES[target_lang],
            audio_description=audio_description,
        )


DEFAULT_TEMPLATES = {
    TEXT_ONLY: PromptTemplate(TEXT_ONLY, DEFAULT_TEXT_ONLY_TEMPLATE),
    TEXT_PLUS_FRAMES: PromptTemplate(TEXT_PLUS_FRAMES, DEFAULT_FRAMES_TEMPLATE),
}


@dataclass(frozen=True)
class TranslationRequest:
    source_lang: str
    target_lang: str
    segment: AdSegment
    modality: str = TEXT_ONLY
    frames: FrameSet | None = None
    model_id: str = "gpt-4o"
    temperature: float = 0.0
    text_override: str | None = None  # used by the pivot's second stage

    def __post_init__(self) -> None:
        for lang in (self.source_lang, self.target_lang):
            if lang not in LANGUAGE_NAMES:
                raise ConfigurationError(f"unsupported language {lang!r}")
        if self.source_lang == self.target_lang:
            raise ConfigurationError("source and target language must differ")
        if self.modality not in MODALITIES:
            raise ConfigurationError(f"unknown modality {self.modality!r}")
        if (self.frames is not None) != (self.modality == TEXT_PLUS_FRAMES):
            raise ConfigurationError("frames must be present exactly for text_plus_frames")

    @property
    def text(self) -> str:
        return self.text_override if self.text_override is not None else self.segment.clean_text


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    images: tuple[bytes, ...] = ()

    def to_messages(self) -> list[dict]:
        if not self.images:
            return [{"role": "user", "content": self.text}]
        parts: list[dict] = [{"type": "text", "text": self.text}]
        parts.extend({"type": "image", "data": img, "format": "jpeg"} for img in self.images)
        return [{"role": "user", "content": parts}]


@dataclass(frozen=True)
class TranslationResult:
    output_text: str
    input_tokens: int
    output_tokens: int
    latency_ms: int
    provider_meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")


def build_prompt(request: TranslationRequest,
                 templates: dict[str, PromptTemplate] | None = None) -> RenderedPrompt:
    """Render the prompt for a request; frames attach in sampling order."""
    template = (templates or DEFAULT_TEMPLATES)[request.modality]
    text = template.render(request.source_lang, request.target_lang, request.text)
    images = tuple(request.frames.images) if request.frames is not None else ()
    return RenderedPrompt(text=text, images=images)


_FENCE_RE = re.compile(r"\A```[a-zA-Z0-9_-]*\n(.*)\n```\Z", re.DOTALL)


def _sanitize_reply(raw: str) -> str:
    text = raw.strip()
    fenced = _FENCE_RE.match(text)
    if fenced:
        text = fenced.group(1).strip()
    return text


def translate(request: TranslationRequest, provider: ChatProviderClient,
              templates: dict[str, PromptTemplate] | None = None,
              audit: JsonlAudit | None = None) -> TranslationResult:
    """Single-turn zero-shot translation. The reply is used verbatim apart
    from whitespace trimming and unwrapping a markdown fence."""
    prompt = build_prompt(request, templates)
    try:
        reply: ProviderReply = provider.complete(
            prompt.to_messages(), model_id=request.model_id,
            temperature=request.temperature)
    except ProviderError as exc:
        raise TranslationError(str(exc), stage="translate", payload=exc.payload) from exc
    output = _sanitize_reply(reply.text)
    if audit is not None:
        audit.record({
            "ts": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "kind": "translate",
            "model_id": request.model_id,
            "source_lang": request.source_lang,
            "target_lang": request.target_lang,
            "modality": request.modality,
            "n_images": len(prompt.images),
            "prompt_sha256": hashlib.sha256(prompt.text.encode("utf-8")).hexdigest(),
            "prompt_text": prompt.text,
            "reply_text": reply.text,
            "input_tokens": reply.input_tokens,
            "output_tokens": reply.output_tokens,
            "latency_ms": reply.latency_ms,
        })
    if not output:
        raise TranslationError(
            f"provider returned an empty reply for segment {request.segment.index}",
            stage="translate", payload=reply.text)
    return TranslationResult(output_text=output, input_tokens=reply.input_tokens,
                             output_tokens=reply.output_tokens, latency_ms=reply.latency_ms,
                             provider_meta=dict(reply.meta))


@dataclass(frozen=True)
class PivotTranslation:
    english: TranslationResult
    target: TranslationResult

    @property
    def english_text(self) -> str:
        return self.english.output_text

    @property
    def target_text(self) -> str:
        return self.target.output_text


def translate_with_pivot(request: TranslationRequest, provider: ChatProviderClient,
                         templates: dict[str, PromptTemplate] | None = None,
                         audit: JsonlAudit | None = None) -> PivotTranslation:
    """Two-stage translation source -> en -> target for non-English sources.

    The first stage is text-only (its output is what grounding queries with);
    the second stage carries the request's modality and frames.
    """
    if request.source_lang == "en":
        raise ConfigurationError("pivot translation requires a non-English source")
    stage_en = replace(request, target_lang="en", modality=TEXT_ONLY, frames=None)
    try:
        english = translate(stage_en, provider, templates, audit)
    except TranslationError as exc:
        raise TranslationError(str(exc), stage="pivot_en", payload=exc.payload) from exc
    stage_target = replace(request, source_lang="en", text_override=english.output_text)
    try:
        target = translate(stage_target, provider, templates, audit)
    except TranslationError as exc:
        raise TranslationError(str(exc), stage="pivot_target", payload=exc.payload) from exc
    return PivotTranslation(english=english, target=target)


# --- cost estimation -----------------------------------------------------------

class PricingError(ValueError):
    pass


@dataclass(frozen=True)
class ModelRates:
    input_per_million: Decimal
    output_per_million: Decimal

    def __post_init__(self) -> None:
        if self.input_per_million <= 0 or self.output_per_million <= 0:
            raise PricingError("rates must be positive")


@dataclass(frozen=True)
class PricingSheet:
    models: dict[str, ModelRates]
    as_of: str = ""
    currency: str = "USD"

    def rates_for(self, model_id: str) -> ModelRates:
        try:
            return self.models[model_id]
        except KeyError:
            raise PricingError(f"no pricing for model {model_id!r}; "
                               f"known: {sorted(self.models)}") from None


def load_pricing(path: str | Path | None = None) -> PricingSheet:
    """Load the pricing sheet; defaults to the packaged rate card."""
    if path is None:
        raw = resources.files("adtrans.data").joinpath("pricing.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    models = {
        name: ModelRates(Decimal(str(rates["input_per_million"])),
                         Decimal(str(rates["output_per_million"])))
        for name, rates in doc["models"].items()
    }
    return PricingSheet(models=models, as_of=doc.get("as_of", ""),
                        currency=doc.get("currency", "USD"))


_CENT = Decimal("0.01")
_MILLION = Decimal(1_000_000)


@dataclass(frozen=True)
class CostEstimate:
    model_id: str
    modality: str
    n_segments: int
    exact_input_usd: Decimal
    exact_output_usd: Decimal

    @property
    def input_usd(self) -> Decimal:
        return self.exact_input_usd.quantize(_CENT, rounding=ROUND_HALF_UP)

    @property
    def output_usd(self) -> Decimal:
        return self.exact_output_usd.quantize(_CENT, rounding=ROUND_HALF_UP)

    @property
    def total_usd(self) -> Decimal:
        # rounded from the unrounded sum, not from the rounded parts
        return (self.exact_input_usd + self.exact_output_usd).quantize(
            _CENT, rounding=ROUND_HALF_UP)

    def to_report(self) -> dict:
        return {
            "model_id": self.model_id,
            "modality": self.modality,
            "n_segments": self.n_segments,
            "input_usd": str(self.input_usd),
            "output_usd": str(self.output_usd),
            "total_usd": str(self.total_usd),
        }


def estimate_cost(n_segments: int, modality: str, avg_prompt_tokens: int,
                  avg_output_tokens: int, tokens_per_multimodal_call: int,
                  sheet: PricingSheet, model_id: str) -> CostEstimate:
    """Projected provider cost for translating ``n_segments`` ADs.

    Multimodal calls are billed at a flat per-call input token budget
    (image tokenization is provider-specific, so it is an input here, not a
    model). Cents round half-up; the total rounds the unrounded sum.
    """
    if n_segments <= 0 or avg_prompt_tokens <= 0 or avg_output_tokens <= 0 \
            or tokens_per_multimodal_call <= 0:
        raise PricingError("all counts must be positive")
    if modality not in MODALITIES:
        raise PricingError(f"unknown modality {modality!r}")
    rates = sheet.rates_for(model_id)
    tokens_in = tokens_per_multimodal_call if modality == TEXT_PLUS_FRAMES else avg_prompt_tokens
    exact_in = Decimal(n_segments) * Decimal(tokens_in) * rates.input_per_million / _MILLION
    exact_out = Decimal(n_segments) * Decimal(avg_output_tokens) * rates.output_per_million / _MILLION
    return CostEstimate(model_id=model_id, modality=modality, n_segments=n_segments,
                        exact_input_usd=exact_in, exact_output_usd=exact_out)
