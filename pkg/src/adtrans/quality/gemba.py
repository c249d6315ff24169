"""LLM-prompted quality estimation over error spans.

Each (source, hypothesis) pair is sent to a chat provider with three fixed
exemplars (shipped as an editable data file) demonstrating the expected
answer grammar: semicolon- or newline-separated ``severity: description``
clauses, or ``no-error``. Severities weigh 0/1/5/10 for
none/minor/major/critical. A reply that cannot be parsed is retried once and
then scored as a critical parse failure (weight 10) so bad batches surface
loudly instead of averaging quietly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..providers import LANGUAGE_NAMES, ChatProviderClient, ProviderError

SEVERITY_WEIGHTS = {"none": 0.0, "minor": 1.0, "major": 5.0, "critical": 10.0}

_NO_ERROR_RE = re.compile(r"\A\s*no[\s-]?errors?\.?\s*\Z", re.IGNORECASE)
_CLAUSE_RE = re.compile(r"\A\s*(minor|major|critical)\s*:\s*(.+?)\s*\Z",
                        re.IGNORECASE | re.DOTALL)

_SYSTEM_PROMPT = (
    "You are a professional machine-translation quality annotator. Identify "
    "error spans in the translation and classify each as minor, major, or "
    "critical. Answer with one clause per error in the form "
    "'severity: description', separated by semicolons. If the translation "
    "has no errors, answer exactly 'no-error'."
)

_USER_TEMPLATE = ("{source_language} source:\n{source}\n"
                  "{target_language} translation:\n{translation}\n"
                  "List the translation errors.")


class QeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ErrorSpan:
    severity: str
    description: str

    def __post_init__(self) -> None:
        if self.severity not in ("minor", "major", "critical"):
            raise QeError(f"unknown severity {self.severity!r}")

    @property
    def weight(self) -> float:
        return SEVERITY_WEIGHTS[self.severity]


@dataclass(frozen=True)
class QeAnnotation:
    segment_index: int
    spans: tuple[ErrorSpan, ...]
    parse_failed: bool = False
    raw_reply: str = ""

    @property
    def weight(self) -> float:
        return sum(span.weight for span in self.spans)


def parse_error_reply(text: str) -> list[ErrorSpan] | None:
    """Parse a provider reply into spans; None means unparseable."""
    if _NO_ERROR_RE.match(text):
        return []
    spans = []
    for clause in re.split(r"[;\n]+", text):
        if not clause.strip():
            continue
        match = _CLAUSE_RE.match(clause)
        if match:
            spans.append(ErrorSpan(match.group(1).lower(), match.group(2)))
    return spans or None


def load_exemplars(path: str | Path | None = None) -> list[dict]:
    if path is None:
        raw = resources.files("adtrans.data").joinpath("gemba_exemplars.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    exemplars = json.loads(raw)
    for ex in exemplars:
        for field in ("source_lang", "target_lang", "source", "translation", "annotation"):
            if field not in ex:
                raise QeError(f"exemplar missing field {field!r}")
    return exemplars


def build_qe_messages(source_lang: str, target_lang: str, source: str,
                      translation: str, exemplars: list[dict]) -> list[dict]:
    messages: list[dict] = [{"role": "system", "content": _SYSTEM_PROMPT}]
    for ex in exemplars:
        messages.append({"role": "user", "content": _USER_TEMPLATE.format(
            source_language=LANGUAGE_NAMES[ex["source_lang"]],
            target_language=LANGUAGE_NAMES[ex["target_lang"]],
            source=ex["source"], translation=ex["translation"])})
        messages.append({"role": "assistant", "content": ex["annotation"]})
    messages.append({"role": "user", "content": _USER_TEMPLATE.format(
        source_language=LANGUAGE_NAMES[source_lang],
        target_language=LANGUAGE_NAMES[target_lang],
        source=source, translation=translation)})
    return messages


def annotate_segment(index: int, source: str, translation: str, provider: ChatProviderClient,
                     source_lang: str, target_lang: str, exemplars: list[dict],
                     model_id: str) -> QeAnnotation:
    messages = build_qe_messages(source_lang, target_lang, source, translation, exemplars)
    reply = provider.complete(messages, model_id=model_id).text
    spans = parse_error_reply(reply)
    if spans is None:
        reply = provider.complete(messages, model_id=model_id).text
        spans = parse_error_reply(reply)
    if spans is None:
        return QeAnnotation(
            segment_index=index, parse_failed=True, raw_reply=reply,
            spans=(ErrorSpan("critical", "quality-estimation reply unparseable"),))
    return QeAnnotation(segment_index=index, spans=tuple(spans), raw_reply=reply)


def gemba_mqm(pairs: list[tuple[str, str]], provider: ChatProviderClient,
              source_lang: str, target_lang: str, *, model_id: str = "gpt-4o",
              exemplars: list[dict] | None = None) -> list[QeAnnotation]:
    """Annotate (source, hypothesis) pairs with severity-weighted error spans."""
    if exemplars is None:
        exemplars = load_exemplars()
    if len(exemplars) != 3:
        raise QeError(f"expected exactly 3 exemplars, got {len(exemplars)}")
    annotations = []
    for index, (source, translation) in enumerate(pairs):
        try:
            annotations.append(annotate_segment(index, source, translation, provider,
                                                source_lang, target_lang, exemplars, model_id))
        except ProviderError as exc:
            raise QeError(f"provider failed on segment {index}: {exc}") from exc
    return annotations


def aggregate_qe(annotations: list[QeAnnotation]) -> float:
    """Arithmetic mean of per-segment weights."""
    if not annotations:
        raise QeError("no annotations to aggregate")
    return sum(a.weight for a in annotations) / len(annotations)
