"""Parsing and serialization of timed AD scripts in SRT form.

AD scripts use plain SRT cues plus a few markup conventions inside the cue
text: ``$`` (pace-constrained cue), ``$$`` (stronger pace marker), a
standalone ``*`` (scene change), and a leading ``UT:`` (the cue voices an
on-screen subtitle instead of describing visuals).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

SUPPORTED_LANGUAGES = ("de", "fr", "it", "en")

_TIMECODE_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
# Strict SRT uses "-->"; some in-the-wild AD exports print a single-dash "->".
_TIMING_STRICT_RE = re.compile(r"^(\S+)\s+-->\s+(\S+)$")
_TIMING_LENIENT_RE = re.compile(r"^(\S+)\s+--?>\s+(\S+)$")

_PACE_RE = re.compile(r"\$+")
_SCENE_RE = re.compile(r"(?:(?<=\s)|^)\*(?=\s|$)")
_UT_RE = re.compile(r"^\s*(?:UT:\s*)+", re.MULTILINE)


class ParseMode(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class SrtParseError(ValueError):
    """Malformed SRT input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, order=True)
class Timecode:
    """One SRT timecode, canonical text form ``HH:MM:SS,mmm``."""

    hours: int
    minutes: int
    seconds: int
    millis: int

    def __post_init__(self) -> None:
        if self.hours < 0:
            raise ValueError("hours must be non-negative")
        if not 0 <= self.minutes <= 59:
            raise ValueError("minutes must be in 0-59")
        if not 0 <= self.seconds <= 59:
            raise ValueError("seconds must be in 0-59")
        if not 0 <= self.millis <= 999:
            raise ValueError("millis must be in 0-999")

    @classmethod
    def parse(cls, text: str) -> "Timecode":
        m = _TIMECODE_RE.match(text.strip())
        if not m:
            raise ValueError(f"invalid timecode {text!r}")
        h, mi, s, ms = (int(g) for g in m.groups())
        return cls(h, mi, s, ms)

    @classmethod
    def from_millis(cls, total: int) -> "Timecode":
        if total < 0:
            raise ValueError("total milliseconds must be non-negative")
        ms = total % 1000
        s = (total // 1000) % 60
        mi = (total // 60_000) % 60
        h = total // 3_600_000
        return cls(h, mi, s, ms)

    @classmethod
    def from_seconds(cls, seconds: float) -> "Timecode":
        return cls.from_millis(round(seconds * 1000))

    def to_millis(self) -> int:
        return ((self.hours * 60 + self.minutes) * 60 + self.seconds) * 1000 + self.millis

    def to_seconds(self) -> float:
        return self.to_millis() / 1000.0

    def __str__(self) -> str:
        return f"{self.hours:02d}:{self.minutes:02d}:{self.seconds:02d},{self.millis:03d}"


@dataclass(frozen=True)
class MarkupFlags:
    pace_constrained: bool = False
    double_pace_marker: bool = False
    scene_change: bool = False
    spoken_subtitle: bool = False

    def __post_init__(self) -> None:
        if self.double_pace_marker and not self.pace_constrained:
            raise ValueError("double_pace_marker implies pace_constrained")


@dataclass(frozen=True)
class AdSegment:
    """One timed AD cue. ``raw_text`` keeps the markup, ``clean_text`` strips it."""

    index: int
    onset: Timecode
    offset: Timecode
    raw_text: str
    clean_text: str
    flags: MarkupFlags

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("cue index must be positive")
        if not self.onset < self.offset:
            raise ValueError(f"cue {self.index}: onset must precede offset")

    @property
    def duration_s(self) -> float:
        return (self.offset.to_millis() - self.onset.to_millis()) / 1000.0

    @classmethod
    def from_raw(cls, index: int, onset: Timecode, offset: Timecode, raw_text: str) -> "AdSegment":
        clean, flags = strip_markup(raw_text)
        return cls(index=index, onset=onset, offset=offset, raw_text=raw_text,
                   clean_text=clean, flags=flags)


@dataclass(frozen=True)
class ParseWarning:
    segment_index: int
    message: str


@dataclass(frozen=True)
class AdScript:
    segments: tuple[AdSegment, ...]
    language: str = "en"
    source_id: str = ""
    warnings: tuple[ParseWarning, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.language not in SUPPORTED_LANGUAGES:
            raise ValueError(f"language must be one of {SUPPORTED_LANGUAGES}")

    def __len__(self) -> int:
        return len(self.segments)


def strip_markup(raw: str) -> tuple[str, MarkupFlags]:
    """Extract markup flags from cue text and return the cleaned text.

    ``$`` runs are recognized anywhere in the text; ``*`` only as a standalone
    token (so hyphenated or starred words survive); ``UT:`` only at the start
    of a line. Markers are stripped in that order, so a marker exposed by an
    earlier removal (e.g. ``$ UT: ...``) still counts. Cleaning collapses
    whitespace, which also joins multi-line cues into one line.
    """
    pace_runs = _PACE_RE.findall(raw)
    text = _PACE_RE.sub(" ", raw)
    scene_change = bool(_SCENE_RE.search(text))
    text = _SCENE_RE.sub(" ", text)
    spoken_subtitle = bool(_UT_RE.search(text))
    text = _UT_RE.sub("", text)
    flags = MarkupFlags(
        pace_constrained=bool(pace_runs),
        double_pace_marker=any(len(run) >= 2 for run in pace_runs),
        scene_change=scene_change,
        spoken_subtitle=spoken_subtitle,
    )
    clean = " ".join(text.split())
    return clean, flags


def _decode(data: bytes) -> str:
    text = data.decode("utf-8-sig")  # strips a BOM when present
    return text.replace("\r\n", "\n").replace("\r", "\n")


def parse_script(
    data: bytes,
    mode: ParseMode | str = ParseMode.STRICT,
    *,
    language: str = "en",
    source_id: str = "",
) -> AdScript:
    """Parse SRT bytes into an AdScript.

    Strict mode accepts only the standard ``-->`` cue-timing arrow and rejects
    unordered or overlapping cues; lenient mode also accepts ``->`` and
    downgrades ordering problems to warnings.
    """
    mode = ParseMode(mode)
    timing_re = _TIMING_STRICT_RE if mode is ParseMode.STRICT else _TIMING_LENIENT_RE
    lines = _decode(data).split("\n")

    segments: list[AdSegment] = []
    warnings: list[ParseWarning] = []
    i = 0
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        index_line = i
        try:
            index = int(lines[i].strip())
        except ValueError:
            raise SrtParseError(f"expected cue index, got {lines[i]!r}", index_line + 1)
        if index < 1:
            raise SrtParseError(f"cue index must be positive, got {index}", index_line + 1)
        i += 1
        if i >= n or not lines[i].strip():
            raise SrtParseError(f"cue {index}: missing timing line", index_line + 2)
        timing = timing_re.match(lines[i].strip())
        if not timing:
            raise SrtParseError(f"cue {index}: malformed timing line {lines[i]!r}", i + 1)
        try:
            onset = Timecode.parse(timing.group(1))
            offset = Timecode.parse(timing.group(2))
        except ValueError as exc:
            raise SrtParseError(f"cue {index}: {exc}", i + 1) from exc
        i += 1
        text_lines: list[str] = []
        while i < n and lines[i].strip():
            text_lines.append(lines[i])
            i += 1
        raw_text = "\n".join(text_lines)

        if onset >= offset:
            if mode is ParseMode.STRICT:
                raise SrtParseError(f"cue {index}: onset {onset} is not before offset {offset}",
                                    index_line + 2)
            warnings.append(ParseWarning(index, f"onset {onset} is not before offset {offset}"))
            # Keep the cue representable: nudge the offset one tick past the onset.
            offset = Timecode.from_millis(onset.to_millis() + 1)

        segments.append(AdSegment.from_raw(index, onset, offset, raw_text))

    for prev, cur in zip(segments, segments[1:]):
        if cur.index <= prev.index:
            msg = f"cue index {cur.index} does not increase after {prev.index}"
            if mode is ParseMode.STRICT:
                raise SrtParseError(msg)
            warnings.append(ParseWarning(cur.index, msg))
        if cur.onset < prev.onset:
            msg = f"cue {cur.index} starts before cue {prev.index}"
            if mode is ParseMode.STRICT:
                raise SrtParseError(msg)
            warnings.append(ParseWarning(cur.index, msg))
        elif cur.onset < prev.offset:
            msg = f"cue {cur.index} overlaps cue {prev.index}"
            if mode is ParseMode.STRICT:
                raise SrtParseError(msg)
            warnings.append(ParseWarning(cur.index, msg))

    return AdScript(segments=tuple(segments), language=language, source_id=source_id,
                    warnings=tuple(warnings))


def serialize_script(script: AdScript) -> bytes:
    """Emit canonical SRT: ``-->`` arrows, LF line endings, one blank line after
    every cue (including the last)."""
    out: list[str] = []
    for seg in script.segments:
        out.append(str(seg.index))
        out.append(f"{seg.onset} --> {seg.offset}")
        if seg.raw_text:
            out.extend(seg.raw_text.split("\n"))
        out.append("")
    return "\n".join(out).encode("utf-8") + (b"\n" if script.segments else b"")
