"""Buffered search windows and moment retrieval via a pluggable grounder.

The temporal grounder itself is an external service behind a small JSON wire
protocol (``POST`` of ``{media_ref, window:{start_s, end_s}, query}`` giving
``{candidates: [{start_s, end_s, score}]}``). A deterministic fallback
grounder returns the whole window so the pipeline also runs offline.
Queries must be the English rendition of the AD text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from .providers import ProviderError, RetryPolicy
from .srt import AdSegment

DEFAULT_BUFFER_S = 10.0


class GroundingError(ValueError):
    pass


class GroundingProtocolError(GroundingError):
    """Backend violated the wire contract (candidate outside window, bad score)."""


@dataclass(frozen=True)
class SearchWindow:
    start_s: float
    end_s: float
    buffer_s: float = DEFAULT_BUFFER_S

    def __post_init__(self) -> None:
        if not self.start_s < self.end_s:
            raise GroundingError(f"empty search window [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class MomentCandidate:
    start_s: float
    end_s: float
    score: float

    def __post_init__(self) -> None:
        if not self.start_s < self.end_s:
            raise GroundingError(f"empty moment [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class MomentSelection:
    moment: MomentCandidate
    used_fallback: bool = False
    warning: str | None = None


@runtime_checkable
class GroundingBackend(Protocol):
    def propose(self, window: SearchWindow, media_ref: str,
                query_text_en: str) -> list[MomentCandidate]: ...


def compute_window(segment: AdSegment, video_duration_s: float,
                   buffer_s: float = DEFAULT_BUFFER_S) -> SearchWindow:
    """Window from ``onset - buffer`` to ``offset + buffer``, clamped to the video."""
    if video_duration_s <= 0:
        raise GroundingError("video duration must be positive")
    onset = segment.onset.to_seconds()
    offset = segment.offset.to_seconds()
    if offset > video_duration_s:
        raise GroundingError(
            f"segment {segment.index} ends at {offset:.3f}s beyond the "
            f"{video_duration_s:.3f}s video")
    return SearchWindow(start_s=max(0.0, onset - buffer_s),
                        end_s=min(video_duration_s, offset + buffer_s),
                        buffer_s=buffer_s)

_EPS = 1e-9


def validate_candidates(window: SearchWindow,
                        candidates: list[MomentCandidate]) -> list[MomentCandidate]:
    for cand in candidates:
        if not math.isfinite(cand.score):
            raise GroundingProtocolError(f"non-finite grounding score {cand.score!r}")
        if cand.start_s < window.start_s - _EPS or cand.end_s > window.end_s + _EPS:
            raise GroundingProtocolError(
                f"candidate [{cand.start_s}, {cand.end_s}] outside window "
                f"[{window.start_s}, {window.end_s}]")
    return candidates


def select_top_candidate(candidates: list[MomentCandidate]) -> MomentCandidate:
    """Highest score wins; ties break to the earlier start, then the shorter moment."""
    if not candidates:
        raise GroundingError("empty candidate pool")
    return min(candidates, key=lambda c: (-c.score, c.start_s, c.duration_s))


def full_window_candidate(window: SearchWindow) -> MomentCandidate:
    return MomentCandidate(start_s=window.start_s, end_s=window.end_s, score=1.0)


def retrieve_moment(window: SearchWindow, media_ref: str, query_text_en: str,
                    backend: GroundingBackend) -> MomentSelection:
    """Ask the backend for candidates and pick the most salient one.

    An empty pool degrades to the full-window candidate with a warning rather
    than failing the segment.
    """
    pool = validate_candidates(window, backend.propose(window, media_ref, query_text_en))
    if not pool:
        return MomentSelection(moment=full_window_candidate(window), used_fallback=True,
                               warning="backend returned an empty candidate pool")
    return MomentSelection(moment=select_top_candidate(pool))


class FallbackGrounder:
    """Deterministic offline grounder: the whole window, score 1.0."""

    def propose(self, window: SearchWindow, media_ref: str,
                query_text_en: str) -> list[MomentCandidate]:
        return [full_window_candidate(window)]


class HttpGroundingBackend:
    """Client for a remote grounder speaking the JSON wire protocol."""

    def __init__(self, base_url: str, timeout_s: float = 30.0,
                 retry: RetryPolicy = RetryPolicy()):
        self.base_url = base_url.rstrip("/")
        self.retry = retry
        self._client = httpx.Client(timeout=timeout_s)

    def propose(self, window: SearchWindow, media_ref: str,
                query_text_en: str) -> list[MomentCandidate]:
        body = {
            "media_ref": media_ref,
            "window": {"start_s": window.start_s, "end_s": window.end_s},
            "query": query_text_en,
        }

        def attempt() -> list[MomentCandidate]:
            try:
                resp = self._client.post(f"{self.base_url}/ground", json=body)
            except httpx.HTTPError as exc:
                raise ProviderError(f"grounder transport error: {exc}", retryable=True) from exc
            if resp.status_code == 429 or resp.status_code >= 500:
                raise ProviderError(f"grounder unavailable ({resp.status_code})",
                                    payload=resp.text, retryable=True)
            if resp.status_code != 200:
                raise ProviderError(f"grounder returned {resp.status_code}", payload=resp.text)
            try:
                doc = resp.json()
                return [MomentCandidate(float(c["start_s"]), float(c["end_s"]),
                                        float(c["score"]))
                        for c in doc["candidates"]]
            except (ValueError, KeyError, TypeError) as exc:
                raise ProviderError(f"malformed grounder reply: {exc}",
                                    payload=resp.text) from exc

        try:
            candidates, _ = self.retry.run(attempt)
        except ProviderError as exc:
            if exc.retryable:
                raise ProviderError(
                    f"{exc} (after {self.retry.attempts} attempts)",
                    payload=exc.payload) from exc
            raise
        return candidates
