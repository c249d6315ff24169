"""Frame sampling from a retrieved moment and extraction via a media decoder.

Sampling is pure arithmetic over frame indices. Extraction goes through a
``DecoderAdapter``: either an external command template (ffmpeg-style, one
still per invocation) or a deterministic stub that renders synthetic JPEGs
from a small JSON media manifest, used for offline runs and tests.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import re
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

from PIL import Image

from .grounding import MomentCandidate

DEFAULT_JPEG_QUALITY = 85


class MediaError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    mode: str = "fixed_k"  # fixed_k | stride
    k: int = 4
    stride_frames: int = 50
    target_width: int = 960
    target_height: int = 540
    jpeg_quality: int = DEFAULT_JPEG_QUALITY

    def __post_init__(self) -> None:
        if self.mode not in ("fixed_k", "stride"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode == "fixed_k" and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mode == "stride" and self.stride_frames < 1:
            raise ValueError("stride_frames must be >= 1")
        if self.target_width < 1 or self.target_height < 1:
            raise ValueError("target size must be positive")


@dataclass(frozen=True)
class MediaProbe:
    fps: float
    duration_s: float


@dataclass(frozen=True)
class FrameSet:
    moment: MomentCandidate
    fps: float
    indices: tuple[int, ...]
    timestamps_s: tuple[float, ...]
    images: tuple[bytes, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not (len(self.indices) == len(self.images) == len(self.timestamps_s)):
            raise ValueError("indices, timestamps and images must align")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("frame indices must be strictly increasing")


def moment_frame_count(moment: MomentCandidate, fps: float) -> int:
    """Number of frame slots in the moment, endpoints inclusive."""
    if fps <= 0:
        raise MediaError("fps must be positive")
    return int(math.floor(moment.duration_s * fps + 1e-9)) + 1


def plan_indices(moment_frame_count: int, config: SamplerConfig) -> list[int]:
    """Frame indices (0-based, relative to moment start) for one moment.

    fixed_k spreads k indices linearly with both endpoints included
    (``round(i * (N-1) / (k-1))``, then order-preserving de-duplication;
    Python's round-half-to-even breaks exact ties). k == 1 takes the
    midpoint. stride walks 0, s, 2s, ... below N.
    """
    n = moment_frame_count
    if n < 1:
        raise MediaError("moment contains no frames")
    if config.mode == "stride":
        return list(range(0, n, config.stride_frames))
    if config.k == 1:
        return [round((n - 1) / 2)]
    raw = (round(i * (n - 1) / (config.k - 1)) for i in range(config.k))
    out: list[int] = []
    for idx in raw:
        if not out or idx != out[-1]:
            out.append(idx)
    return out


@runtime_checkable
class DecoderAdapter(Protocol):
    def probe(self, media_path: str | Path) -> MediaProbe: ...

    def extract(self, media_path: str | Path, timestamp_s: float,
                width: int, height: int, quality: int) -> bytes: ...


# Per-media serialization: one extraction at a time per file, distinct files in parallel.
_media_locks: dict[str, threading.Lock] = {}
_media_locks_guard = threading.Lock()


def _lock_for(media_path: str | Path) -> threading.Lock:
    key = str(Path(media_path).resolve())
    with _media_locks_guard:
        return _media_locks.setdefault(key, threading.Lock())


def extract_frames(
    media_path: str | Path,
    moment: MomentCandidate,
    indices: list[int],
    config: SamplerConfig,
    decoder: DecoderAdapter,
    *,
    fps: float | None = None,
    cache_dir: str | Path | None = None,
) -> FrameSet:
    """Decode the sampled indices of a moment into resized encoded images.

    Timestamps are ``moment.start_s + index / fps``; anything past the end of
    the stream clamps to the last decodable instant with a warning. When a
    cache directory is given, images are keyed by (media content hash,
    timestamp, size, quality).
    """
    probe = decoder.probe(media_path)
    effective_fps = fps if fps is not None else probe.fps
    if effective_fps <= 0:
        raise MediaError("probed fps is not positive")
    frame_extent = moment_frame_count(moment, effective_fps)
    warnings: list[str] = []

    media_hash = ""
    cache: Path | None = None
    if cache_dir is not None:
        cache = Path(cache_dir)
        cache.mkdir(parents=True, exist_ok=True)
        media_hash = _file_hash(media_path)

    timestamps: list[float] = []
    images: list[bytes] = []
    lock = _lock_for(media_path)
    for idx in indices:
        if idx < 0 or idx >= frame_extent:
            raise MediaError(f"frame index {idx} outside moment extent {frame_extent}")
        ts = moment.start_s + idx / effective_fps
        if ts > probe.duration_s:
            warnings.append(f"index {idx} at {ts:.3f}s is beyond the stream end; "
                            f"clamped to {probe.duration_s:.3f}s")
            ts = probe.duration_s
        key = None
        if cache is not None:
            key = cache / (f"{media_hash[:16]}_{round(ts * 1000)}_"
                           f"{config.target_width}x{config.target_height}"
                           f"q{config.jpeg_quality}.jpg")
            if key.exists():
                timestamps.append(ts)
                images.append(key.read_bytes())
                continue
        with lock:
            data = decoder.extract(media_path, ts, config.target_width,
                                   config.target_height, config.jpeg_quality)
        if key is not None:
            key.write_bytes(data)
        timestamps.append(ts)
        images.append(data)

    return FrameSet(moment=moment, fps=effective_fps, indices=tuple(indices),
                    timestamps_s=tuple(timestamps), images=tuple(images),
                    warnings=tuple(warnings))


def _file_hash(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class CommandDecoder:
    """Decoder driving an external command per extracted frame.

    Templates are shell-style strings with ``{input}``, ``{timestamp}``,
    ``{output}``, ``{width}``, ``{height}`` and ``{quality}`` placeholders,
    substituted per token after splitting (so paths with spaces survive).
    The probe command must print JSON: either ``{"fps":..., "duration_s":...}``
    or ffprobe's ``-of json`` stream/format layout.
    """

    DEFAULT_EXTRACT = ("ffmpeg -v error -ss {timestamp} -i {input} -frames:v 1 "
                       "-vf scale={width}:{height} -q:v 2 -y {output}")
    DEFAULT_PROBE = ("ffprobe -v error -select_streams v:0 "
                     "-show_entries stream=avg_frame_rate:format=duration "
                     "-of json {input}")

    def __init__(self, extract_template: str = DEFAULT_EXTRACT,
                 probe_template: str = DEFAULT_PROBE, timeout_s: float = 60.0):
        self.extract_template = extract_template
        self.probe_template = probe_template
        self.timeout_s = timeout_s

    _PLACEHOLDER_RE = re.compile(r"\{(input|timestamp|output|width|height|quality)\}")

    @classmethod
    def _render(cls, template: str, **values: object) -> list[str]:
        # substitute only known placeholders so literal braces in commands survive
        def sub(token: str) -> str:
            return cls._PLACEHOLDER_RE.sub(lambda m: str(values[m.group(1)]), token)
        return [sub(token) for token in shlex.split(template)]

    def probe(self, media_path: str | Path) -> MediaProbe:
        argv = self._render(self.probe_template, input=str(media_path))
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout_s)
        if proc.returncode != 0:
            raise MediaError(f"probe failed for {media_path}: {proc.stderr.strip()}")
        try:
            doc = json.loads(proc.stdout)
        except ValueError as exc:
            raise MediaError(f"probe output is not JSON: {exc}") from exc
        return self._parse_probe(doc)

    @staticmethod
    def _parse_probe(doc: dict) -> MediaProbe:
        if "fps" in doc and "duration_s" in doc:
            return MediaProbe(fps=float(doc["fps"]), duration_s=float(doc["duration_s"]))
        try:  # ffprobe layout
            rate = doc["streams"][0]["avg_frame_rate"]
            num, _, den = rate.partition("/")
            fps = float(num) / float(den or 1)
            return MediaProbe(fps=fps, duration_s=float(doc["format"]["duration"]))
        except (KeyError, IndexError, ValueError, ZeroDivisionError) as exc:
            raise MediaError(f"unrecognized probe output: {exc}") from exc

    def extract(self, media_path: str | Path, timestamp_s: float,
                width: int, height: int, quality: int) -> bytes:
        with tempfile.NamedTemporaryFile(suffix=".jpg", delete=False) as tmp:
            out_path = Path(tmp.name)
        try:
            argv = self._render(self.extract_template, input=str(media_path),
                                timestamp=f"{timestamp_s:.3f}", output=str(out_path),
                                width=width, height=height, quality=quality)
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=self.timeout_s)
            if proc.returncode != 0:
                raise MediaError(f"decode failed at {timestamp_s:.3f}s: "
                                 f"{proc.stderr.strip() or proc.stdout.strip()}")
            data = out_path.read_bytes()
            if not data:
                raise MediaError(f"decoder produced no image at {timestamp_s:.3f}s")
            return data
        finally:
            out_path.unlink(missing_ok=True)


class StubDecoder:
    """Deterministic offline decoder.

    Media files are JSON manifests like ``{"fps": 25, "duration_s": 10.0}``;
    anything that does not parse is treated as corrupt media. Extraction
    renders a solid-color JPEG whose color is derived from the manifest and
    the timestamp, so identical inputs give identical bytes.
    """

    def probe(self, media_path: str | Path) -> MediaProbe:
        try:
            doc = json.loads(Path(media_path).read_text(encoding="utf-8"))
            return MediaProbe(fps=float(doc["fps"]), duration_s=float(doc["duration_s"]))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise MediaError(f"cannot probe {media_path}: {exc}") from exc

    def extract(self, media_path: str | Path, timestamp_s: float,
                width: int, height: int, quality: int) -> bytes:
        manifest = Path(media_path).read_bytes()
        digest = hashlib.sha256(manifest + f":{round(timestamp_s * 1000)}".encode()).digest()
        image = Image.new("RGB", (width, height), tuple(digest[:3]))
        buf = io.BytesIO()
        image.save(buf, format="JPEG", quality=quality)
        return buf.getvalue()
