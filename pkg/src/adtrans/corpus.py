"""Corpus ingestion, statistics, synthetic parallel data, and seeded splits.

The synthetic generator translates every source segment into each requested
target language plus English; the English rendition is flagged as the pivot
(it doubles as the grounding query downstream). Splits are reproducible via a
portable SHA-256 keyed ordering rather than a language-specific RNG.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .providers import MtProviderClient, ProviderError
from .srt import AdScript, ParseMode, parse_script

GAP_PLACEHOLDER = "<GAP>"


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    script: AdScript
    video_duration_s: float
    media_ref: str

    def __post_init__(self) -> None:
        if self.video_duration_s < 0:
            raise CorpusError("video duration must be non-negative")
        for seg in self.script.segments:
            if seg.offset.to_seconds() > self.video_duration_s:
                raise CorpusError(
                    f"segment {seg.index} ends at {seg.offset} beyond the "
                    f"{self.video_duration_s:.3f}s video")


def format_duration(seconds: float) -> str:
    """Render seconds as ``H:MM:SS`` (hours unpadded, e.g. ``144:24:52``)."""
    total = round(seconds)
    h, rem = divmod(total, 3600)
    m, s = divmod(rem, 60)
    return f"{h}:{m:02d}:{s:02d}"


def parse_duration(value: float | int | str) -> float:
    """Accept seconds or an ``H:MM:SS`` string."""
    if isinstance(value, (int, float)):
        return float(value)
    parts = value.strip().split(":")
    if len(parts) != 3:
        raise CorpusError(f"expected H:MM:SS or seconds, got {value!r}")
    h, m, s = (float(p) for p in parts)
    return h * 3600 + m * 60 + s


@dataclass(frozen=True)
class CorpusStats:
    file_count: int
    character_count: int
    video_seconds: float
    ad_seconds: float

    @property
    def ratio(self) -> float:
        return self.ad_seconds / self.video_seconds

    def to_report(self) -> dict:
        return {
            "file_count": self.file_count,
            "character_count": self.character_count,
            "video_hours": format_duration(self.video_seconds),
            "ad_hours": format_duration(self.ad_seconds),
            "ratio_percent": f"{self.ratio * 100:.2f}%",
        }


def compute_stats(entries: list[CorpusEntry]) -> CorpusStats:
    """Aggregate counts over a corpus. Character counts use clean (markup
    stripped) text; durations sum per-segment offset minus onset."""
    if not entries:
        raise CorpusError("corpus is empty")
    video_seconds = sum(e.video_duration_s for e in entries)
    if video_seconds <= 0:
        raise CorpusError("total video duration is zero; ratio undefined")
    ad_seconds = 0.0
    character_count = 0
    for entry in entries:
        for seg in entry.script.segments:
            ad_seconds += seg.duration_s
            character_count += len(seg.clean_text)
    return CorpusStats(
        file_count=len(entries),
        character_count=character_count,
        video_seconds=video_seconds,
        ad_seconds=ad_seconds,
    )


def stats_by_language(entries: list[CorpusEntry]) -> dict[str, CorpusStats]:
    """Per-language stats plus a ``total`` row, for tabular reports."""
    grouped: dict[str, list[CorpusEntry]] = {}
    for entry in entries:
        grouped.setdefault(entry.script.language, []).append(entry)
    report = {lang: compute_stats(group) for lang, group in sorted(grouped.items())}
    report["total"] = compute_stats(entries)
    return report


def render_stats_table(stats: dict[str, CorpusStats]) -> str:
    header = f"{'Language':<10} {'Files':>6} {'Characters':>12} {'Video':>12} {'AD':>10} {'Ratio':>8}"
    rows = [header, "-" * len(header)]
    for lang, st in stats.items():
        rep = st.to_report()
        rows.append(f"{lang:<10} {rep['file_count']:>6} {rep['character_count']:>12,} "
                    f"{rep['video_hours']:>12} {rep['ad_hours']:>10} {rep['ratio_percent']:>8}")
    return "\n".join(rows)


def load_corpus(manifest_path: str | Path, mode: ParseMode = ParseMode.STRICT) -> list[CorpusEntry]:
    """Load a corpus from a JSON manifest listing SRT files with durations.

    Manifest schema: ``{"entries": [{"script": "a.srt", "language": "de",
    "video_duration": 3600.0 | "1:00:00", "media_ref": "a.mp4"}]}``. Paths are
    relative to the manifest.
    """
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    entries = []
    for item in doc["entries"]:
        srt_path = manifest_path.parent / item["script"]
        script = parse_script(srt_path.read_bytes(), mode,
                              language=item["language"], source_id=item["script"])
        entries.append(CorpusEntry(
            script=script,
            video_duration_s=parse_duration(item["video_duration"]),
            media_ref=item.get("media_ref", ""),
        ))
    return entries


# --- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class SplitManifest:
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    dev_cap: int = 200
    test_cap: int = 200

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "dev_cap": self.dev_cap,
            "test_cap": self.test_cap,
            "sizes": {"train": len(self.train), "dev": len(self.dev), "test": len(self.test)},
            "train": list(self.train),
            "dev": list(self.dev),
            "test": list(self.test),
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)


def _split_key(seed: int, segment_id: str) -> str:
    return hashlib.sha256(f"{seed}:{segment_id}".encode("utf-8")).hexdigest()


def split_corpus(segment_ids: list[str], seed: int,
                 dev_cap: int = 200, test_cap: int = 200) -> SplitManifest:
    """Deterministically split segment ids into train/dev/test.

    Ordering key is ``sha256("{seed}:{id}")``, so the same seed yields the
    same manifest on any platform. Dev and test take exactly the configured
    caps; train receives the remainder, all in original corpus order.
    """
    if len(set(segment_ids)) != len(segment_ids):
        raise CorpusError("segment ids must be unique")
    if len(segment_ids) < dev_cap + test_cap:
        raise CorpusError(
            f"need at least {dev_cap + test_cap} segments for dev+test, got "
            f"{len(segment_ids)} (short by {dev_cap + test_cap - len(segment_ids)})")
    by_hash = sorted(segment_ids, key=lambda sid: (_split_key(seed, sid), sid))
    dev = set(by_hash[:dev_cap])
    test = set(by_hash[dev_cap:dev_cap + test_cap])
    return SplitManifest(
        train=tuple(sid for sid in segment_ids if sid not in dev and sid not in test),
        dev=tuple(sid for sid in segment_ids if sid in dev),
        test=tuple(sid for sid in segment_ids if sid in test),
        seed=seed, dev_cap=dev_cap, test_cap=test_cap,
    )


# --- synthetic parallel data --------------------------------------------------

@dataclass(frozen=True)
class SyntheticTranslation:
    text: str
    provider_id: str
    timestamp: str
    is_pivot: bool = False
    gap: bool = False
    error: str | None = None
    attempts: int = 1


@dataclass(frozen=True)
class SyntheticRow:
    segment_id: str
    source_lang: str
    source_text: str
    onset: str
    offset: str
    translations: dict[str, SyntheticTranslation] = field(default_factory=dict)


@dataclass
class SyntheticCorpus:
    targets: tuple[str, ...]
    rows: list[SyntheticRow]

    @property
    def gaps(self) -> list[tuple[str, str, str]]:
        return [(row.segment_id, lang, tr.error or "empty translation")
                for row in self.rows for lang, tr in row.translations.items() if tr.gap]

    def lines_for(self, target: str) -> list[str]:
        return [row.translations[target].text if not row.translations[target].gap
                else GAP_PLACEHOLDER for row in self.rows]

    def write(self, out_dir: str | Path) -> None:
        """Write line-aligned text per target plus a JSONL sidecar. English
        lines go to ``en.pivot.txt`` to keep the mediating rendition separate."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "source.txt").write_text(
            "\n".join(r.source_text for r in self.rows) + "\n", encoding="utf-8")
        for target in self.targets:
            name = "en.pivot.txt" if target == "en" else f"{target}.txt"
            (out / name).write_text("\n".join(self.lines_for(target)) + "\n", encoding="utf-8")
        with (out / "alignment.jsonl").open("w", encoding="utf-8") as fh:
            for row in self.rows:
                doc = {
                    "segment_id": row.segment_id,
                    "source_lang": row.source_lang,
                    "onset": row.onset,
                    "offset": row.offset,
                    "source_text": row.source_text,
                    "translations": {
                        lang: {
                            "text": tr.text, "provider_id": tr.provider_id,
                            "timestamp": tr.timestamp, "is_pivot": tr.is_pivot,
                            "gap": tr.gap, "error": tr.error, "attempts": tr.attempts,
                        } for lang, tr in sorted(row.translations.items())
                    },
                }
                fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")


def segment_id_for(source_id: str, index: int) -> str:
    return f"{source_id}:{index}"


def generate_synthetic_pairs(
    entries: list[CorpusEntry],
    mt: MtProviderClient,
    targets: set[str] | list[str],
    *,
    parallelism: int = 4,
    max_retries: int = 2,
) -> SyntheticCorpus:
    """Translate every segment into each target language plus English.

    Provider failures are retried ``max_retries`` times per segment; a segment
    that still fails (or comes back empty) is recorded as a gap with an
    explicit placeholder so line alignment is never broken.
    """
    now = lambda: _dt.datetime.now(_dt.timezone.utc).isoformat()

    def translate_one(text: str, source: str, target: str) -> SyntheticTranslation:
        attempts = 0
        error: str | None = None
        while attempts <= max_retries:
            attempts += 1
            try:
                out = mt.translate_text(text, source, target)
            except ProviderError as exc:
                error = str(exc)
                continue
            if out.strip():
                return SyntheticTranslation(out.strip(), mt.provider_id, now(),
                                            is_pivot=(target == "en"), attempts=attempts)
            error = "empty translation"
        return SyntheticTranslation("", mt.provider_id, now(), is_pivot=(target == "en"),
                                    gap=True, error=error, attempts=attempts)

    tasks: list[tuple[str, str, str, str, str, list[str]]] = []
    all_targets: set[str] = set()
    for entry in entries:
        source = entry.script.language
        wanted = sorted((set(targets) | {"en"}) - {source})
        all_targets.update(wanted)
        for seg in entry.script.segments:
            tasks.append((segment_id_for(entry.script.source_id, seg.index),
                          source, seg.clean_text, str(seg.onset), str(seg.offset), wanted))

    def run_task(task) -> SyntheticRow:
        segment_id, source, text, onset, offset, wanted = task
        return SyntheticRow(
            segment_id=segment_id, source_lang=source, source_text=text,
            onset=onset, offset=offset,
            translations={t: translate_one(text, source, t) for t in wanted},
        )

    if not tasks:
        return SyntheticCorpus(targets=tuple(sorted(all_targets)), rows=[])

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        # map() preserves submission order, so rows stay in segment order
        rows = list(pool.map(run_task, tasks))
    return SyntheticCorpus(targets=tuple(sorted(all_targets)), rows=rows)
