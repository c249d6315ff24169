"""Pipeline orchestration shared by the HTTP API and the CLI.

A project bundles one media file and one parsed AD script. Translation runs
as background jobs on a bounded worker pool: window -> retrieve -> sample ->
prompt -> translate, with the English pivot stage first whenever the source
language is not English. Every failure is labeled with the stage it died in.
"""

from __future__ import annotations

import datetime as _dt
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .. import translator
from ..frames import (
    DecoderAdapter,
    MediaError,
    SamplerConfig,
    extract_frames,
    moment_frame_count,
    plan_indices,
)
from ..grounding import GroundingBackend, GroundingError, compute_window, retrieve_moment
from ..providers import ChatProviderClient, JsonlAudit, LANGUAGE_NAMES
from ..quality.sqm import SqmRating, ratings_to_csv
from ..srt import (
    AdScript,
    AdSegment,
    ParseMode,
    SrtParseError,
    Timecode,
    parse_script,
    serialize_script,
)
from .config import ServiceConfig
from .store import NotFound, Store

ACTIVE_STATUSES = ("queued", "running")


class ApiError(Exception):
    """Service-level error carried to clients as {code, stage, message, details}."""

    def __init__(self, code: str, message: str, *, stage: str = "",
                 details: dict | None = None, status: int = 400):
        super().__init__(message)
        self.code = code
        self.stage = stage
        self.details = details or {}
        self.status = status

    def to_doc(self) -> dict:
        return {"code": self.code, "stage": self.stage,
                "message": str(self), "details": self.details}


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


class PipelineService:
    def __init__(self, config: ServiceConfig, store: Store,
                 chat_provider: ChatProviderClient, grounder: GroundingBackend,
                 decoder: DecoderAdapter, audit: JsonlAudit | None = None):
        self.config = config
        self.store = store
        self.chat_provider = chat_provider
        self.grounder = grounder
        self.decoder = decoder
        self.audit = audit
        self._executor = ThreadPoolExecutor(max_workers=max(1, config.worker_count))
        self._active: dict[str, str] = {}
        self._active_lock = threading.Lock()

    def close(self) -> None:
        self._executor.shutdown(wait=True)

    # --- projects -------------------------------------------------------------

    def create_project(self, media_bytes: bytes, media_name: str, srt_bytes: bytes,
                       *, language: str | None = None, model_id: str | None = None,
                       buffer_s: float | None = None) -> dict:
        if len(media_bytes) > self.config.max_upload_bytes:
            raise ApiError("upload_too_large",
                           f"media exceeds the {self.config.max_upload_bytes} byte limit",
                           stage="upload", status=413)
        language = language or self.config.source_language
        try:
            script = parse_script(srt_bytes, ParseMode.LENIENT, language=language)
        except SrtParseError as exc:
            raise ApiError("script_parse", str(exc), stage="parse",
                           details={"line": exc.line}, status=422) from exc
        except ValueError as exc:
            raise ApiError("script_parse", str(exc), stage="parse", status=422) from exc

        project_id = self.store.new_project_id()
        staging = self.store.staging_dir(project_id)
        try:
            suffix = Path(media_name).suffix or ".bin"
            media_path = staging / f"media{suffix}"
            media_path.write_bytes(media_bytes)
            try:
                probe = self.decoder.probe(media_path)
            except MediaError as exc:
                raise ApiError("media_probe", f"cannot probe uploaded media: {exc}",
                               stage="probe", status=422) from exc
            warnings_by_segment: dict[int, list[str]] = {}
            for warning in script.warnings:
                warnings_by_segment.setdefault(warning.segment_index, []).append(
                    warning.message)
            doc = {
                "id": project_id,
                "created_at": _now(),
                "language": script.language,
                "media_file": media_path.name,
                "media_probe": {"fps": probe.fps, "duration_s": probe.duration_s},
                "settings": {
                    "model_id": model_id or self.config.model_id,
                    "buffer_s": self.config.buffer_s if buffer_s is None else buffer_s,
                    "sampler": {
                        "mode": self.config.sampler.mode,
                        "k": self.config.sampler.k,
                        "stride_frames": self.config.sampler.stride_frames,
                        "target_width": self.config.sampler.target_width,
                        "target_height": self.config.sampler.target_height,
                        "jpeg_quality": self.config.sampler.jpeg_quality,
                    },
                },
                "job_counter": 0,
                "segments": [
                    {
                        "segment_id": f"{project_id}:{seg.index}",
                        "index": seg.index,
                        "onset": str(seg.onset),
                        "offset": str(seg.offset),
                        "raw_text": seg.raw_text,
                        "clean_text": seg.clean_text,
                        "flags": {
                            "pace_constrained": seg.flags.pace_constrained,
                            "double_pace_marker": seg.flags.double_pace_marker,
                            "scene_change": seg.flags.scene_change,
                            "spoken_subtitle": seg.flags.spoken_subtitle,
                        },
                        "warnings": warnings_by_segment.get(seg.index, []),
                    }
                    for seg in script.segments
                ],
            }
            (staging / "script.srt").write_bytes(srt_bytes)
            from .store import atomic_write_json
            atomic_write_json(staging / "project.json", doc)
        except BaseException:
            self.store.discard_staging(project_id)
            raise
        self.store.promote(project_id)
        return doc

    def get_project(self, project_id: str) -> dict:
        try:
            return self.store.read_project(project_id)
        except NotFound:
            raise ApiError("not_found", f"no project {project_id}", status=404) from None

    def list_segments(self, project_id: str) -> list[dict]:
        return self.get_project(project_id)["segments"]

    def _resolve_segment(self, segment_id: str) -> tuple[dict, dict]:
        project_id, _, index = segment_id.partition(":")
        if not index:
            raise ApiError("bad_segment_id", f"malformed segment id {segment_id!r}",
                           status=422)
        project = self.get_project(project_id)
        for seg in project["segments"]:
            if seg["segment_id"] == segment_id:
                return project, seg
        raise ApiError("not_found", f"no segment {segment_id}", status=404)

    @staticmethod
    def _segment_obj(seg: dict) -> AdSegment:
        return AdSegment.from_raw(seg["index"], Timecode.parse(seg["onset"]),
                                  Timecode.parse(seg["offset"]), seg["raw_text"])

    def _media_path(self, project: dict) -> Path:
        return self.store.project_dir(project["id"]) / project["media_file"]

    # --- translation jobs -------------------------------------------------------

    def translate_segment(self, segment_id: str, target_lang: str,
                          modality: str = translator.TEXT_ONLY,
                          frame_count: int | None = None,
                          model_id: str | None = None) -> dict:
        project, seg = self._resolve_segment(segment_id)
        if target_lang not in LANGUAGE_NAMES:
            raise ApiError("bad_language", f"unsupported target language {target_lang!r}",
                           status=422)
        if target_lang == project["language"]:
            raise ApiError("bad_language", "target language equals the source language",
                           status=422)
        if modality not in translator.MODALITIES:
            raise ApiError("bad_modality", f"unknown modality {modality!r}", status=422)
        if frame_count is not None and frame_count < 1:
            raise ApiError("bad_frame_count", "frame count must be >= 1", status=422)
        model = model_id or project["settings"]["model_id"]
        request_key = f"{segment_id}|{target_lang}|{modality}|{frame_count}|{model}"

        with self._active_lock:
            active_id = self._active.get(request_key)
            if active_id is not None:
                try:
                    job = self.store.read_job(active_id)
                    if job["status"] in ACTIVE_STATUSES:
                        return job
                except NotFound:
                    pass
            project_id = project["id"]
            with self.store.lock(project_id):
                doc = self.store.read_project(project_id)
                doc["job_counter"] += 1
                sequence = doc["job_counter"]
                self.store.write_project(project_id, doc)
            job = {
                "id": self.store.new_job_id(project_id),
                "sequence": sequence,
                "project_id": project_id,
                "segment_id": segment_id,
                "segment_index": seg["index"],
                "source_lang": project["language"],
                "target_lang": target_lang,
                "modality": modality,
                "frame_count": frame_count,
                "model_id": model,
                "status": "queued",
                "stage": None,
                "error": None,
                "created_at": _now(),
                "updated_at": _now(),
                "request_key": request_key,
                "window": None,
                "moment": None,
                "frame_indices": None,
                "frame_timestamps_s": None,
                "english_pivot_text": None,
                "result": None,
            }
            self.store.write_job(job)
            self._active[request_key] = job["id"]
        self._executor.submit(self._run_job, job["id"])
        return job

    def get_job(self, job_id: str) -> dict:
        try:
            return self.store.read_job(job_id)
        except NotFound:
            raise ApiError("not_found", f"no job {job_id}", status=404) from None

    def _update_job(self, job: dict, **changes) -> dict:
        job.update(changes)
        job["updated_at"] = _now()
        self.store.write_job(job)
        return job

    def _run_job(self, job_id: str) -> None:
        job = self.store.read_job(job_id)
        try:
            self._update_job(job, status="running")
            project = self.get_project(job["project_id"])
            _, seg = self._resolve_segment(job["segment_id"])
            segment = self._segment_obj(seg)
            source_lang = job["source_lang"]
            stage = "pivot"
            english_text = None
            english_result = None
            if source_lang != "en":
                pivot_request = translator.TranslationRequest(
                    source_lang=source_lang, target_lang="en", segment=segment,
                    model_id=job["model_id"], temperature=self.config.temperature)
                english_result = translator.translate(pivot_request, self.chat_provider,
                                                      audit=self.audit)
                english_text = english_result.output_text
                self._update_job(job, stage=stage, english_pivot_text=english_text)

            frames = None
            if job["modality"] == translator.TEXT_PLUS_FRAMES:
                stage = "window"
                duration = project["media_probe"]["duration_s"]
                window = compute_window(segment, duration,
                                        project["settings"]["buffer_s"])
                self._update_job(job, stage=stage,
                                 window={"start_s": window.start_s, "end_s": window.end_s})
                stage = "retrieve"
                query = english_text if english_text is not None else segment.clean_text
                selection = retrieve_moment(window, project["media_file"], query,
                                            self.grounder)
                moment = selection.moment
                self._update_job(job, stage=stage, moment={
                    "start_s": moment.start_s, "end_s": moment.end_s,
                    "score": moment.score, "used_fallback": selection.used_fallback,
                    "warning": selection.warning})
                stage = "sample"
                sampler = self._sampler_for(project, job["frame_count"])
                fps = project["media_probe"]["fps"]
                indices = plan_indices(moment_frame_count(moment, fps), sampler)
                frames = extract_frames(self._media_path(project), moment, indices,
                                        sampler, self.decoder, fps=fps,
                                        cache_dir=self.store.frames_dir(project["id"]))
                self._update_job(job, stage=stage, frame_indices=list(frames.indices),
                                 frame_timestamps_s=list(frames.timestamps_s))

            stage = "translate"
            self._update_job(job, stage=stage)
            target = job["target_lang"]
            if source_lang == "en":
                request = translator.TranslationRequest(
                    source_lang="en", target_lang=target, segment=segment,
                    modality=job["modality"], frames=frames, model_id=job["model_id"],
                    temperature=self.config.temperature)
                result = translator.translate(request, self.chat_provider, audit=self.audit)
            elif target == "en":
                if frames is None:
                    # the pivot call already produced the English rendition
                    result = english_result
                else:
                    request = translator.TranslationRequest(
                        source_lang=source_lang, target_lang="en", segment=segment,
                        modality=job["modality"], frames=frames, model_id=job["model_id"],
                        temperature=self.config.temperature)
                    result = translator.translate(request, self.chat_provider,
                                                  audit=self.audit)
            else:
                request = translator.TranslationRequest(
                    source_lang="en", target_lang=target, segment=segment,
                    modality=job["modality"], frames=frames, model_id=job["model_id"],
                    temperature=self.config.temperature, text_override=english_text)
                result = translator.translate(request, self.chat_provider, audit=self.audit)
            input_tokens = result.input_tokens
            output_tokens = result.output_tokens
            if english_result is not None and english_result is not result:
                input_tokens += english_result.input_tokens
                output_tokens += english_result.output_tokens
            self._update_job(job, status="done", stage=None, result={
                "output_text": result.output_text,
                "input_tokens": input_tokens,
                "output_tokens": output_tokens,
                "latency_ms": result.latency_ms,
            })
        except translator.TranslationError as exc:
            self._update_job(job, status="failed",
                             error={"code": "provider", "stage": exc.stage,
                                    "message": str(exc)})
        except (GroundingError, MediaError) as exc:
            self._update_job(job, status="failed",
                             error={"code": "pipeline", "stage": stage,
                                    "message": str(exc)})
        except Exception as exc:  # keep the worker pool alive; surface via the job
            self._update_job(job, status="failed",
                             error={"code": "internal", "stage": stage,
                                    "message": f"{type(exc).__name__}: {exc}"})
        finally:
            with self._active_lock:
                if self._active.get(job["request_key"]) == job["id"]:
                    del self._active[job["request_key"]]

    def _sampler_for(self, project: dict, frame_count: int | None) -> SamplerConfig:
        settings = project["settings"]["sampler"]
        sampler = SamplerConfig(**settings)
        if frame_count is not None:
            sampler = replace(sampler, mode="fixed_k", k=frame_count)
        return sampler

    def wait_for_jobs(self, timeout_s: float = 30.0) -> None:
        """Block until the worker pool drains (used by the CLI and tests)."""
        import time
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            with self._active_lock:
                if not self._active:
                    return
            time.sleep(0.02)
        raise TimeoutError("jobs still running after timeout")

    # --- frame preview ----------------------------------------------------------

    def segment_frames(self, segment_id: str, frame_count: int | None = None) -> dict:
        project, seg = self._resolve_segment(segment_id)
        segment = self._segment_obj(seg)
        if frame_count is not None and frame_count < 1:
            raise ApiError("bad_frame_count", "frame count must be >= 1", status=422)
        query = segment.clean_text
        if project["language"] != "en":
            request = translator.TranslationRequest(
                source_lang=project["language"], target_lang="en", segment=segment,
                model_id=project["settings"]["model_id"],
                temperature=self.config.temperature)
            try:
                query = translator.translate(request, self.chat_provider,
                                             audit=self.audit).output_text
            except translator.TranslationError as exc:
                raise ApiError("provider", str(exc), stage="pivot", status=502) from exc
        try:
            window = compute_window(segment, project["media_probe"]["duration_s"],
                                    project["settings"]["buffer_s"])
            selection = retrieve_moment(window, project["media_file"], query, self.grounder)
            sampler = self._sampler_for(project, frame_count)
            fps = project["media_probe"]["fps"]
            indices = plan_indices(moment_frame_count(selection.moment, fps), sampler)
            frames = extract_frames(self._media_path(project), selection.moment, indices,
                                    sampler, self.decoder, fps=fps,
                                    cache_dir=self.store.frames_dir(project["id"]))
        except (GroundingError, MediaError) as exc:
            raise ApiError("pipeline", str(exc), stage="frames", status=502) from exc
        return {
            "segment_id": segment_id,
            "window": {"start_s": window.start_s, "end_s": window.end_s},
            "moment": {"start_s": selection.moment.start_s,
                       "end_s": selection.moment.end_s,
                       "score": selection.moment.score,
                       "used_fallback": selection.used_fallback},
            "fps": fps,
            "frames": [
                {"n": i, "index": idx, "timestamp_s": ts}
                for i, (idx, ts) in enumerate(zip(frames.indices, frames.timestamps_s))
            ],
            "_images": frames.images,  # stripped before JSON serialization
        }

    # --- ratings ---------------------------------------------------------------

    def submit_rating(self, segment_id: str, payload: dict) -> dict:
        project, _ = self._resolve_segment(segment_id)
        try:
            rating = SqmRating(
                rater_id=str(payload["rater_id"]),
                segment_id=segment_id,
                fluency=int(payload["fluency"]),
                adequacy=int(payload["adequacy"]),
                usefulness=int(payload["usefulness"]),
                modality=payload.get("modality", "text_only"),
            )
        except (KeyError, TypeError) as exc:
            raise ApiError("bad_rating", f"missing or malformed field: {exc}",
                           status=422) from exc
        except ValueError as exc:
            raise ApiError("bad_rating", str(exc), status=422) from exc
        doc = {
            "rater_id": rating.rater_id,
            "segment_id": rating.segment_id,
            "modality": rating.modality,
            "fluency": rating.fluency,
            "adequacy": rating.adequacy,
            "usefulness": rating.usefulness,
            "submitted_at": _now(),
        }
        if payload.get("idempotency_key"):
            doc["idempotency_key"] = str(payload["idempotency_key"])
            existing = [r for r in self.store.read_ratings(project["id"])
                        if r.get("idempotency_key") == doc["idempotency_key"]]
            if existing:
                return existing[0]
        self.store.append_rating(project["id"], doc)
        return doc

    def project_ratings(self, project_id: str) -> list[dict]:
        self.get_project(project_id)
        return self.store.read_ratings(project_id)

    def ratings_csv(self, project_id: str) -> str:
        ratings = [
            SqmRating(rater_id=r["rater_id"], segment_id=r["segment_id"],
                      fluency=r["fluency"], adequacy=r["adequacy"],
                      usefulness=r["usefulness"], modality=r["modality"])
            for r in self.project_ratings(project_id)
        ]
        return ratings_to_csv(ratings)

    # --- export ------------------------------------------------------------------

    def export_script(self, project_id: str, target_lang: str) -> bytes:
        project = self.get_project(project_id)
        done: dict[str, dict] = {}
        for job in self.store.list_jobs(project_id):
            if job["status"] == "done" and job["target_lang"] == target_lang:
                done[job["segment_id"]] = job  # jobs are sequence-ordered: last wins
        missing = [seg["segment_id"] for seg in project["segments"]
                   if seg["segment_id"] not in done]
        if missing:
            raise ApiError("untranslated",
                           f"{len(missing)} segment(s) lack a done {target_lang} "
                           f"translation", details={"missing": missing}, status=409)
        segments = tuple(
            AdSegment.from_raw(
                seg["index"], Timecode.parse(seg["onset"]), Timecode.parse(seg["offset"]),
                done[seg["segment_id"]]["result"]["output_text"])
            for seg in project["segments"]
        )
        script = AdScript(segments=segments, language=target_lang,
                          source_id=project["id"])
        return serialize_script(script)
