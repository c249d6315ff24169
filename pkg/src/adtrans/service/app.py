"""HTTP+JSON API over the pipeline service.

Endpoints mirror the CLI: project creation with media+script uploads,
segment listing, per-segment translation jobs with polling, frame preview,
SQM rating capture, and SRT export. Errors use one envelope:
``{code, stage, message, details}``.
"""

from __future__ import annotations

from typing import Annotated

from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import translator
from .core import ApiError, PipelineService


class TranslateBody(BaseModel):
    target_lang: str
    modality: str = translator.TEXT_ONLY
    frame_count: int | None = Field(default=None, ge=1)
    model_id: str | None = None


class RatingBody(BaseModel):
    rater_id: str
    fluency: int
    adequacy: int
    usefulness: int
    modality: str = "text_only"
    idempotency_key: str | None = None


def create_app(service: PipelineService) -> FastAPI:
    app = FastAPI(title="adtrans", version="0.1.0")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.to_doc())

    @app.post("/projects")
    def create_project(
        video: Annotated[UploadFile, File()],
        script: Annotated[UploadFile, File()],
        language: Annotated[str | None, Form()] = None,
        model_id: Annotated[str | None, Form()] = None,
        buffer_s: Annotated[float | None, Form()] = None,
    ):
        return service.create_project(
            video.file.read(), video.filename or "media.bin", script.file.read(),
            language=language, model_id=model_id, buffer_s=buffer_s)

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return service.get_project(project_id)

    @app.get("/projects/{project_id}/segments")
    def list_segments(project_id: str):
        return service.list_segments(project_id)

    @app.post("/segments/{segment_id}/translate")
    def translate_segment(segment_id: str, body: TranslateBody):
        return service.translate_segment(segment_id, body.target_lang,
                                         modality=body.modality,
                                         frame_count=body.frame_count,
                                         model_id=body.model_id)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return service.get_job(job_id)

    @app.get("/segments/{segment_id}/frames")
    def segment_frames(segment_id: str, k: int | None = None):
        doc = service.segment_frames(segment_id, frame_count=k)
        doc.pop("_images")
        for frame in doc["frames"]:
            frame["url"] = f"/segments/{segment_id}/frames/{frame['n']}"
        return doc

    @app.get("/segments/{segment_id}/frames/{n}")
    def segment_frame_image(segment_id: str, n: int, k: int | None = None):
        doc = service.segment_frames(segment_id, frame_count=k)
        images = doc.pop("_images")
        if not 0 <= n < len(images):
            raise ApiError("not_found", f"no frame {n}", status=404)
        return Response(content=images[n], media_type="image/jpeg")

    @app.post("/segments/{segment_id}/ratings")
    def submit_rating(segment_id: str, body: RatingBody):
        return service.submit_rating(segment_id, body.model_dump())

    @app.get("/projects/{project_id}/ratings")
    def project_ratings(project_id: str, format: str = "json"):
        if format == "csv":
            return Response(content=service.ratings_csv(project_id),
                            media_type="text/csv")
        return service.project_ratings(project_id)

    @app.get("/projects/{project_id}/export")
    def export_script(project_id: str, lang: str):
        data = service.export_script(project_id, lang)
        return Response(
            content=data, media_type="application/x-subrip",
            headers={"Content-Disposition":
                     f'attachment; filename="{project_id}.{lang}.srt"'})

    return app
