"""Re-record the workbench's API fixtures from the live service.

Runs the pipeline hermetically (mock provider, fallback grounder, stub
decoder) and captures the exact JSON/bytes the frontend contract tests assert
against. Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from adtrans.frames import StubDecoder
from adtrans.grounding import FallbackGrounder
from adtrans.providers import MockChatProvider, ProviderError
from adtrans.service.app import create_app
from adtrans.service.config import ServiceConfig
from adtrans.service.core import PipelineService
from adtrans.service.store import Store

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SRT_3SEG = (
    "1\n00:00:01,000 --> 00:00:03,000\nA man enters the room.\n\n"
    "2\n00:00:05,000 --> 00:00:07,500\n$ He opens the window.\n\n"
    "3\n00:00:10,000 --> 00:00:12,000\nUT: Welcome home.\n"
).encode()
STUB_MEDIA = json.dumps({"fps": 25.0, "duration_s": 60.0}).encode()


def dump(name: str, data) -> None:
    if isinstance(data, (dict, list)):
        (FIXTURES / name).write_text(
            json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8")
    else:
        (FIXTURES / name).write_bytes(data)
    print("wrote", name)


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp())
    config = ServiceConfig(store_root=tmp / "store", worker_count=2)
    provider = MockChatProvider()
    service = PipelineService(config, Store(config.store_root), chat_provider=provider,
                              grounder=FallbackGrounder(), decoder=StubDecoder())
    client = TestClient(create_app(service))

    project = client.post("/projects", files={
        "video": ("clip.json", STUB_MEDIA, "application/json"),
        "script": ("script.srt", SRT_3SEG, "text/plain")}).json()
    pid = project["id"]
    dump("project.json", project)
    segments = client.get(f"/projects/{pid}/segments").json()
    dump("segments.json", segments)
    seg1 = segments[0]["segment_id"]

    job_text = client.post(f"/segments/{seg1}/translate",
                           json={"target_lang": "de"}).json()
    service.wait_for_jobs()
    dump("job_text_done.json", client.get(f"/jobs/{job_text['id']}").json())

    job_frames = client.post(f"/segments/{seg1}/translate",
                             json={"target_lang": "de", "modality": "text_plus_frames",
                                   "frame_count": 4}).json()
    service.wait_for_jobs()
    job_frames = client.get(f"/jobs/{job_frames['id']}").json()
    dump("job_frames_done.json", job_frames)

    queued = dict(job_frames)
    queued.update(status="queued", stage=None, result=None, moment=None, window=None,
                  frame_indices=None, frame_timestamps_s=None)
    dump("job_frames_queued.json", queued)

    provider._scripted.append(ProviderError("scripted outage"))
    job_failed = client.post(f"/segments/{segments[1]['segment_id']}/translate",
                             json={"target_lang": "fr"}).json()
    service.wait_for_jobs()
    job_failed = client.get(f"/jobs/{job_failed['id']}").json()
    assert job_failed["status"] == "failed", job_failed
    dump("job_failed.json", job_failed)

    frames = client.get(f"/segments/{seg1}/frames", params={"k": 4}).json()
    dump("frames.json", frames)
    dump("frame0.jpg", client.get(frames["frames"][0]["url"], params={"k": 4}).content)

    rating_body = {"rater_id": "A", "fluency": 5, "adequacy": 6, "usefulness": 4,
                   "modality": "text_plus_frames", "idempotency_key": "fix-001"}
    dump("rating_request.json", rating_body)
    dump("rating_response.json",
         client.post(f"/segments/{seg1}/ratings", json=rating_body).json())
    dump("ratings.csv",
         client.get(f"/projects/{pid}/ratings", params={"format": "csv"}).content)

    for seg in segments[1:]:
        client.post(f"/segments/{seg['segment_id']}/translate",
                    json={"target_lang": "de"})
    service.wait_for_jobs()
    dump("export.de.srt",
         client.get(f"/projects/{pid}/export", params={"lang": "de"}).content)

    big_srt = "\n".join(
        f"{i}\n{(i * 5) // 3600:02d}:{((i * 5) % 3600) // 60:02d}:{(i * 5) % 60:02d},000"
        f" --> {(i * 5 + 3) // 3600:02d}:{((i * 5 + 3) % 3600) // 60:02d}:"
        f"{(i * 5 + 3) % 60:02d},000\nSegment text {i}.\n"
        for i in range(1, 301)).encode()
    big_media = json.dumps({"fps": 25.0, "duration_s": 5000.0}).encode()
    big = client.post("/projects", files={
        "video": ("clip.json", big_media, "application/json"),
        "script": ("big.srt", big_srt, "text/plain")}).json()
    dump("segments_300.json", client.get(f"/projects/{big['id']}/segments").json())

    service.close()
    print("fixtures recorded for project", pid)


if __name__ == "__main__":
    main()
