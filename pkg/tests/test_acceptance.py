"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -s -v`` to see the per-criterion
lines. Every tolerance is pinned here; nothing defers to later calibration.
"""

import json
import os
import random
import signal
import subprocess
import sys
import time
from decimal import Decimal
from pathlib import Path

import pytest

from adtrans.corpus import CorpusEntry, compute_stats, split_corpus
from adtrans.frames import SamplerConfig, StubDecoder, plan_indices
from adtrans.grounding import FallbackGrounder, compute_window
from adtrans.providers import MockChatProvider
from adtrans.quality import (
    SEVERITY_WEIGHTS,
    aggregate_qe,
    bleu,
    chrf,
    gemba_mqm,
    meteor_lite,
    weighted_kappa,
)
from adtrans.service.config import ServiceConfig
from adtrans.service.core import PipelineService
from adtrans.service.store import Store
from adtrans.srt import AdScript, AdSegment, ParseMode, Timecode, parse_script, serialize_script
from adtrans.translator import (
    TEXT_ONLY,
    TEXT_PLUS_FRAMES,
    estimate_cost,
    load_pricing,
)

from test_metrics import BLEU_CASES, CHRF_CASES, METEOR_CASES
from test_srt import AD_FIXTURE, make_random_script
from test_service import SRT_3SEG, STUB_MEDIA


def ok(line: str) -> None:
    print(f"\n[PASS] {line}")


class TestAcceptance:
    def test_pricing_reproduction(self):
        started = time.monotonic()
        sheet = load_pricing()
        gpt4o_text = estimate_cost(190, TEXT_ONLY, 60, 20, 4_500, sheet, "gpt-4o")
        assert (gpt4o_text.input_usd, gpt4o_text.output_usd, gpt4o_text.total_usd) == (
            Decimal("0.06"), Decimal("0.06"), Decimal("0.11"))
        gpt4o_frames = estimate_cost(190, TEXT_PLUS_FRAMES, 60, 20, 4_500, sheet, "gpt-4o")
        assert gpt4o_frames.total_usd == Decimal("4.33")
        turbo_text = estimate_cost(190, TEXT_ONLY, 60, 20, 4_500, sheet, "gpt-4-turbo")
        assert (turbo_text.input_usd, turbo_text.output_usd, turbo_text.total_usd) == (
            Decimal("0.11"), Decimal("0.11"), Decimal("0.23"))
        turbo_frames = estimate_cost(190, TEXT_PLUS_FRAMES, 60, 20, 4_500, sheet,
                                     "gpt-4-turbo")
        assert turbo_frames.total_usd == Decimal("8.66")
        elapsed = time.monotonic() - started
        assert elapsed < 1.0
        ok(f"pricing: all six rate-card figures exact at cent rounding ({elapsed:.3f}s)")

    def test_corpus_ratio(self):
        started = time.monotonic()
        segments = tuple(
            AdSegment.from_raw(i + 1, Timecode.from_seconds(i * 7300.0),
                               Timecode.from_seconds(i * 7300.0 + 7244.5), "Text.")
            for i in range(10)
        )  # AD total 72,445 s
        script = AdScript(segments=segments, language="de", source_id="german")
        entry = CorpusEntry(script=script, video_duration_s=519_892.0, media_ref="x")
        stats = compute_stats([entry])
        ratio_pp = stats.ratio * 100
        assert ratio_pp == pytest.approx(13.93, abs=0.01)
        elapsed = time.monotonic() - started
        assert elapsed < 1.0
        ok(f"corpus ratio: 144:24:52 video / 20:07:25 AD -> {ratio_pp:.2f}% "
           f"({elapsed:.3f}s)")

    def test_split_sizing_and_determinism(self):
        ids = [f"de:{i}" for i in range(21_672)]
        manifests = [split_corpus(ids, seed=20_240).to_json() for _ in range(3)]
        sizes = json.loads(manifests[0])["sizes"]
        assert sizes == {"train": 21_272, "dev": 200, "test": 200}
        assert manifests[0] == manifests[1] == manifests[2]
        ok("split: 21,672 -> 21,272/200/200, manifests byte-identical across 3 runs")

    def test_metric_oracles(self):
        for cases, metric in ((BLEU_CASES, bleu), (CHRF_CASES, chrf),
                              (METEOR_CASES, meteor_lite)):
            assert len(cases) >= 5
            for hyp, ref, expected in cases:
                assert metric(hyp, ref) == pytest.approx(expected, abs=0.01), (metric, hyp)
        identity = ["Ein Mann tritt ein.", "Die Katze sitzt am Fenster."]
        assert bleu(identity, list(identity)) == pytest.approx(100.0, abs=1e-9)
        assert chrf(identity, list(identity)) == pytest.approx(100.0, abs=1e-9)
        assert meteor_lite(["the cat sat"], ["the cat sat"]) == pytest.approx(
            98.14814814814815, abs=0.01)
        assert meteor_lite(["cat"], ["cat"]) == pytest.approx(50.0, abs=1e-9)
        ok(f"metrics: {len(BLEU_CASES)}+{len(CHRF_CASES)}+{len(METEOR_CASES)} "
           "hand-computed cases within 0.01; identity values exact")

    def test_gemba_weighting(self):
        assert SEVERITY_WEIGHTS == {"none": 0.0, "minor": 1.0, "major": 5.0,
                                    "critical": 10.0}
        replies = (["critical: severe mistranslation"] * 20
                   + ["major: mistranslation"] * 20
                   + ["minor: word order"] * 55
                   + ["no-error"] * 105)
        random.Random(99).shuffle(replies)
        provider = MockChatProvider(scripted=list(replies))
        annotations = gemba_mqm([("Quelle", "Source")] * 200, provider, "de", "en")
        observed_weights = {span.weight for a in annotations for span in a.spans}
        assert observed_weights <= {1.0, 5.0, 10.0}
        mean = aggregate_qe(annotations)
        assert mean == pytest.approx(1.775, abs=1e-9)
        ok(f"gemba: designed 200-segment mock run -> mean {mean} == 1.775 within 1e-9")

    def test_kappa(self):
        started = time.monotonic()
        base = [0, 3, 6, 2, 5, 1]
        assert weighted_kappa(base, list(base)).kappa == pytest.approx(1.0, abs=1e-12)
        rng = random.Random(2_024)
        a = [rng.randrange(7) for _ in range(200)]
        b = [rng.randrange(7) for _ in range(200)]
        assert weighted_kappa(a, b).kappa == pytest.approx(
            weighted_kappa(b, a).kappa, abs=1e-12)
        mc_a = [rng.randrange(7) for _ in range(10_000)]
        mc_b = [rng.randrange(7) for _ in range(10_000)]
        mc = weighted_kappa(mc_a, mc_b).kappa
        assert abs(mc) < 0.05
        hand = weighted_kappa([0, 6, 0, 6], [6, 0, 6, 0], scheme="quadratic").kappa
        assert hand == pytest.approx(-1.0, abs=1e-9)
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        ok(f"kappa: identity=1, symmetric, CMC |k|={abs(mc):.4f}<0.05, "
           f"hand case=-1 exactly ({elapsed:.2f}s)")

    def test_windowing_and_sampling_invariants(self):
        started = time.monotonic()
        rng = random.Random(77)
        for _ in range(10_000):
            onset_ms = rng.randrange(0, 3_600_000)
            offset_ms = onset_ms + rng.randrange(1, 60_000)
            duration_s = offset_ms / 1000.0 + rng.uniform(0, 120)
            buffer_s = rng.choice([5.0, 10.0, 15.0])
            segment = AdSegment.from_raw(1, Timecode.from_millis(onset_ms),
                                         Timecode.from_millis(offset_ms), "x")
            window = compute_window(segment, duration_s, buffer_s)
            assert window.start_s == pytest.approx(
                max(0.0, onset_ms / 1000.0 - buffer_s), abs=1e-3)
            assert window.end_s == pytest.approx(
                min(duration_s, offset_ms / 1000.0 + buffer_s), abs=1e-3)
            assert window.start_s < window.end_s

            n = rng.randrange(1, 400)
            k = rng.randrange(1, 13)
            fixed = plan_indices(n, SamplerConfig(mode="fixed_k", k=k))
            assert fixed == sorted(set(fixed))
            assert len(fixed) == min(k, n)
            if k > 1:
                assert fixed[0] == 0 and fixed[-1] == n - 1
            stride = rng.randrange(1, 120)
            walked = plan_indices(n, SamplerConfig(mode="stride", stride_frames=stride))
            assert len(walked) == (n - 1) // stride + 1
        elapsed = time.monotonic() - started
        assert elapsed < 30.0
        ok(f"windowing/sampling: 10,000 randomized cases hold within tolerance "
           f"({elapsed:.2f}s)")

    def test_srt_round_trip(self):
        rng = random.Random(4_242)
        for _ in range(10_000):
            script = make_random_script(rng, rng.randrange(1, 6))
            data = serialize_script(script)
            reparsed = parse_script(data, ParseMode.STRICT, language="de",
                                    source_id="generated")
            assert reparsed == script
            assert serialize_script(reparsed) == data
        fixture_script = parse_script(AD_FIXTURE, ParseMode.LENIENT, language="de")
        normalized = serialize_script(fixture_script)
        assert serialize_script(parse_script(normalized, ParseMode.STRICT,
                                             language="de")) == normalized
        ok("srt: 10,000 generated scripts round-trip structurally; normalized "
           "golden fixture byte-identical")

    def test_hermetic_end_to_end(self, tmp_path):
        started = time.monotonic()

        def run_once(root: Path) -> bytes:
            config = ServiceConfig(store_root=root, worker_count=2)
            service = PipelineService(config, Store(config.store_root),
                                      chat_provider=MockChatProvider(),
                                      grounder=FallbackGrounder(),
                                      decoder=StubDecoder())
            try:
                project = service.create_project(STUB_MEDIA, "clip.json", SRT_3SEG,
                                                 language="en")
                for seg in project["segments"]:
                    service.translate_segment(seg["segment_id"], "de",
                                              modality=TEXT_ONLY)
                service.wait_for_jobs()
                for seg in project["segments"]:
                    service.translate_segment(seg["segment_id"], "de",
                                              modality=TEXT_PLUS_FRAMES, frame_count=4)
                service.wait_for_jobs()
                return service.export_script(project["id"], "de")
            finally:
                service.close()

        first = run_once(tmp_path / "run1")
        second = run_once(tmp_path / "run2")
        assert first == second
        exported = parse_script(first, ParseMode.STRICT, language="de")
        original = parse_script(SRT_3SEG, ParseMode.STRICT, language="en")
        assert len(exported) == 3
        for orig, out in zip(original.segments, exported.segments):
            assert (out.index, out.onset, out.offset) == (orig.index, orig.onset,
                                                          orig.offset)
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        ok(f"end-to-end: hermetic en->de in both modalities, export byte-identical "
           f"across runs ({elapsed:.2f}s)")

    def test_crash_safety(self, tmp_path):
        store_root = tmp_path / "store"
        projects_dir = store_root / "projects"
        child = tmp_path / "writer.py"
        child.write_text(CRASH_WRITER, encoding="utf-8")
        env = dict(os.environ)
        src = str(Path(__file__).resolve().parent.parent / "src")
        env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")

        def project_count() -> int:
            return len(list(projects_dir.iterdir())) if projects_dir.is_dir() else 0

        rng = random.Random(13)
        kills = 0
        rounds = 0
        # keep killing mid-write until at least 50 project write cycles happened
        while (project_count() < 50 or kills < 10) and rounds < 40:
            rounds += 1
            before = project_count()
            proc = subprocess.Popen([sys.executable, str(child), str(store_root)],
                                    env=env, stdout=subprocess.DEVNULL,
                                    stderr=subprocess.DEVNULL)
            deadline = time.monotonic() + 10.0
            while project_count() <= before and time.monotonic() < deadline:
                time.sleep(0.005)  # wait until the child is actively writing
            time.sleep(rng.uniform(0.01, 0.12))
            if proc.poll() is None:
                proc.send_signal(signal.SIGKILL)
                proc.wait()
                kills += 1
        written = project_count()
        assert written >= 50, f"only {written} project writes in {rounds} rounds"
        assert kills >= 10, f"only {kills} kills landed mid-write"

        store = Store(store_root)  # reopening runs startup recovery first
        checked = 0
        for path in store_root.rglob("*.json"):
            if path.name.startswith(".tmp-"):
                continue
            json.loads(path.read_text(encoding="utf-8"))
            checked += 1
        for project_id in store.list_project_ids():
            store.read_ratings(project_id)
        assert checked >= 50  # plenty of complete documents survived
        ok(f"crash safety: {kills} SIGKILLs during {written} project writes, "
           f"{checked} JSON documents all parse, ratings streams readable")


CRASH_WRITER = '''
import json
import sys
from pathlib import Path

from adtrans.service.store import Store, atomic_write_json

root = Path(sys.argv[1])
store = Store(root)
i = 0
while True:
    i += 1
    project_id = store.new_project_id()
    staging = store.staging_dir(project_id)
    atomic_write_json(staging / "project.json",
                      {"id": project_id, "job_counter": 0,
                       "segments": [{"segment_id": f"{project_id}:1"}]})
    (staging / "media.json").write_text(json.dumps({"fps": 25, "duration_s": 60}))
    store.promote(project_id)
    for n in range(3):
        doc = store.read_project(project_id)
        doc["job_counter"] += 1
        store.write_project(project_id, doc)
        store.write_job({"id": store.new_job_id(project_id), "sequence": n,
                         "status": "done", "payload": "x" * 2048})
        store.append_rating(project_id, {"rater_id": f"r{n}", "segment_id":
                                         f"{project_id}:1", "fluency": 5,
                                         "adequacy": 5, "usefulness": 5,
                                         "modality": "text_only"})
'''
