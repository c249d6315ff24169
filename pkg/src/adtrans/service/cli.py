"""Command-line interface: service operations plus batch corpus tooling."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .. import corpus as corpus_mod
from .. import translator
from ..providers import JsonlAudit
from ..quality import render_metric_table, score_corpus
from .config import (
    ServiceConfig,
    load_config,
    make_chat_provider,
    make_decoder,
    make_grounder,
    make_mt_provider,
)
from .core import ApiError, PipelineService
from .store import Store


def build_service(config: ServiceConfig) -> PipelineService:
    store = Store(config.store_root)
    audit = JsonlAudit(config.store_root / "audit.jsonl")
    return PipelineService(config, store,
                           chat_provider=make_chat_provider(config),
                           grounder=make_grounder(config),
                           decoder=make_decoder(config),
                           audit=audit)


def _echo_json(doc) -> None:
    click.echo(json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True))


class _Context:
    def __init__(self, config_path: str | None, store: str | None):
        self.config = load_config(config_path)
        if store is not None:
            from dataclasses import replace
            self.config = replace(self.config, store_root=Path(store))
        self._service: PipelineService | None = None

    @property
    def service(self) -> PipelineService:
        if self._service is None:
            self._service = build_service(self.config)
        return self._service


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; ADTRANS_* env vars override it.")
@click.option("--store", type=click.Path(), default=None, help="Store root directory.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, store: str | None):
    """Audio description translation pipeline."""
    ctx.obj = _Context(config_path, store)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.pass_obj
def serve(obj: _Context, host: str, port: int):
    """Run the HTTP API."""
    import uvicorn

    from .app import create_app
    uvicorn.run(create_app(obj.service), host=host, port=port)


@main.group()
def project():
    """Project management."""


@project.command("create")
@click.argument("video", type=click.Path(exists=True))
@click.argument("script", type=click.Path(exists=True))
@click.option("--language", default=None, help="Source script language (en/de/fr/it).")
@click.option("--model", "model_id", default=None)
@click.pass_obj
def project_create(obj: _Context, video: str, script: str, language: str | None,
                   model_id: str | None):
    doc = obj.service.create_project(Path(video).read_bytes(), Path(video).name,
                                     Path(script).read_bytes(), language=language,
                                     model_id=model_id)
    _echo_json({"id": doc["id"], "segments": len(doc["segments"])})


@project.command("show")
@click.argument("project_id")
@click.pass_obj
def project_show(obj: _Context, project_id: str):
    _echo_json(obj.service.get_project(project_id))


@project.command("segments")
@click.argument("project_id")
@click.pass_obj
def project_segments(obj: _Context, project_id: str):
    _echo_json(obj.service.list_segments(project_id))


@main.command()
@click.argument("segment_id")
@click.argument("target_lang")
@click.option("--modality", default=translator.TEXT_ONLY,
              type=click.Choice(list(translator.MODALITIES)))
@click.option("--frames", "frame_count", type=int, default=None)
@click.option("--wait/--no-wait", default=True)
@click.pass_obj
def translate(obj: _Context, segment_id: str, target_lang: str, modality: str,
              frame_count: int | None, wait: bool):
    """Queue (and by default wait for) a segment translation job."""
    job = obj.service.translate_segment(segment_id, target_lang, modality=modality,
                                        frame_count=frame_count)
    if wait:
        obj.service.wait_for_jobs()
        job = obj.service.get_job(job["id"])
    _echo_json(job)


@main.command()
@click.argument("job_id")
@click.pass_obj
def job(obj: _Context, job_id: str):
    """Show one job record."""
    _echo_json(obj.service.get_job(job_id))


@main.command()
@click.argument("segment_id")
@click.option("--k", type=int, default=None, help="Number of frames to sample.")
@click.option("--save-dir", type=click.Path(), default=None)
@click.pass_obj
def frames(obj: _Context, segment_id: str, k: int | None, save_dir: str | None):
    """Preview the retrieved moment and sampled frames for a segment."""
    doc = obj.service.segment_frames(segment_id, frame_count=k)
    images = doc.pop("_images")
    if save_dir:
        out = Path(save_dir)
        out.mkdir(parents=True, exist_ok=True)
        for frame, image in zip(doc["frames"], images):
            (out / f"frame_{frame['n']:02d}.jpg").write_bytes(image)
    _echo_json(doc)


@main.command()
@click.argument("segment_id")
@click.option("--rater", "rater_id", required=True)
@click.option("--fluency", type=int, required=True)
@click.option("--adequacy", type=int, required=True)
@click.option("--usefulness", type=int, required=True)
@click.option("--modality", default="text_only")
@click.pass_obj
def rate(obj: _Context, segment_id: str, rater_id: str, fluency: int, adequacy: int,
         usefulness: int, modality: str):
    """Submit one SQM rating (0-6 per dimension)."""
    _echo_json(obj.service.submit_rating(segment_id, {
        "rater_id": rater_id, "fluency": fluency, "adequacy": adequacy,
        "usefulness": usefulness, "modality": modality}))


@main.command()
@click.argument("project_id")
@click.argument("target_lang")
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def export(obj: _Context, project_id: str, target_lang: str, out: str | None):
    """Export the translated script as SRT."""
    data = obj.service.export_script(project_id, target_lang)
    if out:
        Path(out).write_bytes(data)
        click.echo(f"wrote {out}")
    else:
        sys.stdout.buffer.write(data)


@main.command()
@click.argument("project_id")
@click.option("--csv", "as_csv", is_flag=True, default=False)
@click.pass_obj
def ratings(obj: _Context, project_id: str, as_csv: bool):
    """Dump a project's ratings (JSON or CSV)."""
    if as_csv:
        click.echo(obj.service.ratings_csv(project_id), nl=False)
    else:
        _echo_json(obj.service.project_ratings(project_id))


@main.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, default=False)
def stats(manifest: str, as_json: bool):
    """Corpus statistics from a manifest of SRT files and durations."""
    entries = corpus_mod.load_corpus(manifest)
    table = corpus_mod.stats_by_language(entries)
    if as_json:
        _echo_json({lang: st.to_report() for lang, st in table.items()})
    else:
        click.echo(corpus_mod.render_stats_table(table))


@main.command()
@click.argument("ids_file", type=click.Path(exists=True))
@click.option("--seed", type=int, required=True)
@click.option("--dev-cap", type=int, default=200)
@click.option("--test-cap", type=int, default=200)
@click.option("--out", type=click.Path(), default=None)
def split(ids_file: str, seed: int, dev_cap: int, test_cap: int, out: str | None):
    """Split segment ids into train/dev/test (ids file: one per line, or an
    alignment.jsonl sidecar)."""
    path = Path(ids_file)
    if path.suffix == ".jsonl":
        ids = [json.loads(line)["segment_id"]
               for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    else:
        ids = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()
               if line.strip()]
    manifest = corpus_mod.split_corpus(ids, seed=seed, dev_cap=dev_cap, test_cap=test_cap)
    text = manifest.to_json()
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out} (train {len(manifest.train)} / dev {len(manifest.dev)}"
                   f" / test {len(manifest.test)})")
    else:
        click.echo(text)


@main.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--targets", required=True, help="Comma-separated target languages.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--parallelism", type=int, default=4)
@click.pass_obj
def synthesize(obj: _Context, manifest: str, targets: str, out_dir: str,
               parallelism: int):
    """Generate synthetic parallel data with the configured MT provider."""
    entries = corpus_mod.load_corpus(manifest)
    mt = make_mt_provider(obj.config)
    synthetic = corpus_mod.generate_synthetic_pairs(
        entries, mt, targets={t.strip() for t in targets.split(",") if t.strip()},
        parallelism=parallelism)
    synthetic.write(out_dir)
    click.echo(f"wrote {out_dir}: {len(synthetic.rows)} rows, "
               f"{len(synthetic.gaps)} gap(s)")


@main.command()
@click.option("--hyp", type=click.Path(exists=True), required=True,
              help="Hypothesis file, one segment per line.")
@click.option("--ref", type=click.Path(exists=True), required=True)
@click.option("--label", default="system")
@click.option("--json", "as_json", is_flag=True, default=False)
def evaluate(hyp: str, ref: str, label: str, as_json: bool):
    """Score line-aligned hypothesis/reference files with BLEU, meteor_lite, chrF."""
    hyp_lines = Path(hyp).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(ref).read_text(encoding="utf-8").splitlines()
    report = score_corpus(hyp_lines, ref_lines)
    if as_json:
        _echo_json({label: report.to_report()})
    else:
        click.echo(render_metric_table({label: report}))


@main.command("estimate-cost")
@click.option("--segments", "n_segments", type=int, required=True)
@click.option("--modality", default=translator.TEXT_ONLY,
              type=click.Choice(list(translator.MODALITIES)))
@click.option("--model", "model_id", default="gpt-4o")
@click.option("--prompt-tokens", type=int, default=60, show_default=True)
@click.option("--output-tokens", type=int, default=20, show_default=True)
@click.option("--multimodal-tokens", type=int, default=4_500, show_default=True,
              help="Total input tokens per call with frames attached.")
@click.option("--pricing", "pricing_path", type=click.Path(exists=True), default=None)
def estimate_cost_cmd(n_segments: int, modality: str, model_id: str, prompt_tokens: int,
                      output_tokens: int, multimodal_tokens: int,
                      pricing_path: str | None):
    """Project provider costs for a batch of AD translations."""
    sheet = translator.load_pricing(pricing_path)
    estimate = translator.estimate_cost(n_segments, modality, prompt_tokens,
                                        output_tokens, multimodal_tokens, sheet, model_id)
    _echo_json(estimate.to_report())


def run() -> None:
    try:
        main(standalone_mode=True)
    except ApiError as exc:
        click.echo(json.dumps(exc.to_doc()), err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
