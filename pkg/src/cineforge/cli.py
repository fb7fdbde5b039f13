"""Command-line interface.

Exit codes: 0 success (including degraded renders), 2 validation error,
3 unrecoverable failure.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .backends import MoodCatalog, make_backend_set
from .errors import CineforgeError, ConfigValidationError, InvalidInputError
from .pipeline import (
    DEFAULT_FPS,
    DEFAULT_MOOD,
    DEFAULT_QUALITY,
    DEFAULT_RESOLUTION,
    QUALITY_PROFILES,
    RESOLUTIONS,
    run_job,
    validate_config,
)
from .report import evaluate, write_report
from .storyboard import parse_custom_storyboard, serialize_storyboard

EXIT_VALIDATION = 2
EXIT_FAILURE = 3


@click.group()
@click.option("--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose: bool) -> None:
    """Deterministic text-to-video rendering engine."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@main.command()
@click.argument("prompt")
@click.option("--mode", type=click.Choice(["simple", "advanced"]),
              default="simple", show_default=True)
@click.option("--resolution", default=DEFAULT_RESOLUTION, show_default=True,
              type=click.Choice(sorted(RESOLUTIONS)))
@click.option("--fps", default=DEFAULT_FPS, show_default=True, type=int)
@click.option("--quality", default=DEFAULT_QUALITY, show_default=True,
              type=click.Choice(sorted(QUALITY_PROFILES)))
@click.option("--mood", default=DEFAULT_MOOD, show_default=True)
@click.option("--seed", "seed_base", default=None, type=int,
              help="Seed base for reproducible renders.")
@click.option("--storyboard", "storyboard_file", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Custom storyboard file (advanced mode).")
@click.option("--voiceover", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Voiceover WAV upload (advanced mode).")
@click.option("--music", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Music WAV upload (advanced mode).")
@click.option("--backend", type=click.Choice(["mock", "http"]), default=None,
              help="Generator backend (default: CINEFORGE_BACKEND or mock).")
@click.option("--backend-url", default=None,
              help="Base URL for the http backend.")
@click.option("--catalog", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Music catalog JSON (mood -> path/url).")
@click.option("--workdir", default=".", show_default=True,
              type=click.Path(file_okay=False),
              help="Working directory for temp/ and outputs/.")
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Output MP4 path (default <workdir>/outputs/final_video.mp4).")
def render(prompt: str, mode: str, resolution: str, fps: int, quality: str,
           mood: str, seed_base: int | None, storyboard_file: str | None,
           voiceover: str | None, music: str | None, backend: str | None,
           backend_url: str | None, catalog: str | None, workdir: str,
           out: str | None) -> None:
    """Render a one-minute video for PROMPT."""
    raw: dict = {
        "prompt": prompt,
        "mode": mode,
        "resolution": resolution,
        "fps": fps,
        "quality": quality,
        "mood": mood,
        "seed_base": seed_base,
    }
    if storyboard_file:
        raw["custom_storyboard"] = Path(storyboard_file).read_text(encoding="utf-8")
    if voiceover:
        raw["voiceover_upload"] = voiceover
    if music:
        raw["music_upload"] = music
    raw = {k: v for k, v in raw.items() if v is not None}
    try:
        cfg = validate_config(raw)
        mood_catalog = MoodCatalog.from_json(catalog) if catalog else None
        backends = make_backend_set(backend, backend_url, catalog=mood_catalog)
    except ConfigValidationError as exc:
        click.echo(f"invalid configuration - {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except (InvalidInputError, OSError) as exc:
        click.echo(f"invalid configuration - {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    job = run_job(cfg, backends, workdir=workdir, out=out)
    if job.state == "failed":
        click.echo(f"job {job.id} failed: {job.error}", err=True)
        sys.exit(EXIT_FAILURE)

    artifacts = job.artifacts
    click.echo(f"job {job.id} done")
    click.echo(f"frames: {artifacts.frames.count} in {artifacts.frames.directory}")
    click.echo(f"audio: {artifacts.audio_path}")
    if artifacts.video_path is not None:
        click.echo(f"video: {artifacts.video_path}")
    else:
        click.echo("video: skipped (no encoder); frames and audio retained")
    if job.fallbacks:
        click.echo(f"fallbacks ({len(job.fallbacks)}):")
        for rec in job.fallbacks:
            click.echo(f"  {rec.stage}: {rec.reason}")


@main.command("parse-storyboard")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format_hint", default="auto", show_default=True,
              type=click.Choice(["plain", "json", "auto"]))
@click.option("--prompt", default=None,
              help="Prompt used for fallback scenes (default: file stem).")
def parse_storyboard_cmd(file: str, format_hint: str, prompt: str | None) -> None:
    """Parse FILE and emit the canonical storyboard JSON."""
    path = Path(file)
    text = path.read_text(encoding="utf-8", errors="replace")
    sb = parse_custom_storyboard(text, prompt or path.stem,
                                 format_hint=format_hint)
    click.echo(serialize_storyboard(sb))


@main.command("eval")
@click.option("--ref", "ref_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Reference frame directory (PNG).")
@click.option("--gen", "gen_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Generated frame directory (PNG).")
@click.option("--candidate", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Candidate script text file for BLEU.")
@click.option("--reference", "references", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Reference script file for BLEU (repeatable).")
@click.option("--corpus", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Tagged storyboard corpus directory.")
@click.option("--report-dir", default=None, type=click.Path(file_okay=False),
              help="Write metrics.json, CSV, and figures here.")
def eval_cmd(ref_dir: str | None, gen_dir: str | None, candidate: str | None,
             references: tuple[str, ...], corpus: str | None,
             report_dir: str | None) -> None:
    """Evaluate frames (SSIM), scripts (BLEU), and the parser corpus."""
    try:
        report = evaluate(ref_dir=ref_dir, gen_dir=gen_dir,
                          candidate_file=candidate,
                          reference_files=references, corpus_dir=corpus)
    except InvalidInputError as exc:
        click.echo(f"invalid evaluation inputs - {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except CineforgeError as exc:
        click.echo(f"evaluation failed - {exc}", err=True)
        sys.exit(EXIT_FAILURE)

    summary = {
        "ssim_mean": report["ssim_mean"],
        "bleu": report["bleu"],
        "parsing": report["parsing"],
    }
    click.echo(json.dumps(summary, indent=2))
    if report_dir:
        written = write_report(report, report_dir)
        for path in written["written"]:
            click.echo(f"wrote {path}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--backend", type=click.Choice(["mock", "http"]), default=None)
@click.option("--backend-url", default=None)
@click.option("--data-dir", default="cineforge_data", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--max-workers", default=1, show_default=True, type=int,
              help="Concurrent render jobs.")
def serve(host: str, port: int, backend: str | None, backend_url: str | None,
          data_dir: str, max_workers: int) -> None:
    """Run the HTTP service for the browser UI."""
    import uvicorn

    from .service import create_app

    try:
        backends = make_backend_set(backend, backend_url)
    except InvalidInputError as exc:
        click.echo(f"invalid configuration - {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    app = create_app(backends=backends, data_dir=data_dir,
                     max_workers=max_workers)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
