"""HTTP service exposing the render pipeline to the browser UI.

Endpoints:
  POST /api/jobs               create a job (JSON config, or multipart with
                               a "config" JSON field plus optional
                               voiceover/music file parts) -> {"id": ...}
  GET  /api/jobs/{id}          job snapshot {state, progress, fallbacks, ...}
  GET  /api/jobs/{id}/video    finished MP4
  GET  /api/jobs/{id}/frames/{n}  1-based PNG frame preview
  GET  /api/jobs/{id}/storyboard  canonical storyboard JSON
  POST /api/parse              dry-run the custom storyboard parser
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from .backends import BackendCapabilities, BackendSet, make_backend_set
from .errors import ConfigValidationError
from .pipeline import Job, run_job, validate_config
from .storyboard import parse_custom_storyboard, serialize_storyboard

__all__ = ["JobManager", "create_app"]

MAX_UPLOAD_BYTES = 64 * 1024 * 1024


class JobManager:
    """Registry plus worker pool; one workdir per job under data_dir."""

    def __init__(self, backends: BackendSet, caps: BackendCapabilities,
                 data_dir: Path, max_workers: int = 1):
        self.backends = backends
        self.caps = caps
        self.data_dir = data_dir
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_workers,
                                        thread_name_prefix="render")

    def create(self, raw_config: dict[str, Any],
               uploads: dict[str, bytes] | None = None) -> Job:
        job = Job()
        workdir = self.data_dir / "jobs" / job.id
        workdir.mkdir(parents=True, exist_ok=True)
        raw_config = dict(raw_config)
        for field_name, payload in (uploads or {}).items():
            dest = workdir / f"{field_name}.wav"
            dest.write_bytes(payload)
            raw_config[field_name] = str(dest)
        cfg = validate_config(raw_config)
        with self._lock:
            self._jobs[job.id] = job
        self._pool.submit(run_job, cfg, self.backends, self.caps,
                          workdir=workdir, job=job)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="job not found")
        return job

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def _validation_error(exc: ConfigValidationError) -> HTTPException:
    detail = {"field": exc.field, "message": str(exc)}
    if exc.allowed is not None:
        detail["allowed"] = list(exc.allowed)
    return HTTPException(status_code=400, detail=detail)


def create_app(backends: BackendSet | None = None,
               caps: BackendCapabilities | None = None,
               data_dir: str | Path = "cineforge_data",
               max_workers: int = 1) -> FastAPI:
    """Build the service; state lives in app.state.manager."""
    manager = JobManager(
        backends=backends or make_backend_set(),
        caps=caps or BackendCapabilities(),
        data_dir=Path(data_dir),
        max_workers=max_workers,
    )
    app = FastAPI(title="cineforge", version="0.1.0")
    app.state.manager = manager
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/api/jobs")
    async def create_job(request: Request) -> dict[str, str]:
        content_type = request.headers.get("content-type", "")
        uploads: dict[str, bytes] = {}
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            config_field = form.get("config")
            if config_field is None or not isinstance(config_field, str):
                raise HTTPException(
                    status_code=400,
                    detail={"field": "config",
                            "message": "multipart jobs need a 'config' JSON field"})
            try:
                raw = json.loads(config_field)
            except json.JSONDecodeError as exc:
                raise HTTPException(
                    status_code=400,
                    detail={"field": "config",
                            "message": f"config is not valid JSON: {exc}"})
            for field_name in ("voiceover_upload", "music_upload"):
                part = form.get(field_name)
                if part is None or isinstance(part, str):
                    continue
                payload = await part.read()
                if len(payload) > MAX_UPLOAD_BYTES:
                    raise HTTPException(
                        status_code=400,
                        detail={"field": field_name,
                                "message": "upload exceeds 64 MiB"})
                uploads[field_name] = payload
        else:
            try:
                raw = await request.json()
            except json.JSONDecodeError as exc:
                raise HTTPException(
                    status_code=400,
                    detail={"field": "body",
                            "message": f"body is not valid JSON: {exc}"})
        if not isinstance(raw, dict):
            raise HTTPException(
                status_code=400,
                detail={"field": "body", "message": "config must be a JSON object"})
        try:
            job = manager.create(raw, uploads)
        except ConfigValidationError as exc:
            raise _validation_error(exc)
        return {"id": job.id}

    @app.get("/api/jobs/{job_id}")
    def job_snapshot(job_id: str) -> dict[str, Any]:
        return manager.get(job_id).snapshot()

    @app.get("/api/jobs/{job_id}/video")
    def job_video(job_id: str) -> FileResponse:
        job = manager.get(job_id)
        artifacts = job.artifacts
        if artifacts is None or artifacts.video_path is None \
                or not artifacts.video_path.exists():
            raise HTTPException(status_code=404, detail="video not available")
        return FileResponse(artifacts.video_path, media_type="video/mp4")

    @app.get("/api/jobs/{job_id}/frames/{number}")
    def job_frame(job_id: str, number: int) -> FileResponse:
        job = manager.get(job_id)
        artifacts = job.artifacts
        if artifacts is None:
            raise HTTPException(status_code=404, detail="frames not available")
        try:
            path = artifacts.frames.frame_path(number)
        except Exception:
            raise HTTPException(status_code=404, detail="frame out of range")
        if not path.exists():
            raise HTTPException(status_code=404, detail="frame missing")
        return FileResponse(path, media_type="image/png")

    @app.get("/api/jobs/{job_id}/storyboard")
    def job_storyboard(job_id: str) -> Response:
        job = manager.get(job_id)
        if job.storyboard is None:
            raise HTTPException(status_code=404, detail="storyboard not available")
        return Response(content=serialize_storyboard(job.storyboard),
                        media_type="application/json")

    @app.post("/api/parse")
    async def parse_preview(request: Request) -> Response:
        try:
            raw = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(
                status_code=400,
                detail={"field": "body", "message": f"not valid JSON: {exc}"})
        if not isinstance(raw, dict) or not isinstance(raw.get("text"), str):
            raise HTTPException(
                status_code=400,
                detail={"field": "text", "message": "need a 'text' string field"})
        hint = raw.get("format_hint", "auto")
        if hint not in ("plain", "json", "auto"):
            raise HTTPException(
                status_code=400,
                detail={"field": "format_hint",
                        "message": "must be plain, json, or auto"})
        prompt = raw.get("prompt") or "untitled scene"
        sb = parse_custom_storyboard(raw["text"], prompt, format_hint=hint)
        return Response(content=serialize_storyboard(sb),
                        media_type="application/json")

    return app
