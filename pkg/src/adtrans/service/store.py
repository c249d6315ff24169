"""Filesystem persistence: JSON documents with crash-safe writes.

Every document write goes to a temp file in the same directory followed by an
atomic rename, so a reader (or a process that died mid-write) never observes
a partial document. New projects are assembled in a staging directory and
promoted with one rename, so a failed creation leaves no orphan project.
Ratings are an append-only JSONL stream; a torn final line (crash mid-append)
is skipped on read.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
import threading
import uuid
from pathlib import Path


class StoreError(RuntimeError):
    pass


class NotFound(StoreError):
    pass


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".tmp-{path.name}-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_write_json(path: Path, doc: dict) -> None:
    atomic_write_bytes(path, json.dumps(doc, ensure_ascii=False, sort_keys=True,
                                        indent=2).encode("utf-8"))


def read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise NotFound(str(path)) from None
    except ValueError as exc:
        raise StoreError(f"corrupt document {path}: {exc}") from exc


class Store:
    """Project store rooted at one directory.

    Layout::

        root/
          projects/<pid>/project.json
          projects/<pid>/media.<ext>
          projects/<pid>/jobs/<jid>.json
          projects/<pid>/frames/...
          projects/<pid>/ratings.jsonl
          staging/...          (incomplete project builds)
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        staging = self.root / "staging"
        staging.mkdir(parents=True, exist_ok=True)
        # startup recovery: a crash can strand half-built projects in staging;
        # the store is single-writer, so anything here is garbage now
        for leftover in staging.iterdir():
            if leftover.is_dir():
                shutil.rmtree(leftover, ignore_errors=True)
            else:
                leftover.unlink(missing_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    # --- project lifecycle ---

    def new_project_id(self) -> str:
        return uuid.uuid4().hex[:12]

    def staging_dir(self, project_id: str) -> Path:
        path = self.root / "staging" / project_id
        path.mkdir(parents=True, exist_ok=True)
        return path

    def promote(self, project_id: str) -> Path:
        """Atomically move a staged project into place."""
        src = self.root / "staging" / project_id
        dst = self.root / "projects" / project_id
        os.rename(src, dst)
        return dst

    def discard_staging(self, project_id: str) -> None:
        shutil.rmtree(self.root / "staging" / project_id, ignore_errors=True)

    def project_dir(self, project_id: str) -> Path:
        path = self.root / "projects" / project_id
        if not path.is_dir():
            raise NotFound(f"project {project_id}")
        return path

    def list_project_ids(self) -> list[str]:
        return sorted(p.name for p in (self.root / "projects").iterdir() if p.is_dir())

    def read_project(self, project_id: str) -> dict:
        return read_json(self.project_dir(project_id) / "project.json")

    def write_project(self, project_id: str, doc: dict) -> None:
        atomic_write_json(self.root / "projects" / project_id / "project.json", doc)

    # --- jobs ---

    def new_job_id(self, project_id: str) -> str:
        return f"{project_id}:{uuid.uuid4().hex[:8]}"

    @staticmethod
    def job_project(job_id: str) -> str:
        project_id, _, rest = job_id.partition(":")
        if not project_id or not rest:
            raise NotFound(f"job {job_id}")
        return project_id

    def write_job(self, job: dict) -> None:
        project_id = self.job_project(job["id"])
        path = self.project_dir(project_id) / "jobs" / f"{job['id'].replace(':', '_')}.json"
        atomic_write_json(path, job)

    def read_job(self, job_id: str) -> dict:
        project_id = self.job_project(job_id)
        path = self.project_dir(project_id) / "jobs" / f"{job_id.replace(':', '_')}.json"
        return read_json(path)

    def list_jobs(self, project_id: str) -> list[dict]:
        jobs_dir = self.project_dir(project_id) / "jobs"
        if not jobs_dir.is_dir():
            return []
        return sorted((read_json(p) for p in jobs_dir.glob("*.json")),
                      key=lambda j: j["sequence"])

    # --- ratings ---

    def append_rating(self, project_id: str, rating: dict) -> None:
        path = self.project_dir(project_id) / "ratings.jsonl"
        line = json.dumps(rating, ensure_ascii=False, sort_keys=True) + "\n"
        with self.lock(project_id):
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())

    def read_ratings(self, project_id: str) -> list[dict]:
        path = self.project_dir(project_id) / "ratings.jsonl"
        if not path.exists():
            return []
        ratings = []
        lines = path.read_text(encoding="utf-8").splitlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                ratings.append(json.loads(line))
            except ValueError:
                if i == len(lines) - 1:
                    continue  # torn final line from a crashed append
                raise StoreError(f"corrupt rating line {i + 1} in {path}")
        return ratings

    def frames_dir(self, project_id: str) -> Path:
        path = self.project_dir(project_id) / "frames"
        path.mkdir(exist_ok=True)
        return path
