"""Write a scaffold plan to disk, keeping hand-written code in keep regions."""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from filelock import FileLock, Timeout

from ..errors import GenerateError
from .plan import REGION, PlannedFile, ScaffoldPlan

MANIFEST = ".masforge-manifest"
LOCK = ".masforge.lock"
LOCK_TIMEOUT = 10.0


@dataclass
class WriteReport:
    created: list[str] = field(default_factory=list)
    updated: list[str] = field(default_factory=list)
    unchanged: list[str] = field(default_factory=list)
    preserved: int = 0  # edited keep regions carried over from the previous tree
    orphans: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        return {
            "created": self.created,
            "updated": self.updated,
            "unchanged": self.unchanged,
            "preserved": self.preserved,
            "orphans": self.orphans,
        }

    def summary(self) -> str:
        return (
            f"created {len(self.created)}, updated {len(self.updated)}, "
            f"unchanged {len(self.unchanged)}, preserved regions {self.preserved}, "
            f"orphans {len(self.orphans)}"
        )


def extract_regions(text: str) -> dict[str, str]:
    """Body of every well-formed keep region, by name (first occurrence wins)."""
    out: dict[str, str] = {}
    for m in REGION.finditer(text):
        out.setdefault(m.group("name"), m.group("body"))
    return out


def merge(fresh: str, existing: str | None) -> tuple[str, int]:
    """``fresh`` with region bodies taken from ``existing``.

    Returns the merged text and how many regions carried edited bodies over.
    """
    if existing is None:
        return fresh, 0
    old = extract_regions(existing)
    kept = 0

    def swap(m):
        nonlocal kept
        name = m.group("name")
        if name not in old or old[name] == m.group("body"):
            return m.group(0)
        kept += 1
        return m.group("open") + old[name] + m.group("close")

    return REGION.sub(swap, fresh), kept


def _read(path: Path) -> str | None:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        return None
    except (OSError, UnicodeDecodeError) as err:
        raise GenerateError(f"cannot read {path}: {err}", path) from err


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _previous_manifest(out: Path) -> list[str]:
    text = _read(out / MANIFEST)
    if text is None:
        return []
    try:
        return list(json.loads(text).get("files", []))
    except (ValueError, AttributeError):
        return []


def generate(plan: ScaffoldPlan, out_dir: str | Path) -> WriteReport:
    """Materialize ``plan`` under ``out_dir``.

    New contents are first written to a staging directory, then moved into
    place. If any move fails, files already replaced are restored, so the
    tree is never left half-written. Files from an earlier plan that are no
    longer planned are reported as orphans and left alone.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise GenerateError(f"cannot create {out}: {err}", out) from err
    try:
        with FileLock(str(out / LOCK), timeout=LOCK_TIMEOUT):
            return _generate_locked(plan, out)
    except Timeout as err:
        raise GenerateError(f"{out} is locked by another generation", out / LOCK) from err


def _generate_locked(plan: ScaffoldPlan, out: Path) -> WriteReport:
    report = WriteReport()
    pending: list[tuple[PlannedFile, str]] = []
    for f in plan.files:
        target = out / f.path
        existing = _read(target)
        text, kept = merge(f.contents, existing)
        report.preserved += kept
        if existing is None:
            report.created.append(f.path)
            pending.append((f, text))
        elif existing != text:
            report.updated.append(f.path)
            pending.append((f, text))
        else:
            report.unchanged.append(f.path)

    planned = set(plan.paths)
    report.orphans = sorted(
        p for p in _previous_manifest(out) if p not in planned and (out / p).exists()
    )
    manifest = json.dumps({"profile": plan.profile, "files": plan.paths}, indent=2) + "\n"
    if _read(out / MANIFEST) != manifest:
        pending.append((PlannedFile(MANIFEST, manifest), manifest))
    if not pending:
        return report

    staging = Path(tempfile.mkdtemp(prefix=".masforge-staging-", dir=out))
    try:
        for f, text in pending:
            try:
                _write(staging / "new" / f.path, text)
            except OSError as err:
                raise GenerateError(f"cannot stage {f.path}: {err}", out / f.path) from err
        _commit(out, staging, [f.path for f, _ in pending])
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return report


def _commit(out: Path, staging: Path, paths: list[str]) -> None:
    done: list[tuple[str, bool]] = []  # (path, had a previous version)
    try:
        for rel in paths:
            target = out / rel
            had = target.exists()
            if had:
                backup = staging / "old" / rel
                backup.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy2(target, backup)
            target.parent.mkdir(parents=True, exist_ok=True)
            os.replace(staging / "new" / rel, target)
            done.append((rel, had))
    except OSError as err:
        for rel, had in reversed(done):
            target = out / rel
            if had:
                os.replace(staging / "old" / rel, target)
            else:
                target.unlink(missing_ok=True)
        raise GenerateError(f"cannot write {out / rel}: {err}", out / rel) from err


def tree_digest(out_dir: str | Path, paths: list[str]) -> str:
    """Hash of (path, bytes) over ``paths`` of a generated tree."""
    h = hashlib.sha256()
    root = Path(out_dir)
    for rel in sorted(paths):
        h.update(rel.encode() + b"\0" + (root / rel).read_bytes() + b"\0")
    return h.hexdigest()
