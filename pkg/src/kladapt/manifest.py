"""Flat-text manifest describing a task stream on disk.

The manifest lives next to the data files it names; every path in it is
relative to the manifest's directory.  Format, line by line:

    # comments and blank lines are skipped
    dim=<feature dimension>
    classes=<total class count>
    tasks=<task count>
    task <k> classes <comma-separated class ids>
    task <k> <role> <relative file name>

Roles name the file's place in the protocol: ``source_train`` (labeled
source embeddings), ``target_train`` (unlabeled target embeddings),
``target_eval`` (labeled target test embeddings), ``vlm_train`` /
``vlm_eval`` (zero-shot probability tables aligned row-for-row with the
corresponding embeddings).  Task ids must cover 0..tasks-1, each with a
``classes`` line.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List

from .errors import FormatError

ROLES = ("source_train", "target_train", "target_eval", "vlm_train", "vlm_eval")
_HEADER_KEYS = ("dim", "classes", "tasks")


@dataclass
class ManifestTask:
    task_id: int
    class_ids: tuple = ()
    files: Dict[str, str] = field(default_factory=dict)


@dataclass
class StreamManifest:
    dim: int
    class_count: int
    task_count: int
    tasks: List[ManifestTask]
    root: str = "."

    def path(self, task_id: int, role: str) -> str:
        """Absolute path of a task's file for ``role``."""
        task = self.tasks[task_id]
        if role not in task.files:
            raise FormatError(f"task {task_id} has no {role!r} entry in the manifest")
        return os.path.join(self.root, task.files[role])

    def has(self, task_id: int, role: str) -> bool:
        return role in self.tasks[task_id].files


def read_manifest(path) -> StreamManifest:
    header = {}
    tasks: Dict[int, ManifestTask] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line and not line.startswith("task "):
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _HEADER_KEYS:
                raise FormatError(f"manifest line {lineno}: unknown header key {key!r}")
            try:
                header[key] = int(value.strip())
            except ValueError:
                raise FormatError(
                    f"manifest line {lineno}: {key} must be an integer, got {value.strip()!r}"
                ) from None
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "task":
            raise FormatError(f"manifest line {lineno}: cannot parse {raw.strip()!r}")
        try:
            task_id = int(parts[1])
        except ValueError:
            raise FormatError(f"manifest line {lineno}: bad task id {parts[1]!r}") from None
        task = tasks.setdefault(task_id, ManifestTask(task_id=task_id))
        kind, value = parts[2], parts[3]
        if kind == "classes":
            try:
                task.class_ids = tuple(int(c) for c in value.split(","))
            except ValueError:
                raise FormatError(
                    f"manifest line {lineno}: bad class list {value!r}"
                ) from None
        elif kind in ROLES:
            task.files[kind] = value
        else:
            raise FormatError(f"manifest line {lineno}: unknown role {kind!r}")
    for key in _HEADER_KEYS:
        if key not in header:
            raise FormatError(f"manifest is missing the {key!r} header")
    count = header["tasks"]
    if sorted(tasks) != list(range(count)):
        raise FormatError(
            f"manifest declares {count} tasks but defines ids {sorted(tasks)}"
        )
    for task in tasks.values():
        if not task.class_ids:
            raise FormatError(f"task {task.task_id} has no classes line")
    return StreamManifest(
        dim=header["dim"],
        class_count=header["classes"],
        task_count=count,
        tasks=[tasks[i] for i in range(count)],
        root=os.path.dirname(os.path.abspath(path)),
    )


def write_manifest(manifest: StreamManifest, path) -> None:
    lines = [
        "# task stream manifest",
        f"dim={manifest.dim}",
        f"classes={manifest.class_count}",
        f"tasks={manifest.task_count}",
    ]
    for task in manifest.tasks:
        lines.append(
            f"task {task.task_id} classes {','.join(str(c) for c in task.class_ids)}"
        )
        for role in ROLES:
            if role in task.files:
                lines.append(f"task {task.task_id} {role} {task.files[role]}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
