"""The instance store: one snapshot file per flow instance, plus the
persistent instanceId counter.

Snapshots are written atomically (temp file, fsync, rename) so a crash
leaves either the previous snapshot or the new one, never a torn file.
The counter is advanced and persisted before an id is handed out, so ids
are never reused across restarts.
"""

from __future__ import annotations

import os
import re
import threading
from pathlib import Path

from flowd.errors import StorageFailureError

_SNAPSHOT_RE = re.compile(r"^(\d+)\.json$")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        dir_fd = os.open(path.parent, os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)
    except OSError as exc:
        raise StorageFailureError(f"cannot write {path}: {exc}") from exc


class InstanceStore:
    def __init__(self, root: str | Path) -> None:
        self._root = Path(root) / "instances"
        self._root.mkdir(parents=True, exist_ok=True)
        self._counter_path = self._root / "_counter.txt"
        self._lock = threading.Lock()

    def next_instance_id(self) -> int:
        with self._lock:
            current = 0
            if self._counter_path.exists():
                current = int(self._counter_path.read_text().strip() or "0")
            allocated = current + 1
            _atomic_write(self._counter_path, f"{allocated}\n")
            return allocated

    def save_instance(self, instance_id: int, snapshot: str) -> None:
        _atomic_write(self._root / f"{instance_id}.json", snapshot)

    def load_instance(self, instance_id: int) -> str | None:
        path = self._root / f"{instance_id}.json"
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")

    def load_instances(self) -> list[str]:
        snapshots: list[tuple[int, str]] = []
        for path in self._root.iterdir():
            match = _SNAPSHOT_RE.match(path.name)
            if match:
                snapshots.append((int(match.group(1)), path.read_text(encoding="utf-8")))
        snapshots.sort()
        return [text for _, text in snapshots]
