"""The app database: durable records of domain data types.

One append-only JSON-lines file per (appId, typeName) under
`<data>/records/<appId>/<typeName>.jsonl`, plus an in-memory index rebuilt
by scanning those files at startup. Writers are serialized per stream and
every append is fsynced before the record is acknowledged.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from flowd.clock import utc_now
from flowd.errors import (
    IncompleteRecordError,
    StorageFailureError,
    TypeMismatchError,
    UnknownTypeError,
)
from flowd.model.entities import DataType
from flowd.values import Value, matches

TypeResolver = Callable[[str, str], Optional[DataType]]


@dataclass(frozen=True)
class Record:
    record_id: int
    app_id: str
    type_name: str
    values: dict
    created_at: str

    def to_line(self) -> str:
        return json.dumps(
            {
                "appId": self.app_id,
                "createdAt": self.created_at,
                "recordId": self.record_id,
                "typeName": self.type_name,
                "values": self.values,
            },
            sort_keys=True,
            ensure_ascii=False,
        )

    @classmethod
    def from_line(cls, line: str) -> "Record":
        doc = json.loads(line)
        return cls(
            record_id=doc["recordId"],
            app_id=doc["appId"],
            type_name=doc["typeName"],
            values=doc["values"],
            created_at=doc["createdAt"],
        )


def _validate_values(data_type: DataType, values: dict) -> None:
    declared = {a.name: a for a in data_type.attributes}
    missing = declared.keys() - values.keys()
    extra = values.keys() - declared.keys()
    if missing:
        raise IncompleteRecordError(
            f"record for {data_type.name!r} missing attributes {sorted(missing)}"
        )
    if extra:
        raise IncompleteRecordError(
            f"record for {data_type.name!r} has undeclared attributes {sorted(extra)}"
        )
    for name, attr in declared.items():
        if not matches(values[name], attr.type, allow_list=attr.set_values):
            raise TypeMismatchError(
                f"attribute {name!r} expects {attr.type}, got {values[name]!r}"
            )


class AppDatabase:
    """Records scoped per (appId, typeName); thread-safe."""

    def __init__(self, root: str | Path, resolve_type: TypeResolver) -> None:
        self._root = Path(root) / "records"
        self._resolve_type = resolve_type
        self._lock = threading.Lock()
        self._streams: dict[tuple[str, str], list[Record]] = {}
        self._stream_locks: dict[tuple[str, str], threading.Lock] = {}
        self._rebuild()

    def _rebuild(self) -> None:
        if not self._root.is_dir():
            return
        for app_dir in sorted(self._root.iterdir()):
            if not app_dir.is_dir():
                continue
            for path in sorted(app_dir.glob("*.jsonl")):
                key = (app_dir.name, path.stem)
                self._streams[key] = self._read_stream(path)

    def _read_stream(self, path: Path) -> list[Record]:
        records: list[Record] = []
        raw = path.read_bytes()
        lines = raw.splitlines(keepends=True)
        good_bytes = 0
        for i, line_bytes in enumerate(lines):
            line = line_bytes.decode("utf-8", errors="replace").strip()
            if line:
                try:
                    records.append(Record.from_line(line))
                except (json.JSONDecodeError, KeyError):
                    if i == len(lines) - 1:
                        # A torn final line is what a crash mid-append leaves
                        # behind; that record was never acknowledged. Truncate
                        # it so the next append starts on a clean line.
                        with open(path, "r+b") as fh:
                            fh.truncate(good_bytes)
                            os.fsync(fh.fileno())
                        return records
                    raise StorageFailureError(
                        f"corrupt record file {path} at line {i + 1}"
                    )
            good_bytes += len(line_bytes)
        if raw and not raw.endswith(b"\n"):
            # Last line parsed but the newline is missing; terminate it so
            # the next append cannot merge into it.
            with open(path, "ab") as fh:
                fh.write(b"\n")
                fh.flush()
                os.fsync(fh.fileno())
        return records

    def _stream_lock(self, key: tuple[str, str]) -> threading.Lock:
        with self._lock:
            lock = self._stream_locks.get(key)
            if lock is None:
                lock = self._stream_locks[key] = threading.Lock()
            return lock

    def put_record(self, app_id: str, data_type: DataType, values: dict) -> Record:
        _validate_values(data_type, values)
        key = (app_id, data_type.name)
        with self._stream_lock(key):
            existing = self._streams.get(key, [])
            record = Record(
                record_id=max((r.record_id for r in existing), default=0) + 1,
                app_id=app_id,
                type_name=data_type.name,
                values=dict(values),
                created_at=utc_now(),
            )
            path = self._root / app_id / f"{data_type.name}.jsonl"
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "a", encoding="utf-8") as fh:
                    fh.write(record.to_line() + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageFailureError(f"cannot append to {path}: {exc}") from exc
            self._streams.setdefault(key, []).append(record)
            return record

    def query_records(
        self,
        app_id: str,
        type_name: str,
        filter: tuple[str, Value] | None = None,
    ) -> list[Record]:
        if self._resolve_type(app_id, type_name) is None:
            raise UnknownTypeError(f"app {app_id!r} has no data type {type_name!r}")
        with self._stream_lock((app_id, type_name)):
            records = list(self._streams.get((app_id, type_name), []))
        if filter is not None:
            attribute, wanted = filter
            records = [r for r in records if r.values.get(attribute) == wanted]
        # Newest first; creation instants can collide, so recordId breaks ties.
        records.sort(key=lambda r: (r.created_at, r.record_id), reverse=True)
        return records

    def newest(self, app_id: str, type_name: str) -> Record | None:
        records = self.query_records(app_id, type_name)
        return records[0] if records else None
