"""App registry: current app definitions, hot update, and the version
archive that keeps pinned model versions resolvable across restarts.

Hot update (PUT) re-reads domains and flows from the repository root so a
designer can drop in new flow files and activate them with one app-
definition update, without restarting the server. Superseded app versions
are archived under the data directory; live instances pinned to them keep
executing against the archived document.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from flowd.engine.coordinator import PinnedModel
from flowd.errors import (
    ModelVersionMissingError,
    SchemaError,
    UnknownAppError,
    VersionConflictError,
)
from flowd.model import (
    AppDefinition,
    app_to_document,
    canonical_json,
    load_repository,
    parse_app,
)
from flowd.model.entities import DataType, Domain, Flow

log = logging.getLogger(__name__)


class AppRegistry:
    def __init__(self, repo_root: str | Path, data_dir: str | Path) -> None:
        self._repo_root = Path(repo_root)
        self._archive_root = Path(data_dir) / "apps"
        self._lock = threading.Lock()
        repository = load_repository(self._repo_root)
        self._domains: dict[str, Domain] = dict(repository.domains)
        self._flows: dict[str, Flow] = dict(repository.flows)
        self._apps: dict[str, AppDefinition] = dict(repository.apps)
        for app in self._apps.values():
            self._archive(app)

    # -- ModelIndex --------------------------------------------------------

    def current_version(self, app_id: str) -> int:
        return self.app(app_id).version

    def model_for(self, app_id: str, version: int) -> PinnedModel:
        with self._lock:
            app = self._apps.get(app_id)
            flows = dict(self._flows)
            domains = dict(self._domains)
        if app is not None and app.version == version:
            return PinnedModel(app=app, flows=flows, domains=domains)
        path = self._archive_root / app_id / f"{version}.json"
        if not path.exists():
            raise ModelVersionMissingError(
                f"app {app_id!r} version {version} is not available"
            )
        pinned = parse_app(path.read_text(encoding="utf-8"), flows)
        return PinnedModel(app=pinned, flows=flows, domains=domains)

    # -- queries -----------------------------------------------------------

    def app(self, app_id: str) -> AppDefinition:
        with self._lock:
            app = self._apps.get(app_id)
        if app is None:
            raise UnknownAppError(f"unknown app {app_id!r}")
        return app

    def app_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._apps)

    def resolve_type(self, app_id: str, type_name: str) -> DataType | None:
        with self._lock:
            domains = list(self._domains.values())
        for domain in domains:
            data_type = domain.data_type(type_name)
            if data_type is not None:
                return data_type
        return None

    # -- hot update --------------------------------------------------------

    def put_app(self, app_id: str, document: dict) -> AppDefinition:
        """Validates and activates a new app-definition version."""
        current = self.app(app_id)
        # Pick up flow or domain files added since startup; the incoming
        # definition may be the first to reference them.
        repository = load_repository(self._repo_root)
        updated = parse_app(json.dumps(document), repository.flows)
        if updated.app_id != app_id:
            raise SchemaError(
                f"document declares appId {updated.app_id!r}, endpoint is {app_id!r}"
            )
        with self._lock:
            current = self._apps[app_id]
            if updated.version != current.version + 1:
                raise VersionConflictError(
                    f"expected version {current.version + 1}, got {updated.version}"
                )
            self._write_app_file(updated)
            self._archive(updated)
            self._apps[app_id] = updated
            self._domains = dict(repository.domains)
            self._flows = dict(repository.flows)
        log.info("app %s updated to version %d", app_id, updated.version)
        return updated

    def _app_path(self, app_id: str) -> Path:
        return self._repo_root / "apps" / f"{app_id}.app.json"

    def _write_app_file(self, app: AppDefinition) -> None:
        path = self._app_path(app.app_id)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(canonical_json(app_to_document(app)), encoding="utf-8")
        tmp.replace(path)

    def _archive(self, app: AppDefinition) -> None:
        path = self._archive_root / app.app_id / f"{app.version}.json"
        if path.exists():
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(app_to_document(app)), encoding="utf-8")
