"""Loading a model repository from disk.

Layout:

    <root>/domains/*.domain.json
    <root>/flows/*.flow.json
    <root>/apps/*.app.json

Domains load first, then flows (which import domains), then apps (which
reference flows). Any error is re-raised annotated with the offending
file path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from flowd.errors import DuplicateNameError, FlowdError, SchemaError
from flowd.model.entities import AppDefinition, Domain, Flow
from flowd.model.parse import parse_app, parse_domain, parse_flow


@dataclass
class Repository:
    root: Path
    domains: dict[str, Domain] = field(default_factory=dict)
    flows: dict[str, Flow] = field(default_factory=dict)
    apps: dict[str, AppDefinition] = field(default_factory=dict)


def _annotate(exc: FlowdError, path: Path) -> FlowdError:
    exc.message = f"{path}: {exc.message}"
    exc.args = (exc.message,)
    return exc


def _documents(root: Path, subdir: str, suffix: str) -> list[Path]:
    directory = root / subdir
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.name.endswith(suffix))


def load_repository(root: str | Path) -> Repository:
    root = Path(root)
    if not root.is_dir():
        raise SchemaError(f"not a model repository: {root}")
    repo = Repository(root=root)

    for path in _documents(root, "domains", ".domain.json"):
        try:
            domain = parse_domain(path.read_text(encoding="utf-8"))
        except FlowdError as exc:
            raise _annotate(exc, path)
        if domain.name in repo.domains:
            raise DuplicateNameError(f"{path}: domain {domain.name!r} already loaded")
        repo.domains[domain.name] = domain

    for path in _documents(root, "flows", ".flow.json"):
        try:
            flow = parse_flow(path.read_text(encoding="utf-8"), repo.domains)
        except FlowdError as exc:
            raise _annotate(exc, path)
        if flow.name in repo.flows:
            raise DuplicateNameError(f"{path}: flow {flow.name!r} already loaded")
        repo.flows[flow.name] = flow

    for path in _documents(root, "apps", ".app.json"):
        try:
            app = parse_app(path.read_text(encoding="utf-8"), repo.flows)
        except FlowdError as exc:
            raise _annotate(exc, path)
        if app.app_id in repo.apps:
            raise DuplicateNameError(f"{path}: app {app.app_id!r} already loaded")
        repo.apps[app.app_id] = app

    return repo
