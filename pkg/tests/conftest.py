from __future__ import annotations

import json
import os
import shutil
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from flowd.engine.coordinator import Engine
from flowd.server.registry import AppRegistry
from flowd.store.instances import InstanceStore
from flowd.store.records import AppDatabase

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


@pytest.fixture()
def potluck_root() -> Path:
    return FIXTURES / "potluck"


@pytest.fixture()
def branching_root() -> Path:
    return FIXTURES / "branching"


@pytest.fixture()
def welcome_root() -> Path:
    return FIXTURES / "welcome_addon"


@pytest.fixture()
def potluck_copy(tmp_path: Path) -> Path:
    """Writable copy of the potluck repository for hot-update tests."""
    dest = tmp_path / "repo"
    shutil.copytree(FIXTURES / "potluck", dest)
    return dest


class Stack:
    """A registry, database, instance store, and engine wired together the
    same way the HTTP layer does it."""

    def __init__(self, repo_root: Path, data_dir: Path) -> None:
        self.registry = AppRegistry(repo_root, data_dir)
        self.database = AppDatabase(data_dir, self.registry.resolve_type)
        self.instances = InstanceStore(data_dir)
        self.engine = Engine(self.registry, self.database, self.instances)
        self.engine.recover()


@pytest.fixture()
def potluck_stack(potluck_root: Path, tmp_path: Path) -> Stack:
    return Stack(potluck_root, tmp_path / "data")


@pytest.fixture()
def branching_stack(branching_root: Path, tmp_path: Path) -> Stack:
    return Stack(branching_root, tmp_path / "data")


SURVEY_LAUNCHER = {
    "id": "survey",
    "label": "Survey",
    "flow": "review",
    "initialValues": {"rating_score": 3},
}

WELCOME_LAUNCHER = {
    "id": "welcome",
    "label": "Welcome",
    "flow": "welcome",
    "initialValues": {
        "welcome_text": "Welcome to the potluck!",
        "welcome_image": "https://example.org/potluck.jpg",
    },
}


def extend_potluck(workdir: Path) -> Path:
    """Copy of the potluck repository at version 2 with the survey and
    welcome launchers added."""
    repo = workdir / "repo"
    shutil.copytree(FIXTURES / "potluck", repo)
    for sub in ("domains", "flows"):
        for path in (FIXTURES / "welcome_addon" / sub).iterdir():
            shutil.copyfile(path, repo / sub / path.name)
    doc = json.loads((repo / "apps" / "potluck.app.json").read_text())
    doc["version"] = 2
    doc["launchers"] += [SURVEY_LAUNCHER, WELCOME_LAUNCHER]
    (repo / "apps" / "potluck.app.json").write_text(json.dumps(doc))
    return repo


def free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


class Server:
    """A real `flowd serve` process on a local port."""

    def __init__(self, repo: Path, data: Path, port: int, frozen: str | None = None) -> None:
        env = dict(os.environ, FLOWD_LOG="warning")
        if frozen is not None:
            env["FLOWD_FROZEN_TIME"] = frozen
        self.process = subprocess.Popen(
            [
                sys.executable, "-m", "flowd.server.cli", "serve",
                "--repo", str(repo), "--data", str(data),
                "--bind", f"127.0.0.1:{port}",
            ],
            env=env,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        self.base = f"http://127.0.0.1:{port}"

    def wait_ready(self, app_id: str = "potluck", timeout: float = 15.0) -> None:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.process.poll() is not None:
                raise AssertionError("server process exited during startup")
            try:
                if httpx.get(f"{self.base}/apps/{app_id}", timeout=1.0).status_code == 200:
                    return
            except httpx.HTTPError:
                time.sleep(0.05)
        raise AssertionError("server did not come up in time")

    def kill_hard(self) -> None:
        self.process.kill()
        self.process.wait(timeout=10)

    def stop(self) -> None:
        if self.process.poll() is None:
            self.process.terminate()
            try:
                self.process.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait(timeout=10)


def store_state(data: Path) -> dict:
    """Every persisted byte under a data directory, keyed by relative path."""
    return {
        str(path.relative_to(data)): path.read_bytes()
        for path in sorted(data.rglob("*"))
        if path.is_file()
    }


def round_trip_repository(root: Path) -> None:
    """parse(serialize(x)) == x, and serialization is a fixed point, for
    every model document under a repository root."""
    from flowd.model import (
        app_to_document,
        canonical_json,
        domain_to_document,
        flow_to_document,
        load_repository,
        parse_app,
        parse_domain,
        parse_flow,
    )

    repo = load_repository(root)
    for domain in repo.domains.values():
        doc = domain_to_document(domain)
        text = canonical_json(doc)
        again = parse_domain(text)
        assert again == domain
        assert canonical_json(domain_to_document(again)) == text
    for flow in repo.flows.values():
        doc = flow_to_document(flow)
        text = canonical_json(doc)
        again = parse_flow(text, repo.domains)
        assert again.name == flow.name
        assert again.steps == flow.steps
        assert again.transitions == flow.transitions
        assert again.attributes == flow.attributes
        assert canonical_json(flow_to_document(again)) == text
    for app in repo.apps.values():
        doc = app_to_document(app)
        text = canonical_json(doc)
        again = parse_app(text, repo.flows)
        assert again == app
        assert canonical_json(app_to_document(again)) == text
