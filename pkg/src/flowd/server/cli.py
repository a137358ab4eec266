"""The flowd command line: serve the HTTP API, validate a model
repository, or run a launcher locally without a server."""

from __future__ import annotations

import logging
import os
import sys
import tempfile
from pathlib import Path

import click
import uvicorn

from flowd.errors import FlowdError


def _setup_logging() -> str:
    level = os.environ.get("FLOWD_LOG", "info")
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    return level


@click.group()
def main() -> None:
    """Cloud coordinator for flow-modeled apps."""


@main.command()
@click.option("--repo", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--data", required=True, type=click.Path(file_okay=False))
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
def serve(repo: str, data: str, bind: str) -> None:
    """Serve the coordination API for a model repository."""
    from flowd.server.app import ApiConfig, create_app

    level = _setup_logging()
    host, _, port = bind.rpartition(":")
    Path(data).mkdir(parents=True, exist_ok=True)
    app = create_app(ApiConfig(repository_root=Path(repo), data_dir=Path(data)))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level=level.lower())


@main.command()
@click.option("--repo", required=True, type=click.Path(exists=True, file_okay=False))
def validate(repo: str) -> None:
    """Validate every model document in a repository; exit 1 on errors."""
    from flowd.model import load_repository

    _setup_logging()
    try:
        repository = load_repository(repo)
    except FlowdError as exc:
        click.echo(f"error [{exc.code}] {exc.message}", err=True)
        sys.exit(1)
    click.echo(
        f"ok: {len(repository.domains)} domains, {len(repository.flows)} flows, "
        f"{len(repository.apps)} apps"
    )


@main.command()
@click.argument("app_id")
@click.argument("launcher_id")
@click.option("--repo", default=".", type=click.Path(exists=True, file_okay=False))
@click.option("--data", default=None, type=click.Path(file_okay=False))
@click.option("--script", default=None, type=click.Path(exists=True, dir_okay=False))
def run(app_id: str, launcher_id: str, repo: str, data: str | None, script: str | None) -> None:
    """Run one launcher against an in-process engine (no server)."""
    from flowd.client.transport import LocalTransport
    from flowd.client.tui import run_session

    _setup_logging()
    if data is None:
        data = tempfile.mkdtemp(prefix="flowd-run-")
    transport = LocalTransport.from_paths(repo, data)
    inputs = None
    if script is not None:
        inputs = Path(script).read_text(encoding="utf-8").splitlines()
    try:
        status = run_session(transport, app_id, launcher_id, scripted=inputs)
    except FlowdError as exc:
        click.echo(f"error [{exc.code}] {exc.message}", err=True)
        sys.exit(1)
    click.echo(f"instance {status.instance_id}: {status.status}")


if __name__ == "__main__":
    main()
