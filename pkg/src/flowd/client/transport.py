"""Transports for the terminal client: a real HTTP server or an
in-process engine (for `flowd run`). Both speak the same three calls and
surface failures as TransportError with the server's status semantics."""

from __future__ import annotations

from pathlib import Path

import httpx

from flowd.errors import FlowdError
from flowd.server.app import _status_for


class TransportError(FlowdError):
    code = "TransportError"

    def __init__(self, status: int, error: str, detail: str) -> None:
        super().__init__(f"[{status} {error}] {detail}")
        self.status = status
        self.error = error
        self.detail = detail


def _raise_for(response: httpx.Response) -> None:
    if 200 <= response.status_code < 300:
        return
    try:
        body = response.json()
        error, detail = body["error"], body["detail"]
    except Exception:
        error, detail = "HttpError", response.text
    raise TransportError(response.status_code, error, detail)


class HttpTransport:
    def __init__(self, base_url: str, client: httpx.Client | None = None) -> None:
        self._client = client or httpx.Client(base_url=base_url, timeout=30.0)

    def fetch_app(self, app_id: str) -> dict:
        response = self._client.get(f"/apps/{app_id}")
        _raise_for(response)
        return response.json()

    def launch(self, app_id: str, launcher_id: str) -> dict:
        response = self._client.post(f"/apps/{app_id}/launchers/{launcher_id}/launch")
        _raise_for(response)
        return response.json()

    def respond(self, instance_id: int, body: dict) -> dict:
        response = self._client.post(f"/instances/{instance_id}/response", json=body)
        _raise_for(response)
        return response.json()


class LocalTransport:
    """Same surface, no network: drives an Engine directly."""

    def __init__(self, engine, registry) -> None:
        self._engine = engine
        self._registry = registry

    @classmethod
    def from_paths(cls, repo: str | Path, data: str | Path) -> "LocalTransport":
        from flowd.engine import Engine
        from flowd.server.registry import AppRegistry
        from flowd.store import AppDatabase, InstanceStore

        Path(data).mkdir(parents=True, exist_ok=True)
        registry = AppRegistry(repo, data)
        engine = Engine(
            registry, AppDatabase(data, registry.resolve_type), InstanceStore(data)
        )
        engine.recover()
        return cls(engine, registry)

    def _translate(self, exc: FlowdError) -> TransportError:
        return TransportError(_status_for(exc), exc.code, exc.message)

    def fetch_app(self, app_id: str) -> dict:
        try:
            app = self._registry.app(app_id)
        except FlowdError as exc:
            raise self._translate(exc) from exc
        return {
            "appId": app.app_id,
            "name": app.name,
            "version": app.version,
            "launchers": [
                {"id": l.id, "label": l.label, "icon": l.icon} for l in app.launchers
            ],
        }

    def launch(self, app_id: str, launcher_id: str) -> dict:
        try:
            instance, result = self._engine.launch(app_id, launcher_id)
        except FlowdError as exc:
            raise self._translate(exc) from exc
        out = {"instanceId": instance.instance_id, "status": instance.state.value}
        if isinstance(result, dict):
            out["request"] = result
        else:
            out["status"] = result
        return out

    def respond(self, instance_id: int, body: dict) -> dict:
        try:
            result = self._engine.apply_response(instance_id, body)
        except FlowdError as exc:
            raise self._translate(exc) from exc
        if isinstance(result, dict):
            return {"status": "WaitingForUser", "request": result}
        return {"status": result}
