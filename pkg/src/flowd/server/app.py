"""The HTTP API: coordination protocol, app sync and hot update, and
monitor/control endpoints.

Engine work runs in the worker thread pool (sync handlers); long-polls
are async so a parked poll never occupies a worker thread.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from flowd.engine import Engine, FlowInstance
from flowd.errors import (
    AlreadyTerminalError,
    ConstraintViolationError,
    FlowdError,
    MissingElementError,
    ModelVersionMissingError,
    SchemaError,
    StaleInstanceError,
    TypeMismatchError,
    UnknownAppError,
    UnknownElementError,
    UnknownInstanceError,
    UnknownLauncherError,
    VersionConflictError,
)
from flowd.server import schemas
from flowd.server.registry import AppRegistry
from flowd.store import AppDatabase, InstanceStore

log = logging.getLogger(__name__)

LONG_POLL_CAP_MS = 30000

_STATUS_BY_ERROR = [
    (UnknownAppError, 404),
    (UnknownInstanceError, 404),
    (UnknownLauncherError, 404),
    (StaleInstanceError, 409),
    (VersionConflictError, 409),
    (AlreadyTerminalError, 409),
    (ConstraintViolationError, 422),
    (TypeMismatchError, 422),
    (MissingElementError, 422),
    (UnknownElementError, 422),
    (SchemaError, 422),
]


def _status_for(exc: FlowdError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return status
    if isinstance(exc, ModelVersionMissingError):
        return 500
    # Model validation failures surfaced by PUT are client errors.
    from flowd.errors import (
        BrokenReferenceError,
        DuplicateNameError,
        ExpressionSyntaxError,
        GraphError,
        ModelSyntaxError,
        UnknownDomainError,
        UnknownFlowError,
        UnknownTaskError,
    )

    for cls in (
        ModelSyntaxError,
        BrokenReferenceError,
        DuplicateNameError,
        ExpressionSyntaxError,
        GraphError,
        UnknownDomainError,
        UnknownFlowError,
        UnknownTaskError,
    ):
        if isinstance(exc, cls):
            return 422
    return 500


@dataclass
class ApiConfig:
    repository_root: Path
    data_dir: Path
    ui_dir: Optional[Path] = None


def _default_ui_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def _instance_summary(instance: FlowInstance) -> schemas.InstanceSummary:
    return schemas.InstanceSummary(
        instanceId=instance.instance_id,
        state=instance.state.value,
        flowName=instance.flow_name,
        launcherId=instance.launcher_id,
        modelVersion=instance.model_version,
        startedAt=instance.log[0].timestamp if instance.log else "",
    )


def create_app(config: ApiConfig) -> FastAPI:
    registry = AppRegistry(config.repository_root, config.data_dir)
    database = AppDatabase(config.data_dir, registry.resolve_type)
    instances = InstanceStore(config.data_dir)
    engine = Engine(registry, database, instances)
    engine.recover()

    app = FastAPI(title="flowd", openapi_url=None)
    app.state.engine = engine
    app.state.registry = registry
    update_condition = asyncio.Condition()

    @app.exception_handler(FlowdError)
    async def handle_flowd_error(request: Request, exc: FlowdError) -> JSONResponse:
        status = _status_for(exc)
        if status >= 500:
            log.error("%s: %s", exc.code, exc.message)
        return JSONResponse(
            status_code=status,
            content={"error": exc.code, "detail": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": "SchemaError", "detail": str(exc.errors())},
        )

    @app.get(
        "/apps/{app_id}",
        response_model=schemas.AppSummary,
        response_model_exclude_none=True,
    )
    def get_app(app_id: str) -> schemas.AppSummary:
        definition = registry.app(app_id)
        return schemas.AppSummary(
            appId=definition.app_id,
            name=definition.name,
            version=definition.version,
            launchers=[
                schemas.LauncherSummary(id=l.id, label=l.label, icon=l.icon)
                for l in definition.launchers
            ],
        )

    @app.post(
        "/apps/{app_id}/launchers/{launcher_id}/launch",
        response_model=schemas.LaunchResult,
        response_model_exclude_none=True,
    )
    def launch(app_id: str, launcher_id: str) -> schemas.LaunchResult:
        instance, result = engine.launch(app_id, launcher_id)
        if isinstance(result, dict):
            return schemas.LaunchResult(
                instanceId=instance.instance_id,
                status=instance.state.value,
                request=result,
            )
        return schemas.LaunchResult(instanceId=instance.instance_id, status=result)

    @app.post(
        "/instances/{instance_id}/response",
        response_model=schemas.ResponseResult,
        response_model_exclude_none=True,
    )
    def respond(instance_id: int, body: schemas.ResponseBody) -> schemas.ResponseResult:
        payload = {
            "instanceId": body.instanceId if body.instanceId is not None else instance_id,
            "response": body.response,
        }
        result = engine.apply_response(instance_id, payload)
        if isinstance(result, dict):
            return schemas.ResponseResult(status="WaitingForUser", request=result)
        return schemas.ResponseResult(status=result)

    @app.get("/instances", response_model=list[schemas.InstanceSummary])
    def list_instances(
        appId: Optional[str] = Query(default=None),
    ) -> list[schemas.InstanceSummary]:
        return [_instance_summary(i) for i in engine.list_instances(appId)]

    @app.get("/instances/{instance_id}", response_model=schemas.InstanceSummary)
    def get_instance(instance_id: int) -> schemas.InstanceSummary:
        return _instance_summary(engine.instance(instance_id))

    @app.get("/instances/{instance_id}/log", response_model=list[schemas.LogEntryOut])
    def get_log(instance_id: int) -> list[schemas.LogEntryOut]:
        instance = engine.instance(instance_id)
        return [
            schemas.LogEntryOut(
                seq=e.seq,
                timestamp=e.timestamp,
                direction=e.direction.value,
                payload=e.payload,
            )
            for e in instance.log
        ]

    @app.post(
        "/instances/{instance_id}/cancel",
        response_model=schemas.ResponseResult,
        response_model_exclude_none=True,
    )
    def cancel(instance_id: int) -> schemas.ResponseResult:
        return schemas.ResponseResult(status=engine.cancel(instance_id))

    @app.put("/apps/{app_id}", response_model=schemas.PutResult)
    async def put_app(app_id: str, document: dict = Body(...)) -> schemas.PutResult:
        updated = await run_in_threadpool(registry.put_app, app_id, document)
        async with update_condition:
            update_condition.notify_all()
        return schemas.PutResult(version=updated.version)

    @app.get("/apps/{app_id}/version", response_model=schemas.VersionOut)
    async def poll_version(
        app_id: str,
        since: int = Query(default=0),
        timeoutMs: int = Query(default=0),
    ) -> schemas.VersionOut:
        timeout = min(max(timeoutMs, 0), LONG_POLL_CAP_MS) / 1000.0
        deadline = asyncio.get_running_loop().time() + timeout
        while True:
            current = registry.current_version(app_id)
            if current > since:
                return schemas.VersionOut(version=current)
            remaining = deadline - asyncio.get_running_loop().time()
            if remaining <= 0:
                return schemas.VersionOut(version=current)
            async with update_condition:
                try:
                    await asyncio.wait_for(update_condition.wait(), remaining)
                except asyncio.TimeoutError:
                    pass

    ui_dir = config.ui_dir or _default_ui_dir()
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
