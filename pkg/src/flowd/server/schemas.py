"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict


class LauncherSummary(BaseModel):
    id: str
    label: str
    icon: Optional[str] = None


class AppSummary(BaseModel):
    appId: str
    name: str
    version: int
    launchers: list[LauncherSummary]


class LaunchResult(BaseModel):
    instanceId: int
    status: str
    request: Optional[dict] = None


class ResponseBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instanceId: Optional[int] = None
    response: list


class ResponseResult(BaseModel):
    status: str
    request: Optional[dict] = None


class InstanceSummary(BaseModel):
    instanceId: int
    state: str
    flowName: str
    launcherId: str
    modelVersion: int
    startedAt: str


class LogEntryOut(BaseModel):
    seq: int
    timestamp: str
    direction: str
    payload: dict


class VersionOut(BaseModel):
    version: int


class PutResult(BaseModel):
    version: int


class ErrorBody(BaseModel):
    error: str
    detail: str
