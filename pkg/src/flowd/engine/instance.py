"""Flow instance state: the cloud-side execution of one launched flow.

An instance is a program counter (current step + index into the current
task's actions), an attribute environment, a lifecycle state, and an
ordered message log. Snapshots round-trip the whole thing as canonical
JSON so executions survive engine restarts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

from flowd.clock import utc_now
from flowd.errors import SchemaError

log = logging.getLogger(__name__)


class InstanceState(str, Enum):
    RUNNING = "Running"
    WAITING = "WaitingForUser"
    FINALIZED = "Finalized"
    FAILED = "Failed"
    CANCELLED = "Cancelled"

    @property
    def terminal(self) -> bool:
        return self in (
            InstanceState.FINALIZED,
            InstanceState.FAILED,
            InstanceState.CANCELLED,
        )


class Direction(str, Enum):
    ENGINE_TO_CLIENT = "EngineToClient"
    CLIENT_TO_ENGINE = "ClientToEngine"
    INTERNAL = "Internal"


@dataclass(frozen=True)
class LogEntry:
    seq: int
    timestamp: str
    direction: Direction
    payload: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "direction": self.direction.value,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LogEntry":
        return cls(
            seq=doc["seq"],
            timestamp=doc["timestamp"],
            direction=Direction(doc["direction"]),
            payload=doc["payload"],
        )


@dataclass
class FlowInstance:
    instance_id: int
    app_id: str
    launcher_id: str
    flow_name: str
    model_version: int
    state: InstanceState = InstanceState.RUNNING
    current_step: str = ""
    pending_action_index: int = 0
    env: dict = field(default_factory=dict)
    log: list[LogEntry] = field(default_factory=list)

    def append_log(self, direction: Direction, payload: dict) -> LogEntry:
        entry = LogEntry(
            seq=len(self.log),
            timestamp=utc_now(),
            direction=direction,
            payload=payload,
        )
        self.log.append(entry)
        log.debug("instance %d log[%d] %s", self.instance_id, entry.seq, direction.value)
        return entry

    def outstanding_request(self) -> dict | None:
        """The unanswered request, present exactly while WaitingForUser."""
        if self.state is not InstanceState.WAITING:
            return None
        for entry in reversed(self.log):
            if entry.direction is Direction.ENGINE_TO_CLIENT:
                return entry.payload
        return None

    def to_snapshot(self) -> str:
        doc = {
            "instanceId": self.instance_id,
            "appId": self.app_id,
            "launcherId": self.launcher_id,
            "flowName": self.flow_name,
            "modelVersion": self.model_version,
            "state": self.state.value,
            "currentStep": self.current_step,
            "pendingActionIndex": self.pending_action_index,
            "env": self.env,
            "log": [entry.to_dict() for entry in self.log],
        }
        return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_snapshot(cls, text: str) -> "FlowInstance":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"corrupt instance snapshot: {exc}") from None
        if not isinstance(doc, dict):
            raise SchemaError("instance snapshot must be a JSON object")
        try:
            return cls(
                instance_id=doc["instanceId"],
                app_id=doc["appId"],
                launcher_id=doc["launcherId"],
                flow_name=doc["flowName"],
                model_version=doc["modelVersion"],
                state=InstanceState(doc["state"]),
                current_step=doc["currentStep"],
                pending_action_index=doc["pendingActionIndex"],
                env=doc["env"],
                log=[LogEntry.from_dict(e) for e in doc["log"]],
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"instance snapshot missing fields: {exc}") from None
