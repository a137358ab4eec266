from flowd.engine.coordinator import (
    Engine,
    ModelIndex,
    PinnedModel,
    StaticModels,
    select_transition,
)
from flowd.engine.instance import Direction, FlowInstance, InstanceState, LogEntry
from flowd.engine.messages import REQUEST_KEYS, build_iteration_request, validate_response

__all__ = [
    "Direction",
    "Engine",
    "FlowInstance",
    "InstanceState",
    "LogEntry",
    "ModelIndex",
    "PinnedModel",
    "REQUEST_KEYS",
    "StaticModels",
    "build_iteration_request",
    "select_transition",
    "validate_response",
]
