"""Building IterationRequests and validating IterationResponses.

The request dictionary carries exactly five keys: instanceId,
displayElements, gatherElements, constraints, and value. Nothing about
steps, flows, or transitions is ever put on the wire; clients stay
ignorant of the execution structure.
"""

from __future__ import annotations

from flowd.engine.instance import FlowInstance
from flowd.errors import (
    ConstraintViolationError,
    MissingElementError,
    SchemaError,
    TypeMismatchError,
    UnknownElementError,
    UnresolvableDisplayError,
)
from flowd.model.entities import Flow, IterationKind, UserIteration
from flowd.store.records import AppDatabase
from flowd.values import ScalarType, Value, coerce

REQUEST_KEYS = ("instanceId", "displayElements", "gatherElements", "constraints", "value")


def build_iteration_request(
    instance: FlowInstance,
    action: UserIteration,
    flow: Flow,
    store: AppDatabase,
) -> dict:
    display: list[dict] = []
    gather: list[dict] = []
    constraints: list[dict] = []
    defaults: list[dict] = []
    lists: list[dict] = []

    for path in action.attributes:
        binding = flow.attributes[path]
        attr = binding.attribute
        element = {"name": path, "label": attr.label, "type": str(attr.type)}
        if action.kind is IterationKind.DISPLAY:
            element["value"] = _resolve_display(instance, path, binding, store)
            if attr.render is not None:
                element["render"] = attr.render
            display.append(element)
            continue
        element["set"] = attr.set_values
        gather.append(element)
        if path in instance.env:
            defaults.append({path: instance.env[path]})
        if attr.choices is not None:
            constraints.append({"name": path, "valueFrom": attr.choices.name})
            lists.append({attr.choices.name: list(attr.choices.values)})

    return {
        "instanceId": instance.instance_id,
        "displayElements": display,
        "gatherElements": gather,
        "constraints": constraints,
        "value": defaults + lists,
    }


def _resolve_display(instance, path, binding, store: AppDatabase) -> Value:
    if path in instance.env:
        return instance.env[path]
    record = store.newest(instance.app_id, binding.data_type)
    if record is not None and path in record.values:
        return record.values[path]
    raise UnresolvableDisplayError(
        f"attribute {path!r} has no value in the environment or the app database"
    )


def _value_lists(request: dict) -> dict[str, list]:
    merged: dict[str, list] = {}
    for entry in request["value"]:
        for key, value in entry.items():
            if isinstance(value, list):
                merged[key] = value
    return merged


def validate_response(request: dict, body: dict) -> dict[str, Value]:
    """Checks a response body against the outstanding request and returns
    the gathered attribute values, normalized to their declared types."""
    entries = body.get("response")
    if not isinstance(entries, list):
        raise SchemaError("response body must carry a 'response' array")

    elements = {e["name"]: e for e in request["gatherElements"]}
    constraints = {c["name"]: c["valueFrom"] for c in request["constraints"]}
    lists = _value_lists(request)

    gathered: dict[str, Value] = {}
    for entry in entries:
        if not isinstance(entry, dict) or len(entry) != 1:
            raise SchemaError("each response entry must be a single-key object")
        (name, value), = entry.items()
        element = elements.get(name)
        if element is None:
            raise UnknownElementError(f"no gather element named {name!r}")
        if name in gathered:
            raise UnknownElementError(f"duplicate response entry for {name!r}")
        gathered[name] = _check_value(name, value, element, constraints, lists)

    missing = elements.keys() - gathered.keys()
    if missing:
        raise MissingElementError(f"response missing elements {sorted(missing)}")
    return gathered


def _check_value(
    name: str,
    value: Value,
    element: dict,
    constraints: dict[str, str],
    lists: dict[str, list],
) -> Value:
    scalar = ScalarType.parse(element["type"])
    wants_list = element["set"]
    if wants_list and not isinstance(value, list):
        raise TypeMismatchError(f"element {name!r} gathers a list")
    if not wants_list and isinstance(value, list):
        raise TypeMismatchError(f"element {name!r} gathers a single value")
    try:
        checked = coerce(value, scalar, allow_list=wants_list)
    except TypeMismatchError:
        raise TypeMismatchError(
            f"element {name!r} expects {scalar}, got {value!r}"
        ) from None
    if name in constraints:
        allowed = lists[constraints[name]]
        candidates = checked if wants_list else [checked]
        for candidate in candidates:
            if candidate not in allowed:
                raise ConstraintViolationError(
                    f"value {candidate!r} for {name!r} is not one of {allowed}"
                )
    return checked
