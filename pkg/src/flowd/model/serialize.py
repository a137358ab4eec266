"""Canonical serialization of model entities back to JSON documents.

Serializing, then parsing, then serializing again must produce identical
bytes, so tools can diff model files without spurious churn.
"""

from __future__ import annotations

import json

from flowd.model.entities import (
    AppDefinition,
    Attribute,
    CommonOp,
    DataType,
    Domain,
    Flow,
    Launcher,
    Service,
    ServiceCall,
    ServiceOrigin,
    Step,
    StepKind,
    Task,
    Transition,
    UserIteration,
)


def canonical_json(document: dict) -> str:
    """Render a document with sorted keys, two-space indent, and a trailing
    newline. This is the byte format for everything written to disk."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def domain_to_document(domain: Domain) -> dict:
    return {
        "name": domain.name,
        "types": [_data_type(t) for t in domain.types],
        "services": [_service(s) for s in domain.services],
        "tasks": [_task(t) for t in domain.tasks],
    }


def _data_type(data_type: DataType) -> dict:
    return {
        "name": data_type.name,
        "attributes": [_attribute(a) for a in data_type.attributes],
    }


def _attribute(attr: Attribute) -> dict:
    doc: dict = {"name": attr.name, "type": str(attr.type), "label": attr.label}
    if attr.set_values:
        doc["set"] = True
    if attr.render is not None:
        doc["render"] = attr.render
    if attr.choices is not None:
        doc["choices"] = {
            "name": attr.choices.name,
            "values": list(attr.choices.values),
        }
    return doc


def _service(service: Service) -> dict:
    doc: dict = {
        "name": service.name,
        "origin": service.origin.value,
        "input": [{"name": p.name, "type": str(p.type)} for p in service.input],
        "output": [{"name": p.name, "type": str(p.type)} for p in service.output],
    }
    if service.origin is ServiceOrigin.EXTERNAL:
        doc["endpoint"] = service.endpoint
    else:
        doc["operation"] = service.operation.value
        doc["dataType"] = service.data_type
    return doc


def _task(task: Task) -> dict:
    return {"name": task.name, "actions": [_action(a) for a in task.actions]}


def _action(action: ServiceCall | UserIteration) -> dict:
    if isinstance(action, ServiceCall):
        doc: dict = {
            "kind": "ServiceCall",
            "service": action.service.service,
            "bindings": dict(sorted(action.bindings.items())),
        }
        if action.output_bindings:
            doc["outputBindings"] = dict(sorted(action.output_bindings.items()))
        return doc
    return {
        "kind": "UserIteration",
        "iteration": action.kind.value,
        "attributes": list(action.attributes),
    }


def flow_to_document(flow: Flow) -> dict:
    return {
        "name": flow.name,
        "imports": list(flow.imports),
        "steps": [_step(s) for s in flow.steps],
        "transitions": [_transition(t) for t in flow.transitions],
    }


def _step(step: Step) -> dict:
    if step.kind is StepKind.COMMON:
        doc: dict = {"id": step.id, "kind": "Common", "op": step.common_op.value}
        if step.common_op is CommonOp.ASSIGN:
            doc["target"] = step.assign_target
            doc["expression"] = step.assign_source
        return doc
    if step.kind is StepKind.DATA:
        domain, type_name = step.data_type_ref
        return {
            "id": step.id,
            "kind": "Data",
            "op": step.data_op.value,
            "domain": domain,
            "dataType": type_name,
        }
    return {
        "id": step.id,
        "kind": "Domain",
        "domain": step.task_ref.domain,
        "task": step.task_ref.task,
    }


def _transition(transition: Transition) -> dict:
    doc: dict = {
        "from": transition.from_step,
        "to": transition.to_step,
        "order": transition.order,
    }
    if transition.condition_source is not None:
        doc["condition"] = transition.condition_source
    return doc


def app_to_document(app: AppDefinition) -> dict:
    doc: dict = {
        "appId": app.app_id,
        "name": app.name,
        "version": app.version,
        "launchers": [_launcher(l) for l in app.launchers],
    }
    if app.logo is not None:
        doc["logo"] = app.logo
    return doc


def _launcher(launcher: Launcher) -> dict:
    doc: dict = {"id": launcher.id, "label": launcher.label, "flow": launcher.flow}
    if launcher.icon is not None:
        doc["icon"] = launcher.icon
    if launcher.initial_values:
        doc["initialValues"] = dict(sorted(launcher.initial_values.items()))
    return doc
