"""Parsing and validation of model documents (domain, flow, app).

Each parser is fail-fast per document but aggregates every problem it can
find inside the document before raising, so a single run reports all
diagnostics for one file.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Mapping, Union

from flowd.errors import (
    BrokenReferenceError,
    DuplicateNameError,
    ExpressionSyntaxError,
    FlowdError,
    GraphError,
    ModelSyntaxError,
    SchemaError,
    TypeMismatchError,
    UnknownDomainError,
    UnknownFlowError,
    UnknownTaskError,
)
from flowd.expr import parse_expression, typecheck
from flowd.expr.nodes import AttrRef, Binary, Expression, Literal, Unary
from flowd.model.entities import (
    AppDefinition,
    Attribute,
    AttributeBinding,
    Choices,
    CommonOp,
    DataType,
    Domain,
    Flow,
    IterationKind,
    Launcher,
    Parameter,
    Service,
    ServiceCall,
    ServiceOrigin,
    ServiceRef,
    Step,
    StepKind,
    StoreOperation,
    Task,
    TaskRef,
    Transition,
    UserIteration,
)
from flowd.values import INT64_MAX, INT64_MIN, ScalarType, Value, coerce

_ATTR_NAME_RE = re.compile(r"^[a-z][a-zA-Z0-9_]*$")
_IDENT_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

DomainSet = Union[Mapping[str, Domain], Iterable[Domain]]
FlowSet = Union[Mapping[str, Flow], Iterable[Flow]]


class _Issues:
    """Collects validation errors for one document, raising the first with
    the rest folded into its message."""

    def __init__(self) -> None:
        self.items: list[FlowdError] = []

    def add(self, exc: FlowdError) -> None:
        self.items.append(exc)

    def check(self) -> None:
        if not self.items:
            return
        first = self.items[0]
        if len(self.items) > 1:
            extra = "; ".join(e.message for e in self.items[1:])
            first.message = f"{first.message} (and {len(self.items) - 1} more: {extra})"
            first.args = (first.message,)
        raise first


def _load_object(document: str) -> dict:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("document root must be a JSON object")
    return data


def _check_keys(obj: dict, where: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    missing = required - obj.keys()
    extra = obj.keys() - required - optional
    if missing:
        raise SchemaError(f"{where}: missing fields {sorted(missing)}")
    if extra:
        raise SchemaError(f"{where}: unknown fields {sorted(extra)}")


def _string(obj: dict, key: str, where: str, *, nonempty: bool = True) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or (nonempty and not value):
        raise SchemaError(f"{where}: field {key!r} must be a non-empty string")
    return value


def _identifier(obj: dict, key: str, where: str, pattern: re.Pattern = _IDENT_RE) -> str:
    value = _string(obj, key, where)
    if not pattern.match(value):
        raise SchemaError(f"{where}: {key!r} value {value!r} is not a valid identifier")
    return value


def _array(obj: dict, key: str, where: str) -> list:
    value = obj.get(key)
    if not isinstance(value, list):
        raise SchemaError(f"{where}: field {key!r} must be an array")
    return value


def _scalar_type(obj: dict, key: str, where: str) -> ScalarType:
    name = _string(obj, key, where)
    try:
        return ScalarType.parse(name)
    except TypeMismatchError:
        raise SchemaError(f"{where}: unknown type {name!r}") from None


def _literal(raw: object, where: str) -> Value:
    if isinstance(raw, bool) or isinstance(raw, (str, float)):
        return raw
    if isinstance(raw, int):
        if not INT64_MIN <= raw <= INT64_MAX:
            raise SchemaError(f"{where}: integer literal outside 64-bit range")
        return raw
    if isinstance(raw, list):
        items = [_literal(v, where) for v in raw]
        if any(isinstance(v, list) for v in items):
            raise SchemaError(f"{where}: nested lists are not allowed")
        return items
    raise SchemaError(f"{where}: unsupported literal {raw!r}")


# --- domains ---------------------------------------------------------------

def parse_domain(document: str) -> Domain:
    data = _load_object(document)
    _check_keys(data, "domain", {"name", "types", "services", "tasks"})
    name = _identifier(data, "name", "domain")
    issues = _Issues()

    types = _parse_types(data, issues)
    by_type = {t.name: t for t in types}
    services = _parse_services(data, by_type, issues)
    domain_stub = Domain(name=name, types=types, services=services, tasks=())
    tasks = _parse_tasks(data, domain_stub, issues)

    issues.check()
    return Domain(name=name, types=types, services=services, tasks=tasks)


def _parse_types(data: dict, issues: _Issues) -> tuple[DataType, ...]:
    types: list[DataType] = []
    seen_types: set[str] = set()
    seen_paths: dict[str, str] = {}
    for i, raw in enumerate(_array(data, "types", "domain")):
        where = f"types[{i}]"
        try:
            _check_keys(raw, where, {"name", "attributes"})
            type_name = _identifier(raw, "name", where)
            if type_name in seen_types:
                raise DuplicateNameError(f"{where}: duplicate type {type_name!r}")
            seen_types.add(type_name)
            attrs: list[Attribute] = []
            for j, raw_attr in enumerate(_array(raw, "attributes", where)):
                attr_where = f"{where}.attributes[{j}]"
                attrs.append(_parse_attribute(raw_attr, attr_where))
            names = [a.name for a in attrs]
            if len(set(names)) != len(names):
                raise DuplicateNameError(f"{where}: duplicate attribute names")
            for a in attrs:
                # Paths must be unique across the whole domain so that a
                # path alone identifies its declaring type.
                if a.name in seen_paths:
                    raise DuplicateNameError(
                        f"{where}: attribute {a.name!r} already declared "
                        f"by type {seen_paths[a.name]!r}"
                    )
                seen_paths[a.name] = type_name
            types.append(DataType(name=type_name, attributes=tuple(attrs)))
        except FlowdError as exc:
            issues.add(exc)
    return tuple(types)


def _parse_attribute(raw: dict, where: str) -> Attribute:
    _check_keys(raw, where, {"name", "type", "label"}, {"choices", "render", "set"})
    attr_name = _identifier(raw, "name", where, _ATTR_NAME_RE)
    scalar = _scalar_type(raw, "type", where)
    label = _string(raw, "label", where)
    set_values = raw.get("set", False)
    if not isinstance(set_values, bool):
        raise SchemaError(f"{where}: 'set' must be a boolean")
    render = None
    if "render" in raw:
        render = _string(raw, "render", where)
    choices = None
    if "choices" in raw:
        raw_choices = raw["choices"]
        _check_keys(raw_choices, f"{where}.choices", {"name", "values"})
        list_name = _identifier(raw_choices, "name", f"{where}.choices")
        values = []
        for v in _array(raw_choices, "values", f"{where}.choices"):
            try:
                values.append(coerce(_literal(v, f"{where}.choices"), scalar))
            except TypeMismatchError:
                raise TypeMismatchError(
                    f"{where}.choices: value {v!r} does not match {scalar}"
                ) from None
        choices = Choices(name=list_name, values=tuple(values))
    return Attribute(
        name=attr_name,
        type=scalar,
        label=label,
        choices=choices,
        render=render,
        set_values=set_values,
    )


def _parse_services(
    data: dict, types: Mapping[str, DataType], issues: _Issues
) -> tuple[Service, ...]:
    services: list[Service] = []
    seen: set[str] = set()
    for i, raw in enumerate(_array(data, "services", "domain")):
        where = f"services[{i}]"
        try:
            _check_keys(
                raw,
                where,
                {"name", "origin", "input", "output"},
                {"endpoint", "operation", "dataType"},
            )
            svc_name = _identifier(raw, "name", where)
            if svc_name in seen:
                raise DuplicateNameError(f"{where}: duplicate service {svc_name!r}")
            seen.add(svc_name)
            origin_name = _string(raw, "origin", where)
            try:
                origin = ServiceOrigin(origin_name)
            except ValueError:
                raise SchemaError(f"{where}: origin must be Internal or External") from None
            inputs = _parse_params(raw, "input", where)
            outputs = _parse_params(raw, "output", where)
            if origin is ServiceOrigin.EXTERNAL:
                if "operation" in raw or "dataType" in raw:
                    raise SchemaError(f"{where}: External service cannot have an operation")
                endpoint = _string(raw, "endpoint", where)
                services.append(
                    Service(svc_name, origin, inputs, outputs, endpoint=endpoint)
                )
                continue
            if "endpoint" in raw:
                raise SchemaError(f"{where}: Internal service cannot have an endpoint")
            op_name = _string(raw, "operation", where)
            try:
                operation = StoreOperation(op_name)
            except ValueError:
                raise SchemaError(f"{where}: operation must be Store or Retrieve") from None
            type_name = _string(raw, "dataType", where)
            data_type = types.get(type_name)
            if data_type is None:
                raise BrokenReferenceError(f"{where}: unknown data type {type_name!r}")
            _check_internal_shape(where, operation, data_type, inputs, outputs)
            services.append(
                Service(
                    svc_name,
                    origin,
                    inputs,
                    outputs,
                    operation=operation,
                    data_type=type_name,
                )
            )
        except FlowdError as exc:
            issues.add(exc)
    return tuple(services)


def _parse_params(raw: dict, key: str, where: str) -> tuple[Parameter, ...]:
    params = []
    names = set()
    for i, raw_param in enumerate(_array(raw, key, where)):
        param_where = f"{where}.{key}[{i}]"
        _check_keys(raw_param, param_where, {"name", "type"})
        name = _identifier(raw_param, "name", param_where, _ATTR_NAME_RE)
        if name in names:
            raise DuplicateNameError(f"{param_where}: duplicate parameter {name!r}")
        names.add(name)
        params.append(Parameter(name, _scalar_type(raw_param, "type", param_where)))
    return tuple(params)


def _check_internal_shape(
    where: str,
    operation: StoreOperation,
    data_type: DataType,
    inputs: tuple[Parameter, ...],
    outputs: tuple[Parameter, ...],
) -> None:
    declared = {a.name: a.type for a in data_type.attributes}
    if operation is StoreOperation.STORE:
        if {p.name for p in inputs} != set(declared):
            raise SchemaError(
                f"{where}: Store inputs must cover exactly the attributes of "
                f"{data_type.name!r}"
            )
        for p in inputs:
            if p.type is not declared[p.name]:
                raise TypeMismatchError(
                    f"{where}: input {p.name!r} is {p.type}, attribute is {declared[p.name]}"
                )
        for p in outputs:
            # The only output a Store can produce is the new record's id.
            if p.name != "recordId" or p.type is not ScalarType.INTEGER:
                raise SchemaError(
                    f"{where}: Store output can only be recordId: Integer"
                )
    else:
        if inputs:
            raise SchemaError(f"{where}: Retrieve takes no inputs")
        for p in outputs:
            if p.name not in declared:
                raise BrokenReferenceError(
                    f"{where}: output {p.name!r} is not an attribute of {data_type.name!r}"
                )
            if p.type is not declared[p.name]:
                raise TypeMismatchError(
                    f"{where}: output {p.name!r} is {p.type}, attribute is {declared[p.name]}"
                )


def _parse_tasks(data: dict, domain: Domain, issues: _Issues) -> tuple[Task, ...]:
    tasks: list[Task] = []
    seen: set[str] = set()
    for i, raw in enumerate(_array(data, "tasks", "domain")):
        where = f"tasks[{i}]"
        try:
            _check_keys(raw, where, {"name", "actions"})
            task_name = _identifier(raw, "name", where)
            if task_name in seen:
                raise DuplicateNameError(f"{where}: duplicate task {task_name!r}")
            seen.add(task_name)
            raw_actions = _array(raw, "actions", where)
            if not raw_actions:
                raise SchemaError(f"{where}: a task needs at least one action")
            actions = tuple(
                _parse_action(a, f"{where}.actions[{j}]", domain)
                for j, a in enumerate(raw_actions)
            )
            tasks.append(Task(name=task_name, actions=actions))
        except FlowdError as exc:
            issues.add(exc)
    return tuple(tasks)


def _parse_action(raw: dict, where: str, domain: Domain) -> ServiceCall | UserIteration:
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = raw.get("kind")
    if kind == "ServiceCall":
        _check_keys(raw, where, {"kind", "service", "bindings"}, {"outputBindings"})
        svc_name = _string(raw, "service", where)
        service = domain.service(svc_name)
        if service is None:
            raise BrokenReferenceError(f"{where}: unknown service {svc_name!r}")
        bindings = _parse_bindings(raw.get("bindings"), f"{where}.bindings", domain)
        declared_inputs = {p.name: p.type for p in service.input}
        missing = declared_inputs.keys() - bindings.keys()
        extra = bindings.keys() - declared_inputs.keys()
        if missing:
            raise SchemaError(f"{where}: bindings missing input parameters {sorted(missing)}")
        if extra:
            raise SchemaError(f"{where}: bindings name unknown parameters {sorted(extra)}")
        for param, path in bindings.items():
            resolved = domain.resolve_attribute(path)
            if resolved[1].type is not declared_inputs[param]:
                raise TypeMismatchError(
                    f"{where}: parameter {param!r} is {declared_inputs[param]}, "
                    f"attribute {path!r} is {resolved[1].type}"
                )
        output_bindings = {}
        if "outputBindings" in raw:
            output_bindings = _parse_bindings(
                raw["outputBindings"], f"{where}.outputBindings", domain
            )
            declared_outputs = {p.name: p.type for p in service.output}
            for out, path in output_bindings.items():
                if out not in declared_outputs:
                    raise SchemaError(f"{where}: unknown output {out!r}")
                resolved = domain.resolve_attribute(path)
                if resolved[1].type is not declared_outputs[out]:
                    raise TypeMismatchError(
                        f"{where}: output {out!r} is {declared_outputs[out]}, "
                        f"attribute {path!r} is {resolved[1].type}"
                    )
        return ServiceCall(
            service=ServiceRef(domain.name, svc_name),
            bindings=bindings,
            output_bindings=output_bindings,
        )
    if kind == "UserIteration":
        _check_keys(raw, where, {"kind", "iteration", "attributes"})
        iteration_name = _string(raw, "iteration", where)
        try:
            iteration = IterationKind(iteration_name)
        except ValueError:
            raise SchemaError(f"{where}: iteration must be PROMPT or DISPLAY") from None
        paths = []
        for path in _array(raw, "attributes", where):
            if not isinstance(path, str) or domain.resolve_attribute(path) is None:
                raise BrokenReferenceError(f"{where}: unknown attribute {path!r}")
            paths.append(path)
        if not paths:
            raise SchemaError(f"{where}: iteration needs at least one attribute")
        return UserIteration(kind=iteration, attributes=tuple(paths))
    raise SchemaError(f"{where}: kind must be ServiceCall or UserIteration")


def _parse_bindings(raw: object, where: str, domain: Domain) -> dict[str, str]:
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object of name -> attribute path")
    bindings = {}
    for key, path in raw.items():
        if not isinstance(path, str) or domain.resolve_attribute(path) is None:
            raise BrokenReferenceError(f"{where}: unknown attribute {path!r}")
        bindings[key] = path
    return bindings


# --- flows -----------------------------------------------------------------

def _as_domain_map(repository: DomainSet) -> dict[str, Domain]:
    if isinstance(repository, Mapping):
        return dict(repository)
    return {d.name: d for d in repository}


def parse_flow(document: str, repository: DomainSet) -> Flow:
    domains = _as_domain_map(repository)
    data = _load_object(document)
    _check_keys(data, "flow", {"name", "imports", "steps", "transitions"})
    name = _identifier(data, "name", "flow")

    imports: list[str] = []
    for imp in _array(data, "imports", "flow"):
        if not isinstance(imp, str) or imp not in domains:
            raise UnknownDomainError(f"flow {name!r}: unknown domain {imp!r}")
        if imp in imports:
            raise DuplicateNameError(f"flow {name!r}: duplicate import {imp!r}")
        imports.append(imp)
    imported = {d: domains[d] for d in imports}

    issues = _Issues()
    steps = _parse_steps(data, imported, issues)
    transitions = _parse_transitions(data, issues)
    issues.check()

    _check_graph(name, steps, transitions)
    attributes = _derive_schema(name, steps, transitions, imported)
    _check_expressions(name, steps, transitions, attributes)

    return Flow(
        name=name,
        imports=tuple(imports),
        steps=steps,
        transitions=transitions,
        attributes=attributes,
    )


def _parse_steps(
    data: dict, imported: Mapping[str, Domain], issues: _Issues
) -> tuple[Step, ...]:
    steps: list[Step] = []
    seen: set[str] = set()
    for i, raw in enumerate(_array(data, "steps", "flow")):
        where = f"steps[{i}]"
        try:
            if not isinstance(raw, dict):
                raise SchemaError(f"{where}: expected an object")
            step_id = _identifier(raw, "id", where)
            if step_id in seen:
                raise GraphError(f"{where}: duplicate step id {step_id!r}")
            seen.add(step_id)
            kind_name = _string(raw, "kind", where)
            try:
                kind = StepKind(kind_name)
            except ValueError:
                raise SchemaError(f"{where}: kind must be Common, Data, or Domain") from None
            if kind is StepKind.COMMON:
                steps.append(_parse_common_step(raw, where, step_id))
            elif kind is StepKind.DATA:
                steps.append(_parse_data_step(raw, where, step_id, imported))
            else:
                steps.append(_parse_domain_step(raw, where, step_id, imported))
        except FlowdError as exc:
            issues.add(exc)
    return tuple(steps)


def _parse_common_step(raw: dict, where: str, step_id: str) -> Step:
    op_name = _string(raw, "op", where)
    try:
        op = CommonOp(op_name)
    except ValueError:
        raise SchemaError(f"{where}: op must be Start, End, or Assign") from None
    if op is CommonOp.ASSIGN:
        _check_keys(raw, where, {"id", "kind", "op", "target", "expression"})
        target = _identifier(raw, "target", where, _ATTR_NAME_RE)
        source = _string(raw, "expression", where)
        try:
            expr = parse_expression(source)
        except ExpressionSyntaxError as exc:
            raise ExpressionSyntaxError(f"{where}: {exc.message}", exc.offset) from None
        return Step(
            id=step_id,
            kind=StepKind.COMMON,
            common_op=op,
            assign_target=target,
            assign_source=source,
            assign_expr=expr,
        )
    _check_keys(raw, where, {"id", "kind", "op"})
    return Step(id=step_id, kind=StepKind.COMMON, common_op=op)


def _parse_data_step(
    raw: dict, where: str, step_id: str, imported: Mapping[str, Domain]
) -> Step:
    _check_keys(raw, where, {"id", "kind", "op", "dataType"}, {"domain"})
    op_name = _string(raw, "op", where)
    try:
        op = StoreOperation(op_name)
    except ValueError:
        raise SchemaError(f"{where}: op must be Store or Retrieve") from None
    type_name = _string(raw, "dataType", where)
    ref = _resolve_type(raw.get("domain"), type_name, imported, where)
    return Step(id=step_id, kind=StepKind.DATA, data_op=op, data_type_ref=ref)


def _resolve_type(
    domain_name: object,
    type_name: str,
    imported: Mapping[str, Domain],
    where: str,
) -> tuple[str, str]:
    if domain_name is not None:
        if not isinstance(domain_name, str) or domain_name not in imported:
            raise UnknownDomainError(f"{where}: unknown domain {domain_name!r}")
        if imported[domain_name].data_type(type_name) is None:
            raise BrokenReferenceError(
                f"{where}: domain {domain_name!r} has no type {type_name!r}"
            )
        return domain_name, type_name
    owners = [d for d, dom in imported.items() if dom.data_type(type_name) is not None]
    if not owners:
        raise BrokenReferenceError(f"{where}: unknown data type {type_name!r}")
    if len(owners) > 1:
        raise DuplicateNameError(
            f"{where}: type {type_name!r} is declared by domains {owners}; qualify it"
        )
    return owners[0], type_name


def _parse_domain_step(
    raw: dict, where: str, step_id: str, imported: Mapping[str, Domain]
) -> Step:
    _check_keys(raw, where, {"id", "kind", "domain", "task"})
    domain_name = _string(raw, "domain", where)
    if domain_name not in imported:
        raise UnknownDomainError(f"{where}: unknown domain {domain_name!r}")
    task_name = _string(raw, "task", where)
    if imported[domain_name].task(task_name) is None:
        raise UnknownTaskError(
            f"{where}: domain {domain_name!r} has no task {task_name!r}"
        )
    return Step(
        id=step_id,
        kind=StepKind.DOMAIN,
        task_ref=TaskRef(domain=domain_name, task=task_name),
    )


def _parse_transitions(data: dict, issues: _Issues) -> tuple[Transition, ...]:
    transitions: list[Transition] = []
    for i, raw in enumerate(_array(data, "transitions", "flow")):
        where = f"transitions[{i}]"
        try:
            _check_keys(raw, where, {"from", "to", "order"}, {"condition"})
            order = raw.get("order")
            if not isinstance(order, int) or isinstance(order, bool):
                raise SchemaError(f"{where}: order must be an integer")
            condition_source = None
            condition = None
            if "condition" in raw:
                condition_source = _string(raw, "condition", where)
                try:
                    condition = parse_expression(condition_source)
                except ExpressionSyntaxError as exc:
                    raise ExpressionSyntaxError(
                        f"{where}: {exc.message}", exc.offset
                    ) from None
            transitions.append(
                Transition(
                    from_step=_string(raw, "from", where),
                    to_step=_string(raw, "to", where),
                    order=order,
                    condition_source=condition_source,
                    condition=condition,
                )
            )
        except FlowdError as exc:
            issues.add(exc)
    return tuple(transitions)


def _check_graph(name: str, steps: tuple[Step, ...], transitions: tuple[Transition, ...]) -> None:
    ids = {s.id for s in steps}
    starts = [s for s in steps if s.common_op is CommonOp.START]
    ends = [s for s in steps if s.common_op is CommonOp.END]
    if len(starts) != 1:
        raise GraphError(f"flow {name!r}: needs exactly one Start step, found {len(starts)}")
    if not ends:
        raise GraphError(f"flow {name!r}: needs at least one End step")

    seen_edges: set[tuple[str, int]] = set()
    adjacency: dict[str, list[str]] = {}
    for t in transitions:
        if t.from_step not in ids or t.to_step not in ids:
            raise GraphError(
                f"flow {name!r}: transition references unknown step "
                f"{t.from_step!r} -> {t.to_step!r}"
            )
        key = (t.from_step, t.order)
        if key in seen_edges:
            raise GraphError(
                f"flow {name!r}: duplicate transition order {t.order} from {t.from_step!r}"
            )
        seen_edges.add(key)
        adjacency.setdefault(t.from_step, []).append(t.to_step)

    # Breadth-first search from Start; every step must be reachable.
    frontier = [starts[0].id]
    reached = {starts[0].id}
    while frontier:
        current = frontier.pop(0)
        for nxt in adjacency.get(current, ()):
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    unreachable = ids - reached
    if unreachable:
        raise GraphError(
            f"flow {name!r}: unreachable steps {sorted(unreachable)}"
        )


def _expr_paths(expr: Expression) -> set[str]:
    if isinstance(expr, AttrRef):
        return {expr.path}
    if isinstance(expr, Unary):
        return _expr_paths(expr.operand)
    if isinstance(expr, Binary):
        return _expr_paths(expr.left) | _expr_paths(expr.right)
    return set()


def _derive_schema(
    name: str,
    steps: tuple[Step, ...],
    transitions: tuple[Transition, ...],
    imported: Mapping[str, Domain],
) -> dict[str, AttributeBinding]:
    paths: set[str] = set()
    pinned: dict[str, AttributeBinding] = {}

    def pin(path: str, binding: AttributeBinding) -> None:
        existing = pinned.get(path)
        if existing is not None and (
            existing.domain != binding.domain or existing.data_type != binding.data_type
        ):
            raise DuplicateNameError(
                f"flow {name!r}: attribute {path!r} resolves to both "
                f"{existing.domain}.{existing.data_type} and "
                f"{binding.domain}.{binding.data_type}"
            )
        pinned[path] = binding

    for step in steps:
        if step.kind is StepKind.DOMAIN:
            domain = imported[step.task_ref.domain]
            task = domain.task(step.task_ref.task)
            for action in task.actions:
                if isinstance(action, UserIteration):
                    referenced = set(action.attributes)
                else:
                    referenced = set(action.bindings.values()) | set(
                        action.output_bindings.values()
                    )
                for path in referenced:
                    data_type, attr = domain.resolve_attribute(path)
                    pin(path, AttributeBinding(domain.name, data_type.name, attr))
                paths.update(referenced)
        elif step.kind is StepKind.DATA:
            domain_name, type_name = step.data_type_ref
            data_type = imported[domain_name].data_type(type_name)
            for attr in data_type.attributes:
                pin(attr.name, AttributeBinding(domain_name, type_name, attr))
                paths.add(attr.name)
        elif step.common_op is CommonOp.ASSIGN:
            paths.add(step.assign_target)
            paths.update(_expr_paths(step.assign_expr))
    for t in transitions:
        if t.condition is not None:
            paths.update(_expr_paths(t.condition))

    # Resolve any path not already pinned by a task or data step across the
    # imported domains; ambiguity is an authoring error.
    schema: dict[str, AttributeBinding] = {}
    for path in sorted(paths):
        if path in pinned:
            schema[path] = pinned[path]
            continue
        owners = []
        for domain in imported.values():
            resolved = domain.resolve_attribute(path)
            if resolved is not None:
                owners.append((domain.name, resolved[0], resolved[1]))
        if not owners:
            raise BrokenReferenceError(
                f"flow {name!r}: attribute {path!r} is not declared by any imported domain"
            )
        if len(owners) > 1:
            raise DuplicateNameError(
                f"flow {name!r}: attribute {path!r} is declared by several domains"
            )
        domain_name, data_type, attr = owners[0]
        schema[path] = AttributeBinding(domain_name, data_type.name, attr)
    return schema


def _check_expressions(
    name: str,
    steps: tuple[Step, ...],
    transitions: tuple[Transition, ...],
    attributes: dict[str, AttributeBinding],
) -> None:
    scalars = {path: b.attribute.type for path, b in attributes.items()}
    for t in transitions:
        if t.condition is None:
            continue
        result = typecheck(t.condition, scalars)
        if result is not ScalarType.BOOLEAN:
            raise TypeMismatchError(
                f"flow {name!r}: condition {t.condition_source!r} is {result}, "
                "expected Boolean"
            )
    for step in steps:
        if step.common_op is not CommonOp.ASSIGN:
            continue
        target_type = scalars[step.assign_target]
        result = typecheck(step.assign_expr, scalars)
        ok = result is target_type or (
            result is ScalarType.INTEGER and target_type is ScalarType.DECIMAL
        )
        if not ok:
            raise TypeMismatchError(
                f"flow {name!r}: step {step.id!r} assigns {result} to "
                f"{step.assign_target!r} of type {target_type}"
            )


# --- apps ------------------------------------------------------------------

def _as_flow_map(flows: FlowSet) -> dict[str, Flow]:
    if isinstance(flows, Mapping):
        return dict(flows)
    return {f.name: f for f in flows}


def parse_app(document: str, flows: FlowSet) -> AppDefinition:
    flow_map = _as_flow_map(flows)
    data = _load_object(document)
    _check_keys(data, "app", {"appId", "name", "launchers"}, {"version", "logo"})
    app_id = _identifier(data, "appId", "app")
    name = _string(data, "name", "app")
    logo = _string(data, "logo", "app") if "logo" in data else None
    version = data.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool) or version < 1:
        raise SchemaError("app: version must be a positive integer")

    issues = _Issues()
    launchers: list[Launcher] = []
    seen: set[str] = set()
    for i, raw in enumerate(_array(data, "launchers", "app")):
        where = f"launchers[{i}]"
        try:
            _check_keys(raw, where, {"id", "label", "flow"}, {"icon", "initialValues"})
            launcher_id = _identifier(raw, "id", where)
            if launcher_id in seen:
                raise DuplicateNameError(f"{where}: duplicate launcher id {launcher_id!r}")
            seen.add(launcher_id)
            label = _string(raw, "label", where)
            icon = _string(raw, "icon", where) if "icon" in raw else None
            flow_name = _string(raw, "flow", where)
            flow = flow_map.get(flow_name)
            if flow is None:
                raise UnknownFlowError(f"{where}: unknown flow {flow_name!r}")
            initial_values = _parse_initial_values(raw, where, flow)
            launchers.append(
                Launcher(
                    id=launcher_id,
                    label=label,
                    flow=flow_name,
                    icon=icon,
                    initial_values=initial_values,
                )
            )
        except FlowdError as exc:
            issues.add(exc)
    issues.check()

    return AppDefinition(
        app_id=app_id,
        name=name,
        launchers=tuple(launchers),
        version=version,
        logo=logo,
    )


def _parse_initial_values(raw: dict, where: str, flow: Flow) -> dict[str, Value]:
    raw_values = raw.get("initialValues", {})
    if not isinstance(raw_values, dict):
        raise SchemaError(f"{where}: initialValues must be an object")
    values: dict[str, Value] = {}
    for path, raw_value in raw_values.items():
        binding = flow.attributes.get(path)
        if binding is None:
            raise BrokenReferenceError(
                f"{where}: flow {flow.name!r} has no attribute {path!r}"
            )
        literal = _literal(raw_value, f"{where}.initialValues")
        attr = binding.attribute
        if isinstance(literal, list) and not attr.set_values:
            raise TypeMismatchError(
                f"{where}: attribute {path!r} is single-valued, got a list"
            )
        try:
            values[path] = coerce(literal, attr.type, allow_list=attr.set_values)
        except TypeMismatchError:
            raise TypeMismatchError(
                f"{where}: initial value {raw_value!r} does not match "
                f"{attr.type} attribute {path!r}"
            ) from None
    return values
