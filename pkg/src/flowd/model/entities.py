"""Immutable model entities: domains, flows, and app definitions.

Everything here is plain data.  Validation and cross-referencing happen in
``flowd.model.parse``; after that the entities are safe to share across
threads without coordination.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from flowd.expr.nodes import Expression
from flowd.values import ScalarType, Value


class ServiceOrigin(enum.Enum):
    INTERNAL = "Internal"
    EXTERNAL = "External"


class StoreOperation(enum.Enum):
    STORE = "Store"
    RETRIEVE = "Retrieve"


class IterationKind(enum.Enum):
    PROMPT = "PROMPT"
    DISPLAY = "DISPLAY"


class StepKind(enum.Enum):
    COMMON = "Common"
    DATA = "Data"
    DOMAIN = "Domain"


class CommonOp(enum.Enum):
    START = "Start"
    END = "End"
    ASSIGN = "Assign"


@dataclass(frozen=True)
class Choices:
    """A named value list an attribute is constrained to (e.g. cpoints)."""

    name: str
    values: tuple[Value, ...]


@dataclass(frozen=True)
class Attribute:
    # Attribute names are full paths, by convention TypeName-prefixed
    # flattened identifiers such as ``booth_number``.
    name: str
    type: ScalarType
    label: str
    choices: Optional[Choices] = None
    render: Optional[str] = None  # display hint, e.g. "image"
    set_values: bool = False  # gathered/stored as a list of the scalar type


@dataclass(frozen=True)
class DataType:
    name: str
    attributes: tuple[Attribute, ...]

    def attribute(self, path: str) -> Optional[Attribute]:
        for attr in self.attributes:
            if attr.name == path:
                return attr
        return None


@dataclass(frozen=True)
class Parameter:
    name: str
    type: ScalarType


@dataclass(frozen=True)
class Service:
    name: str
    origin: ServiceOrigin
    input: tuple[Parameter, ...]
    output: tuple[Parameter, ...]
    endpoint: Optional[str] = None  # External only
    operation: Optional[StoreOperation] = None  # Internal only
    data_type: Optional[str] = None  # Internal only


@dataclass(frozen=True)
class ServiceRef:
    domain: str
    service: str


@dataclass(frozen=True)
class TaskRef:
    domain: str
    task: str


@dataclass(frozen=True)
class ServiceCall:
    service: ServiceRef
    # Input parameter name -> attribute path supplying its value.
    bindings: dict[str, str]
    # Service output name -> attribute path receiving it; unmapped outputs
    # are dropped.
    output_bindings: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class UserIteration:
    kind: IterationKind
    attributes: tuple[str, ...]


TaskAction = ServiceCall | UserIteration


@dataclass(frozen=True)
class Task:
    name: str
    actions: tuple[TaskAction, ...]


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple[DataType, ...]
    services: tuple[Service, ...]
    tasks: tuple[Task, ...]

    def data_type(self, name: str) -> Optional[DataType]:
        for t in self.types:
            if t.name == name:
                return t
        return None

    def service(self, name: str) -> Optional[Service]:
        for s in self.services:
            if s.name == name:
                return s
        return None

    def task(self, name: str) -> Optional[Task]:
        for t in self.tasks:
            if t.name == name:
                return t
        return None

    def resolve_attribute(self, path: str) -> Optional[tuple[DataType, Attribute]]:
        for t in self.types:
            attr = t.attribute(path)
            if attr is not None:
                return t, attr
        return None


@dataclass(frozen=True)
class Step:
    id: str
    kind: StepKind
    common_op: Optional[CommonOp] = None
    assign_target: Optional[str] = None
    assign_source: Optional[str] = None
    assign_expr: Optional[Expression] = None
    data_op: Optional[StoreOperation] = None
    data_type_ref: Optional[tuple[str, str]] = None  # (domain, type name)
    task_ref: Optional[TaskRef] = None


@dataclass(frozen=True)
class Transition:
    from_step: str
    to_step: str
    order: int
    condition_source: Optional[str] = None
    condition: Optional[Expression] = None


@dataclass(frozen=True)
class AttributeBinding:
    """Where a flow attribute path is declared."""

    domain: str
    data_type: str
    attribute: Attribute


@dataclass(frozen=True)
class Flow:
    name: str
    imports: tuple[str, ...]
    steps: tuple[Step, ...]
    transitions: tuple[Transition, ...]
    # Environment schema: every attribute path the flow references,
    # resolved to its declaration.
    attributes: dict[str, AttributeBinding]

    def step(self, step_id: str) -> Optional[Step]:
        for s in self.steps:
            if s.id == step_id:
                return s
        return None

    @property
    def start_step(self) -> Step:
        for s in self.steps:
            if s.common_op is CommonOp.START:
                return s
        raise LookupError("flow has no Start step")  # unreachable after validation

    def outgoing(self, step_id: str) -> list[Transition]:
        edges = [t for t in self.transitions if t.from_step == step_id]
        edges.sort(key=lambda t: t.order)
        return edges

    def schema(self) -> dict[str, ScalarType]:
        return {path: b.attribute.type for path, b in self.attributes.items()}


@dataclass(frozen=True)
class Launcher:
    id: str
    label: str
    flow: str
    icon: Optional[str] = None
    initial_values: dict[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class AppDefinition:
    app_id: str
    name: str
    launchers: tuple[Launcher, ...]
    version: int = 1
    logo: Optional[str] = None

    def launcher(self, launcher_id: str) -> Optional[Launcher]:
        for l in self.launchers:
            if l.id == launcher_id:
                return l
        return None
