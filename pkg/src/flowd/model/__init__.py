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
from flowd.model.parse import parse_app, parse_domain, parse_flow
from flowd.model.repository import Repository, load_repository
from flowd.model.serialize import (
    app_to_document,
    canonical_json,
    domain_to_document,
    flow_to_document,
)

__all__ = [
    "AppDefinition",
    "Attribute",
    "AttributeBinding",
    "Choices",
    "CommonOp",
    "DataType",
    "Domain",
    "Flow",
    "IterationKind",
    "Launcher",
    "Parameter",
    "Repository",
    "Service",
    "ServiceCall",
    "ServiceOrigin",
    "ServiceRef",
    "Step",
    "StepKind",
    "StoreOperation",
    "Task",
    "TaskRef",
    "Transition",
    "UserIteration",
    "app_to_document",
    "canonical_json",
    "domain_to_document",
    "flow_to_document",
    "load_repository",
    "parse_app",
    "parse_domain",
    "parse_flow",
]
