"""Exception hierarchy shared by every flowd layer.

Each error carries a stable ``code`` string so the HTTP layer can map
exceptions to wire-level error identifiers without string matching.
"""

from __future__ import annotations


class FlowdError(Exception):
    """Base class for all flowd errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- model layer -----------------------------------------------------------

class ModelSyntaxError(FlowdError):
    """Document is not well-formed (bad JSON or bad embedded expression)."""

    code = "SyntaxError"


class SchemaError(FlowdError):
    """Document shape is wrong: missing, extra, or mistyped fields."""

    code = "SchemaError"


class BrokenReferenceError(FlowdError):
    """An internal reference does not resolve (dangling name)."""

    code = "ReferenceError"


class UnknownDomainError(FlowdError):
    code = "UnknownDomain"


class UnknownTaskError(FlowdError):
    code = "UnknownTask"


class UnknownFlowError(FlowdError):
    code = "UnknownFlow"


class GraphError(FlowdError):
    """Flow graph invariant violated: start/end steps, reachability, edges."""

    code = "GraphError"


class DuplicateNameError(FlowdError):
    code = "DuplicateName"


# --- expression language ---------------------------------------------------

class ExpressionSyntaxError(FlowdError):
    """Expression source fails to parse; ``offset`` is a byte offset."""

    code = "SyntaxError"

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class TypeMismatchError(FlowdError):
    code = "TypeMismatch"


class UnknownAttributeError(FlowdError):
    code = "UnknownAttribute"


class UnboundAttributeError(FlowdError):
    code = "UnboundAttribute"


class DivisionByZeroError(FlowdError):
    code = "DivisionByZero"


class IntegerOverflowError(FlowdError):
    """Integer arithmetic left the 64-bit signed range."""

    code = "Overflow"


# --- engine ----------------------------------------------------------------

class UnknownLauncherError(FlowdError):
    code = "UnknownLauncher"


class StepFailureError(FlowdError):
    """A step failed during execution; the instance is now Failed."""

    code = "StepFailure"


class StaleInstanceError(FlowdError):
    """The instance is not waiting for the submitted response."""

    code = "StaleInstance"


class UnknownElementError(FlowdError):
    code = "UnknownElement"


class MissingElementError(FlowdError):
    code = "MissingElement"


class ConstraintViolationError(FlowdError):
    code = "ConstraintViolation"


class AlreadyTerminalError(FlowdError):
    code = "AlreadyTerminal"


class UnresolvableDisplayError(FlowdError):
    """A DISPLAY attribute is bound neither in the env nor in the database."""

    code = "UnresolvableDisplay"


class ModelVersionMissingError(FlowdError):
    """A snapshot pins an app version that is no longer available."""

    code = "ModelVersionMissing"


# --- store -----------------------------------------------------------------

class IncompleteRecordError(FlowdError):
    code = "IncompleteRecord"


class UnknownTypeError(FlowdError):
    code = "UnknownType"


class StorageFailureError(FlowdError):
    code = "StorageFailure"


class NoRecordError(FlowdError):
    code = "NoRecord"


# --- services --------------------------------------------------------------

class MissingInputError(FlowdError):
    code = "MissingInput"


class ServiceTimeoutError(FlowdError):
    code = "ServiceTimeout"


class ServiceHttpError(FlowdError):
    code = "ServiceHttpError"


class OutputTypeMismatchError(FlowdError):
    code = "OutputTypeMismatch"


class NotExternalError(FlowdError):
    code = "NotExternal"


# --- server ----------------------------------------------------------------

class UnknownAppError(FlowdError):
    code = "UnknownApp"


class UnknownInstanceError(FlowdError):
    code = "UnknownInstance"


class VersionConflictError(FlowdError):
    code = "VersionConflict"


# --- terminal client -------------------------------------------------------

class LocalConstraintViolationError(FlowdError):
    """A value failed a valueFrom constraint client-side; nothing was sent."""

    code = "LocalConstraintViolation"
