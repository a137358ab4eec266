"""The cloud coordinator: executes flow instances step-by-step.

Execution runs server-side until a user iteration is needed, then the
instance parks as WaitingForUser with exactly one outstanding
IterationRequest. Each instance is processed strictly serially under its
own lock; a snapshot is persisted at every point where the instance
becomes observable (request emitted, terminal state reached, cancelled).
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Protocol

from flowd.engine.instance import Direction, FlowInstance, InstanceState
from flowd.engine.messages import build_iteration_request, validate_response
from flowd.errors import (
    AlreadyTerminalError,
    FlowdError,
    ModelVersionMissingError,
    NoRecordError,
    StaleInstanceError,
    StepFailureError,
    UnboundAttributeError,
    UnknownInstanceError,
    UnknownLauncherError,
)
from flowd.expr import evaluate
from flowd.model.entities import (
    AppDefinition,
    CommonOp,
    Domain,
    Flow,
    ServiceCall,
    StepKind,
    StoreOperation,
    UserIteration,
)
from flowd.model.repository import Repository
from flowd.services import ServiceInvoker
from flowd.store.instances import InstanceStore
from flowd.store.records import AppDatabase

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PinnedModel:
    """One app version with everything needed to execute it."""

    app: AppDefinition
    flows: Mapping[str, Flow]
    domains: Mapping[str, Domain]


class ModelIndex(Protocol):
    def current_version(self, app_id: str) -> int: ...

    def model_for(self, app_id: str, version: int) -> PinnedModel: ...


class StaticModels:
    """ModelIndex over one immutable repository snapshot."""

    def __init__(self, repository: Repository) -> None:
        self._repository = repository

    def current_version(self, app_id: str) -> int:
        app = self._repository.apps.get(app_id)
        if app is None:
            raise ModelVersionMissingError(f"unknown app {app_id!r}")
        return app.version

    def model_for(self, app_id: str, version: int) -> PinnedModel:
        app = self._repository.apps.get(app_id)
        if app is None or app.version != version:
            raise ModelVersionMissingError(
                f"app {app_id!r} version {version} is not available"
            )
        return PinnedModel(
            app=app,
            flows=dict(self._repository.flows),
            domains=dict(self._repository.domains),
        )


InvokerFactory = Callable[[PinnedModel], ServiceInvoker]


def _default_invoker(model: PinnedModel) -> ServiceInvoker:
    return ServiceInvoker.from_domains(model.domains.values())


class Engine:
    def __init__(
        self,
        models: ModelIndex,
        store: AppDatabase,
        instances: InstanceStore,
        invoker_factory: InvokerFactory = _default_invoker,
    ) -> None:
        self._models = models
        self._store = store
        self._instances = instances
        self._invoker_factory = invoker_factory
        self._invokers: dict[tuple[str, int], ServiceInvoker] = {}
        self._live: dict[int, FlowInstance] = {}
        self._locks: dict[int, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------

    def recover(self) -> list[int]:
        """Loads every persisted instance back into memory. Instances whose
        pinned model version is gone stay visible for monitoring but fail
        on resume."""
        recovered = []
        for text in self._instances.load_instances():
            instance = FlowInstance.from_snapshot(text)
            try:
                self._model(instance)
            except ModelVersionMissingError:
                log.warning(
                    "instance %d pins missing model %s v%d",
                    instance.instance_id,
                    instance.app_id,
                    instance.model_version,
                )
            self._register(instance)
            recovered.append(instance.instance_id)
        return recovered

    def launch(self, app_id: str, launcher_id: str) -> tuple[FlowInstance, dict | str]:
        version = self._models.current_version(app_id)
        model = self._models.model_for(app_id, version)
        launcher = model.app.launcher(launcher_id)
        if launcher is None:
            raise UnknownLauncherError(
                f"app {app_id!r} has no launcher {launcher_id!r}"
            )
        flow = model.flows[launcher.flow]
        instance = FlowInstance(
            instance_id=self._instances.next_instance_id(),
            app_id=app_id,
            launcher_id=launcher_id,
            flow_name=flow.name,
            model_version=model.app.version,
            state=InstanceState.RUNNING,
            current_step=flow.start_step.id,
            pending_action_index=0,
            env=dict(launcher.initial_values),
        )
        lock = self._register(instance)
        with lock:
            instance.append_log(
                Direction.INTERNAL,
                {
                    "event": "Launched",
                    "appId": app_id,
                    "launcherId": launcher_id,
                    "flowName": flow.name,
                    "modelVersion": model.app.version,
                },
            )
            result = self._advance(instance)
        return instance, result

    def apply_response(self, instance_id: int, body: dict) -> dict | str:
        instance = self.instance(instance_id)
        with self._lock_for(instance_id):
            if instance.state is not InstanceState.WAITING:
                raise StaleInstanceError(
                    f"instance {instance_id} is {instance.state.value}, not waiting"
                )
            if body.get("instanceId") != instance_id:
                raise StaleInstanceError(
                    f"response addresses instance {body.get('instanceId')!r}, "
                    f"not {instance_id}"
                )
            request = instance.outstanding_request()
            gathered = validate_response(request, body)
            instance.append_log(Direction.CLIENT_TO_ENGINE, body)
            instance.env.update(gathered)
            instance.pending_action_index += 1
            instance.state = InstanceState.RUNNING
            return self._advance(instance)

    def cancel(self, instance_id: int) -> str:
        instance = self.instance(instance_id)
        with self._lock_for(instance_id):
            if instance.state.terminal:
                raise AlreadyTerminalError(
                    f"instance {instance_id} is already {instance.state.value}"
                )
            instance.state = InstanceState.CANCELLED
            instance.append_log(Direction.INTERNAL, {"event": "Cancelled"})
            self._checkpoint(instance)
            return instance.state.value

    # -- queries -----------------------------------------------------------

    def instance(self, instance_id: int) -> FlowInstance:
        with self._registry_lock:
            instance = self._live.get(instance_id)
        if instance is not None:
            return instance
        text = self._instances.load_instance(instance_id)
        if text is None:
            raise UnknownInstanceError(f"unknown instance {instance_id}")
        instance = FlowInstance.from_snapshot(text)
        self._register(instance)
        return instance

    def list_instances(self, app_id: str | None = None) -> list[FlowInstance]:
        with self._registry_lock:
            instances = list(self._live.values())
        if app_id is not None:
            instances = [i for i in instances if i.app_id == app_id]
        return sorted(instances, key=lambda i: i.instance_id)

    def restore(self, text: str) -> FlowInstance:
        instance = FlowInstance.from_snapshot(text)
        self._model(instance)
        self._register(instance)
        return instance

    # -- internals ---------------------------------------------------------

    def _register(self, instance: FlowInstance) -> threading.Lock:
        with self._registry_lock:
            self._live[instance.instance_id] = instance
            lock = self._locks.setdefault(instance.instance_id, threading.Lock())
        return lock

    def _lock_for(self, instance_id: int) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(instance_id, threading.Lock())

    def _model(self, instance: FlowInstance) -> PinnedModel:
        return self._models.model_for(instance.app_id, instance.model_version)

    def _invoker(self, instance: FlowInstance, model: PinnedModel) -> ServiceInvoker:
        key = (instance.app_id, instance.model_version)
        with self._registry_lock:
            invoker = self._invokers.get(key)
            if invoker is None:
                invoker = self._invokers[key] = self._invoker_factory(model)
            return invoker

    def _checkpoint(self, instance: FlowInstance) -> None:
        self._instances.save_instance(instance.instance_id, instance.to_snapshot())

    def _fail(self, instance: FlowInstance, reason: str) -> StepFailureError:
        instance.state = InstanceState.FAILED
        instance.append_log(Direction.INTERNAL, {"event": "Failed", "reason": reason})
        self._checkpoint(instance)
        return StepFailureError(reason)

    def _advance(self, instance: FlowInstance) -> dict | str:
        model = self._model(instance)
        flow = model.flows[instance.flow_name]
        while True:
            step = flow.step(instance.current_step)
            try:
                request = self._execute_step(instance, step, model)
            except FlowdError as exc:
                raise self._fail(
                    instance, f"step {step.id!r}: {exc.message}"
                ) from exc
            if request is not None:
                instance.state = InstanceState.WAITING
                instance.append_log(Direction.ENGINE_TO_CLIENT, request)
                self._checkpoint(instance)
                return request
            if step.common_op is CommonOp.END:
                return self._finalize(instance)
            try:
                next_step = select_transition(flow, step.id, instance.env)
            except FlowdError as exc:
                raise self._fail(
                    instance, f"transition from {step.id!r}: {exc.message}"
                ) from exc
            if next_step is None:
                return self._finalize(instance)
            instance.current_step = next_step
            instance.pending_action_index = 0

    def _finalize(self, instance: FlowInstance) -> str:
        instance.state = InstanceState.FINALIZED
        instance.append_log(Direction.INTERNAL, {"event": "Finalized"})
        self._checkpoint(instance)
        return instance.state.value

    def _execute_step(self, instance, step, model: PinnedModel) -> Optional[dict]:
        """Runs one step to completion; returns an IterationRequest instead
        when the step suspends on a user iteration."""
        flow = model.flows[instance.flow_name]
        if step.kind is StepKind.COMMON:
            if step.common_op is CommonOp.ASSIGN:
                instance.env[step.assign_target] = evaluate(
                    step.assign_expr, instance.env
                )
            return None
        if step.kind is StepKind.DATA:
            self._execute_data(instance, step, model)
            return None
        domain = model.domains[step.task_ref.domain]
        task = domain.task(step.task_ref.task)
        while instance.pending_action_index < len(task.actions):
            action = task.actions[instance.pending_action_index]
            if isinstance(action, UserIteration):
                return build_iteration_request(instance, action, flow, self._store)
            self._execute_service_call(instance, action, model)
            instance.pending_action_index += 1
        return None

    def _execute_data(self, instance, step, model: PinnedModel) -> None:
        domain_name, type_name = step.data_type_ref
        data_type = model.domains[domain_name].data_type(type_name)
        if step.data_op is StoreOperation.STORE:
            values = {}
            for attr in data_type.attributes:
                if attr.name not in instance.env:
                    raise UnboundAttributeError(
                        f"attribute {attr.name!r} is not bound"
                    )
                values[attr.name] = instance.env[attr.name]
            self._store.put_record(instance.app_id, data_type, values)
            instance.append_log(
                Direction.INTERNAL, {"event": "RecordStored", "dataType": type_name}
            )
            return
        record = self._store.newest(instance.app_id, type_name)
        if record is None:
            raise NoRecordError(f"no {type_name!r} record to retrieve")
        instance.env.update(record.values)
        instance.append_log(
            Direction.INTERNAL, {"event": "RecordRetrieved", "dataType": type_name}
        )

    def _execute_service_call(
        self, instance, action: ServiceCall, model: PinnedModel
    ) -> None:
        invoker = self._invoker(instance, model)
        inputs = {}
        for param, path in action.bindings.items():
            if path not in instance.env:
                raise UnboundAttributeError(f"attribute {path!r} is not bound")
            inputs[param] = instance.env[path]
        outputs = invoker.invoke(action.service, inputs, instance.app_id, self._store)
        for output, path in action.output_bindings.items():
            instance.env[path] = outputs[output]
        instance.append_log(
            Direction.INTERNAL,
            {
                "event": "ServiceInvoked",
                "service": f"{action.service.domain}.{action.service.service}",
            },
        )


def select_transition(flow: Flow, step_id: str, env: Mapping) -> str | None:
    """First eligible target in ascending declared order, or None."""
    for transition in flow.outgoing(step_id):
        if transition.condition is None or evaluate(transition.condition, env) is True:
            return transition.to_step
    return None
