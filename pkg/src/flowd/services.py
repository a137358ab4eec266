"""Service invocation: internal services delegate to the app database,
external services are JSON-over-HTTP POST calls to third-party endpoints.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

import httpx

from flowd.errors import (
    BrokenReferenceError,
    MissingInputError,
    NoRecordError,
    NotExternalError,
    OutputTypeMismatchError,
    ServiceHttpError,
    ServiceTimeoutError,
    TypeMismatchError,
)
from flowd.model.entities import (
    DataType,
    Domain,
    Service,
    ServiceOrigin,
    ServiceRef,
    StoreOperation,
)
from flowd.store.records import AppDatabase
from flowd.values import Value, matches

StubHandler = Callable[[dict], dict]


class ServiceInvoker:
    """Resolves and invokes services by (domain, service) reference.

    Immutable and shareable across threads; `with_stub` returns a copy so
    tests can reroute an external service without touching the original.
    """

    def __init__(
        self,
        registry: Mapping[tuple[str, str], Service],
        types: Mapping[tuple[str, str], DataType],
        http_timeout: float = 5.0,
        stub_table: Mapping[tuple[str, str], StubHandler] | None = None,
    ) -> None:
        self._registry = dict(registry)
        self._types = dict(types)
        self._http_timeout = http_timeout
        self._stub_table = dict(stub_table or {})

    @classmethod
    def from_domains(
        cls, domains: Iterable[Domain], http_timeout: float = 5.0
    ) -> "ServiceInvoker":
        registry = {}
        types = {}
        for domain in domains:
            for service in domain.services:
                registry[(domain.name, service.name)] = service
            for data_type in domain.types:
                types[(domain.name, data_type.name)] = data_type
        return cls(registry, types, http_timeout=http_timeout)

    def service(self, ref: ServiceRef) -> Service:
        service = self._registry.get((ref.domain, ref.service))
        if service is None:
            raise BrokenReferenceError(f"unknown service {ref.domain}.{ref.service}")
        return service

    def with_stub(self, ref: ServiceRef, handler: StubHandler) -> "ServiceInvoker":
        if self.service(ref).origin is not ServiceOrigin.EXTERNAL:
            raise NotExternalError(f"service {ref.domain}.{ref.service} is not External")
        stubs = dict(self._stub_table)
        stubs[(ref.domain, ref.service)] = handler
        return ServiceInvoker(
            self._registry, self._types, self._http_timeout, stubs
        )

    def invoke(
        self, ref: ServiceRef, inputs: Mapping[str, Value], app_id: str, store: AppDatabase
    ) -> dict[str, Value]:
        service = self.service(ref)
        checked = self._check_inputs(service, inputs)
        if service.origin is ServiceOrigin.INTERNAL:
            raw = self._invoke_internal(ref, service, checked, app_id, store)
        else:
            raw = self._invoke_external(ref, service, checked)
        return self._shape_outputs(service, raw)

    def _check_inputs(
        self, service: Service, inputs: Mapping[str, Value]
    ) -> dict[str, Value]:
        checked = {}
        for param in service.input:
            if param.name not in inputs:
                raise MissingInputError(
                    f"service {service.name!r} needs input {param.name!r}"
                )
            value = inputs[param.name]
            if not matches(value, param.type):
                raise TypeMismatchError(
                    f"service {service.name!r} input {param.name!r} expects "
                    f"{param.type}, got {value!r}"
                )
            checked[param.name] = value
        return checked

    def _invoke_internal(
        self,
        ref: ServiceRef,
        service: Service,
        inputs: dict[str, Value],
        app_id: str,
        store: AppDatabase,
    ) -> dict[str, Value]:
        data_type = self._types[(ref.domain, service.data_type)]
        if service.operation is StoreOperation.STORE:
            record = store.put_record(app_id, data_type, inputs)
            return {"recordId": record.record_id}
        records = store.query_records(app_id, data_type.name)
        if not records:
            raise NoRecordError(f"no {data_type.name!r} record for app {app_id!r}")
        return dict(records[0].values)

    def _invoke_external(
        self, ref: ServiceRef, service: Service, inputs: dict[str, Value]
    ) -> dict[str, Value]:
        stub = self._stub_table.get((ref.domain, ref.service))
        if stub is not None:
            return stub(inputs)
        try:
            response = httpx.post(
                service.endpoint, json=inputs, timeout=self._http_timeout
            )
        except httpx.TimeoutException as exc:
            raise ServiceTimeoutError(
                f"service {service.name!r} timed out after {self._http_timeout}s"
            ) from exc
        except httpx.HTTPError as exc:
            raise ServiceHttpError(f"service {service.name!r} failed: {exc}") from exc
        if response.status_code < 200 or response.status_code >= 300:
            raise ServiceHttpError(
                f"service {service.name!r} returned HTTP {response.status_code}"
            )
        try:
            body = response.json()
        except ValueError as exc:
            raise OutputTypeMismatchError(
                f"service {service.name!r} returned non-JSON output"
            ) from exc
        if not isinstance(body, dict):
            raise OutputTypeMismatchError(
                f"service {service.name!r} must return a JSON object"
            )
        return body

    def _shape_outputs(self, service: Service, raw: Mapping[str, Value]) -> dict[str, Value]:
        # The result always carries exactly the declared outputs; anything
        # extra a third party sends is dropped.
        shaped = {}
        for param in service.output:
            if param.name not in raw:
                raise OutputTypeMismatchError(
                    f"service {service.name!r} output missing {param.name!r}"
                )
            value = raw[param.name]
            if not matches(value, param.type):
                raise OutputTypeMismatchError(
                    f"service {service.name!r} output {param.name!r} expects "
                    f"{param.type}, got {value!r}"
                )
            shaped[param.name] = value
        return shaped
