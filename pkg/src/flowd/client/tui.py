"""Generic terminal client.

Renders any IterationRequest as text prompts and gathers typed input.
Only the five request keys are consumed; nothing here knows about any
particular flow, which is the point: one client for every app.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import click

from flowd.errors import FlowdError, LocalConstraintViolationError, SchemaError
from flowd.values import INT64_MAX, INT64_MIN

REQUEST_KEYS = {"instanceId", "displayElements", "gatherElements", "constraints", "value"}


@dataclass
class SessionResult:
    instance_id: int
    status: str


def check_request(request: dict) -> None:
    missing = REQUEST_KEYS - request.keys()
    if missing:
        raise SchemaError(f"request missing keys {sorted(missing)}")
    names = {e["name"] for e in request["gatherElements"]}
    lists = _value_lists(request)
    for constraint in request["constraints"]:
        if constraint["name"] not in names:
            raise SchemaError(
                f"constraint targets unknown element {constraint['name']!r}"
            )
        if constraint["valueFrom"] not in lists:
            raise SchemaError(
                f"constraint references missing value list {constraint['valueFrom']!r}"
            )


def _value_lists(request: dict) -> dict:
    lists = {}
    for entry in request["value"]:
        for key, value in entry.items():
            if isinstance(value, list):
                lists[key] = value
    return lists


def _defaults(request: dict) -> dict:
    defaults = {}
    for entry in request["value"]:
        for key, value in entry.items():
            if not isinstance(value, list):
                defaults[key] = value
    return defaults


def render_request(request: dict) -> str:
    check_request(request)
    lines = []
    for element in request["displayElements"]:
        lines.append(f"{element['label']} {element['value']}")
    defaults = _defaults(request)
    lists = _value_lists(request)
    constrained = {c["name"]: c["valueFrom"] for c in request["constraints"]}
    for element in request["gatherElements"]:
        name = element["name"]
        parts = [f"{element['label']} [{element['type']}"]
        if element["set"]:
            parts[0] += ", comma-separated"
        parts[0] += "]"
        if name in defaults:
            parts.append(f"(default: {defaults[name]})")
        if name in constrained:
            choices = ", ".join(str(v) for v in lists[constrained[name]])
            parts.append(f"choices: {choices}")
        lines.append(" ".join(parts))
    return "\n".join(lines)


def parse_input(text: str, element: dict) -> object:
    """Parses one line of user input by the element's declared type.
    Raises ValueError on unparseable input."""
    if element["set"]:
        items = [t.strip() for t in text.split(",")] if text.strip() else []
        return [_parse_scalar(item, element["type"]) for item in items]
    return _parse_scalar(text.strip(), element["type"])


def _parse_scalar(text: str, type_name: str) -> object:
    if type_name == "Integer":
        value = int(text)
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError("out of 64-bit range")
        return value
    if type_name == "Decimal":
        return float(text)
    if type_name == "Boolean":
        lowered = text.lower()
        if lowered in ("true", "yes", "y", "1"):
            return True
        if lowered in ("false", "no", "n", "0"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return text


def check_constraint(name: str, value: object, request: dict) -> None:
    constrained = {c["name"]: c["valueFrom"] for c in request["constraints"]}
    if name not in constrained:
        return
    allowed = _value_lists(request)[constrained[name]]
    candidates = value if isinstance(value, list) else [value]
    for candidate in candidates:
        if candidate not in allowed:
            raise LocalConstraintViolationError(
                f"{candidate!r} is not one of {allowed}"
            )


class _ScriptFeed:
    def __init__(self, lines: Sequence[str]) -> None:
        self._lines = list(lines)

    def __call__(self, prompt_text: str) -> str:
        if not self._lines:
            raise FlowdError("script exhausted before the flow finished")
        return self._lines.pop(0)


def collect_response(
    request: dict,
    ask: Callable[[str], str],
    echo: Callable[[str], None],
) -> bytes:
    """Gathers one typed value per gather element, re-asking on parse
    failures and local constraint violations, and returns the canonical
    response body bytes."""
    entries = []
    for element in request["gatherElements"]:
        while True:
            raw = ask(f"{element['label']} ")
            try:
                value = parse_input(raw, element)
            except ValueError as exc:
                echo(f"  cannot parse {raw!r}: {exc}")
                continue
            try:
                check_constraint(element["name"], value, request)
            except LocalConstraintViolationError as exc:
                echo(f"  {exc.message}")
                continue
            entries.append({element["name"]: value})
            break
    body = {"instanceId": request["instanceId"], "response": entries}
    return json.dumps(body, sort_keys=True, ensure_ascii=False).encode("utf-8")


def run_session(
    transport,
    app_id: str,
    launcher_id: str,
    scripted: Optional[Sequence[str]] = None,
    echo: Callable[[str], None] = click.echo,
) -> SessionResult:
    ask: Callable[[str], str]
    if scripted is not None:
        ask = _ScriptFeed(scripted)
    else:
        ask = lambda text: click.prompt(text, prompt_suffix="")

    launched = transport.launch(app_id, launcher_id)
    instance_id = launched["instanceId"]
    status = launched["status"]
    request = launched.get("request")
    while request is not None:
        check_request(request)
        rendered = render_request(request)
        if rendered:
            echo(rendered)
        body_bytes = collect_response(request, ask, echo)
        from flowd.client.transport import TransportError

        try:
            outcome = transport.respond(instance_id, json.loads(body_bytes))
        except TransportError as exc:
            if exc.status == 422:
                echo(f"rejected by server: {exc.detail}")
                continue
            raise
        status = outcome["status"]
        request = outcome.get("request")
    echo(f"-> {status}")
    return SessionResult(instance_id=instance_id, status=status)


@click.command()
@click.option("--server", required=True, help="Base URL of the coordinator.")
@click.option("--app", "app_id", required=True)
@click.option("--launcher", "launcher_id", default=None)
@click.option("--script", default=None, type=click.Path(exists=True, dir_okay=False))
def main(server: str, app_id: str, launcher_id: str | None, script: str | None) -> None:
    """Text client: renders coordination requests as prompts."""
    from flowd.client.transport import HttpTransport, TransportError

    transport = HttpTransport(server)
    lines: Optional[list[str]] = None
    if script is not None:
        from pathlib import Path

        lines = Path(script).read_text(encoding="utf-8").splitlines()
    if launcher_id is None:
        summary = transport.fetch_app(app_id)
        if lines is not None:
            launcher_id = lines.pop(0)
        else:
            click.echo(f"{summary['name']} launchers:")
            for launcher in summary["launchers"]:
                click.echo(f"  {launcher['id']}: {launcher['label']}")
            launcher_id = click.prompt("launcher")
    try:
        run_session(transport, app_id, launcher_id, scripted=lines)
    except TransportError as exc:
        click.echo(f"error [{exc.error}] {exc.detail}", err=True)
        raise SystemExit(1)
    except FlowdError as exc:
        click.echo(f"error [{exc.code}] {exc.message}", err=True)
        raise SystemExit(1)


if __name__ == "__main__":
    main()
