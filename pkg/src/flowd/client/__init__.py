from flowd.client.transport import HttpTransport, LocalTransport, TransportError
from flowd.client.tui import (
    SessionResult,
    check_request,
    collect_response,
    parse_input,
    render_request,
    run_session,
)

__all__ = [
    "HttpTransport",
    "LocalTransport",
    "SessionResult",
    "TransportError",
    "check_request",
    "collect_response",
    "parse_input",
    "render_request",
    "run_session",
]
