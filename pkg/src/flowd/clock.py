"""UTC clock with a freeze seam for deterministic tests.

Setting ``FLOWD_FROZEN_TIME`` to an ISO-8601 instant makes every timestamp
in the process equal to that instant, which lets crash-recovery tests
compare persisted state byte for byte.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone

ENV_FROZEN = "FLOWD_FROZEN_TIME"


def utc_now() -> str:
    """The current UTC instant as an ISO-8601 string."""
    frozen = os.environ.get(ENV_FROZEN)
    if frozen:
        stamp = datetime.fromisoformat(frozen)
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        return stamp.isoformat()
    return datetime.now(timezone.utc).isoformat()
