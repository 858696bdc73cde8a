"""Thread budget shared by the parallel parts of the package."""

from __future__ import annotations

import os

from .errors import ConfigError

THREADS_ENV = "GTOSPEC_THREADS"


def thread_budget(requested: int | None = None) -> int:
    """Explicit request, else ``$GTOSPEC_THREADS``, else the CPU count."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None:
            return os.cpu_count() or 1
        try:
            requested = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if requested < 1:
        raise ConfigError(f"thread count must be positive, got {requested}")
    return requested
