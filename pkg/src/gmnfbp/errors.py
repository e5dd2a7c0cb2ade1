"""Exception types and enumeration size caps."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


class GmnfError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(GmnfError, ValueError):
    """Bad arguments: wrong edge, violated precondition, malformed input."""


class SizeLimitError(GmnfError):
    """An enumeration or construction exceeded its configured cap."""


class GenerationError(GmnfError):
    """The instance generator ran out of retries."""


@dataclass(frozen=True)
class SizeCaps:
    vertices: int = 12           # cycle / path enumeration
    objects: int = 10**6         # enumerated cycles or paths
    oracle_edges: int = 16       # vertex-enumeration LP oracle
    tree_nodes: int = 10**5      # computation tree nodes
    breakpoints: int = 10**5     # per piecewise-linear function


_ENV = "GMNF_SIZE_CAPS"


def size_caps() -> SizeCaps:
    """Caps from the ``GMNF_SIZE_CAPS`` env var, e.g. ``vertices=14,objects=2000000``."""
    raw = os.environ.get(_ENV, "").strip()
    caps = SizeCaps()
    if not raw:
        return caps
    updates = {}
    for item in raw.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in SizeCaps.__dataclass_fields__:
            raise UsageError(f"unknown size cap {key!r} in {_ENV}")
        updates[key] = int(val)
    return replace(caps, **updates)
