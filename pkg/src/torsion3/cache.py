"""On-disk memoization of large numeric tables (numpy ``.npz``).

The directory defaults to ``~/.cache/torsion3`` and can be moved with the
``TORSION3_CACHE_DIR`` environment variable; set it to an empty string to disable.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Callable

import numpy as np

# bump when a cached table's meaning or layout changes
TABLE_VERSION = 1


def cache_dir() -> Path | None:
    raw = os.environ.get("TORSION3_CACHE_DIR")
    if raw is None:
        return Path.home() / ".cache" / "torsion3"
    if raw == "":
        return None
    return Path(raw)


def cached_arrays(name: str, build: Callable[[], dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    """Load ``name`` from the cache directory or build and store it."""
    root = cache_dir()
    if root is None:
        return build()
    path = root / f"{name}-v{TABLE_VERSION}.npz"
    if path.exists():
        with np.load(path) as data:
            return {k: data[k] for k in data.files}
    arrays = build()
    root.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, **arrays)
    os.replace(tmp, path)
    return arrays
