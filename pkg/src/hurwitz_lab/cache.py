"""On-disk cache: whole-file atomic writes keyed by a hash of the inputs."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

CODE_VERSION = "hurwitz-lab-2"
ENV_VAR = "HURWITZ_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hurwitz_lab"


def resolve_cache_dir(cache_dir=None) -> Path | None:
    """``False`` disables caching, ``None`` means the default location."""
    if cache_dir is False:
        return None
    return Path(cache_dir) if cache_dir else default_cache_dir()


def cache_key(kind: str, **fields) -> str:
    payload = json.dumps({"kind": kind, "version": CODE_VERSION, **fields}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def _atomic_write(path: Path, write) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_arrays(path: Path, header: dict, **arrays) -> None:
    """npz file with a JSON header stored alongside the arrays."""
    blob = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
    _atomic_write(Path(path), lambda fh: np.savez(fh, header=blob, **arrays))


def load_arrays(path: Path) -> tuple[dict, dict] | None:
    path = Path(path)
    if not path.exists():
        return None
    try:
        with np.load(path) as data:
            header = json.loads(bytes(data["header"]).decode())
            arrays = {k: data[k] for k in data.files if k != "header"}
    except (OSError, ValueError, KeyError):
        return None
    return header, arrays


def save_json(path: Path, payload) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1).encode()
    _atomic_write(Path(path), lambda fh: fh.write(text))


def load_json(path: Path):
    path = Path(path)
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError):
        return None
