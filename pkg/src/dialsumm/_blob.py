"""Versioned model files: a magic line followed by an ``.npz`` payload.

The payload carries the named arrays plus a ``__meta__`` entry holding UTF-8
JSON for everything that is not an array (tag sets, vocabularies, configs).
"""
from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np


class ModelFileError(ValueError):
    pass


def write_blob(path: str | Path, magic: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    if "__meta__" in arrays:
        raise ValueError("'__meta__' is reserved")
    buf = io.BytesIO()
    payload = dict(arrays)
    payload["__meta__"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    np.savez(buf, **payload)
    with open(path, "wb") as fh:
        fh.write(magic.encode("ascii") + b"\n")
        fh.write(buf.getvalue())


def read_blob(path: str | Path, magic: str) -> tuple[dict, dict[str, np.ndarray]]:
    data = Path(path).read_bytes()
    header = magic.encode("ascii") + b"\n"
    if not data.startswith(header):
        found = data[: len(header)].split(b"\n")[0][:32]
        raise ModelFileError(f"{path}: expected magic {magic!r}, found {found!r}")
    with np.load(io.BytesIO(data[len(header):]), allow_pickle=False) as npz:
        arrays = {k: npz[k] for k in npz.files}
    meta = json.loads(arrays.pop("__meta__").tobytes().decode("utf-8"))
    return meta, arrays
