"""Versioned on-disk container for corpora and model artifacts.

A snapshot is an uncompressed zip holding ``header.json`` plus one ``.npy``
member per array. Member timestamps are fixed, so writing the same content
twice produces identical bytes.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

__all__ = ["FORMAT", "VERSION", "SnapshotError", "save_snapshot", "load_snapshot"]

FORMAT = "mrfir-snapshot"
VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


class SnapshotError(ValueError):
    pass


def _member(zf: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    zf.writestr(info, payload)


def save_snapshot(path, kind: str, header: dict, arrays: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = arrays or {}
    meta = dict(header)
    meta.update(format=FORMAT, version=VERSION, kind=kind, arrays=sorted(arrays))
    with zipfile.ZipFile(path, "w") as zf:
        _member(zf, "header.json", json.dumps(meta, sort_keys=True, indent=1).encode())
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.save(buf, np.asarray(arrays[name]), allow_pickle=False)
            _member(zf, f"{name}.npy", buf.getvalue())
    return path


def load_snapshot(path, kind: str | None = None) -> tuple[dict, dict]:
    """Return ``(header, arrays)``; checks format, version and optionally kind."""
    path = Path(path)
    try:
        zf = zipfile.ZipFile(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise SnapshotError(f"{path}: not a snapshot ({exc})") from None
    with zf:
        try:
            header = json.loads(zf.read("header.json"))
        except KeyError:
            raise SnapshotError(f"{path}: missing header.json") from None
        if header.get("format") != FORMAT:
            raise SnapshotError(f"{path}: unknown format {header.get('format')!r}")
        if header.get("version") != VERSION:
            raise SnapshotError(f"{path}: unsupported version {header.get('version')}")
        if kind is not None and header.get("kind") != kind:
            raise SnapshotError(f"{path}: expected a {kind!r} snapshot, got {header.get('kind')!r}")
        arrays = {
            name: np.load(io.BytesIO(zf.read(f"{name}.npy")), allow_pickle=False)
            for name in header.get("arrays", [])
        }
    return header, arrays
