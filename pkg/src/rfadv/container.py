"""One-line-JSON-header + raw payload container used by every binary file.

Layout: a single utf-8 JSON object terminated by '\n', then payload bytes.
The header always carries "format", "version" and "payload_bytes" so readers
can reject foreign or truncated files before touching the payload.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import CorruptFileError

FORMAT_VERSION = 1
_MAX_HEADER = 64 * 1024 * 1024


def write_container(path, kind: str, header: dict, payload: bytes) -> None:
    head = dict(header)
    head["format"] = kind
    head["version"] = FORMAT_VERSION
    head["payload_bytes"] = len(payload)
    blob = json.dumps(head, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(blob)
        fh.write(b"\n")
        fh.write(payload)


def read_container(path, kind: str) -> tuple[dict, bytes]:
    path = Path(path)
    with open(path, "rb") as fh:
        line = fh.readline(_MAX_HEADER)
        if not line.endswith(b"\n"):
            raise CorruptFileError(f"{path}: missing header line")
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptFileError(f"{path}: unreadable header: {exc}") from exc
        payload = fh.read()
    if not isinstance(header, dict) or header.get("format") != kind:
        raise CorruptFileError(
            f"{path}: expected format {kind!r}, found {header.get('format')!r}"
        )
    if header.get("version") != FORMAT_VERSION:
        raise CorruptFileError(f"{path}: unsupported version {header.get('version')!r}")
    want = header.get("payload_bytes")
    if want != len(payload):
        raise CorruptFileError(
            f"{path}: payload is {len(payload)} bytes, header says {want}"
        )
    return header, payload
