"""Line-delimited JSON helpers with per-line diagnostics."""

from __future__ import annotations

import json
from typing import Iterable, Iterator

from .errors import RecordError


def iter_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for each non-blank line."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise RecordError(path, line_no, "record is not a JSON object")
            yield line_no, obj


def load_jsonl(path: str) -> list[dict]:
    return [obj for _, obj in iter_jsonl(path)]


def dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: str, objs: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(dump_line(obj) + "\n")
            n += 1
    return n


def require_fields(path: str, line_no: int, obj: dict, fields: dict[str, type]) -> None:
    """Raise RecordError unless every named field is present with its type."""
    for name, typ in fields.items():
        if name not in obj:
            raise RecordError(path, line_no, f"missing field {name!r}")
        if not isinstance(obj[name], typ):
            raise RecordError(
                path, line_no, f"field {name!r} must be {typ.__name__}, got {type(obj[name]).__name__}"
            )
