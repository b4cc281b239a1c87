"""Recover a list of revision edits from a free-form model reply."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from ..edits import EDIT_FIELDS, RevisionEdit

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


class ParseError(ValueError):
    """No JSON array of edits could be recovered from a reply."""


@dataclass
class EditParse:
    edits: list[RevisionEdit] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)


def _matching_close(text: str, start: int) -> int:
    """Index of the bracket closing the one at ``start``, or -1."""
    pairs = {"[": "]", "{": "}"}
    stack: list[str] = []
    in_string = escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in pairs:
            stack.append(pairs[ch])
        elif ch in "]}":
            if not stack or stack.pop() != ch:
                return -1
            if not stack:
                return i
    return -1


def _drop_trailing_commas(segment: str) -> str:
    out: list[str] = []
    in_string = escaped = False
    for i, ch in enumerate(segment):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == ",":
            rest = segment[i + 1 :].lstrip()
            if rest[:1] in ("]", "}"):
                continue
        out.append(ch)
    return "".join(out)


def _loads(segment: str) -> Any:
    try:
        return json.loads(segment)
    except json.JSONDecodeError:
        return json.loads(_drop_trailing_commas(segment))


def _could_hold_edits(value: list[Any]) -> bool:
    # Prose like "see [1]" parses as an array too; edits arrive as objects.
    return not value or any(isinstance(v, dict) for v in value)


def _recover_array(text: str) -> list[Any] | None:
    """First top-level JSON array, else the first array field of a top-level object."""
    fallback: list[Any] | None = None
    i = 0
    while i < len(text):
        if text[i] not in "[{":
            i += 1
            continue
        end = _matching_close(text, i)
        if end < 0:
            i += 1
            continue
        try:
            value = _loads(text[i : end + 1])
        except json.JSONDecodeError:
            i += 1
            continue
        if isinstance(value, list):
            if _could_hold_edits(value):
                return value
        elif fallback is None:
            fallback = next((v for v in value.values() if isinstance(v, list)), None)
        i = end + 1
    return fallback


def _to_edit(item: Any) -> RevisionEdit:
    if not isinstance(item, dict):
        raise ValueError(f"expected an object, got {type(item).__name__}")
    values: dict[str, str] = {}
    for name in EDIT_FIELDS:
        raw = item.get(name)
        if raw is None:
            values[name] = ""
        elif isinstance(raw, str):
            values[name] = raw
        elif isinstance(raw, (int, float, bool)):
            values[name] = str(raw)
        else:
            raise ValueError(f"field {name!r} is a {type(raw).__name__}, not a string")
    if not values["action_name"].strip():
        raise ValueError("missing action_name")
    if not values["original_snippet"] and not values["revised_snippet"]:
        raise ValueError("missing both original_snippet and revised_snippet")
    return RevisionEdit(**values)


def parse_edit_response(raw: str) -> EditParse:
    """Parse a reply into edits plus diagnostics for dropped elements.

    Fenced code blocks are tried first, then the whole reply. A single
    trailing comma before a closing bracket is tolerated.
    """
    candidates = [m.group(1) for m in _FENCE.finditer(raw)] + [raw]
    items = next((arr for arr in map(_recover_array, candidates) if arr is not None), None)
    if items is None:
        raise ParseError("no JSON array of edits found in response")
    result = EditParse()
    for i, item in enumerate(items):
        try:
            result.edits.append(_to_edit(item))
        except ValueError as exc:
            result.dropped.append(f"element {i}: {exc}")
    return result


def extract_structured_edits(raw: str) -> list[RevisionEdit]:
    return parse_edit_response(raw).edits
