"""JSON Lines loaders for reference corpora and preference pairs.

Reference corpus record::

    {"document_id": "...", "draft": "...", "reference": "...", "task_label": "..."}

Preference corpus record::

    {"pair_id": "...", "prompt": "...", "chosen": "...", "rejected": "..."}

``reference``, ``task_label`` and ``prompt`` are optional. Text is kept
verbatim; file order is preserved.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any


class FormatError(ValueError):
    def __init__(self, path: str | Path, line_no: int, message: str) -> None:
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass(frozen=True)
class CorpusRecord:
    document_id: str
    draft: str
    reference: str | None = None
    task_label: str | None = None


@dataclass(frozen=True)
class PreferencePair:
    pair_id: str
    chosen: str
    rejected: str
    prompt: str | None = None


def _records(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise FormatError(path, line_no, "record is not a JSON object")
            yield line_no, record


def _text(record: dict[str, Any], key: str, path: str | Path, line_no: int, required: bool) -> str | None:
    value = record.get(key)
    if value is None:
        if required:
            raise FormatError(path, line_no, f"missing {key!r}")
        return None
    if not isinstance(value, str):
        raise FormatError(path, line_no, f"{key!r} must be a string")
    if required and not value.strip():
        raise FormatError(path, line_no, f"{key!r} is empty")
    return value


def load_reference_corpus(path: str | Path) -> list[CorpusRecord]:
    records: list[CorpusRecord] = []
    seen: set[str] = set()
    for line_no, raw in _records(path):
        doc_id = _text(raw, "document_id", path, line_no, required=True)
        if doc_id in seen:
            raise FormatError(path, line_no, f"duplicate document_id {doc_id!r}")
        seen.add(doc_id)
        records.append(
            CorpusRecord(
                document_id=doc_id,
                draft=_text(raw, "draft", path, line_no, required=True),
                reference=_text(raw, "reference", path, line_no, required=False),
                task_label=_text(raw, "task_label", path, line_no, required=False),
            )
        )
    return records


def load_preference_corpus(path: str | Path) -> list[PreferencePair]:
    pairs: list[PreferencePair] = []
    seen: set[str] = set()
    for line_no, raw in _records(path):
        pair_id = _text(raw, "pair_id", path, line_no, required=True)
        if pair_id in seen:
            raise FormatError(path, line_no, f"duplicate pair_id {pair_id!r}")
        seen.add(pair_id)
        pairs.append(
            PreferencePair(
                pair_id=pair_id,
                chosen=_text(raw, "chosen", path, line_no, required=True),
                rejected=_text(raw, "rejected", path, line_no, required=True),
                prompt=_text(raw, "prompt", path, line_no, required=False),
            )
        )
    return pairs


def save_jsonl(items: Iterable[CorpusRecord | PreferencePair], path: str | Path) -> None:
    """Write records back out, omitting absent optional fields."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            data = {k: v for k, v in asdict(item).items() if v is not None}
            fh.write(json.dumps(data, ensure_ascii=False) + "\n")
