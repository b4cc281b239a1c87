"""Revision edits: data model, grounding, categorization and counting.

A revision edit is one structured change emitted by the proxy-user model.
The revision distance of a draft is the number of edits it received; every
edit weighs the same.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple

EDIT_FIELDS = (
    "action_name",
    "revision_description",
    "revision_level",
    "revision_intention",
    "original_snippet",
    "revised_snippet",
)


class EditCategory(str, Enum):
    ORDER = "Order"
    COMPARISON = "Comparison"
    DESCRIPTION = "Description"
    OTHER = "Other"


# Precedence is the declaration order; OTHER is the fallback.
DEFAULT_KEYWORDS: dict[EditCategory, tuple[str, ...]] = {
    EditCategory.ORDER: ("reorder", "reorganize", "move", "sequence", "restructure"),
    EditCategory.COMPARISON: ("compare", "comparison", "contrast", "relate"),
    EditCategory.DESCRIPTION: (
        "simplify",
        "elaborate",
        "expand",
        "condense",
        "rewrite",
        "describe",
        "clarify",
        "rephrase",
        "shorten",
    ),
}

CATEGORY_PRECEDENCE = (EditCategory.ORDER, EditCategory.COMPARISON, EditCategory.DESCRIPTION)


@dataclass(frozen=True)
class RevisionEdit:
    """One edit as emitted by the proxy user."""

    action_name: str
    revision_description: str = ""
    revision_level: str = ""
    revision_intention: str = ""
    original_snippet: str = ""
    revised_snippet: str = ""

    def __post_init__(self) -> None:
        if not self.action_name.strip():
            raise ValueError("action_name must be non-empty")
        if not self.original_snippet and not self.revised_snippet:
            raise ValueError("an edit needs an original or a revised snippet")

    @property
    def is_insertion(self) -> bool:
        return not self.original_snippet.strip()

    def to_dict(self) -> dict[str, str]:
        return {name: getattr(self, name) for name in EDIT_FIELDS}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RevisionEdit:
        return cls(**{name: data.get(name) or "" for name in EDIT_FIELDS})


@dataclass(frozen=True)
class GroundedEdit:
    edit: RevisionEdit
    grounded: bool
    category: EditCategory
    match_offset: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = self.edit.to_dict()
        out["grounded"] = self.grounded
        out["match_offset"] = self.match_offset
        out["category"] = self.category.value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> GroundedEdit:
        return cls(
            edit=RevisionEdit.from_dict(data),
            grounded=bool(data["grounded"]),
            category=EditCategory(data["category"]),
            match_offset=data.get("match_offset"),
        )


@dataclass(frozen=True)
class DocumentEval:
    """Evaluation of a single draft.

    ``edits`` is None when revision edits were not requested for the run;
    the revision distance and category counts are then absent too.
    """

    document_id: str
    edits: tuple[GroundedEdit, ...] | None = None
    baseline_scores: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def revision_distance(self) -> int | None:
        if self.edits is None:
            return None
        return count_revision_distance(self.edits)

    @property
    def category_counts(self) -> dict[EditCategory, int]:
        if self.edits is None:
            return {}
        counts = dict.fromkeys(EditCategory, 0)
        for grounded in self.edits:
            counts[grounded.category] += 1
        return counts

    @property
    def ungrounded_count(self) -> int:
        return sum(not g.grounded for g in self.edits or ())

    def to_dict(self) -> dict[str, Any]:
        return {
            "document_id": self.document_id,
            "revision_distance": self.revision_distance,
            "category_counts": {c.value: n for c, n in self.category_counts.items()},
            "baseline_scores": dict(self.baseline_scores),
            "edits": None if self.edits is None else [g.to_dict() for g in self.edits],
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DocumentEval:
        edits = data.get("edits")
        return cls(
            document_id=data["document_id"],
            edits=None if edits is None else tuple(GroundedEdit.from_dict(e) for e in edits),
            baseline_scores=dict(data.get("baseline_scores", {})),
            diagnostics=dict(data.get("diagnostics", {})),
        )


def count_revision_distance(edits: Sequence[object]) -> int:
    return len(edits)


def normalize_with_map(text: str) -> tuple[str, list[int]]:
    """Lowercase and collapse whitespace runs to one space.

    Also returns, for each character of the normalized string, the index of
    the source character it came from.
    """
    chars: list[str] = []
    index: list[int] = []
    in_space = False
    for i, ch in enumerate(text):
        if ch.isspace():
            if not in_space:
                chars.append(" ")
                index.append(i)
            in_space = True
            continue
        in_space = False
        for lowered in ch.lower():
            chars.append(lowered)
            index.append(i)
    return "".join(chars), index


def normalize(text: str) -> str:
    return normalize_with_map(text)[0]


def _normalized_snippet(snippet: str) -> str:
    return normalize(snippet.strip())


def ground_edit(
    draft: str,
    edit: RevisionEdit,
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
) -> GroundedEdit:
    """Locate ``edit.original_snippet`` in ``draft`` under normalization.

    Pure insertions (empty original snippet) count as grounded with no offset.
    """
    if not draft:
        raise ValueError("draft must be non-empty")
    category = categorize_edit(edit, keywords)
    if edit.is_insertion:
        return GroundedEdit(edit, grounded=True, category=category)
    offset = normalize(draft).find(_normalized_snippet(edit.original_snippet))
    if offset < 0:
        return GroundedEdit(edit, grounded=False, category=category)
    return GroundedEdit(edit, grounded=True, category=category, match_offset=offset)


_SEPARATORS = re.compile(r"[^0-9a-z]+")


def categorize_edit(
    edit: RevisionEdit,
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
) -> EditCategory:
    """Map an edit to a category by keyword lookup.

    The haystack is ``action_name`` plus ``revision_intention``, case-folded
    and split into words; a keyword matches a word it prefixes, so
    "Reordered" hits ``reorder`` but "remove" does not hit ``move``.
    """
    table = DEFAULT_KEYWORDS if keywords is None else keywords
    haystack = f"{edit.action_name} {edit.revision_intention}".casefold()
    words = [w for w in _SEPARATORS.split(haystack) if w]
    for category in CATEGORY_PRECEDENCE:
        for keyword in table.get(category, ()):
            kw = keyword.casefold()
            if any(word.startswith(kw) for word in words):
                return category
    return EditCategory.OTHER


def evaluate_edits(
    document_id: str,
    draft: str,
    edits: Iterable[RevisionEdit],
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
    baseline_scores: Mapping[str, float] | None = None,
    diagnostics: Mapping[str, Any] | None = None,
) -> DocumentEval:
    grounded = tuple(ground_edit(draft, e, keywords) for e in edits)
    return DocumentEval(
        document_id=document_id,
        edits=grounded,
        baseline_scores=dict(baseline_scores or {}),
        diagnostics=dict(diagnostics or {}),
    )


class AppliedRevision(NamedTuple):
    text: str
    applied: list[int]
    skipped: list[tuple[int, str]]


def apply_edits(draft: str, edits: Sequence[GroundedEdit]) -> AppliedRevision:
    """Apply grounded replacement edits to ``draft``.

    Edits are applied right to left so earlier offsets stay valid. Ungrounded
    edits, pure insertions and edits overlapping an already applied span are
    skipped; ``skipped`` holds ``(edit index, reason)`` pairs.
    """
    _, index = normalize_with_map(draft)
    spans: list[tuple[int, int, int]] = []
    skipped: list[tuple[int, str]] = []
    for i, g in enumerate(edits):
        if not g.grounded:
            skipped.append((i, "ungrounded"))
        elif g.match_offset is None:
            skipped.append((i, "insertion"))
        else:
            length = len(_normalized_snippet(g.edit.original_snippet))
            start = index[g.match_offset]
            end = index[g.match_offset + length - 1] + 1
            spans.append((start, end, i))

    text = draft
    applied: list[int] = []
    boundary = len(draft) + 1
    for start, end, i in sorted(spans, key=lambda s: (-s[0], s[2])):
        if end > boundary:
            skipped.append((i, "overlap"))
            continue
        text = text[:start] + edits[i].edit.revised_snippet + text[end:]
        applied.append(i)
        boundary = start
    skipped.sort()
    return AppliedRevision(text, sorted(applied), skipped)
