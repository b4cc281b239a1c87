"""The proxy-user call: prompt, complete, extract, with one corrective retry."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..edits import RevisionEdit
from .backends import LLMBackend
from .extraction import ParseError, parse_edit_response
from .prompts import TemplateSet, build_revision_prompt

logger = logging.getLogger(__name__)

DEFAULT_MAX_EDITS = 50
CORRECTIVE_SUFFIX = (
    "\n\nYour previous reply could not be parsed. "
    "Return only a JSON array of edit objects, with no other text."
)


@dataclass
class ProxyResult:
    edits: list[RevisionEdit]
    retries: int = 0
    dropped: list[str] = field(default_factory=list)
    truncated_from: int | None = None

    def diagnostics(self) -> dict[str, object]:
        out: dict[str, object] = {}
        if self.retries:
            out["retries"] = self.retries
        if self.dropped:
            out["dropped_elements"] = list(self.dropped)
        if self.truncated_from is not None:
            out["truncated_from"] = self.truncated_from
        return out


def generate_revision_edits(
    backend: LLMBackend,
    draft: str,
    reference: str | None = None,
    task_hint: str | None = None,
    *,
    document_id: str = "",
    templates: TemplateSet | None = None,
    max_edits: int = DEFAULT_MAX_EDITS,
) -> ProxyResult:
    request = build_revision_prompt(
        draft, reference, task_hint, document_id=document_id, templates=templates
    )
    try:
        parsed = parse_edit_response(backend.complete(request))
        retries = 0
    except ParseError:
        logger.info("unparseable reply for %s, re-asking once", document_id or "draft")
        parsed = parse_edit_response(backend.complete(request.with_suffix(CORRECTIVE_SUFFIX)))
        retries = 1

    result = ProxyResult(edits=parsed.edits, retries=retries, dropped=parsed.dropped)
    if len(result.edits) > max_edits:
        logger.warning(
            "%s: truncating %d edits to %d", document_id or "draft", len(result.edits), max_edits
        )
        result.truncated_from = len(result.edits)
        result.edits = result.edits[:max_edits]
    return result
