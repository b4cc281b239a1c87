"""GPT-Score baseline: a single 0-100 quality rating from an LLM judge."""

from __future__ import annotations

import re
from statistics import fmean

from .llm.backends import LLMBackend
from .llm.extraction import ParseError
from .llm.prompts import TemplateSet, build_gpt_score_prompt
from .rouge import MetricScore

SCORE_SUFFIX = "\n\nReply with a single integer between 0 and 100 and nothing else."

# Skips decimals and "/N" scale denominators.
_INTEGER = re.compile(r"(?<![\d./])(?<!/ )\d+(?!\d)(?!\.\d)")


def parse_score(text: str) -> int:
    """First integer in ``text`` that lies in [0, 100].

    "Score: 90/100." gives 90; "8.5/10" yields nothing.
    """
    for match in _INTEGER.finditer(text):
        value = int(match.group())
        if 0 <= value <= 100:
            return value
    raise ParseError(f"no integer between 0 and 100 in {text[:80]!r}")


def gpt_score(
    candidate: str,
    reference: str | None,
    backend: LLMBackend,
    *,
    templates: TemplateSet | None = None,
    samples: int = 1,
    retries: int = 1,
    document_id: str = "",
) -> MetricScore:
    request = build_gpt_score_prompt(candidate, reference, document_id=document_id, templates=templates)
    values = []
    for _ in range(samples):
        attempt = request
        for remaining in range(retries, -1, -1):
            try:
                values.append(parse_score(backend.complete(attempt)))
                break
            except ParseError:
                if not remaining:
                    raise
                attempt = request.with_suffix(SCORE_SUFFIX)
    return MetricScore("gpt_score", min(100.0, max(0.0, fmean(values))))
