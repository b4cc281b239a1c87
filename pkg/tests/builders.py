"""Synthetic corpora with scripted proxy-user replies."""

from __future__ import annotations

import json

from revdist.corpus import CorpusRecord, PreferencePair
from revdist.llm import ScriptedBackend

ACTIONS = {"order": "reorder", "comparison": "add_comparison", "description": "elaborate"}


def _edit(kind: str) -> dict:
    return {
        "action_name": ACTIONS[kind],
        "revision_description": f"{kind} edit",
        "revision_level": "reference",
        "revision_intention": "",
        "original_snippet": "Smith",
        "revised_snippet": "Smith et al.",
    }


def category_corpus(order: float, comparison: float, description: float, n: int = 100):
    """``n`` documents whose per-document category counts average to the given means.

    Returns the corpus and a scripted backend answering each document's prompt.
    """
    totals = {k: round(v * n) for k, v in (("order", order), ("comparison", comparison), ("description", description))}
    corpus, replies = [], {}
    for i in range(n):
        doc_id = f"doc-{i:03d}"
        corpus.append(CorpusRecord(doc_id, f"Document {i} discusses Smith and Jones.", f"Reference {i}."))
        edits = []
        for kind, total in totals.items():
            per_doc = total // n + (1 if i < total % n else 0)
            edits += [_edit(kind)] * per_doc
        replies[doc_id] = json.dumps(edits)
    return corpus, lambda request: replies[request.document_id]


def pair_corpus(distances: list[tuple[int, int]]):
    """Preference pairs with scripted edit counts for chosen and rejected texts."""
    pairs, replies = [], {}
    for i, (n_chosen, n_rejected) in enumerate(distances):
        pair = PreferencePair(f"p{i}", f"chosen text {i} with Smith", f"rejected text {i} with Smith")
        pairs.append(pair)
        replies[f"p{i}/chosen"] = json.dumps([_edit("description")] * n_chosen)
        replies[f"p{i}/rejected"] = json.dumps([_edit("description")] * n_rejected)
    return pairs, ScriptedBackend(lambda request: replies[request.document_id])
