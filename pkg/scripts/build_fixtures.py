#!/usr/bin/env python3
"""Regenerate the synthetic fixture corpora and their replay transcripts.

Transcripts are keyed by request fingerprints, which depend on the prompt
templates: rerun this after editing a template, then refresh the golden
report (see README).

    python scripts/build_fixtures.py [fixtures-dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from revdist.llm import build_gpt_score_prompt, build_revision_prompt, fingerprint
from revdist.llm.prompts import PromptRequest
from revdist.llm.proxy import CORRECTIVE_SUFFIX

MODEL = "gpt-4"
TEMPERATURE = 0.0

STS_HUMAN = (
    "To deal with the STS task, previous studies have resorted to various features (e.g. word "
    "overlap, synonym/antonym), linguistic resources (e.g. WordNet and pre-trained word "
    "embeddings) and a wide assortment of learning algorithms (e.g. Support Vector Regression "
    "(SVR), regression functions and NNs). Among these works, several techniques extract "
    "multiple features of sentences and apply regression functions to estimate these similarity "
    "scores (Lai & Hockenmaier, 2014; Zhao et al., 2014; Bjerva et al., 2014; Severyn et al., "
    "2013). Lai & Hockenmaier (2014) analyzed distinctive word relations (e.g. synonyms, "
    "antonyms, and hyperonyms) with features based on counts of co-occurences with other words "
    "and similarities between captions of images. Zhao et al. (2014) predicted the sentence "
    "similarity from syntactic relationship, distinctive content similitudes, length and string "
    "features. Bjerva et al. (2014) also utilized a regression algorithm to foresee the STS from "
    "different features (WordNet, word overlap, and so forth). Finally, Severyn et al. (2013) "
    "combined relational syntactic structures with SVR."
)

STS_DRAFT = (
    "Semantic Textual Similarity (STS), the task of measuring the degree of semantic equivalence "
    "between two pieces of text, has been extensively explored in the literature. The development "
    "of compositional distributional semantic models (CDSMs) forms an integral part of STS "
    "investigations, which employ meaning-rich computational systems to better understand and "
    "quantify semantic relatedness. The work done by Marelli et al. went a step further, focusing "
    "on producing a large English benchmark, SICK, for the deep evaluation of CDSMs, "
    "significantly contributing to the body of tools available for STS analysis."
)

STS_EDIT = {
    "action_name": "simplify",
    "revision_description": (
        "Simplified the text by removing details regarding CDSMs and the inclusion of the SICK benchmark."
    ),
    "revision_level": "reference",
    "revision_intention": "simplify",
    # The quoted snippet carries a double space, as the model reproduced it.
    "original_snippet": STS_DRAFT.replace("Marelli et al. went", "Marelli et al.  went"),
    "revised_snippet": (
        "In the broad field of Semantic Textual Similarity (STS), earlier works have explored "
        "numerous computational models to comprehend and quantify the semantic relatedness between texts."
    ),
}

ORDER_HUMAN = "First, Authors A proposed a BERT-based method. Second, Authors B proposed a GPT-based method."
ORDER_DRAFT = "First, Authors B proposed a GPT-based method. Second, Authors A proposed a BERT-based method."

EMAIL_DRAFT = (
    "Dear Ms. Patel,\n\nI hope this message finds you well. I am writing to let you know that the "
    "quarterly report will be delayed by a few days because of missing sales figures. I will "
    "send it as soon as possible.\n\nBest regards,\nJordan"
)
EMAIL_REFERENCE = (
    "Dear Ms. Patel,\n\nThe quarterly report will be two days late: the March sales figures from "
    "the northern region arrived this morning and still need checking. You will have the full "
    "report by Thursday noon.\n\nBest regards,\nJordan"
)

LETTER_DRAFT = (
    "To the hiring committee,\n\nI am pleased to recommend Sam Ortiz for the research assistant "
    "position. Sam worked in my lab for two years and was reliable and curious."
)
LETTER_REFERENCE = (
    "To the hiring committee,\n\nI am pleased to recommend Sam Ortiz for the research assistant "
    "position. Sam worked in my lab for two years, ran our survey pipeline on her own, and was "
    "reliable and curious."
)

ARTICLE_DRAFT = "Urban gardens cool city blocks, feed neighbours and bring people together."


def _fence(edits: list[dict]) -> str:
    return "Here are the revision edits:\n```json\n" + json.dumps(edits, indent=2) + "\n```"


def reference_corpus() -> list[tuple[dict, list[tuple[str, str | None]]]]:
    """Records with the replies the proxy user gives (reply, optional retry reply)."""
    order_edit = {
        "action_name": "Reorder",
        "revision_description": "Reordered the sequence of references to match the human-written text",
        "revision_level": "reference",
        "revision_intention": "restructure",
        "original_snippet": ORDER_DRAFT,
        "revised_snippet": ORDER_HUMAN,
    }
    sts_compare = {
        "action_name": "add_comparison",
        "revision_description": "Contrast the regression-based systems instead of describing CDSMs.",
        "revision_level": "reference",
        "revision_intention": "compare",
        "original_snippet": "",
        "revised_snippet": (
            "Among these works, several techniques extract multiple features of sentences and "
            "apply regression functions to estimate similarity scores."
        ),
    }
    email_edits = [
        {
            "action_name": "clarify",
            "revision_description": "State the exact delay and the reason the reference gives.",
            "revision_level": "sentence",
            "revision_intention": "clarify",
            "original_snippet": "will be delayed by a few days because of missing sales figures",
            "revised_snippet": (
                "will be two days late: the March sales figures from the northern region "
                "arrived this morning and still need checking"
            ),
        },
        {
            "action_name": "rewrite",
            "revision_description": "Commit to a concrete delivery time.",
            "revision_level": "sentence",
            "revision_intention": "specify",
            "original_snippet": "I will send it as soon as possible.",
            "revised_snippet": "You will have the full report by Thursday noon.",
        },
        {
            "action_name": "delete",
            "revision_description": "Drop the filler opening line.",
            "revision_level": "sentence",
            "revision_intention": "concision",
            "original_snippet": "I hope this message finds you well.",
            "revised_snippet": "",
        },
        {
            # Paraphrased snippet: counts, but is flagged as ungrounded.
            "action_name": "tone_adjust",
            "revision_description": "Sound less apologetic.",
            "revision_level": "paragraph",
            "revision_intention": "tone",
            "original_snippet": "I am sorry the report is late",
            "revised_snippet": "",
        },
    ]
    letter_edit = {
        "action_name": "elaborate",
        "revision_description": "Mention the survey pipeline Sam ran, as the reference does.",
        "revision_level": "sentence",
        "revision_intention": "expand",
        "original_snippet": "for two years and was reliable",
        "revised_snippet": "for two years, ran our survey pipeline on her own, and was reliable",
    }
    return [
        (
            {"document_id": "rw-sts", "draft": STS_DRAFT, "reference": STS_HUMAN, "task_label": "related_work"},
            [(_fence([STS_EDIT, sts_compare]), None)],
        ),
        (
            {"document_id": "rw-order", "draft": ORDER_DRAFT, "reference": ORDER_HUMAN, "task_label": "related_work"},
            [(json.dumps([order_edit]), None)],
        ),
        (
            {"document_id": "email-delay", "draft": EMAIL_DRAFT, "reference": EMAIL_REFERENCE, "task_label": "email"},
            # Trailing comma and a missing optional field in the second element.
            [("[\n" + ",\n".join(json.dumps(e) for e in email_edits) + ",\n]", None)],
        ),
        (
            {"document_id": "letter-recommend", "draft": LETTER_DRAFT, "reference": LETTER_REFERENCE, "task_label": "letter"},
            [("I would suggest a single change to the letter.", json.dumps([letter_edit]))],
        ),
        (
            {"document_id": "article-same", "draft": ARTICLE_DRAFT, "reference": ARTICLE_DRAFT, "task_label": "article"},
            [("```json\n[]\n```", None)],
        ),
    ]


GPT_SCORES = {"rw-sts": "72", "rw-order": "Score: 96/100.", "email-delay": "81", "letter-recommend": "88", "article-same": "100"}

TOPICS = [
    "a thank-you note to a mentor", "an apology email to a customer", "a product announcement",
    "a cover letter for a data analyst role", "a complaint about a late delivery", "a wedding toast",
    "a school newsletter item", "a meeting reminder", "a farewell message to a colleague",
    "a landlord repair request", "a short blog intro on composting", "a conference talk abstract",
    "a volunteer recruitment post", "a museum exhibit blurb", "a refund request",
    "a neighbourhood clean-up invitation", "a book club summary", "a project status update",
    "a scholarship personal statement", "a bakery opening announcement", "a reference request",
    "a travel itinerary email", "a fundraising appeal", "a product review", "an out-of-office reply",
    "a welcome email for new members", "a library policy notice", "a condolence note",
    "a job offer acceptance", "a podcast episode description", "a hiking trip invitation",
    "a software release note", "a lost pet notice", "a team shout-out", "a course syllabus intro",
    "a restaurant reservation change", "a press release lead", "a birthday invitation",
    "a grant progress report opening", "a customer onboarding tip", "a recipe introduction",
]


def preference_outcomes() -> list[tuple[int, int]]:
    """(chosen edits, rejected edits): 31 chosen wins, 6 losses, 4 ties."""
    wins = [(i % 3, i % 3 + 1 + i % 2) for i in range(31)]
    losses = [(2 + i % 2, 1 + i % 2) for i in range(6)]
    ties = [(i % 3, i % 3) for i in range(4)]
    order = wins + losses + ties
    # Interleave so outcomes are not grouped by file position.
    return [order[(i * 17) % 41] for i in range(41)]


def _sentences(topic: str, flavour: str) -> list[str]:
    if flavour == "chosen":
        return [
            f"This is {topic}, written with a clear purpose.",
            "It states the key details up front and keeps a friendly tone.",
            "Every sentence earns its place.",
            "It closes with a specific next step.",
        ]
    return [
        f"So this is kind of {topic} I guess.",
        "There are some details somewhere and it goes on for a while about things.",
        "Some sentences repeat what was already said before.",
        "It just ends without saying what happens next.",
    ]


def _edits_for(sentences: list[str], count: int) -> list[dict]:
    return [
        {
            "action_name": ("rephrase", "condense", "clarify")[k % 3],
            "revision_description": f"Tighten sentence {k + 1}.",
            "revision_level": "sentence",
            "revision_intention": "clarity",
            "original_snippet": sentences[k],
            "revised_snippet": sentences[k].replace("kind of ", "").replace("I guess", "").strip() + " (revised)",
        }
        for k in range(count)
    ]


def preference_corpus() -> list[tuple[dict, str, str]]:
    rows = []
    for i, (topic, (n_chosen, n_rejected)) in enumerate(zip(TOPICS, preference_outcomes())):
        chosen = _sentences(topic, "chosen")
        rejected = _sentences(topic, "rejected")
        pair = {
            "pair_id": f"uf-{i + 1:02d}",
            "prompt": f"Write {topic}.",
            "chosen": " ".join(chosen),
            "rejected": " ".join(rejected),
        }
        rows.append((pair, json.dumps(_edits_for(chosen, n_chosen)), json.dumps(_edits_for(rejected, n_rejected))))
    return rows


def _record(request: PromptRequest, response: str) -> dict:
    return {
        "fingerprint": fingerprint(request, MODEL, TEMPERATURE),
        "template_id": request.template_id,
        "model": MODEL,
        "temperature": TEMPERATURE,
        "response": response,
    }


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")


def main(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)

    corpus, transcript = [], []
    for record, replies in reference_corpus():
        corpus.append(record)
        request = build_revision_prompt(record["draft"], record["reference"], document_id=record["document_id"])
        first, retry = replies[0]
        transcript.append(_record(request, first))
        if retry is not None:
            transcript.append(_record(request.with_suffix(CORRECTIVE_SUFFIX), retry))
        score_request = build_gpt_score_prompt(record["draft"], record["reference"], document_id=record["document_id"])
        transcript.append(_record(score_request, GPT_SCORES[record["document_id"]]))
    _write_jsonl(out_dir / "reference_corpus.jsonl", corpus)
    _write_jsonl(out_dir / "reference_corpus.transcript.jsonl", transcript)

    pairs, transcript = [], []
    for pair, chosen_reply, rejected_reply in preference_corpus():
        pairs.append(pair)
        for text, reply in ((pair["chosen"], chosen_reply), (pair["rejected"], rejected_reply)):
            transcript.append(_record(build_revision_prompt(text, None, pair["prompt"]), reply))
    _write_jsonl(out_dir / "preference_41.jsonl", pairs)
    _write_jsonl(out_dir / "preference_41.transcript.jsonl", transcript)

    (out_dir / "reorder_human.txt").write_text(ORDER_HUMAN + "\n", encoding="utf-8")
    (out_dir / "reorder_draft.txt").write_text(ORDER_DRAFT + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures")
