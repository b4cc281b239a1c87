"""JSON and Markdown renderings of run, comparison and agreement reports."""

from __future__ import annotations

import json
import re
from typing import Any

from .edits import DocumentEval, EditCategory
from .harness import AgreementReport, ComparisonReport, RunReport

METRIC_LABELS = {
    "revision_distance": "D_Revision",
    "rouge1": "ROUGE-1",
    "rouge2": "ROUGE-2",
    "rougeL": "ROUGE-L",
    "gpt_score": "GPT-Score",
}


def to_json(report: RunReport | ComparisonReport | AgreementReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _num(value: float | None, digits: int = 2) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def _pct(value: float | None) -> str:
    return "undefined" if value is None else f"{value:+.1f}%"


def _fenced(text: str) -> str:
    longest = max((len(m) for m in re.findall(r"`+", text)), default=0)
    fence = "`" * max(3, longest + 1)
    return f"{fence}text\n{text}\n{fence}"


def _cell(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def _header(config: dict[str, Any], generated_at: str | None) -> list[str]:
    lines = [
        f"- Mode: {config.get('mode', 'n/a')}",
        f"- Metrics: {', '.join(config.get('metrics', []))}",
    ]
    if "model" in config:
        lines.append(
            f"- Model: {config['model']} ({config.get('backend', '?')} backend, "
            f"temperature {config.get('temperature')})"
        )
    lines.append(f"- Prompt templates: {config.get('template_version', 'n/a')}")
    if config.get("task_hint"):
        lines.append(f"- Task hint: {config['task_hint']}")
    if generated_at:
        lines.append(f"- Generated: {generated_at}")
    return lines


def _document_section(doc: DocumentEval, heading: str = "###") -> list[str]:
    lines = []
    if doc.edits is None:
        lines.append(f"{heading} {doc.document_id}")
    else:
        lines.append(f"{heading} {doc.document_id}: D_Revision {doc.revision_distance}")
        counts = doc.category_counts
        lines += ["", "Categories: " + ", ".join(f"{c.value} {counts[c]}" for c in EditCategory)]
    if doc.baseline_scores:
        lines += [
            "",
            "Baselines: "
            + ", ".join(f"{METRIC_LABELS.get(k, k)} {_num(v)}" for k, v in doc.baseline_scores.items()),
        ]
    notes = []
    if doc.diagnostics.get("retries"):
        notes.append(f"{doc.diagnostics['retries']} corrective retry")
    if doc.diagnostics.get("dropped_elements"):
        notes.append(f"{len(doc.diagnostics['dropped_elements'])} malformed elements dropped")
    if "truncated_from" in doc.diagnostics:
        notes.append(f"truncated from {doc.diagnostics['truncated_from']} edits")
    if notes:
        lines += ["", "Notes: " + "; ".join(notes)]
    for i, grounded in enumerate(doc.edits or (), 1):
        edit = grounded.edit
        tags = [grounded.category.value]
        if edit.revision_level:
            tags.append(f"level: {edit.revision_level}")
        if edit.revision_intention:
            tags.append(f"intention: {edit.revision_intention}")
        if not grounded.grounded:
            tags.append("UNGROUNDED")
        lines += ["", f"{i}. **{edit.action_name}** ({'; '.join(tags)})"]
        if edit.revision_description:
            lines += ["", f"   {edit.revision_description}"]
        before = edit.original_snippet or "(insertion)"
        after = edit.revised_snippet or "(deletion)"
        lines += ["", "   Before:", ""]
        lines += ["   " + row for row in _fenced(before).split("\n")]
        lines += ["", "   After:", ""]
        lines += ["   " + row for row in _fenced(after).split("\n")]
    lines.append("")
    return lines


def run_report_markdown(report: RunReport) -> str:
    lines = ["# Revision Distance report", ""]
    lines += _header(report.config, report.generated_at)
    lines += ["", "## Documents", ""]
    for doc in report.documents:
        lines += _document_section(doc)

    lines += ["## Aggregates", "", "| Metric | Mean |", "| --- | ---: |"]
    if report.mean_revision_distance is not None:
        lines.append(f"| D_Revision (lower is better) | {_num(report.mean_revision_distance)} |")
        for name, value in report.mean_category_counts.items():
            lines.append(f"| {name} edits | {_num(value)} |")
    for metric, value in report.mean_baselines.items():
        lines.append(f"| {METRIC_LABELS.get(metric, metric)} | {_num(value)} |")

    diag = report.diagnostics
    lines += [
        "",
        f"Documents evaluated: {diag['documents_evaluated']} of {diag['documents_total']}",
        f"Corrective retries: {diag['retries']}; ungrounded edits: {diag['ungrounded_edits']}; "
        f"dropped elements: {diag['dropped_elements']}",
    ]
    if diag["truncated_documents"]:
        lines.append("Truncated: " + ", ".join(diag["truncated_documents"]))
    if diag["failures"]:
        lines += ["", "### Failures", ""]
        lines += [f"- {f['document_id']}: {f['error']}" for f in diag["failures"]]
    return "\n".join(lines) + "\n"


def comparison_markdown(report: ComparisonReport) -> str:
    lines = [
        "# Weak vs strong comparison",
        "",
        f"Relative change convention: {report.convention} "
        "(positive means the strong run is better, for every metric).",
        "",
        "| Metric | Weak | Strong | Direction | Change | Change (strong denominator) |",
        "| --- | ---: | ---: | --- | ---: | ---: |",
    ]
    for row in report.rows:
        arrow = "↑" if row.higher_is_better else "↓"
        marker = {"improvement": "▲ ", "decline": "▼ "}.get(row.direction or "", "")
        lines.append(
            f"| {METRIC_LABELS.get(row.metric, row.metric)} {arrow} | {_num(row.weak)} | {_num(row.strong)} "
            f"| {marker}{row.direction or 'n/a'} | {_pct(row.relative_change)} "
            f"| {_pct(row.relative_change_strong_denominator)} |"
        )
    return "\n".join(lines) + "\n"


def agreement_summary(report: AgreementReport) -> str:
    rate = report.agreement_rate
    if report.tie_policy == "exclude":
        if rate is None:
            return f"0/0 decidable (agreement rate undefined; {report.ties} ties excluded)"
        return f"{report.agreements}/{report.denominator} decidable pairs agree ({rate * 100:.1f}%)"
    if rate is None:
        return "0/0 agree (agreement rate undefined)"
    return f"{report.agreements}/{report.total_pairs} agree ({rate * 100:.1f}%)"


def agreement_markdown(report: AgreementReport) -> str:
    lines = ["# Reference-free pairwise agreement", ""]
    lines += _header(report.config, report.generated_at)
    lines += [
        f"- Tie policy: {report.tie_policy}",
        "",
        f"**{agreement_summary(report)}**",
        "",
    ]
    if report.agreement_rate is not None:
        lines.append(f"Agreement rate: {report.agreement_rate:.4f} (about {report.agreement_rate:.0%})")
    lines += [
        f"Pairs: {report.total_pairs}; agreements: {report.agreements}; ties: {report.ties}; "
        f"failed: {len(report.failures)}",
        "",
        "| Pair | D(chosen) | D(rejected) | Outcome |",
        "| --- | ---: | ---: | --- |",
    ]
    for pair in report.pairs:
        lines.append(
            f"| {_cell(pair.pair_id)} | {pair.chosen.revision_distance} "
            f"| {pair.rejected.revision_distance} | {pair.outcome} |"
        )
    if report.failures:
        lines += ["", "## Failures", ""]
        lines += [f"- {f['pair_id']}: {f['error']}" for f in report.failures]
    return "\n".join(lines) + "\n"


def rouge_text(scores: dict[str, float]) -> str:
    return "".join(f"{METRIC_LABELS[k]}: {scores[k]:.2f}\n" for k in ("rouge1", "rouge2", "rougeL"))
