"""Experiment orchestration: corpus runs, weak/strong comparison, pairwise agreement.

Documents are evaluated on a thread pool but always collected in corpus
order, and means use ``math.fsum``, so reports do not depend on worker
count or scheduling.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, TypeVar

from .config import METRICS, ROUGE_METRICS, ConfigError, RunConfig, load_keyword_table
from .corpus import CorpusRecord, PreferencePair
from .edits import DEFAULT_KEYWORDS, DocumentEval, EditCategory, evaluate_edits
from .judge import gpt_score
from .llm.backends import BackendError, LLMBackend
from .llm.extraction import ParseError
from .llm.prompts import TemplateSet
from .llm.proxy import generate_revision_edits
from .rouge import rouge_scores

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "revdist-report/1"
COMPARISON_SCHEMA = "revdist-comparison/1"
AGREEMENT_SCHEMA = "revdist-agreement/1"
RELATIVE_CHANGE_CONVENTION = "weak-denominator"

HIGHER_IS_BETTER = {
    "revision_distance": False,
    "rouge1": True,
    "rouge2": True,
    "rougeL": True,
    "gpt_score": True,
}

T = TypeVar("T")
R = TypeVar("R")


def _mean(values: Sequence[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class RunReport:
    config: dict[str, Any]
    documents: list[DocumentEval]
    mean_revision_distance: float | None
    mean_category_counts: dict[str, float]
    mean_baselines: dict[str, float]
    diagnostics: dict[str, Any]
    generated_at: str | None = None

    @property
    def metrics(self) -> tuple[str, ...]:
        return tuple(self.config.get("metrics", ()))

    def metric_means(self) -> dict[str, float | None]:
        means: dict[str, float | None] = {}
        for metric in self.metrics:
            if metric == "revision_distance":
                means[metric] = self.mean_revision_distance
            else:
                means[metric] = self.mean_baselines.get(metric)
        return means

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "generated_at": self.generated_at,
            "config": self.config,
            "documents": [d.to_dict() for d in self.documents],
            "aggregates": {
                "documents": len(self.documents),
                "mean_revision_distance": self.mean_revision_distance,
                "mean_category_counts": self.mean_category_counts,
                "mean_baselines": self.mean_baselines,
            },
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunReport:
        if data.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"not a {REPORT_SCHEMA} document (schema={data.get('schema')!r})")
        aggregates = data["aggregates"]
        return cls(
            config=dict(data["config"]),
            documents=[DocumentEval.from_dict(d) for d in data["documents"]],
            mean_revision_distance=aggregates["mean_revision_distance"],
            mean_category_counts=dict(aggregates["mean_category_counts"]),
            mean_baselines=dict(aggregates["mean_baselines"]),
            diagnostics=dict(data["diagnostics"]),
            generated_at=data.get("generated_at"),
        )


def aggregate(
    config: Mapping[str, Any],
    documents: Sequence[DocumentEval],
    failures: Sequence[Mapping[str, str]] = (),
) -> RunReport:
    """Build a report from evaluated documents; failed ones only appear in diagnostics."""
    scored = [d for d in documents if d.edits is not None]
    mean_rd = _mean([d.revision_distance for d in scored]) if scored else None
    mean_categories: dict[str, float] = {}
    if scored:
        for category in EditCategory:
            mean_categories[category.value] = _mean([d.category_counts[category] for d in scored])
    mean_baselines: dict[str, float] = {}
    for metric in METRICS:
        values = [d.baseline_scores[metric] for d in documents if metric in d.baseline_scores]
        if values:
            mean_baselines[metric] = _mean(values)
    diagnostics = {
        "documents_total": len(documents) + len(failures),
        "documents_evaluated": len(documents),
        "failures": [dict(f) for f in failures],
        "retries": sum(d.diagnostics.get("retries", 0) for d in documents),
        "truncated_documents": [d.document_id for d in documents if "truncated_from" in d.diagnostics],
        "dropped_elements": sum(len(d.diagnostics.get("dropped_elements", ())) for d in documents),
        "ungrounded_edits": sum(d.ungrounded_count for d in documents),
    }
    return RunReport(
        config=dict(config),
        documents=list(documents),
        mean_revision_distance=mean_rd,
        mean_category_counts=mean_categories,
        mean_baselines=mean_baselines,
        diagnostics=diagnostics,
    )


class _Evaluator:
    """Shared state for one run: config, backend, templates, keyword table."""

    def __init__(
        self,
        config: RunConfig,
        backend: LLMBackend | None,
        keywords: Mapping[EditCategory, Iterable[str]] | None,
        templates: TemplateSet | None,
    ) -> None:
        needs_llm = {"revision_distance", "gpt_score"} & set(config.metrics)
        if needs_llm and backend is None:
            raise ConfigError(f"metrics {sorted(needs_llm)} need an LLM backend")
        self.config = config
        self.backend = backend
        if keywords is None:
            keywords = load_keyword_table(config.keywords_file) if config.keywords_file else DEFAULT_KEYWORDS
        self.keywords = {c: tuple(k) for c, k in keywords.items()}
        self.templates = templates or TemplateSet(config.template_version, config.templates_dir)

    def report_config(self) -> dict[str, Any]:
        out = self.config.to_report_dict()
        out["template_version"] = self.templates.version
        out["category_keywords"] = {c.value: list(k) for c, k in self.keywords.items()}
        if self.backend is not None:
            out["backend"] = self.backend.kind
            out["model"] = self.backend.model_name
            out["temperature"] = self.backend.temperature
        return out

    def document(
        self, document_id: str, draft: str, reference: str | None, task_hint: str | None
    ) -> DocumentEval:
        metrics = self.config.metrics
        scores: dict[str, float] = {}
        if reference is not None and any(m in ROUGE_METRICS for m in metrics):
            scores.update({k: v for k, v in rouge_scores(draft, reference).items() if k in metrics})
        if "gpt_score" in metrics:
            scores["gpt_score"] = gpt_score(
                draft,
                reference,
                self.backend,
                templates=self.templates,
                samples=self.config.gpt_score_samples,
                document_id=document_id,
            ).value
        if "revision_distance" not in metrics:
            return DocumentEval(document_id, baseline_scores=scores)
        result = generate_revision_edits(
            self.backend,
            draft,
            reference,
            task_hint,
            document_id=document_id,
            templates=self.templates,
            max_edits=self.config.max_edits,
        )
        return evaluate_edits(
            document_id, draft, result.edits, self.keywords, scores, result.diagnostics()
        )

    def guarded(self, item_id: str, fn: Callable[[], T]) -> T | dict[str, str]:
        try:
            return fn()
        except (BackendError, ParseError) as exc:
            if self.config.fail_fast:
                raise
            logger.warning("%s failed: %s", item_id, exc)
            return {"id": item_id, "error": f"{type(exc).__name__}: {exc}"}


def _run(
    corpus: Sequence[CorpusRecord],
    config: RunConfig,
    backend: LLMBackend | None,
    keywords: Mapping[EditCategory, Iterable[str]] | None,
    templates: TemplateSet | None,
) -> RunReport:
    evaluator = _Evaluator(config, backend, keywords, templates)
    use_reference = config.mode == "reference_based"

    def work(record: CorpusRecord) -> DocumentEval | dict[str, str]:
        reference = record.reference if use_reference else None
        return evaluator.guarded(
            record.document_id,
            lambda: evaluator.document(record.document_id, record.draft, reference, config.task_hint),
        )

    results = _ordered_map(work, corpus, config.worker_count)
    documents = [r for r in results if isinstance(r, DocumentEval)]
    failures = [{"document_id": r["id"], "error": r["error"]} for r in results if isinstance(r, dict)]
    return aggregate(evaluator.report_config(), documents, failures)


def run_reference_based(
    corpus: Sequence[CorpusRecord],
    config: RunConfig,
    backend: LLMBackend | None = None,
    *,
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
    templates: TemplateSet | None = None,
) -> RunReport:
    if config.mode != "reference_based":
        raise ConfigError("run_reference_based needs mode = reference_based")
    missing = [r.document_id for r in corpus if r.reference is None]
    if missing:
        shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        raise ConfigError(f"{len(missing)} records have no reference: {shown}")
    return _run(corpus, config, backend, keywords, templates)


def run_reference_free(
    corpus: Sequence[CorpusRecord],
    config: RunConfig,
    backend: LLMBackend,
    *,
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
    templates: TemplateSet | None = None,
) -> RunReport:
    """Single-corpus evaluation against the model's implicit ideal; references are ignored."""
    if config.mode != "reference_free":
        raise ConfigError("run_reference_free needs mode = reference_free")
    return _run(corpus, config, backend, keywords, templates)


def run_corpus(corpus: Sequence[CorpusRecord], config: RunConfig, backend: LLMBackend | None = None, **kwargs: Any) -> RunReport:
    if config.mode == "reference_based":
        return run_reference_based(corpus, config, backend, **kwargs)
    return run_reference_free(corpus, config, backend, **kwargs)


# -- weak vs strong ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    weak: float | None
    strong: float | None
    higher_is_better: bool

    @property
    def relative_change(self) -> float | None:
        """Percent change, positive meaning improvement, over the weak value."""
        return _relative_change(self.weak, self.strong, self.weak, self.higher_is_better)

    @property
    def relative_change_strong_denominator(self) -> float | None:
        return _relative_change(self.weak, self.strong, self.strong, self.higher_is_better)

    @property
    def direction(self) -> str | None:
        if self.weak is None or self.strong is None:
            return None
        gain = self.strong - self.weak if self.higher_is_better else self.weak - self.strong
        if gain > 0:
            return "improvement"
        if gain < 0:
            return "decline"
        return "unchanged"

    def to_dict(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "weak": self.weak,
            "strong": self.strong,
            "higher_is_better": self.higher_is_better,
            "relative_change_percent": self.relative_change,
            "relative_change_percent_strong_denominator": self.relative_change_strong_denominator,
            "direction": self.direction,
        }


def _relative_change(
    weak: float | None, strong: float | None, denominator: float | None, higher_is_better: bool
) -> float | None:
    if weak is None or strong is None or not denominator:
        return None
    gain = strong - weak if higher_is_better else weak - strong
    return gain / denominator * 100.0


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    weak_config: dict[str, Any] = field(default_factory=dict)
    strong_config: dict[str, Any] = field(default_factory=dict)
    convention: str = RELATIVE_CHANGE_CONVENTION

    def row(self, metric: str) -> ComparisonRow:
        return next(r for r in self.rows if r.metric == metric)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": COMPARISON_SCHEMA,
            "relative_change_convention": self.convention,
            "weak_config": self.weak_config,
            "strong_config": self.strong_config,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ComparisonReport:
        return cls(
            rows=[
                ComparisonRow(r["metric"], r["weak"], r["strong"], r["higher_is_better"])
                for r in data["rows"]
            ],
            weak_config=dict(data.get("weak_config", {})),
            strong_config=dict(data.get("strong_config", {})),
            convention=data.get("relative_change_convention", RELATIVE_CHANGE_CONVENTION),
        )


def compare_means(weak: Mapping[str, float | None], strong: Mapping[str, float | None]) -> list[ComparisonRow]:
    if set(weak) != set(strong):
        raise ConfigError(f"metric sets differ: weak {sorted(weak)} vs strong {sorted(strong)}")
    order = [m for m in METRICS if m in weak] + sorted(m for m in weak if m not in METRICS)
    return [ComparisonRow(m, weak[m], strong[m], HIGHER_IS_BETTER.get(m, True)) for m in order]


def compare_runs(weak: RunReport, strong: RunReport) -> ComparisonReport:
    return ComparisonReport(
        rows=compare_means(weak.metric_means(), strong.metric_means()),
        weak_config=weak.config,
        strong_config=strong.config,
    )


# -- reference-free pairwise agreement ----------------------------------------


@dataclass(frozen=True)
class PairOutcome:
    pair_id: str
    chosen: DocumentEval
    rejected: DocumentEval

    @property
    def outcome(self) -> str:
        c, r = self.chosen.revision_distance, self.rejected.revision_distance
        if c < r:
            return "agree"
        if c > r:
            return "disagree"
        return "tie"

    def to_dict(self) -> dict[str, Any]:
        return {
            "pair_id": self.pair_id,
            "chosen_distance": self.chosen.revision_distance,
            "rejected_distance": self.rejected.revision_distance,
            "outcome": self.outcome,
            "chosen": self.chosen.to_dict(),
            "rejected": self.rejected.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PairOutcome:
        return cls(
            data["pair_id"],
            DocumentEval.from_dict(data["chosen"]),
            DocumentEval.from_dict(data["rejected"]),
        )


@dataclass
class AgreementReport:
    pairs: list[PairOutcome]
    tie_policy: str = "count_as_disagreement"
    failures: list[dict[str, str]] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    generated_at: str | None = None

    @property
    def total_pairs(self) -> int:
        return len(self.pairs)

    @property
    def agreements(self) -> int:
        return sum(p.outcome == "agree" for p in self.pairs)

    @property
    def ties(self) -> int:
        return sum(p.outcome == "tie" for p in self.pairs)

    @property
    def denominator(self) -> int:
        return self.total_pairs - self.ties if self.tie_policy == "exclude" else self.total_pairs

    @property
    def agreement_rate(self) -> float | None:
        if not self.denominator:
            return None
        credit = 0.5 * self.ties if self.tie_policy == "count_as_half" else 0.0
        return (self.agreements + credit) / self.denominator

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": AGREEMENT_SCHEMA,
            "generated_at": self.generated_at,
            "config": self.config,
            "summary": {
                "total_pairs": self.total_pairs,
                "agreements": self.agreements,
                "ties": self.ties,
                "decidable": self.denominator,
                "tie_policy": self.tie_policy,
                "agreement_rate": self.agreement_rate,
            },
            "pairs": [p.to_dict() for p in self.pairs],
            "failures": self.failures,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AgreementReport:
        return cls(
            pairs=[PairOutcome.from_dict(p) for p in data["pairs"]],
            tie_policy=data["summary"]["tie_policy"],
            failures=[dict(f) for f in data.get("failures", [])],
            config=dict(data.get("config", {})),
            generated_at=data.get("generated_at"),
        )


def run_preference_agreement(
    pairs: Sequence[PreferencePair],
    config: RunConfig,
    backend: LLMBackend,
    *,
    keywords: Mapping[EditCategory, Iterable[str]] | None = None,
    templates: TemplateSet | None = None,
) -> AgreementReport:
    """Score chosen and rejected responses reference-free; agreement iff chosen needs fewer edits."""
    if config.mode != "reference_free":
        raise ConfigError("preference agreement needs mode = reference_free")
    if "revision_distance" not in config.metrics:
        raise ConfigError("preference agreement needs the revision_distance metric")
    evaluator = _Evaluator(config.replace(metrics=("revision_distance",)), backend, keywords, templates)

    def work(pair: PreferencePair) -> PairOutcome | dict[str, str]:
        hint = pair.prompt or config.task_hint

        def both() -> PairOutcome:
            chosen = evaluator.document(f"{pair.pair_id}/chosen", pair.chosen, None, hint)
            rejected = evaluator.document(f"{pair.pair_id}/rejected", pair.rejected, None, hint)
            return PairOutcome(pair.pair_id, chosen, rejected)

        return evaluator.guarded(pair.pair_id, both)

    results = _ordered_map(work, pairs, config.worker_count)
    return AgreementReport(
        pairs=[r for r in results if isinstance(r, PairOutcome)],
        tie_policy=config.tie_policy,
        failures=[{"pair_id": r["id"], "error": r["error"]} for r in results if isinstance(r, dict)],
        config=evaluator.report_config(),
    )
