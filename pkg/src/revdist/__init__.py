"""Revision Distance: count the edits an LLM proxy user would make to a draft."""

from .corpus import CorpusRecord, PreferencePair, load_preference_corpus, load_reference_corpus
from .edits import (
    DocumentEval,
    EditCategory,
    GroundedEdit,
    RevisionEdit,
    apply_edits,
    categorize_edit,
    count_revision_distance,
    ground_edit,
)
from .harness import (
    AgreementReport,
    ComparisonReport,
    RunReport,
    compare_runs,
    run_preference_agreement,
    run_reference_based,
    run_reference_free,
)
from .rouge import MetricScore, rouge_l, rouge_n, tokenize

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "ComparisonReport",
    "CorpusRecord",
    "DocumentEval",
    "EditCategory",
    "GroundedEdit",
    "MetricScore",
    "PreferencePair",
    "RevisionEdit",
    "RunReport",
    "apply_edits",
    "categorize_edit",
    "compare_runs",
    "count_revision_distance",
    "ground_edit",
    "load_preference_corpus",
    "load_reference_corpus",
    "rouge_l",
    "rouge_n",
    "run_preference_agreement",
    "run_reference_based",
    "run_reference_free",
    "tokenize",
]
