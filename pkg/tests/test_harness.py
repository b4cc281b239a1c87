import json
import math
import random

import pytest

from revdist.config import ConfigError, RunConfig
from revdist.corpus import CorpusRecord
from revdist.harness import (
    AgreementReport,
    ComparisonReport,
    RunReport,
    compare_means,
    compare_runs,
    run_preference_agreement,
    run_reference_based,
    run_reference_free,
)
from revdist.llm import BackendError, ScriptedBackend

from builders import category_corpus, pair_corpus

RD_ONLY = RunConfig(metrics=("revision_distance",))
FREE = RunConfig(mode="reference_free", metrics=("revision_distance",))


def test_category_means():
    corpus, responder = category_corpus(0.80, 0.84, 2.29)
    report = run_reference_based(corpus, RD_ONLY, ScriptedBackend(responder))
    assert report.mean_revision_distance == pytest.approx(3.93)
    assert report.mean_category_counts == pytest.approx(
        {"Order": 0.80, "Comparison": 0.84, "Description": 2.29, "Other": 0.0}
    )
    assert math.fsum(report.mean_category_counts.values()) == pytest.approx(report.mean_revision_distance)


def test_cot_row_sums_to_374():
    corpus, responder = category_corpus(0.67, 0.71, 2.36)
    report = run_reference_based(corpus, RD_ONLY, ScriptedBackend(responder))
    assert report.mean_revision_distance == pytest.approx(3.74)


def test_empty_corpus():
    report = run_reference_based([], RD_ONLY, ScriptedBackend([]))
    assert report.documents == []
    assert report.mean_revision_distance is None
    assert report.mean_category_counts == {} and report.mean_baselines == {}


def test_rouge_only_needs_no_backend():
    corpus = [CorpusRecord("a", "the cat sat", "the cat")]
    report = run_reference_based(corpus, RunConfig(metrics=("rouge1", "rougeL")))
    assert report.mean_baselines == {"rouge1": pytest.approx(80.0), "rougeL": pytest.approx(80.0)}
    assert report.mean_revision_distance is None


def test_missing_reference_is_config_error():
    with pytest.raises(ConfigError, match="no reference"):
        run_reference_based([CorpusRecord("a", "draft")], RD_ONLY, ScriptedBackend([]))


def test_llm_metric_without_backend():
    with pytest.raises(ConfigError):
        run_reference_based([CorpusRecord("a", "d", "r")], RD_ONLY, None)


def test_mode_mismatch():
    with pytest.raises(ConfigError):
        run_reference_free([], RD_ONLY, ScriptedBackend([]))


def test_failures_skipped_and_reported():
    corpus, responder = category_corpus(1, 0, 0, n=4)

    def flaky(request):
        if request.document_id == "doc-001":
            raise BackendError("boom", status=500)
        if request.document_id == "doc-002":
            return "no json here"
        return responder(request)

    report = run_reference_based(corpus, RD_ONLY, ScriptedBackend(flaky))
    assert [d.document_id for d in report.documents] == ["doc-000", "doc-003"]
    assert [f["document_id"] for f in report.diagnostics["failures"]] == ["doc-001", "doc-002"]
    assert report.diagnostics["failures"][1]["error"].startswith("ParseError")
    assert report.diagnostics["documents_total"] == 4
    assert report.mean_revision_distance == 1.0


def test_fail_fast():
    def boom(request):
        raise BackendError("down")

    with pytest.raises(BackendError):
        run_reference_based([CorpusRecord("a", "d", "r")], RunConfig(metrics=("revision_distance",), fail_fast=True), ScriptedBackend(boom))


def test_reference_free_ignores_reference():
    backend = ScriptedBackend(lambda r: "[]")
    run_reference_free([CorpusRecord("a", "draft", "secret reference")], FREE, backend)
    (request,) = backend.requests
    assert request.template_id == "revision_ref_free"
    assert "secret reference" not in request.rendered_prompt


def _random_corpus(seed):
    rnd = random.Random(seed)
    corpus, replies = [], {}
    for i in range(30):
        n = rnd.randint(0, 6)
        corpus.append(CorpusRecord(f"d{i}", f"text {i} alpha beta", f"ref {i}"))
        replies[f"d{i}"] = json.dumps(
            [{"action_name": rnd.choice(["reorder", "compare", "simplify", "other"]), "original_snippet": "alpha", "revised_snippet": "b"}] * n
        )
    return corpus, replies


def test_order_and_parallelism_independence():
    corpus, replies = _random_corpus(7)
    config = RunConfig(metrics=("revision_distance", "rouge1"))
    base = run_reference_based(corpus, config, ScriptedBackend(lambda r: replies[r.document_id]))
    shuffled = list(corpus)
    random.Random(1).shuffle(shuffled)
    for docs, workers in ((corpus, 4), (shuffled, 1), (shuffled, 3)):
        other = run_reference_based(
            docs, config.replace(worker_count=workers), ScriptedBackend(lambda r: replies[r.document_id])
        )
        assert other.mean_revision_distance == base.mean_revision_distance
        assert other.mean_category_counts == base.mean_category_counts
        assert other.mean_baselines == base.mean_baselines
    parallel = run_reference_based(corpus, config.replace(worker_count=4), ScriptedBackend(lambda r: replies[r.document_id], delay=0.001))
    assert [d.document_id for d in parallel.documents] == [r.document_id for r in corpus]
    assert parallel.to_dict() == base.to_dict()


def test_run_report_round_trip():
    corpus, replies = _random_corpus(3)
    report = run_reference_based(corpus, RunConfig(metrics=("revision_distance", "rouge2")), ScriptedBackend(lambda r: replies[r.document_id]))
    again = RunReport.from_dict(json.loads(json.dumps(report.to_dict())))
    assert again == report


def test_from_dict_rejects_other_schema():
    with pytest.raises(ValueError):
        RunReport.from_dict({"schema": "something-else"})


# -- comparison ------------------------------------------------------------------


@pytest.mark.parametrize(
    "metric, weak, strong, change, direction",
    [
        ("rouge1", 50.53, 51.65, 2.2, "improvement"),
        ("rouge2", 7.64, 6.86, -10.2, "decline"),
        ("gpt_score", 90.56, 88.63, -2.1, "decline"),
        ("revision_distance", 3.20, 2.79, 12.8, "improvement"),
        ("revision_distance", 3.94, 3.73, 5.3, "improvement"),
    ],
)
def test_relative_change(metric, weak, strong, change, direction):
    (row,) = compare_means({metric: weak}, {metric: strong})
    assert round(row.relative_change, 1) == change
    assert row.direction == direction


def test_direction_flag_semantics():
    rows = compare_means({"rouge1": 1.0, "revision_distance": 1.0}, {"rouge1": 2.0, "revision_distance": 2.0})
    # both rose; a higher distance is worse
    assert {r.metric: r.direction for r in rows} == {"revision_distance": "decline", "rouge1": "improvement"}
    assert compare_means({"rouge1": 3.0}, {"rouge1": 3.0})[0].direction == "unchanged"


def test_zero_denominator_is_undefined():
    (row,) = compare_means({"revision_distance": 0.0}, {"revision_distance": 1.0})
    assert row.relative_change is None and row.direction == "decline"


def test_metric_set_mismatch():
    with pytest.raises(ConfigError):
        compare_means({"rouge1": 1.0}, {"rouge2": 1.0})


def test_compare_runs_and_round_trip():
    corpus, replies = _random_corpus(5)
    config = RunConfig(metrics=("revision_distance", "rouge1"))
    weak = run_reference_based(corpus, config, ScriptedBackend(lambda r: replies[r.document_id]))
    comparison = compare_runs(weak, weak)
    assert [r.metric for r in comparison.rows] == ["revision_distance", "rouge1"]
    assert all(r.relative_change == 0.0 for r in comparison.rows)
    again = ComparisonReport.from_dict(json.loads(json.dumps(comparison.to_dict())))
    assert again.to_dict() == comparison.to_dict()


def test_compare_runs_mismatch():
    corpus, replies = _random_corpus(5)
    a = run_reference_based(corpus, RunConfig(metrics=("revision_distance",)), ScriptedBackend(lambda r: replies[r.document_id]))
    b = run_reference_based(corpus, RunConfig(metrics=("rouge1",)))
    with pytest.raises(ConfigError):
        compare_runs(a, b)


# -- agreement ---------------------------------------------------------------------


def test_single_pair_agrees():
    pairs, backend = pair_corpus([(1, 3)])
    report = run_preference_agreement(pairs, FREE, backend)
    assert report.agreement_rate == 1.0 and report.agreements == 1


def test_all_ties_default_policy():
    pairs, backend = pair_corpus([(2, 2), (0, 0)])
    assert run_preference_agreement(pairs, FREE, backend).agreement_rate == 0.0


@pytest.mark.parametrize(
    "policy, rate",
    [("count_as_disagreement", 2 / 5), ("count_as_half", 3 / 5), ("exclude", 2 / 3)],
)
def test_tie_policies(policy, rate):
    pairs, backend = pair_corpus([(0, 1), (1, 2), (3, 1), (2, 2), (1, 1)])
    report = run_preference_agreement(pairs, FREE.replace(tie_policy=policy), backend)
    assert report.agreement_rate == pytest.approx(rate)
    assert report.ties == 2


def test_exclude_all_ties_is_undefined():
    pairs, backend = pair_corpus([(1, 1)])
    report = run_preference_agreement(pairs, FREE.replace(tie_policy="exclude"), backend)
    assert report.denominator == 0 and report.agreement_rate is None


def test_pair_failures_leave_denominator():
    pairs, backend = pair_corpus([(0, 1), (0, 2)])
    responder = backend._responder

    def flaky(request):
        if request.document_id.startswith("p1/"):
            raise BackendError("down")
        return responder(request)

    report = run_preference_agreement(pairs, FREE, ScriptedBackend(flaky))
    assert report.total_pairs == 1 and report.agreement_rate == 1.0
    assert report.failures == [{"pair_id": "p1", "error": "BackendError: down"}]


def test_pair_prompt_used_as_hint():
    pairs, _ = pair_corpus([(0, 1)])
    from revdist.corpus import PreferencePair

    backend = ScriptedBackend(lambda r: "[]")
    run_preference_agreement([PreferencePair("x", "c", "r", prompt="Write a haiku.")], FREE, backend)
    assert all("Write a haiku." in r.rendered_prompt for r in backend.requests)


def test_agreement_requires_reference_free():
    pairs, backend = pair_corpus([(0, 1)])
    with pytest.raises(ConfigError):
        run_preference_agreement(pairs, RD_ONLY, backend)


def test_agreement_round_trip():
    pairs, backend = pair_corpus([(0, 1), (2, 2)])
    report = run_preference_agreement(pairs, FREE, backend)
    again = AgreementReport.from_dict(json.loads(json.dumps(report.to_dict())))
    assert again.to_dict() == report.to_dict()
