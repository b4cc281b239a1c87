import json
import re
import subprocess
import sys

import pytest

from revdist.cli import main
from revdist.config import RunConfig
from revdist.harness import RunReport

from conftest import FIXTURES, GOLDEN

STAMP = "2024-01-01T00:00:00+00:00"
EVALUATE = [
    "evaluate",
    "--corpus", str(FIXTURES / "reference_corpus.jsonl"),
    "--config", str(FIXTURES / "revdist.conf"),
    "--transcript", str(FIXTURES / "reference_corpus.transcript.jsonl"),
    "--timestamp", STAMP,
]
AGREE = [
    "agree",
    "--corpus", str(FIXTURES / "preference_41.jsonl"),
    "--config", str(FIXTURES / "revdist.conf"),
    "--transcript", str(FIXTURES / "preference_41.transcript.jsonl"),
    "--timestamp", STAMP,
]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _report_file(tmp_path, name, means):
    config = RunConfig(metrics=tuple(means)).to_report_dict()
    report = RunReport(
        config,
        [],
        means.get("revision_distance"),
        {},
        {k: v for k, v in means.items() if k != "revision_distance"},
        {"failures": []},
    )
    path = tmp_path / name
    path.write_text(json.dumps(report.to_dict()))
    return path


# -- evaluate -----------------------------------------------------------------------


def test_evaluate_matches_golden_markdown(capsys):
    code, out, err = run(capsys, *EVALUATE, "--format", "markdown")
    assert code == 0
    assert out == (GOLDEN / "reference_corpus_report.md").read_text(encoding="utf-8")
    assert "evaluated 5/5 documents" in err


def test_evaluate_json_round_trip_and_markdown_agrees(capsys):
    code, out, _ = run(capsys, *EVALUATE, "--format", "json")
    assert code == 0
    report = RunReport.from_dict(json.loads(out))
    assert report.generated_at == STAMP
    assert report.diagnostics["failures"] == []
    markdown = (GOLDEN / "reference_corpus_report.md").read_text(encoding="utf-8")
    assert f"| D_Revision (lower is better) | {report.mean_revision_distance:.2f} |" in markdown
    for metric, label in (("rouge1", "ROUGE-1"), ("rouge2", "ROUGE-2"), ("rougeL", "ROUGE-L"), ("gpt_score", "GPT-Score")):
        assert f"| {label} | {report.mean_baselines[metric]:.2f} |" in markdown
    for doc in report.documents:
        assert f"### {doc.document_id}: D_Revision {doc.revision_distance}" in markdown


def test_evaluate_is_byte_identical_across_runs_and_workers(capsys):
    outputs = {run(capsys, *EVALUATE, "--format", "json", "--workers", str(w))[1] for w in (1, 4, 1)}
    assert len(outputs) == 1


def test_output_suffix_selects_format(tmp_path, capsys):
    md, js = tmp_path / "r.md", tmp_path / "r.json"
    assert run(capsys, *EVALUATE, "-o", str(md))[0] == 0
    assert run(capsys, *EVALUATE, "-o", str(js))[0] == 0
    assert md.read_text().startswith("#")
    assert json.loads(js.read_text())["schema"] == "revdist-report/1"


def test_missing_config_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.conf"
    code, _, err = run(capsys, "evaluate", "--corpus", str(FIXTURES / "reference_corpus.jsonl"), "--config", str(missing))
    assert code == 1 and str(missing) in err


def test_bad_corpus_line_is_config_error(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text('{"document_id": "a", "draft": "x", "reference": "y"}\n{broken\n')
    code, _, err = run(capsys, "evaluate", "--corpus", str(corpus), "--metrics", "rouge1")
    assert code == 1 and ":2" in err


def test_all_replay_misses_exit_2(tmp_path, capsys):
    transcript = tmp_path / "empty.jsonl"
    transcript.write_text("")
    argv = EVALUATE[:5] + ["--transcript", str(transcript), "--format", "json"]
    code, out, _ = run(capsys, *argv)
    assert code == 2
    report = json.loads(out)
    assert report["aggregates"]["documents"] == 0
    assert len(report["diagnostics"]["failures"]) == 5


def test_failure_threshold_tolerates_misses(tmp_path, capsys):
    transcript = tmp_path / "empty.jsonl"
    transcript.write_text("")
    argv = EVALUATE[:5] + ["--transcript", str(transcript), "--format", "json", "--failure-threshold", "1.0"]
    assert run(capsys, *argv)[0] == 0


def test_fail_fast_exits_2(tmp_path, capsys):
    transcript = tmp_path / "empty.jsonl"
    transcript.write_text("")
    argv = EVALUATE[:5] + ["--transcript", str(transcript), "--fail-fast"]
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error:" in err


def test_rouge_only_evaluate_needs_no_backend(capsys):
    code, out, _ = run(
        capsys, "evaluate", "--corpus", str(FIXTURES / "reference_corpus.jsonl"), "--metrics", "rouge1,rougeL", "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["aggregates"]["mean_revision_distance"] is None


# -- agree ------------------------------------------------------------------------------


def test_agree_fixture(capsys):
    code, out, err = run(capsys, *AGREE, "--format", "json")
    assert code == 0
    assert "31/41 agree (75.6%)" in err
    data = json.loads(out)
    assert data["schema"] == "revdist-agreement/1"
    assert round(data["summary"]["agreement_rate"], 3) == 0.756


def test_agree_exclude_ties(capsys):
    code, _, err = run(capsys, *AGREE, "--tie-policy", "exclude", "--format", "json")
    assert code == 0 and "31/37 decidable pairs agree (83.8%)" in err


def test_agree_empty_corpus(tmp_path, capsys):
    corpus = tmp_path / "pairs.jsonl"
    corpus.write_text("")
    code, _, err = run(capsys, "agree", "--corpus", str(corpus), "--transcript", str(corpus))
    assert code == 1 and "no pairs" in err


def test_agree_all_ties_excluded(tmp_path, capsys):
    corpus = tmp_path / "pairs.jsonl"
    corpus.write_text(json.dumps({"pair_id": "p", "chosen": "same text", "rejected": "other text"}) + "\n")
    transcript = tmp_path / "t.jsonl"
    transcript.write_text("")
    code, _, err = run(capsys, "agree", "--corpus", str(corpus), "--transcript", str(transcript), "--failure-threshold", "1")
    assert code == 0 and "undefined" in err


def test_agree_markdown_summary(capsys):
    code, out, _ = run(capsys, *AGREE, "--format", "markdown")
    assert code == 0 and "**31/41 agree (75.6%)**" in out


# -- compare ------------------------------------------------------------------------------


def test_compare_rows(tmp_path, capsys):
    weak = _report_file(tmp_path, "weak.json", {"revision_distance": 3.20, "rouge1": 50.53})
    strong = _report_file(tmp_path, "strong.json", {"revision_distance": 2.79, "rouge1": 51.65})
    code, out, _ = run(capsys, "compare", str(weak), str(strong), "--format", "markdown")
    assert code == 0
    row = next(line for line in out.splitlines() if line.startswith("| D_Revision"))
    assert "3.20" in row and "2.79" in row and "+12.8%" in row and "+14.7%" in row and "improvement" in row
    code, out, _ = run(capsys, "compare", str(weak), str(strong), "--format", "json")
    rows = {r["metric"]: r for r in json.loads(out)["rows"]}
    assert round(rows["rouge1"]["relative_change_percent"], 1) == 2.2


def test_compare_identical_reports(tmp_path, capsys):
    a = _report_file(tmp_path, "a.json", {"revision_distance": 2.0, "rouge2": 7.0})
    code, out, _ = run(capsys, "compare", str(a), str(a), "--format", "markdown")
    assert code == 0
    assert out.count("+0.0%") == 4 and "unchanged" in out


def test_compare_metric_mismatch(tmp_path, capsys):
    a = _report_file(tmp_path, "a.json", {"revision_distance": 2.0})
    b = _report_file(tmp_path, "b.json", {"rouge1": 2.0})
    assert run(capsys, "compare", str(a), str(b))[0] == 1


def test_compare_rejects_non_report(tmp_path, capsys):
    bogus = tmp_path / "x.json"
    bogus.write_text("[]")
    code, _, err = run(capsys, "compare", str(bogus), str(bogus))
    assert code == 1 and "not a run report" in err


# -- rouge -----------------------------------------------------------------------------


def test_rouge_reorder_example(capsys):
    code, out, _ = run(capsys, "rouge", str(FIXTURES / "reorder_draft.txt"), str(FIXTURES / "reorder_human.txt"))
    assert code == 0
    assert out.splitlines()[:2] == ["ROUGE-1: 100.00", "ROUGE-2: 100.00"]


def test_rouge_identical_and_empty(tmp_path, capsys):
    a, empty = tmp_path / "a.txt", tmp_path / "e.txt"
    a.write_text("some words here")
    empty.write_text("")
    assert re.findall(r"\d+\.\d+", run(capsys, "rouge", str(a), str(a))[1]) == ["100.00"] * 3
    assert re.findall(r"\d+\.\d+", run(capsys, "rouge", str(empty), str(a))[1]) == ["0.00"] * 3


def test_rouge_unreadable(tmp_path, capsys):
    binary = tmp_path / "b.bin"
    binary.write_bytes(b"\xff\xfe\x00bad")
    code, _, err = run(capsys, "rouge", str(binary), str(tmp_path / "missing.txt"))
    assert code == 1 and "cannot read" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "revdist", "rouge", str(FIXTURES / "reorder_draft.txt"), str(FIXTURES / "reorder_human.txt")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and "ROUGE-L: 75.00" in proc.stdout


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["evaluate"])
    assert info.value.code == 2
