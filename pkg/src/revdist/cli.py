"""Command-line entry point.

Exit codes: 0 success, 1 configuration or input error, 2 when the share of
failed documents (or pairs) exceeds ``failure_threshold``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import __version__
from .config import METRICS, TIE_POLICIES, ConfigError, RunConfig, load_config
from .corpus import FormatError, load_preference_corpus, load_reference_corpus
from .harness import (
    AgreementReport,
    RunReport,
    compare_runs,
    run_corpus,
    run_preference_agreement,
)
from .llm.backends import BackendError, LiveBackend, LLMBackend, ReplayBackend, read_transcript
from .llm.extraction import ParseError
from .report import (
    agreement_markdown,
    agreement_summary,
    comparison_markdown,
    rouge_text,
    run_report_markdown,
    to_json,
)
from .rouge import rouge_scores

logger = logging.getLogger("revdist")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EVAL_FAILURES = 2


class CliError(Exception):
    """Configuration or input problem; maps to exit code 1."""


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", type=Path, help="write the report here instead of stdout")
    p.add_argument(
        "--format",
        choices=("json", "markdown"),
        help="default: from the output suffix; else markdown on a terminal, json when redirected",
    )


def _add_run_args(p: argparse.ArgumentParser, *, with_mode: bool = True) -> None:
    p.add_argument("--corpus", type=Path, required=True, help="JSON Lines corpus")
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--transcript", type=Path, help="replay LLM responses from this transcript")
    if with_mode:
        p.add_argument("--mode", choices=("reference_based", "reference_free"))
        p.add_argument("--metrics", help=f"comma separated subset of {', '.join(METRICS)}")
    p.add_argument("--model")
    p.add_argument("--temperature", type=float)
    p.add_argument("--workers", type=int, dest="worker_count")
    p.add_argument("--task-hint")
    p.add_argument("--keywords", dest="keywords_file", help="category keyword table file")
    p.add_argument("--templates-dir")
    p.add_argument("--template-version")
    p.add_argument("--max-edits", type=int)
    p.add_argument("--fail-fast", action="store_true", default=None)
    p.add_argument("--failure-threshold", type=float)
    p.add_argument("--timestamp", help="timestamp stamped into the report (default: now, UTC)")
    _add_output_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revdist", description="Revision Distance evaluation toolkit"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="evaluate a corpus of drafts")
    _add_run_args(p)

    p = sub.add_parser("agree", help="reference-free agreement on chosen/rejected pairs")
    _add_run_args(p, with_mode=False)
    p.add_argument("--tie-policy", choices=TIE_POLICIES)

    p = sub.add_parser("compare", help="compare a weak and a strong run report")
    p.add_argument("weak", type=Path)
    p.add_argument("strong", type=Path)
    _add_output_args(p)

    p = sub.add_parser("rouge", help="ROUGE-1/2/L between two text files")
    p.add_argument("candidate", type=Path)
    p.add_argument("reference", type=Path)

    p = sub.add_parser(
        "replay-record", help="run against the live API and record a replay transcript"
    )
    _add_run_args(p)
    p.add_argument("--record-to", type=Path, required=True, help="transcript file to append to")
    p.add_argument("--pairs", action="store_true", help="the corpus is a preference corpus")
    p.add_argument("--tie-policy", choices=TIE_POLICIES)
    return parser


def _resolve_config(args: argparse.Namespace, **forced: Any) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "mode", "model", "temperature", "worker_count", "task_hint", "keywords_file",
            "templates_dir", "template_version", "max_edits", "fail_fast", "failure_threshold",
            "tie_policy",
        )
    }
    if getattr(args, "metrics", None):
        overrides["metrics"] = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    overrides.update(forced)
    if overrides.get("mode") == "reference_free" and "metrics" not in overrides and config.mode != "reference_free":
        overrides["metrics"] = ("revision_distance",)
    return config.replace(**overrides)


def _make_backend(config: RunConfig, args: argparse.Namespace) -> LLMBackend | None:
    record_to = getattr(args, "record_to", None)
    if args.transcript and not record_to:
        try:
            records = read_transcript(args.transcript)
        except OSError as exc:
            raise CliError(f"cannot read transcript {args.transcript}: {exc.strerror}") from exc
        return ReplayBackend(
            records,
            model_name=config.model,
            temperature=config.temperature,
            max_concurrent=config.max_concurrent,
        )
    if not {"revision_distance", "gpt_score"} & set(config.metrics):
        return None
    return LiveBackend(
        config.model,
        config.temperature,
        config.max_retries,
        config.max_concurrent,
        requests_per_minute=config.requests_per_minute,
        record_to=record_to,
    )


def _format(args: argparse.Namespace) -> str:
    if args.format:
        return args.format
    if args.output is not None:
        return "markdown" if args.output.suffix.lower() in (".md", ".markdown") else "json"
    return "markdown" if sys.stdout.isatty() else "json"


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, encoding="utf-8")


def _timestamp(args: argparse.Namespace) -> str:
    return args.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")


def _failure_exit(failed: int, total: int, threshold: float) -> int:
    if total and failed / total > threshold:
        logger.error("%d of %d items failed (threshold %.0f%%)", failed, total, threshold * 100)
        return EXIT_EVAL_FAILURES
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    corpus = load_reference_corpus(args.corpus)
    backend = _make_backend(config, args)
    report: RunReport = run_corpus(corpus, config, backend)
    report.generated_at = _timestamp(args)
    fmt = _format(args)
    _emit(args, to_json(report) if fmt == "json" else run_report_markdown(report))
    diag = report.diagnostics
    print(
        f"evaluated {diag['documents_evaluated']}/{diag['documents_total']} documents",
        file=sys.stderr,
    )
    return _failure_exit(len(diag["failures"]), diag["documents_total"], config.failure_threshold)


def cmd_agree(args: argparse.Namespace) -> int:
    config = _resolve_config(args, mode="reference_free", metrics=("revision_distance",))
    pairs = load_preference_corpus(args.corpus)
    if not pairs:
        raise CliError(f"no pairs in {args.corpus}")
    backend = _make_backend(config, args)
    report: AgreementReport = run_preference_agreement(pairs, config, backend)
    report.generated_at = _timestamp(args)
    fmt = _format(args)
    _emit(args, to_json(report) if fmt == "json" else agreement_markdown(report))
    print(agreement_summary(report), file=sys.stderr)
    return _failure_exit(len(report.failures), len(pairs), config.failure_threshold)


def _read_report(path: Path) -> RunReport:
    try:
        return RunReport.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    except (ValueError, KeyError, AttributeError, TypeError) as exc:
        raise CliError(f"{path} is not a run report: {exc}") from exc


def cmd_compare(args: argparse.Namespace) -> int:
    report = compare_runs(_read_report(args.weak), _read_report(args.strong))
    fmt = _format(args)
    _emit(args, to_json(report) if fmt == "json" else comparison_markdown(report))
    return EXIT_OK


def cmd_rouge(args: argparse.Namespace) -> int:
    texts = []
    for path in (args.candidate, args.reference):
        try:
            texts.append(path.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as exc:
            raise CliError(f"cannot read {path}: {exc}") from exc
    sys.stdout.write(rouge_text(rouge_scores(*texts)))
    return EXIT_OK


def cmd_replay_record(args: argparse.Namespace) -> int:
    args.transcript = None
    if args.pairs:
        return cmd_agree(args)
    return cmd_evaluate(args)


COMMANDS = {
    "evaluate": cmd_evaluate,
    "agree": cmd_agree,
    "compare": cmd_compare,
    "rouge": cmd_rouge,
    "replay-record": cmd_replay_record,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (CliError, ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BackendError, ParseError) as exc:
        # Raised outside per-document isolation: backend setup or --fail-fast.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVAL_FAILURES if getattr(args, "fail_fast", False) else EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
