"""Run configuration and the flat ``key = value`` files that carry it.

A config file is a list of ``key = value`` lines (``#`` starts a comment);
keys mirror :class:`RunConfig` fields, lists are comma separated::

    mode = reference_based
    metrics = revision_distance, rouge1, rouge2, rougeL
    model = gpt-4
    worker_count = 4

The category keyword table uses the same syntax with one key per category
(``order``, ``comparison``, ``description``). A keyword file replaces the
default table as a whole; categories it leaves out get no keywords.
"""

from __future__ import annotations

import configparser
import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .edits import DEFAULT_KEYWORDS, EditCategory
from .llm.prompts import DEFAULT_TEMPLATE_VERSION
from .llm.proxy import DEFAULT_MAX_EDITS

MODES = ("reference_based", "reference_free")
METRICS = ("revision_distance", "rouge1", "rouge2", "rougeL", "gpt_score")
ROUGE_METRICS = ("rouge1", "rouge2", "rougeL")
TIE_POLICIES = ("count_as_disagreement", "count_as_half", "exclude")

# Fields that do not change results and so stay out of reports.
EXECUTION_ONLY = frozenset(
    {"worker_count", "max_concurrent", "requests_per_minute", "max_retries", "fail_fast",
     "failure_threshold", "templates_dir", "keywords_file"}
)


class ConfigError(ValueError):
    pass


def _default_metrics() -> tuple[str, ...]:
    return ("revision_distance", *ROUGE_METRICS)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "reference_based"
    metrics: tuple[str, ...] = field(default_factory=_default_metrics)
    model: str = "gpt-4"
    temperature: float = 0.0
    max_retries: int = 3
    max_concurrent: int = 4
    requests_per_minute: float | None = None
    worker_count: int = 1
    template_version: str = DEFAULT_TEMPLATE_VERSION
    templates_dir: str | None = None
    keywords_file: str | None = None
    tie_policy: str = "count_as_disagreement"
    max_edits: int = DEFAULT_MAX_EDITS
    task_hint: str | None = None
    gpt_score_samples: int = 1
    fail_fast: bool = False
    failure_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ConfigError(f"unknown metrics {unknown}; choose from {METRICS}")
        if not self.metrics:
            raise ConfigError("no metrics requested")
        if self.mode == "reference_free":
            if not {"revision_distance", "gpt_score"} & set(self.metrics):
                raise ConfigError("reference_free mode needs revision_distance or gpt_score")
            rouge = [m for m in self.metrics if m in ROUGE_METRICS]
            if rouge:
                raise ConfigError(f"{rouge} need a reference and cannot run in reference_free mode")
        if self.tie_policy not in TIE_POLICIES:
            raise ConfigError(f"tie_policy must be one of {TIE_POLICIES}, got {self.tie_policy!r}")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.max_edits < 1:
            raise ConfigError("max_edits must be >= 1")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if not 0.0 <= self.failure_threshold <= 1.0:
            raise ConfigError("failure_threshold must lie in [0, 1]")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> RunConfig:
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs: dict[str, Any] = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, types[key], raw)
        return cls(**kwargs)

    def replace(self, **changes: Any) -> RunConfig:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_report_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["metrics"] = list(self.metrics)
        return {k: v for k, v in out.items() if k not in EXECUTION_ONLY}


def _coerce(key: str, type_name: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return tuple(raw) if key == "metrics" else raw
    text = raw.strip()
    if "None" in type_name and text.lower() in ("", "none"):
        return None
    try:
        if key == "metrics":
            return tuple(m.strip() for m in text.split(",") if m.strip())
        if type_name.startswith("bool"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if type_name.startswith("int"):
            return int(text)
        if type_name.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    return text


def _read_flat(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string("[flat]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return dict(parser["flat"])


def load_config(path: str | Path) -> RunConfig:
    return RunConfig.from_mapping(_read_flat(path))


def load_keyword_table(path: str | Path) -> dict[EditCategory, tuple[str, ...]]:
    by_name = {c.value.lower(): c for c in DEFAULT_KEYWORDS}
    table: dict[EditCategory, tuple[str, ...]] = {}
    for key, value in _read_flat(path).items():
        category = by_name.get(key.strip().lower())
        if category is None:
            raise ConfigError(f"{path}: unknown category {key!r}; use {sorted(by_name)}")
        table[category] = tuple(k.strip().lower() for k in value.split(",") if k.strip())
    return table
