"""Versioned prompt templates for the proxy-user and judge calls.

A template file holds the system preamble, a ``=== user ===`` separator
line, then the user payload. Both parts are Jinja2 with ``{{draft}}``,
``{{reference}}``, ``{{task_hint}}`` (and ``{{candidate}}`` for scoring)
placeholders. Templates live in ``<templates_dir>/<version>/<id>.txt``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import jinja2

TEMPLATE_IDS = ("revision_ref_based", "revision_ref_free", "gpt_score")
DEFAULT_TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"
DEFAULT_TEMPLATE_VERSION = "v1"
USER_SEPARATOR = "=== user ==="


@dataclass(frozen=True)
class PromptRequest:
    template_id: str
    rendered_prompt: str
    document_id: str = ""
    system: str = ""
    template_version: str = DEFAULT_TEMPLATE_VERSION

    def __post_init__(self) -> None:
        if self.template_id not in TEMPLATE_IDS:
            raise ValueError(f"unknown template id {self.template_id!r}")
        if not self.rendered_prompt.strip():
            raise ValueError("rendered prompt is empty")

    def with_suffix(self, suffix: str) -> PromptRequest:
        return PromptRequest(
            template_id=self.template_id,
            rendered_prompt=self.rendered_prompt + suffix,
            document_id=self.document_id,
            system=self.system,
            template_version=self.template_version,
        )


class TemplateSet:
    """Loads and renders one version of the prompt templates."""

    def __init__(
        self,
        version: str = DEFAULT_TEMPLATE_VERSION,
        templates_dir: str | Path | None = None,
    ) -> None:
        root = Path(templates_dir) if templates_dir is not None else DEFAULT_TEMPLATES_DIR
        self.version = version
        self.directory = root / version
        if not self.directory.is_dir():
            raise FileNotFoundError(f"no template directory {self.directory}")
        self._env = jinja2.Environment(
            autoescape=False,
            undefined=jinja2.StrictUndefined,
            keep_trailing_newline=False,
        )
        self._parts: dict[str, tuple[jinja2.Template, jinja2.Template]] = {}

    def _load(self, template_id: str) -> tuple[jinja2.Template, jinja2.Template]:
        if template_id not in self._parts:
            path = self.directory / f"{template_id}.txt"
            source = path.read_text(encoding="utf-8")
            system, sep, user = source.partition(f"\n{USER_SEPARATOR}\n")
            if not sep:
                raise ValueError(f"{path}: missing '{USER_SEPARATOR}' separator line")
            self._parts[template_id] = (
                self._env.from_string(system.strip()),
                self._env.from_string(user.strip()),
            )
        return self._parts[template_id]

    def render(self, template_id: str, document_id: str = "", **values: str | None) -> PromptRequest:
        system, user = self._load(template_id)
        return PromptRequest(
            template_id=template_id,
            rendered_prompt=user.render(**values),
            document_id=document_id,
            system=system.render(**values),
            template_version=self.version,
        )


_default_templates: TemplateSet | None = None


def default_templates() -> TemplateSet:
    global _default_templates
    if _default_templates is None:
        _default_templates = TemplateSet()
    return _default_templates


def build_revision_prompt(
    draft: str,
    reference: str | None = None,
    task_hint: str | None = None,
    *,
    document_id: str = "",
    templates: TemplateSet | None = None,
) -> PromptRequest:
    if not draft.strip():
        raise ValueError("draft must be non-empty")
    templates = templates or default_templates()
    if reference is None:
        return templates.render(
            "revision_ref_free", document_id, draft=draft, task_hint=task_hint
        )
    return templates.render(
        "revision_ref_based", document_id, draft=draft, reference=reference, task_hint=task_hint
    )


def build_gpt_score_prompt(
    candidate: str,
    reference: str | None = None,
    *,
    document_id: str = "",
    templates: TemplateSet | None = None,
) -> PromptRequest:
    if not candidate.strip():
        raise ValueError("candidate must be non-empty")
    templates = templates or default_templates()
    return templates.render("gpt_score", document_id, candidate=candidate, reference=reference)
