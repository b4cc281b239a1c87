from .backends import (
    API_BASE_ENV,
    API_KEY_ENV,
    BackendError,
    LiveBackend,
    LLMBackend,
    RateLimited,
    ReplayBackend,
    ReplayMiss,
    ScriptedBackend,
    TokenBucket,
    fingerprint,
    read_transcript,
)
from .extraction import EditParse, ParseError, extract_structured_edits, parse_edit_response
from .prompts import PromptRequest, TemplateSet, build_gpt_score_prompt, build_revision_prompt
from .proxy import CORRECTIVE_SUFFIX, ProxyResult, generate_revision_edits

__all__ = [
    "API_BASE_ENV",
    "API_KEY_ENV",
    "BackendError",
    "CORRECTIVE_SUFFIX",
    "EditParse",
    "LLMBackend",
    "LiveBackend",
    "ParseError",
    "PromptRequest",
    "ProxyResult",
    "RateLimited",
    "ReplayBackend",
    "ReplayMiss",
    "ScriptedBackend",
    "TemplateSet",
    "TokenBucket",
    "build_gpt_score_prompt",
    "build_revision_prompt",
    "extract_structured_edits",
    "fingerprint",
    "generate_revision_edits",
    "parse_edit_response",
    "read_transcript",
]
