"""Native ROUGE-N and ROUGE-L (F1, scaled to 0-100).

Tokenization is lowercase plus a split on non-alphanumeric runs; there is
no stemming and no stopword removal.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class MetricScore:
    metric_name: str
    value: float
    higher_is_better: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 100.0:
            raise ValueError(f"{self.metric_name} value {self.value} outside [0, 100]")


def tokenize(text: str) -> list[str]:
    # str.isalnum would admit non-ASCII letters; keep the token alphabet explicit.
    return [tok for tok in _NON_ALNUM.split(text.lower()) if tok]


def _f1(overlap: int, n_cand: int, n_ref: int) -> float:
    if overlap == 0 or n_cand == 0 or n_ref == 0:
        return 0.0
    # 2PR/(P+R) with P = o/c, R = o/r reduces to 2o/(c+r): exactly symmetric.
    return 200.0 * overlap / (n_cand + n_ref)


def ngrams(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> MetricScore:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    overlap = sum((cand & ref).values())
    value = _f1(overlap, sum(cand.values()), sum(ref.values()))
    return MetricScore(f"rouge{n}", value)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> MetricScore:
    value = _f1(lcs_length(candidate, reference), len(candidate), len(reference))
    return MetricScore("rougeL", value)


def rouge_scores(candidate: str, reference: str) -> dict[str, float]:
    """ROUGE-1, ROUGE-2 and ROUGE-L of two raw texts."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    return {
        "rouge1": rouge_n(cand, ref, 1).value,
        "rouge2": rouge_n(cand, ref, 2).value,
        "rougeL": rouge_l(cand, ref).value,
    }
