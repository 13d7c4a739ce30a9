"""ROUGE-1/2 with clipped n-gram counts. No stemming, no stopword removal."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class RougeScore:
    n: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, n: int, precision: float, recall: float) -> "RougeScore":
        denom = precision + recall
        return cls(n, precision, recall, 2 * precision * recall / denom if denom > 0 else 0.0)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand, ref = ngrams(candidate, n), ngrams(reference, n)
    overlap = sum((cand & ref).values())
    n_cand, n_ref = sum(cand.values()), sum(ref.values())
    precision = overlap / n_cand if n_cand else 0.0
    recall = overlap / n_ref if n_ref else 0.0
    return RougeScore.from_pr(n, precision, recall)


def rouge_multi(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int,
                mode: str = "best") -> RougeScore:
    """Score against several references.

    ``best`` keeps the reference with the highest F1 (first one on ties);
    ``average`` averages precision and recall and recomputes F1 from the means.
    """
    if not references:
        raise ValueError("no references")
    scores = [rouge_n(candidate, ref, n) for ref in references]
    if mode == "best":
        return max(scores, key=lambda s: s.f1)
    if mode == "average":
        p = sum(s.precision for s in scores) / len(scores)
        r = sum(s.recall for s in scores) / len(scores)
        return RougeScore.from_pr(n, p, r)
    raise ValueError(f"unknown mode {mode!r}")
