"""Precision/recall scoring of computed answer sets against references."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .mediate import AnswerSet


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class QueryScore:
    query_id: str
    answered: bool
    precision: float
    recall: float
    fmeasure: float


@dataclass(frozen=True)
class EvaluationResult:
    per_query: tuple[QueryScore, ...]
    answered_count: int
    total_queries: int
    avg_precision: float
    avg_recall: float
    avg_fmeasure: float
    h_fmeasure: float


def harmonic_fmeasure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def round_half_up(value: float, places: int = 2) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def score_query(computed: AnswerSet, reference: AnswerSet, answered: bool = True) -> QueryScore:
    """P and R over tuple sets; an empty answer against an empty reference is perfect."""
    if computed.query_id != reference.query_id:
        raise EvaluationError(
            f"query id mismatch: {computed.query_id!r} vs {reference.query_id!r}"
        )
    if not answered:
        return QueryScore(computed.query_id, False, 0.0, 0.0, 0.0)
    overlap = len(computed.tuples & reference.tuples)
    if computed.tuples:
        precision = overlap / len(computed.tuples)
    else:
        precision = 1.0 if not reference.tuples else 0.0
    recall = overlap / len(reference.tuples) if reference.tuples else 1.0
    return QueryScore(
        computed.query_id, True, precision, recall, harmonic_fmeasure(precision, recall)
    )


def aggregate(scores: Sequence[QueryScore]) -> EvaluationResult:
    """Arithmetic means over all queries; unanswered ones contribute zeros."""
    if not scores:
        raise EvaluationError("cannot aggregate an empty score list")
    total = len(scores)
    avg_p = sum(s.precision for s in scores) / total
    avg_r = sum(s.recall for s in scores) / total
    avg_f = sum(s.fmeasure for s in scores) / total
    return EvaluationResult(
        per_query=tuple(scores),
        answered_count=sum(1 for s in scores if s.answered),
        total_queries=total,
        avg_precision=avg_p,
        avg_recall=avg_r,
        avg_fmeasure=avg_f,
        h_fmeasure=harmonic_fmeasure(avg_p, avg_r),
    )
