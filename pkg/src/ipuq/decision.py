"""Decision rules over precise and imprecise probability reports."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .core import (
    CredalSet,
    IpuqError,
    LengthMismatchError,
    PrecisePMF,
    ProbabilityIntervalSet,
    build_pmf,
    fold_equal,
)

logger = logging.getLogger(__name__)

#: Two candidate scores closer than this are treated as tied.
TIE_TOL = 1e-9

RULE_PRECISE_ARGMAX = "precise_argmax"
RULE_MAXIMIN = "maximin"
RULE_MAXIMAX = "maximax"
RULE_BAYES_EU = "bayes_eu"


class WeightSumViolationError(IpuqError, ValueError):
    pass


@dataclass(frozen=True)
class DecisionOutcome:
    """A committed answer: which rule picked which candidate.

    ``tie_broken`` is set when at least two candidates scored within
    ``TIE_TOL`` of the optimum; ties always resolve to the lowest index so
    decisions are reproducible.
    """

    rule: str
    chosen_index: int
    chosen_answer: str
    tie_broken: bool = False


def _argmax(scores: Sequence[float]) -> tuple[int, bool]:
    best = max(scores)
    winners = [i for i, s in enumerate(scores) if best - s <= TIE_TOL]
    return winners[0], len(winners) > 1


def precise_argmax(pmf: PrecisePMF) -> DecisionOutcome:
    """Pick the most probable answer of a single distribution."""
    idx, tied = _argmax(pmf.probs)
    return DecisionOutcome(
        rule=RULE_PRECISE_ARGMAX,
        chosen_index=idx,
        chosen_answer=pmf.candidates.answers[idx],
        tie_broken=tied,
    )


def maximin(intervals: ProbabilityIntervalSet) -> DecisionOutcome:
    """Pick the answer with the best worst case (largest lower bound)."""
    idx, tied = _argmax(intervals.lowers)
    return DecisionOutcome(
        rule=RULE_MAXIMIN,
        chosen_index=idx,
        chosen_answer=intervals.candidates.answers[idx],
        tie_broken=tied,
    )


def maximax(intervals: ProbabilityIntervalSet) -> DecisionOutcome:
    """Pick the answer with the best best case (largest upper bound)."""
    idx, tied = _argmax(intervals.uppers)
    return DecisionOutcome(
        rule=RULE_MAXIMAX,
        chosen_index=idx,
        chosen_answer=intervals.candidates.answers[idx],
        tie_broken=tied,
    )


def bayes_expected_utility(credal: CredalSet, weights: Sequence[float]) -> DecisionOutcome:
    """Pick the argmax of a weighted mixture of the credal members.

    ``weights`` expresses how much trust each member (interpretation,
    seed, or model) deserves; they must be non-negative and sum to 1.
    Degenerate weights on one member reduce this to that member's argmax.
    """
    weights = [float(w) for w in weights]
    if len(weights) != len(credal.members):
        raise LengthMismatchError("one weight per credal member")
    if any(w < 0.0 for w in weights):
        raise WeightSumViolationError("weights must be non-negative")
    total = sum(weights)
    if abs(total - 1.0) > 1e-6:
        raise WeightSumViolationError(f"weights sum to {total!r}, expected 1")
    n = len(credal.candidates)
    mixture = [
        sum(w * m.probs[i] for w, m in zip(weights, credal.members)) for i in range(n)
    ]
    idx, tied = _argmax(mixture)
    return DecisionOutcome(
        rule=RULE_BAYES_EU,
        chosen_index=idx,
        chosen_answer=credal.candidates.answers[idx],
        tie_broken=tied,
    )


def utilitarian_aggregate(credal: CredalSet) -> PrecisePMF:
    """Equal-weight arithmetic mean of the credal members.

    The mean of PMFs is itself a PMF, so the result is a valid precise
    distribution; its argmax is the group's utilitarian choice.  Note this
    can disagree with per-member majority vote: two members mildly
    favouring B lose to one member strongly favouring A.
    """
    n = len(credal.candidates)
    m = len(credal.members)
    mean = [sum(member.probs[i] for member in credal.members) / m for i in range(n)]
    return build_pmf(credal.candidates, mean, renormalize=True)


def utilitarian_mean_rows(rows: Sequence[Sequence[float]]) -> list[float]:
    """Componentwise mean of raw per-answer score rows, left unnormalized.

    For rows that are correctness scores rather than distributions (they
    need not sum to anything), the unnormalized mean is the right object
    for ranking answers; turning it into a PMF would pretend to a precision
    the rows never had.
    """
    if not rows:
        raise LengthMismatchError("need at least one row")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LengthMismatchError("rows must have equal length")
    m = len(rows)
    return [sum(float(r[i]) for r in rows) / m for i in range(width)]


def alignment_rate(
    model_choices: Sequence[str],
    rule_choices: Sequence[DecisionOutcome],
) -> float:
    """Fraction of positions where the model's own answer matches the rule's.

    Comparison folds case and surrounding whitespace.  A model answer that
    matches no candidate simply counts as misaligned (and is logged), since
    the rule by construction picked a listed candidate.
    """
    if len(model_choices) != len(rule_choices):
        raise LengthMismatchError("model and rule choice lists must align")
    if not model_choices:
        raise LengthMismatchError("alignment over zero choices is undefined")
    hits = 0
    for picked, outcome in zip(model_choices, rule_choices):
        if fold_equal(picked, outcome.chosen_answer):
            hits += 1
        else:
            logger.debug("misaligned: model chose %r, %s chose %r",
                         picked, outcome.rule, outcome.chosen_answer)
    return hits / len(model_choices)


__all__ = [
    "TIE_TOL",
    "RULE_PRECISE_ARGMAX",
    "RULE_MAXIMIN",
    "RULE_MAXIMAX",
    "RULE_BAYES_EU",
    "WeightSumViolationError",
    "DecisionOutcome",
    "precise_argmax",
    "maximin",
    "maximax",
    "bayes_expected_utility",
    "utilitarian_aggregate",
    "utilitarian_mean_rows",
    "alignment_rate",
]
