"""Core value types for answer sets and imprecise-probability reports.

Everything in here is a plain immutable container plus a validated
constructor.  The probability types come in four flavours:

* :class:`PrecisePMF` -- a single distribution over a candidate set,
* :class:`ProbabilityIntervalSet` -- per-answer lower/upper probabilities,
* :class:`CredalSet` -- a finite ensemble of PMFs over a shared candidate set,
* :class:`PossibilityAssignment` -- per-answer plausibility scores in [0, 1]
  plus a reserved "none of the listed answers" slot.

All of them hash/compare by value and are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

#: Absolute tolerance for probability sum checks across the whole package.
#: Verbalized numbers arrive as short decimal strings, so binary float noise
#: is the only thing this needs to absorb.
PROB_TOL = 1e-6


class IpuqError(Exception):
    """Base class for every error raised by this package."""


class EmptyInputError(IpuqError, ValueError):
    pass


class LengthMismatchError(IpuqError, ValueError):
    pass


class NegativeWeightError(IpuqError, ValueError):
    pass


class ZeroMassError(IpuqError, ValueError):
    pass


class SumViolationError(IpuqError, ValueError):
    pass


class OutOfRangeError(IpuqError, ValueError):
    pass


class InvertedIntervalError(IpuqError, ValueError):
    pass


class EmptyCredalError(IpuqError, ValueError):
    pass


class CandidateSetMismatchError(IpuqError, ValueError):
    pass


def _clean_answer(text: str) -> str:
    return text.strip()


def _fold(text: str) -> str:
    return text.strip().casefold()


@dataclass(frozen=True)
class CandidateSet:
    """An ordered set of answer strings, optionally open-ended.

    ``open_ended`` marks candidate lists that do not claim to be exhaustive
    (e.g. model-generated enumerations); elicitation protocols use it to
    decide whether a "none of the listed answers" slot is meaningful.

    Construction trims whitespace and drops duplicates, where two answers
    are duplicates when they are equal after trimming and case-folding.
    The first occurrence wins and order is otherwise preserved.  With
    ``case_sensitive=True`` only trimming is applied before comparison --
    needed when the candidates legitimately differ only in casing, as in
    the synthetic noisy-casing tasks.
    """

    answers: tuple[str, ...]
    open_ended: bool = False
    case_sensitive: bool = False

    def __post_init__(self) -> None:
        cleaned: list[str] = []
        seen: set[str] = set()
        for raw in self.answers:
            text = _clean_answer(raw)
            if not text:
                raise EmptyInputError("candidate answers must be non-empty strings")
            key = text if self.case_sensitive else text.casefold()
            if key in seen:
                continue
            seen.add(key)
            cleaned.append(text)
        if not cleaned:
            raise EmptyInputError("a candidate set needs at least one answer")
        object.__setattr__(self, "answers", tuple(cleaned))

    def __len__(self) -> int:
        return len(self.answers)

    def index_of(self, answer: str) -> int | None:
        """Index of ``answer`` under the same comparison rule used for dedup."""
        if self.case_sensitive:
            key = _clean_answer(answer)
            for i, a in enumerate(self.answers):
                if a == key:
                    return i
            return None
        key = _fold(answer)
        for i, a in enumerate(self.answers):
            if a.casefold() == key:
                return i
        return None


@dataclass(frozen=True)
class PrecisePMF:
    """A probability mass function over a candidate set."""

    candidates: CandidateSet
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.probs) != len(self.candidates):
            raise LengthMismatchError(
                f"{len(self.probs)} probabilities for {len(self.candidates)} candidates"
            )
        for i, p in enumerate(self.probs):
            if p < 0.0 or p > 1.0:
                raise OutOfRangeError(f"prob at index {i} outside [0, 1]: {p!r}")
        total = sum(self.probs)
        if abs(total - 1.0) > PROB_TOL:
            raise SumViolationError(f"probabilities sum to {total!r}, expected 1")

    def prob_of(self, index: int) -> float:
        return self.probs[index]


@dataclass(frozen=True)
class ProbabilityIntervalSet:
    """Per-answer probability intervals [lower_i, upper_i]."""

    candidates: CandidateSet
    lowers: tuple[float, ...]
    uppers: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lowers", tuple(float(x) for x in self.lowers))
        object.__setattr__(self, "uppers", tuple(float(x) for x in self.uppers))
        n = len(self.candidates)
        if len(self.lowers) != n or len(self.uppers) != n:
            raise LengthMismatchError("interval bounds must align with candidates")
        for i, (lo, hi) in enumerate(zip(self.lowers, self.uppers)):
            if lo < 0.0 or hi > 1.0:
                raise OutOfRangeError(f"interval at index {i} outside [0, 1]: [{lo!r}, {hi!r}]")
            if lo > hi:
                raise InvertedIntervalError(f"lower {lo!r} above upper {hi!r} at index {i}")

    def width(self, index: int) -> float:
        return self.uppers[index] - self.lowers[index]


@dataclass(frozen=True)
class CredalSet:
    """A finite ensemble of PMFs over one shared candidate set.

    The convex hull of the members is the intended object; since event
    probabilities are linear in the PMF, extrema over the hull are attained
    at the stored members, so keeping the finite generator set suffices.
    """

    candidates: CandidateSet
    members: tuple[PrecisePMF, ...]
    member_tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.members:
            raise EmptyCredalError("a credal set needs at least one member PMF")
        for m in self.members:
            if m.candidates != self.candidates:
                raise CandidateSetMismatchError("member PMFs must share the candidate set")
        if self.member_tags and len(self.member_tags) != len(self.members):
            raise LengthMismatchError("one tag per member, or no tags at all")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class PossibilityAssignment:
    """Plausibility scores in [0, 1] per answer, plus a reserved slot.

    ``none_of_above`` scores the event "some answer not in the list is the
    correct one".  Scores need not sum to anything; a fully plausible answer
    scores 1.0.  All-zero assignments are representable (a model can emit
    them) but cannot be normalized -- see
    :func:`ipuq.coherence.normalize_possibility`.
    """

    candidates: CandidateSet
    scores: tuple[float, ...]
    none_of_above: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if len(self.scores) != len(self.candidates):
            raise LengthMismatchError("one possibility score per candidate")
        for i, s in enumerate((*self.scores, self.none_of_above)):
            if s < 0.0 or s > 1.0:
                raise OutOfRangeError(f"possibility score outside [0, 1] at slot {i}: {s!r}")

    def combined(self) -> tuple[float, ...]:
        """Candidate scores with the none-of-the-above slot appended."""
        return (*self.scores, self.none_of_above)


@dataclass
class QARecord:
    """One question with its candidate answers, labels and attached results.

    ``truth_set`` holds every admissible reference answer (more than one
    marks the question as ambiguous).  ``reference_answer`` is the single
    answer correctness is judged against.  ``prediction`` is whatever answer
    the system under study committed to, which may fall outside the candidate
    list; membership is checked lazily via :meth:`prediction_in_candidates`.
    """

    question: str
    candidates: CandidateSet
    truth_set: tuple[str, ...] = ()
    reference_answer: str | None = None
    prediction: str | None = None
    pstar: tuple[float, ...] | None = None
    question_id: str | None = None
    reports: dict[str, object] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.truth_set = tuple(_clean_answer(t) for t in self.truth_set)
        if self.reference_answer is not None:
            ref = _fold(self.reference_answer)
            if self.truth_set and ref not in {_fold(t) for t in self.truth_set}:
                raise CandidateSetMismatchError(
                    "reference answer must be a member of the truth set"
                )
        if self.pstar is not None:
            self.pstar = tuple(float(p) for p in self.pstar)
            if len(self.pstar) != len(self.truth_set):
                raise LengthMismatchError("pstar must align with the truth set")

    @property
    def ambiguous(self) -> bool:
        return len(self.truth_set) > 1

    def prediction_in_candidates(self) -> bool | None:
        if self.prediction is None:
            return None
        return self.candidates.index_of(self.prediction) is not None


def build_pmf(
    candidates: CandidateSet,
    weights: Sequence[float],
    *,
    renormalize: bool = False,
) -> PrecisePMF:
    """Build a :class:`PrecisePMF` from raw non-negative weights.

    With ``renormalize=False`` the weights must already sum to 1 within
    ``PROB_TOL``; they are divided by their exact sum anyway so downstream
    arithmetic sees a sum as close to 1.0 as the representation allows.
    With ``renormalize=True`` any positive total is accepted.  Renormalizing
    twice changes nothing (the second division is by a sum that is already
    1.0 up to one rounding step).
    """
    weights = [float(w) for w in weights]
    if len(weights) != len(candidates):
        raise LengthMismatchError(
            f"{len(weights)} weights for {len(candidates)} candidates"
        )
    for i, w in enumerate(weights):
        if w < 0.0:
            raise NegativeWeightError(f"negative weight at index {i}: {w!r}")
    total = sum(weights)
    if total <= 0.0:
        raise ZeroMassError("weights sum to zero; no distribution can be formed")
    if not renormalize and abs(total - 1.0) > PROB_TOL:
        raise SumViolationError(
            f"weights sum to {total!r}, expected 1 within {PROB_TOL}"
        )
    probs = tuple(min(w / total, 1.0) for w in weights)
    return PrecisePMF(candidates=candidates, probs=probs)


def interval_from_credal(credal: CredalSet) -> ProbabilityIntervalSet:
    """Componentwise envelope of a credal set's members.

    Takes, for each answer, the minimum and maximum probability any member
    assigns to it.  Every member lies inside the resulting box, so the
    envelope can only be wider than the credal set, never narrower.
    """
    members = credal.members
    lowers = tuple(min(m.probs[i] for m in members) for i in range(len(credal.candidates)))
    uppers = tuple(max(m.probs[i] for m in members) for i in range(len(credal.candidates)))
    return ProbabilityIntervalSet(candidates=credal.candidates, lowers=lowers, uppers=uppers)


def fold_equal(a: str, b: str) -> bool:
    """Equality after whitespace-trimming and case-folding."""
    return _fold(a) == _fold(b)


__all__ = [
    "PROB_TOL",
    "IpuqError",
    "EmptyInputError",
    "LengthMismatchError",
    "NegativeWeightError",
    "ZeroMassError",
    "SumViolationError",
    "OutOfRangeError",
    "InvertedIntervalError",
    "EmptyCredalError",
    "CandidateSetMismatchError",
    "CandidateSet",
    "PrecisePMF",
    "ProbabilityIntervalSet",
    "CredalSet",
    "PossibilityAssignment",
    "QARecord",
    "build_pmf",
    "interval_from_credal",
    "fold_equal",
]
