"""Second-order uncertainty scores: maximum mean imprecision (MMI).

For an imprecise report every event ``A`` over the candidate set carries a
lower and an upper probability.  The MMI under total variation is the widest
such gap::

    MMI = max over events A of ( upper(A) - lower(A) )

i.e. the probability mass that stays genuinely undecided no matter which
event you ask about.  It is 0 for a precise distribution and 1 for complete
ignorance.  Each report type admits its own route to this number:

* a single answer's probability interval: the gap is just ``upper - lower``
  (the two-outcome event space has nothing wider);
* a full interval set: ``1 - sum(lowers)`` upper-bounds the MMI and is the
  score used when only lower bounds are trusted;
* a credal set: event bounds are minima/maxima over the member PMFs (event
  probability is linear, so extrema sit at the members), and the exact MMI
  comes from enumerating all ``2^n`` events;
* a possibility assignment: after scaling the peak to 1, the second-largest
  score is exactly the widest gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import PROB_TOL, CredalSet, IpuqError, PossibilityAssignment
from .coherence import AllZeroError

#: Largest candidate count for which the exact event enumeration runs by
#: default (2^16 = 65,536 events; beyond that callers must opt in).
DEFAULT_EXACT_ENUM_CAP = 16

MODE_INTERVAL_WIDTH = "interval_width"
MODE_UPPER_BOUND = "upper_bound"
MODE_EXACT_EVENT_ENUM = "exact_event_enum"
MODE_POSSIBILITY_RATIO = "possibility_ratio"
MODE_POSSIBILITY_BINARY = "possibility_binary"


class CandidateSetTooLargeError(IpuqError, ValueError):
    pass


class LowerSumExceedsOneError(IpuqError, ValueError):
    pass


class InvalidIntervalError(IpuqError, ValueError):
    pass


@dataclass(frozen=True)
class MmiScore:
    """An MMI value plus how it was obtained.

    ``event_count`` is the number of events actually enumerated; it is
    ``2^n`` for the exact mode and ``None`` for closed-form modes.
    """

    value: float
    mode: str
    event_count: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"MMI must lie in [0, 1], got {self.value!r}")


def interval_width_mmi(lower: float, upper: float) -> MmiScore:
    """Exact MMI for one answer's probability interval.

    With a single answer the only non-trivial events are "correct" and
    "not correct", and both show the same gap, so the MMI equals the
    interval width with no slack.
    """
    lower = float(lower)
    upper = float(upper)
    if not (0.0 <= lower <= upper <= 1.0):
        raise InvalidIntervalError(f"need 0 <= lower <= upper <= 1, got [{lower!r}, {upper!r}]")
    return MmiScore(value=upper - lower, mode=MODE_INTERVAL_WIDTH, event_count=4)


def mmi_upper_bound(lowers: Sequence[float], *, tol: float = PROB_TOL) -> MmiScore:
    """Upper bound on the MMI from lower probabilities alone.

    Whatever the event, its upper probability is at most 1 and its lower
    probability is at least the sum of the lower bounds of its singletons,
    so no gap can exceed ``1 - sum(lowers)``.  The bound is tight when all
    the slack can concentrate on one event.
    """
    lowers = [float(x) for x in lowers]
    for i, lo in enumerate(lowers):
        if lo < 0.0:
            raise InvalidIntervalError(f"negative lower bound at index {i}: {lo!r}")
    total = sum(lowers)
    if total > 1.0 + tol:
        raise LowerSumExceedsOneError(f"lower bounds sum to {total!r} > 1")
    return MmiScore(value=min(1.0, max(0.0, 1.0 - total)), mode=MODE_UPPER_BOUND)


def _event_sums(probs: Sequence[float]) -> np.ndarray:
    # Index m holds the probability of the event whose bitmask is m (bit k set
    # means candidate k is in the event).  Built by doubling so that each sum
    # accumulates addends in increasing candidate order -- this keeps the
    # result bit-identical to a naive loop that adds probabilities in index
    # order, which is what independent checkers are expected to do.
    sums = np.zeros(1, dtype=np.float64)
    for p in probs:
        sums = np.concatenate([sums, sums + p])
    return sums


def exact_mmi_credal(credal: CredalSet, *, cap: int = DEFAULT_EXACT_ENUM_CAP) -> MmiScore:
    """Exact MMI of a credal set by full event enumeration.

    For each of the ``2^n`` events, the lower (upper) event probability is
    the min (max) of the event's mass over the member PMFs; the score is the
    largest max-min gap found.  Cost is ``O(2^n * members)``, hence the cap.
    """
    n = len(credal.candidates)
    if n > cap:
        raise CandidateSetTooLargeError(
            f"{n} candidates exceed the exact enumeration cap of {cap}"
        )
    per_member = np.stack([_event_sums(m.probs) for m in credal.members])
    widths = per_member.max(axis=0) - per_member.min(axis=0)
    return MmiScore(
        value=float(widths.max()),
        mode=MODE_EXACT_EVENT_ENUM,
        event_count=2**n,
    )


def possibility_mmi(assignment: PossibilityAssignment) -> MmiScore:
    """MMI of a possibility assignment: its second-largest normalized score.

    After scaling so the top score is 1 the widest event gap is attained by
    the most plausible answer against everything else, and equals the
    runner-up score.  Computed as ``second_raw / top_raw``, which is the same
    number as normalizing first and sorting after.  The none-of-the-above
    slot competes like any other entry.  Invariant under positive rescaling
    of the input.
    """
    combined = assignment.combined()
    if len(combined) == 1:
        return MmiScore(value=0.0, mode=MODE_POSSIBILITY_RATIO)
    ranked = sorted(combined, reverse=True)
    top, second = ranked[0], ranked[1]
    if top <= 0.0:
        raise AllZeroError("all possibility scores are zero; MMI is undefined")
    return MmiScore(value=second / top, mode=MODE_POSSIBILITY_RATIO)


def possibility_binary_mmi(score_for: float, score_against: float) -> MmiScore:
    """MMI when only an answer's and its complement's possibility are known.

    The normalized runner-up of a two-entry assignment is simply
    ``min / max``; 1 means maximal conflict (both fully plausible), 0 means
    one side is impossible.
    """
    score_for = float(score_for)
    score_against = float(score_against)
    for s in (score_for, score_against):
        if not (0.0 <= s <= 1.0):
            raise InvalidIntervalError(f"possibility scores must lie in [0, 1], got {s!r}")
    top = max(score_for, score_against)
    if top <= 0.0:
        raise AllZeroError("both possibility scores are zero; MMI is undefined")
    return MmiScore(value=min(score_for, score_against) / top, mode=MODE_POSSIBILITY_BINARY)


__all__ = [
    "DEFAULT_EXACT_ENUM_CAP",
    "MODE_INTERVAL_WIDTH",
    "MODE_UPPER_BOUND",
    "MODE_EXACT_EVENT_ENUM",
    "MODE_POSSIBILITY_RATIO",
    "MODE_POSSIBILITY_BINARY",
    "CandidateSetTooLargeError",
    "LowerSumExceedsOneError",
    "InvalidIntervalError",
    "MmiScore",
    "interval_width_mmi",
    "mmi_upper_bound",
    "exact_mmi_credal",
    "possibility_mmi",
    "possibility_binary_mmi",
]
