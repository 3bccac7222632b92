"""Evaluation metrics and usage accounting.

The ranking metrics answer one question: does a higher uncertainty score
pick out the examples that deserve it (ambiguous ones, wrong ones, or ones
with a larger reference value)?  Ties are credited half a pair throughout,
which keeps scores comparable across methods with different granularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import IpuqError


class DegenerateLabelsError(IpuqError, ValueError):
    pass


class AllRefsTiedError(IpuqError, ValueError):
    pass


class MissingRefError(IpuqError, ValueError):
    pass


class UnknownEndpointError(IpuqError, KeyError):
    pass


@dataclass(frozen=True)
class ScoredExample:
    """One evaluated example: an uncertainty score plus what it should track.

    ``label`` is the binary target for AUROC (1 = the class the score should
    rank higher).  ``ref_value`` is a real-valued target for concordance.
    """

    score: float
    label: int = 0
    ref_value: float | None = None

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


def auroc(examples: Sequence[ScoredExample]) -> float:
    """Probability that a random positive outscores a random negative.

    Computed from average ranks (Mann-Whitney form), which credits tied
    score pairs exactly 0.5 and therefore agrees to the last bit with a
    direct enumeration of all positive-negative pairs.
    """
    n_pos = sum(1 for e in examples if e.label == 1)
    n_neg = len(examples) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("AUROC needs at least one positive and one negative")
    order = sorted(range(len(examples)), key=lambda i: examples[i].score)
    ranks = [0.0] * len(examples)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and examples[order[j + 1]].score == examples[order[i]].score:
            j += 1
        # 1-based ranks; every member of a tie block gets the block's mean rank.
        avg = (i + 1 + j + 1) / 2
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    pos_rank_sum = sum(r for r, e in zip(ranks, examples) if e.label == 1)
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def concordance_index(examples: Sequence[ScoredExample]) -> float:
    """Fraction of reference-ordered pairs the scores order the same way.

    Pairs whose reference values tie are not comparable and leave the
    denominator; pairs whose scores tie count half.  Quadratic in the number
    of examples, which is fine at evaluation sizes (hundreds).
    """
    for e in examples:
        if e.ref_value is None:
            raise MissingRefError("every example needs a ref_value for concordance")
    comparable = 0
    credit = 0.0
    n = len(examples)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = examples[i], examples[j]
            if a.ref_value == b.ref_value:
                continue
            comparable += 1
            if a.score == b.score:
                credit += 0.5
            elif (a.score - b.score) * (a.ref_value - b.ref_value) > 0:
                credit += 1.0
    if comparable == 0:
        raise AllRefsTiedError("no pair of examples has distinct reference values")
    return credit / comparable


@dataclass(frozen=True)
class CostRow:
    """Token counts and currency for one (endpoint, method) cell."""

    input_tokens: int = 0
    output_tokens: int = 0
    currency: float = 0.0

    def plus(self, other: "CostRow") -> "CostRow":
        return CostRow(
            input_tokens=self.input_tokens + other.input_tokens,
            output_tokens=self.output_tokens + other.output_tokens,
            currency=self.currency + other.currency,
        )


@dataclass
class CostLedger:
    """Additive usage ledger keyed by (endpoint, method)."""

    rows: dict[tuple[str, str], CostRow] = field(default_factory=dict)

    def add(self, endpoint_key: str, method: str, row: CostRow) -> None:
        key = (endpoint_key, method)
        self.rows[key] = self.rows.get(key, CostRow()).plus(row)

    def merged(self, other: "CostLedger") -> "CostLedger":
        out = CostLedger(rows=dict(self.rows))
        for key, row in other.rows.items():
            out.rows[key] = out.rows.get(key, CostRow()).plus(row)
        return out

    def endpoint_totals(self) -> dict[str, CostRow]:
        out: dict[str, CostRow] = {}
        for (endpoint_key, _), row in self.rows.items():
            out[endpoint_key] = out.get(endpoint_key, CostRow()).plus(row)
        return out

    def total(self) -> CostRow:
        total = CostRow()
        for row in self.rows.values():
            total = total.plus(row)
        return total


def cost_report(results: Iterable[object], endpoints: Sequence[object]) -> CostLedger:
    """Aggregate elicitation usage into a :class:`CostLedger`.

    ``results`` may be any objects exposing ``endpoint_key``, ``kind`` and
    token counts (``input_tokens``/``output_tokens``), which is the shape of
    elicitation results and of usage entries loaded back from run records.
    ``endpoints`` supply per-token prices by their ``key``; a result whose
    endpoint is missing raises :class:`UnknownEndpointError` rather than
    silently pricing it at zero.
    """
    prices: dict[str, tuple[float, float]] = {
        ep.key: (ep.price_per_input_token, ep.price_per_output_token) for ep in endpoints
    }
    ledger = CostLedger()
    for res in results:
        key = res.endpoint_key
        if key not in prices:
            raise UnknownEndpointError(key)
        p_in, p_out = prices[key]
        tin = int(res.input_tokens)
        tout = int(res.output_tokens)
        ledger.add(
            key,
            res.kind,
            CostRow(
                input_tokens=tin,
                output_tokens=tout,
                currency=tin * p_in + tout * p_out,
            ),
        )
    return ledger


__all__ = [
    "DegenerateLabelsError",
    "AllRefsTiedError",
    "MissingRefError",
    "UnknownEndpointError",
    "ScoredExample",
    "auroc",
    "concordance_index",
    "CostRow",
    "CostLedger",
    "cost_report",
]
