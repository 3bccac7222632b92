"""Synthetic disentanglement study over a (noise p, demonstrations m) grid.

For every cell we generate in-context-learning tasks with analytically known
answer distributions, elicit the configured uncertainty reports, and tabulate
first-order / second-order scores plus permissive-match error.  Sweeping p at
fixed m should move only first-order scores; sweeping m at fixed p should
move only the imprecision scores.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence

from .campaign import MODE_SET, decide, score_payload
from .core import CandidateSet
from .elicit.client import ChatClient, ModelEndpoint
from .elicit.loop import elicit_with_retry
from .elicit.prompts import KINDS_WITH_CANDIDATES, PromptKind
from .mock import AgentConfig, MockScript, MockTransport
from .synth import (
    NoiseSpec,
    TransformSpec,
    format_icl_prompt,
    generate_icl_task,
    ground_truth_variants,
    permissive_match,
)

DEFAULT_STUDY_METHODS = (PromptKind.DEFINETTI.value, PromptKind.PROBINT.value)

STUDY_CSV_COLUMNS = (
    "method",
    "p",
    "m",
    "n",
    "first_order_mean",
    "first_order_std",
    "second_order_mean",
    "second_order_std",
    "error_rate",
)


@dataclass(frozen=True)
class StudyCell:
    """Aggregated results for one (method, p, m) grid cell."""

    method: str
    p: float
    m: int
    n: int
    first_order_mean: float | None
    first_order_std: float | None
    second_order_mean: float | None
    second_order_std: float | None
    error_rate: float | None

    def as_row(self) -> dict[str, object]:
        return {c: getattr(self, c) for c in STUDY_CSV_COLUMNS}


def simulated_agent_client_factory(
    *, width_c: float = 1.0, credal_spread: float = 0.05
) -> Callable[[float], ChatClient]:
    """In-process clients whose agent believes the analytic ground truth.

    The returned factory maps a noise level p to a client backed by an agent
    that verbalizes the exact casing distribution for that p and intervals of
    width min(1, width_c / m), so grid trends have a closed-form oracle.
    """

    def factory(p: float) -> ChatClient:
        script = MockScript(
            entries=(),
            agent=AgentConfig(noise_p=p, width_c=width_c, credal_spread=credal_spread),
        )
        return ChatClient(transport=MockTransport(script))

    return factory


def _aggregate(values: Sequence[float]) -> tuple[float | None, float | None]:
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    mean = statistics.fmean(present)
    std = statistics.stdev(present) if len(present) > 1 else 0.0
    return mean, std


def run_synthetic_study(
    transform: TransformSpec,
    noise_grid: Sequence[float],
    m_grid: Sequence[int],
    repeats: int,
    endpoint: ModelEndpoint | None = None,
    *,
    client_factory: Callable[[float], ChatClient] | None = None,
    methods: Sequence[str] = DEFAULT_STUDY_METHODS,
    word_length: int = 4,
    base_seed: int = 0,
    max_attempts: int = 5,
) -> list[StudyCell]:
    """Elicit every (method, p, m, repeat) cell and return per-cell rows.

    ``client_factory`` maps p to the client to use for that noise level; it
    defaults to the in-process simulated agent (no network).  A fixed client
    (e.g. a real endpoint that cannot be told p) can be supplied by wrapping
    it: ``client_factory=lambda p: client``.
    """
    if not noise_grid or not m_grid:
        raise ValueError("noise_grid and m_grid must be non-empty")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if endpoint is None:
        endpoint = ModelEndpoint(base_url="mock://simulated-agent", model_id="sim-agent")
    if client_factory is None:
        client_factory = simulated_agent_client_factory()

    cells: list[StudyCell] = []
    for p in noise_grid:
        client = client_factory(p)
        for m in m_grid:
            per_method: dict[str, dict[str, list]] = {
                meth: {"first": [], "second": [], "errors": []} for meth in methods
            }
            for rep in range(repeats):
                task = generate_icl_task(
                    transform,
                    NoiseSpec(p=p, rng_seed=base_seed + 7919 + rep),
                    m=m,
                    word_length=word_length,
                    rng_seed=base_seed + rep,
                )
                variants = ground_truth_variants(task.clean_query_output, p)
                candidates = CandidateSet(
                    answers=tuple(v.text for v in variants),
                    open_ended=False,
                    case_sensitive=True,
                )
                question = format_icl_prompt(task)
                for meth in methods:
                    kind = PromptKind(meth)
                    result = elicit_with_retry(
                        client,
                        endpoint,
                        kind,
                        question,
                        candidates if kind in KINDS_WITH_CANDIDATES else None,
                        max_attempts=max_attempts,
                    )
                    first, second, _ = score_payload(
                        meth, result.payload, candidates, mode=MODE_SET
                    )
                    bucket = per_method[meth]
                    bucket["first"].append(first)
                    bucket["second"].append(second)
                    outcome = decide(meth, result.payload)
                    if outcome is not None:
                        bucket["errors"].append(
                            0.0
                            if permissive_match(
                                outcome.chosen_answer, task.clean_query_output
                            )
                            else 1.0
                        )
            for meth in methods:
                bucket = per_method[meth]
                f_mean, f_std = _aggregate(bucket["first"])
                s_mean, s_std = _aggregate(bucket["second"])
                err = statistics.fmean(bucket["errors"]) if bucket["errors"] else None
                cells.append(
                    StudyCell(
                        method=meth,
                        p=float(p),
                        m=int(m),
                        n=repeats,
                        first_order_mean=f_mean,
                        first_order_std=f_std,
                        second_order_mean=s_mean,
                        second_order_std=s_std,
                        error_rate=err,
                    )
                )
    return cells


def write_study_csv(cells: Sequence[StudyCell], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(STUDY_CSV_COLUMNS))
        writer.writeheader()
        for cell in cells:
            writer.writerow({k: ("" if v is None else v) for k, v in cell.as_row().items()})


__all__ = [
    "DEFAULT_STUDY_METHODS",
    "STUDY_CSV_COLUMNS",
    "StudyCell",
    "simulated_agent_client_factory",
    "run_synthetic_study",
    "write_study_csv",
]
