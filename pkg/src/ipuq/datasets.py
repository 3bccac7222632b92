"""Loading QA datasets into :class:`~ipuq.core.QARecord` rows.

Input is line-delimited JSON.  Three row schemas are understood:

``maqa_like``
    ``{"question": str, "answers": [str, ...]}`` plus optional
    ``reference`` (defaults to the first answer), ``pstar`` (probabilities
    aligned with ``answers``), ``prediction`` and ``id``.  Multiple answers
    mark the question ambiguous.

``ambigqa_like``
    ``{"question": str, "qa_pairs": [{"question": str, "answers": [str,..]},
    ...]}``: each pair is one disambiguated reading; the truth set is the
    union of their answers, in order of first appearance.

``mc_like``
    ``{"question": str, "options": [str, ...], "answer": str-or-index}``:
    a closed multiple-choice item whose candidate set is the option list.
"""

from __future__ import annotations

import json
from typing import Iterator

from .core import CandidateSet, IpuqError, QARecord

FORMAT_MAQA = "maqa_like"
FORMAT_AMBIGQA = "ambigqa_like"
FORMAT_MC = "mc_like"

FORMATS = (FORMAT_MAQA, FORMAT_AMBIGQA, FORMAT_MC)


class SchemaViolationError(IpuqError, ValueError):
    """A row that does not fit the declared format; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _require(row: dict, key: str, line_no: int):
    if key not in row:
        raise SchemaViolationError(line_no, f"missing required field {key!r}")
    return row[key]


def _string_list(value, line_no: int, what: str) -> list[str]:
    if not isinstance(value, list) or not value or not all(
        isinstance(v, str) and v.strip() for v in value
    ):
        raise SchemaViolationError(line_no, f"{what} must be a non-empty list of strings")
    return [v.strip() for v in value]


def _row_maqa(row: dict, line_no: int) -> QARecord:
    question = _require(row, "question", line_no)
    answers = _string_list(_require(row, "answers", line_no), line_no, "answers")
    reference = row.get("reference", answers[0])
    pstar = row.get("pstar")
    if pstar is not None and len(pstar) != len(answers):
        raise SchemaViolationError(line_no, "pstar must align with answers")
    return QARecord(
        question=question,
        candidates=CandidateSet(answers=tuple(answers), open_ended=True),
        truth_set=tuple(answers),
        reference_answer=reference,
        prediction=row.get("prediction"),
        pstar=tuple(pstar) if pstar is not None else None,
        question_id=row.get("id"),
    )


def _row_ambigqa(row: dict, line_no: int) -> QARecord:
    question = _require(row, "question", line_no)
    pairs = _require(row, "qa_pairs", line_no)
    if not isinstance(pairs, list) or not pairs:
        raise SchemaViolationError(line_no, "qa_pairs must be a non-empty list")
    answers: list[str] = []
    seen: set[str] = set()
    for pair in pairs:
        if not isinstance(pair, dict):
            raise SchemaViolationError(line_no, "each qa_pair must be an object")
        for ans in _string_list(_require(pair, "answers", line_no), line_no, "answers"):
            key = ans.casefold()
            if key not in seen:
                seen.add(key)
                answers.append(ans)
    return QARecord(
        question=question,
        candidates=CandidateSet(answers=tuple(answers), open_ended=True),
        truth_set=tuple(answers),
        reference_answer=answers[0],
        prediction=row.get("prediction"),
        question_id=row.get("id"),
    )


def _row_mc(row: dict, line_no: int) -> QARecord:
    question = _require(row, "question", line_no)
    options = _string_list(_require(row, "options", line_no), line_no, "options")
    answer = _require(row, "answer", line_no)
    if isinstance(answer, int):
        if not (0 <= answer < len(options)):
            raise SchemaViolationError(line_no, f"answer index {answer} out of range")
        answer = options[answer]
    if not isinstance(answer, str):
        raise SchemaViolationError(line_no, "answer must be an option string or index")
    folded = [o.casefold() for o in options]
    if answer.strip().casefold() not in folded:
        raise SchemaViolationError(line_no, "answer is not among the options")
    pstar = row.get("pstar")
    if pstar is not None and len(pstar) != 1:
        raise SchemaViolationError(line_no, "mc pstar must have exactly one entry")
    return QARecord(
        question=question,
        candidates=CandidateSet(answers=tuple(options), open_ended=False),
        truth_set=(answer.strip(),),
        reference_answer=answer.strip(),
        prediction=row.get("prediction"),
        pstar=tuple(pstar) if pstar is not None else None,
        question_id=row.get("id"),
    )


_PARSERS = {
    FORMAT_MAQA: _row_maqa,
    FORMAT_AMBIGQA: _row_ambigqa,
    FORMAT_MC: _row_mc,
}


def ingest_qa_dataset(path: str, format: str) -> list[QARecord]:
    """Read a JSONL dataset file into QA records.

    Any malformed row raises :class:`SchemaViolationError` naming the
    offending 1-based line number; blank lines are allowed and skipped.
    """
    if format not in _PARSERS:
        raise ValueError(f"unknown dataset format {format!r}; choose from {FORMATS}")
    parser = _PARSERS[format]
    records: list[QARecord] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolationError(line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise SchemaViolationError(line_no, "row must be a JSON object")
            try:
                record = parser(row, line_no)
            except IpuqError as exc:
                if isinstance(exc, SchemaViolationError):
                    raise
                raise SchemaViolationError(line_no, str(exc)) from exc
            if record.question_id is None:
                record.question_id = f"q{line_no:05d}"
            records.append(record)
    return records


__all__ = [
    "FORMAT_MAQA",
    "FORMAT_AMBIGQA",
    "FORMAT_MC",
    "FORMATS",
    "SchemaViolationError",
    "ingest_qa_dataset",
]
