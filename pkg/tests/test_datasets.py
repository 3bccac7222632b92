"""Dataset ingestion: three JSONL row schemas and their failure modes."""

import json

import pytest

from ipuq.datasets import (
    FORMAT_AMBIGQA,
    FORMAT_MAQA,
    FORMAT_MC,
    SchemaViolationError,
    ingest_qa_dataset,
)


def write_jsonl(tmp_path, rows, name="data.jsonl"):
    path = tmp_path / name
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(row if isinstance(row, str) else json.dumps(row))
            fh.write("\n")
    return str(path)


class TestMaqaLike:
    def test_single_answer_is_unambiguous(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{"question": "Capital of France?", "answers": ["Paris"]}],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_MAQA)
        assert record.question == "Capital of France?"
        assert record.truth_set == ("Paris",)
        assert record.reference_answer == "Paris"
        assert not record.ambiguous
        assert record.candidates.open_ended

    def test_multiple_answers_mark_ambiguity(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{"question": "Capital of the Netherlands?",
              "answers": ["Amsterdam", "The Hague"]}],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_MAQA)
        assert record.ambiguous
        assert record.truth_set == ("Amsterdam", "The Hague")

    def test_optional_fields_flow_through(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{"question": "q", "answers": ["a", "b"], "reference": "b",
              "pstar": [0.25, 0.75], "prediction": "a", "id": "item-7"}],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_MAQA)
        assert record.reference_answer == "b"
        assert record.pstar == (0.25, 0.75)
        assert record.prediction == "a"
        assert record.question_id == "item-7"

    def test_pstar_must_align(self, tmp_path):
        path = write_jsonl(
            tmp_path, [{"question": "q", "answers": ["a", "b"], "pstar": [1.0]}]
        )
        with pytest.raises(SchemaViolationError):
            ingest_qa_dataset(path, FORMAT_MAQA)

    def test_missing_answers_names_the_line(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [
                {"question": "fine", "answers": ["a"]},
                {"question": "broken"},
            ],
        )
        with pytest.raises(SchemaViolationError) as info:
            ingest_qa_dataset(path, FORMAT_MAQA)
        assert info.value.line_no == 2
        assert "line 2" in str(info.value)
        assert "answers" in str(info.value)


class TestAmbigqaLike:
    def test_union_of_pair_answers_in_first_appearance_order(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{
                "question": "Who won?",
                "qa_pairs": [
                    {"question": "Who won in 2019?", "answers": ["Alice", "Bob"]},
                    {"question": "Who won in 2020?", "answers": ["bob", "Carol"]},
                ],
            }],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_AMBIGQA)
        # "bob" folds into the already-seen "Bob"
        assert record.truth_set == ("Alice", "Bob", "Carol")
        assert record.reference_answer == "Alice"
        assert record.ambiguous

    def test_empty_pairs_rejected(self, tmp_path):
        path = write_jsonl(tmp_path, [{"question": "q", "qa_pairs": []}])
        with pytest.raises(SchemaViolationError):
            ingest_qa_dataset(path, FORMAT_AMBIGQA)


class TestMcLike:
    def test_answer_by_index(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{"question": "2+2?", "options": ["3", "4", "5"], "answer": 1}],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_MC)
        assert record.truth_set == ("4",)
        assert record.candidates.answers == ("3", "4", "5")
        assert not record.candidates.open_ended

    def test_answer_by_string(self, tmp_path):
        path = write_jsonl(
            tmp_path,
            [{"question": "q", "options": ["yes", "no"], "answer": "no"}],
        )
        (record,) = ingest_qa_dataset(path, FORMAT_MC)
        assert record.reference_answer == "no"

    def test_answer_index_out_of_range(self, tmp_path):
        path = write_jsonl(
            tmp_path, [{"question": "q", "options": ["a"], "answer": 3}]
        )
        with pytest.raises(SchemaViolationError):
            ingest_qa_dataset(path, FORMAT_MC)

    def test_answer_not_among_options(self, tmp_path):
        path = write_jsonl(
            tmp_path, [{"question": "q", "options": ["a", "b"], "answer": "c"}]
        )
        with pytest.raises(SchemaViolationError):
            ingest_qa_dataset(path, FORMAT_MC)


def test_blank_lines_are_skipped_but_numbering_is_physical(tmp_path):
    path = write_jsonl(
        tmp_path,
        [
            {"question": "q1", "answers": ["a"]},
            "",
            {"question": "q2", "answers": ["b"]},
            "not json at all {",
        ],
    )
    with pytest.raises(SchemaViolationError) as info:
        ingest_qa_dataset(path, FORMAT_MAQA)
    assert info.value.line_no == 4


def test_default_question_ids_use_line_numbers(tmp_path):
    path = write_jsonl(
        tmp_path,
        [
            {"question": "q1", "answers": ["a"]},
            "",
            {"question": "q2", "answers": ["b"]},
        ],
    )
    records = ingest_qa_dataset(path, FORMAT_MAQA)
    assert [r.question_id for r in records] == ["q00001", "q00003"]


def test_row_must_be_an_object(tmp_path):
    path = write_jsonl(tmp_path, ['["list", "not", "object"]'])
    with pytest.raises(SchemaViolationError):
        ingest_qa_dataset(path, FORMAT_MAQA)


def test_unknown_format_rejected(tmp_path):
    path = write_jsonl(tmp_path, [{"question": "q", "answers": ["a"]}])
    with pytest.raises(ValueError):
        ingest_qa_dataset(path, "csv")
