import logging
from pathlib import Path

import pytest

from convsql_trainer import (
    CorpusFormatError,
    Sample,
    read_corpus,
    truncate_corpus,
    truncate_input,
)

FIXTURES = Path(__file__).parent / "fixtures"
MULTITASK = FIXTURES / "toy_multitask.jsonl"
SQL_GEN = FIXTURES / "toy_sql_gen.jsonl"


class TestReadCorpus:
    def test_reads_toy_corpora(self):
        stage1 = read_corpus(MULTITASK)
        stage2 = read_corpus(SQL_GEN)
        assert len(stage1) == 48
        assert len(stage2) == 21
        assert all(s.input and isinstance(s.target, str) for s in stage1)

    def test_inputs_carry_prompt_and_schema(self):
        sample = read_corpus(SQL_GEN)[0]
        assert sample.input.split(":")[0].islower()
        assert " || " in sample.input

    @pytest.mark.parametrize(
        "line, complaint",
        [
            ("{not json", "invalid JSON"),
            ('["a", "b"]', "expected an object"),
            ('{"input": "x"}', "missing 'target'"),
            ('{"target": "y"}', "missing 'input'"),
            ('{"input": 3, "target": "y"}', "'input' must be a string"),
            ('{"input": "x", "target": null}', "'target' must be a string"),
            ('{"input": "", "target": "y"}', "empty 'input'"),
            ("", "blank line"),
        ],
    )
    def test_bad_line_rejected(self, tmp_path, line, complaint):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"input": "a", "target": "b"}\n' + line + "\n")
        with pytest.raises(CorpusFormatError) as exc_info:
            read_corpus(path)
        assert complaint in str(exc_info.value)
        assert exc_info.value.line == 2

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(CorpusFormatError, match="no samples"):
            read_corpus(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(CorpusFormatError):
            read_corpus(tmp_path / "ghost.jsonl")


class TestTruncateInput:
    TEXT = "ask: one | two three | four | five six || tbl , a , b"

    def test_short_input_untouched(self):
        text, dropped = truncate_input(self.TEXT, 100)
        assert text == self.TEXT
        assert dropped == 0

    def test_drops_oldest_segments_first(self):
        text, dropped = truncate_input(self.TEXT, 11)
        assert text == "ask: four | five six || tbl , a , b"
        assert dropped == 2

    def test_prompt_and_schema_survive(self):
        text, dropped = truncate_input(self.TEXT, 1)
        assert text == "ask: five six || tbl , a , b"
        assert dropped == 3

    def test_without_schema_part(self):
        text, dropped = truncate_input("ask: a b c | d e f | g", 5)
        assert text == "ask: g"
        assert dropped == 2

    def test_without_prompt(self):
        text, dropped = truncate_input("one two | three | four", 2)
        assert text == "four"
        assert dropped == 2

    def test_real_sample_shrinks_under_budget(self):
        sample = read_corpus(SQL_GEN)[-1]
        text, dropped = truncate_input(sample.input, 40)
        if dropped:
            assert len(text.split()) < len(sample.input.split())
        assert text.endswith(sample.input.split(" || ")[-1])


class TestTruncateCorpus:
    def test_counts_and_logs(self, caplog):
        samples = [
            Sample(input="ask: a | b | c || t , x", target="z"),
            Sample(input="ask: short || t , x", target="z"),
        ]
        with caplog.at_level(logging.WARNING, logger="convsql_trainer"):
            out, truncated = truncate_corpus(samples, 6)
        assert truncated == 1
        assert out[1] == samples[1]
        assert "truncated 1 of 2 inputs" in caplog.text

    def test_silent_when_nothing_to_do(self, caplog):
        samples = [Sample(input="a b c", target="z")]
        with caplog.at_level(logging.WARNING, logger="convsql_trainer"):
            out, truncated = truncate_corpus(samples, 10)
        assert truncated == 0
        assert out == samples
        assert caplog.text == ""
