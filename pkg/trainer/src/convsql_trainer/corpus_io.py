"""Reading and preparing JSONL training corpora.

A corpus is one JSON object per line with string ``input`` and ``target``
fields; anything else in the object rides along untouched.  Validation is
strict and runs over the whole file up front, so a bad line aborts before
any training step has spent time.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from convsql_trainer.errors import CorpusFormatError

log = logging.getLogger("convsql_trainer")

SEGMENT_SEPARATOR = " | "
SCHEMA_SEPARATOR = " || "


@dataclass(frozen=True)
class Sample:
    input: str
    target: str


def read_corpus(path: str | Path) -> list[Sample]:
    """Load and validate one corpus file; raises CorpusFormatError."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(str(exc), path=path) from exc
    samples: list[Sample] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise CorpusFormatError("blank line", path=path, line=lineno)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON: {exc}", path=path, line=lineno)
        if not isinstance(obj, dict):
            raise CorpusFormatError(
                f"expected an object, got {type(obj).__name__}", path=path, line=lineno
            )
        for key in ("input", "target"):
            if key not in obj:
                raise CorpusFormatError(f"missing {key!r}", path=path, line=lineno)
            if not isinstance(obj[key], str):
                raise CorpusFormatError(
                    f"{key!r} must be a string, got {type(obj[key]).__name__}",
                    path=path,
                    line=lineno,
                )
        if not obj["input"]:
            raise CorpusFormatError("empty 'input'", path=path, line=lineno)
        samples.append(Sample(input=obj["input"], target=obj["target"]))
    if not samples:
        raise CorpusFormatError("corpus holds no samples", path=path)
    return samples


def truncate_input(text: str, max_tokens: int) -> tuple[str, int]:
    """Fit ``text`` into ``max_tokens`` whitespace tokens.

    Inputs are laid out as ``prompt u1 | sql1 | u2 ... || schema``.  The
    schema and the newest dialogue segments matter most, so oversized
    inputs lose their oldest dialogue segments first; the task prompt (the
    leading words up to the first colon) survives.  Returns the possibly
    shortened text and the number of segments dropped.  An input that is
    still too long with one segment left is returned as is: there is
    nothing principled left to cut.
    """
    if len(text.split()) <= max_tokens:
        return text, 0
    head, schema_sep, schema = text.partition(SCHEMA_SEPARATOR)
    segments = head.split(SEGMENT_SEPARATOR)
    prompt, colon, rest = segments[0].partition(": ")
    if colon:
        prompt += ":"
        segments[0] = rest
    else:
        prompt = ""

    def assemble() -> str:
        body = SEGMENT_SEPARATOR.join(segments)
        if prompt:
            body = f"{prompt} {body}"
        return body + schema_sep + schema

    dropped = 0
    while len(segments) > 1 and len(assemble().split()) > max_tokens:
        segments.pop(0)
        dropped += 1
    return assemble(), dropped


def truncate_corpus(samples: list[Sample], max_tokens: int) -> tuple[list[Sample], int]:
    out = []
    total_dropped = 0
    truncated = 0
    for sample in samples:
        text, dropped = truncate_input(sample.input, max_tokens)
        if dropped:
            truncated += 1
            total_dropped += dropped
            sample = Sample(input=text, target=sample.target)
        out.append(sample)
    if truncated:
        log.warning(
            "truncated %d of %d inputs to %d tokens (%d segments dropped)",
            truncated,
            len(samples),
            max_tokens,
            total_dropped,
        )
    return out, truncated
