"""Interaction-level inference against a pluggable generation endpoint.

Each turn's request carries the dialogue so far with the model's OWN prior
predictions in the SQL slots — gold never enters a request after turn 1's
utterance.  Turns inside an interaction run strictly in order; separate
interactions are independent and may run in parallel.

Endpoints speak HTTP POST /generate with JSON {"input": ...} -> {"output":
...}.  Built-in stubs (gold-echo, constant, fail-at) implement the same
surface in process so the whole pipeline is testable without a model.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import requests

from convsql.canonical import canonicalize
from convsql.corpus import CorpusConfig, build_input
from convsql.errors import EndpointError
from convsql.labels import Interaction
from convsql.parser import parse_sql
from convsql.printer import print_sql
from convsql.schema import DatabaseSchema


@dataclass(frozen=True)
class ModelEndpoint:
    transport: str  # HTTP base URL, or a stub spec like "gold-echo"
    timeout: float = 30.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class InferenceRun:
    predictions: dict[str, list[str]]
    latencies: dict[str, list[float]]
    errors: tuple[dict, ...]


@dataclass
class _Call:
    interaction_id: str
    turn: int
    payload: str


class HttpGenerator:
    """Client for a /generate endpoint, with bounded retries."""

    def __init__(self, base_url: str, timeout: float, max_retries: int):
        self.url = base_url.rstrip("/") + "/generate"
        self.timeout = timeout
        self.max_retries = max_retries
        self.calls: list[_Call] = []

    def generate(self, payload: str, interaction: Interaction, turn: int) -> str:
        self.calls.append(_Call(interaction.id, turn, payload))
        last: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                resp = requests.post(
                    self.url, json={"input": payload}, timeout=self.timeout
                )
                resp.raise_for_status()
                body = resp.json()
                output = body["output"]
                if not isinstance(output, str):
                    raise ValueError("endpoint 'output' is not a string")
                return output
            except (requests.RequestException, ValueError, KeyError) as exc:
                last = exc
        raise EndpointError(turn, last if last is not None else "unknown")


class GoldEchoStub:
    """Returns each turn's gold SQL verbatim; the oracle upper bound."""

    def __init__(self):
        self.calls: list[_Call] = []

    def generate(self, payload: str, interaction: Interaction, turn: int) -> str:
        self.calls.append(_Call(interaction.id, turn, payload))
        return interaction.turns[turn - 1].gold_sql


class ConstantStub:
    """Returns one fixed string for every turn."""

    def __init__(self, sql: str):
        self.sql = sql
        self.calls: list[_Call] = []

    def generate(self, payload: str, interaction: Interaction, turn: int) -> str:
        self.calls.append(_Call(interaction.id, turn, payload))
        return self.sql


class FailAtStub:
    """Echoes gold except at one turn, where it returns a wrong string."""

    def __init__(self, fail_turn: int, wrong_sql: str = "not a sql query at all"):
        self.fail_turn = fail_turn
        self.wrong_sql = wrong_sql
        self.calls: list[_Call] = []

    def generate(self, payload: str, interaction: Interaction, turn: int) -> str:
        self.calls.append(_Call(interaction.id, turn, payload))
        if turn == self.fail_turn:
            return self.wrong_sql
        return interaction.turns[turn - 1].gold_sql


def resolve_generator(endpoint: ModelEndpoint):
    """Map an endpoint spec to a generator object."""
    transport = endpoint.transport
    if transport.startswith(("http://", "https://")):
        return HttpGenerator(transport, endpoint.timeout, endpoint.max_retries)
    name, _, arg = transport.partition(":")
    if name == "gold-echo":
        return GoldEchoStub()
    if name == "constant":
        return ConstantStub(arg or "select * from college")
    if name == "fail-at":
        turn_text, _, wrong = arg.partition(":")
        if not turn_text.isdigit():
            raise ValueError(f"fail-at needs a turn number, got {transport!r}")
        if wrong:
            return FailAtStub(int(turn_text), wrong)
        return FailAtStub(int(turn_text))
    raise ValueError(f"unknown endpoint transport {transport!r}")


def run_interaction(
    endpoint,
    interaction: Interaction,
    schema: DatabaseSchema,
    config: CorpusConfig,
) -> list[str]:
    """Predict every turn of one interaction, chaining own predictions."""
    generator = _as_generator(endpoint)
    predictions, _, _ = _run_one(generator, interaction, schema, config)
    return predictions


def run_dataset(
    endpoint,
    interactions: list[Interaction],
    schemas: dict[str, DatabaseSchema],
    config: CorpusConfig,
    jobs: int = 1,
) -> InferenceRun:
    """Predict every interaction; never aborts on a single endpoint failure."""
    generator = _as_generator(endpoint)

    def one(interaction: Interaction):
        return _run_one(
            generator, interaction, schemas[interaction.db_id], config
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, interactions))
    else:
        results = [one(i) for i in interactions]

    predictions: dict[str, list[str]] = {}
    latencies: dict[str, list[float]] = {}
    errors: list[dict] = []
    for interaction, (preds, times, errs) in zip(interactions, results):
        predictions[interaction.id] = preds
        latencies[interaction.id] = times
        errors.extend(errs)
    return InferenceRun(
        predictions=predictions, latencies=latencies, errors=tuple(errors)
    )


def _as_generator(endpoint):
    if isinstance(endpoint, ModelEndpoint):
        return resolve_generator(endpoint)
    if not hasattr(endpoint, "generate"):
        raise TypeError("endpoint must be a ModelEndpoint or a generator object")
    return endpoint


def _run_one(
    generator,
    interaction: Interaction,
    schema: DatabaseSchema,
    config: CorpusConfig,
) -> tuple[list[str], list[float], list[dict]]:
    prompt = config.prompts["SG"]
    history: list[tuple[str, str]] = []
    predictions: list[str] = []
    latencies: list[float] = []
    errors: list[dict] = []
    for t, turn in enumerate(interaction.turns, 1):
        text = build_input(history, turn.utterance, schema, config.separators)
        payload = f"{prompt} {text}"
        started = time.perf_counter()
        try:
            output = generator.generate(payload, interaction, t)
        except EndpointError as exc:
            errors.append(
                {"interaction_id": interaction.id, "turn": t, "cause": str(exc)}
            )
            output = ""
        latencies.append(time.perf_counter() - started)
        predictions.append(output)
        history.append((turn.utterance, output))
    return predictions, latencies, errors


def write_predictions(
    run: InferenceRun, interactions: list[Interaction], path: str | Path
) -> None:
    """Write predictions JSONL in gold interaction order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for interaction in interactions:
            for t, sql in enumerate(run.predictions[interaction.id], 1):
                line = json.dumps(
                    {"interaction_id": interaction.id, "turn_index": t, "sql": sql},
                    ensure_ascii=False,
                )
                fh.write(line)
                fh.write("\n")


def find_context_leaks(
    calls: list[_Call],
    interactions: list[Interaction],
    schemas: dict[str, DatabaseSchema],
    predictions: dict[str, list[str]],
    config: CorpusConfig,
) -> list[dict]:
    """Scan recorded request payloads for gold SQL in the context slots.

    Every payload is rebuilt from the recorded predictions; a byte-equal
    payload is pure by construction.  A deviating payload is checked for
    single-slot gold substitution (raw or canonical form) and reported
    either as a located leak or as an unexplained deviation.  Exact
    reconstruction beats substring search here: one gold SQL is often a
    textual prefix of the next, which would trip a naive scan.
    """
    by_id = {i.id: i for i in interactions}
    prompt = config.prompts["SG"]
    leaks: list[dict] = []
    for call in calls:
        interaction = by_id[call.interaction_id]
        schema = schemas[interaction.db_id]
        preds = predictions[interaction.id]
        t = call.turn

        def built(history_sqls: list[str]) -> str:
            history = [
                (interaction.turns[j].utterance, history_sqls[j])
                for j in range(t - 1)
            ]
            text = build_input(
                history, interaction.turns[t - 1].utterance, schema,
                config.separators,
            )
            return f"{prompt} {text}"

        if call.payload == built(preds):
            continue
        found = False
        for j in range(t - 1):
            gold_raw = interaction.turns[j].gold_sql
            forms = {gold_raw}
            try:
                forms.add(print_sql(canonicalize(parse_sql(gold_raw), schema)))
            except Exception:
                pass
            if preds[j] in forms:
                continue  # prediction legitimately equals gold here
            for form in forms:
                substituted = list(preds)
                substituted[j] = form
                if call.payload == built(substituted):
                    leaks.append(
                        {
                            "interaction_id": interaction.id,
                            "turn": t,
                            "slot": j + 1,
                            "gold": form,
                        }
                    )
                    found = True
        if not found:
            leaks.append(
                {
                    "interaction_id": interaction.id,
                    "turn": t,
                    "slot": None,
                    "detail": "payload does not match predictions-built input",
                }
            )
    return leaks
