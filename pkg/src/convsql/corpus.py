"""Unified task-sample assembly and the two-stage corpus builds.

Every sample pairs a task prompt with one serialized model input: the
dialogue so far (utterances interleaved with the canonical prints of the
previous gold SQLs), the current utterance, and the flattened schema.
Stage 1 mixes all enabled tasks; stage 2 keeps only SQL generation and
corrupts each previous-SQL context slot with probability alpha.

Builds are deterministic: sample order before shuffling follows the config
and file order, the shuffle is seeded, and per-slot perturbation streams
are derived from (seed, dataset, interaction, turn) so the byte stream is
identical at any worker count.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from convsql.canonical import canonicalize
from convsql.errors import InteractionParseError, SchemaFormatError
from convsql.labels import (
    Interaction,
    Turn,
    compute_turn_switch,
    extract_related_schema,
    serialize_rsp,
    serialize_twp,
)
from convsql.parser import parse_sql
from convsql.perturb import PerturbConfig, perturb_sql
from convsql.printer import print_sql
from convsql.schema import DatabaseSchema, load_schemas, serialize_schema

TASKS = ("SG", "RSP", "TWP", "FUP")

DEFAULT_PROMPTS = {
    "SG": "translate the dialogue into a sql query:",
    "RSP": "predict the related schema of the current query:",
    "TWP": "predict the turn switch from the last query:",
    "FUP": "predict the final utterance of the dialogue:",
}


@dataclass(frozen=True)
class Separators:
    segment: str = " | "
    schema_prefix: str = " || "


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    interactions_path: str
    tables_path: str
    context_independent: bool = False


@dataclass(frozen=True)
class CorpusConfig:
    datasets: tuple[DatasetSpec, ...]
    enabled_tasks: tuple[str, ...] = TASKS
    prompts: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_PROMPTS))
    perturb: PerturbConfig | None = None
    separators: Separators = field(default_factory=Separators)

    def __post_init__(self) -> None:
        if not self.enabled_tasks:
            raise ValueError("enabled_tasks must not be empty")
        unknown = set(self.enabled_tasks) - set(TASKS)
        if unknown:
            raise ValueError(f"unknown tasks: {sorted(unknown)}")


@dataclass(frozen=True)
class TaskSample:
    task: str
    prompt: str
    input: str
    target: str
    dataset: str
    db_id: str
    interaction_id: str
    turn_index: int
    perturbed: bool = False

    def to_json(self) -> str:
        obj = {
            "task": self.task,
            "prompt": self.prompt,
            "input": self.input,
            "target": self.target,
            "meta": {
                "dataset": self.dataset,
                "db_id": self.db_id,
                "interaction_id": self.interaction_id,
                "turn_index": self.turn_index,
                "perturbed": self.perturbed,
            },
        }
        return json.dumps(obj, ensure_ascii=False)


def load_interactions(
    path: str | Path,
    context_independent: bool = False,
    skip_unparsable: bool = False,
    dataset: str = "",
) -> list[Interaction]:
    """Read a dataset file into interactions, file order preserved.

    Conversational files carry an ``interaction`` turn list per entry;
    context-independent files carry flat question/query pairs that become
    one-turn interactions.  Every gold SQL must parse (syntactically);
    failures reject the whole interaction unless ``skip_unparsable``.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaFormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise SchemaFormatError(f"{path}: expected a JSON array of entries")

    interactions: list[Interaction] = []
    for index, entry in enumerate(raw):
        interaction_id = str(index)
        if not isinstance(entry, dict):
            raise SchemaFormatError(f"{path}: entry {index} is not an object")
        db_id = entry.get("db_id") or entry.get("database_id")
        if not db_id:
            raise SchemaFormatError(f"{path}: entry {index} has no db_id")

        if "interaction" in entry:
            if context_independent:
                raise SchemaFormatError(
                    f"{path}: entry {index} is conversational but the dataset "
                    "is declared context-independent"
                )
            turns = tuple(
                Turn(utterance=t["utterance"], gold_sql=t["query"])
                for t in entry["interaction"]
            )
            final = (entry.get("final") or {}).get("utterance")
        elif "question" in entry:
            turns = (Turn(utterance=entry["question"], gold_sql=entry["query"]),)
            final = None
        else:
            raise SchemaFormatError(
                f"{path}: entry {index} has neither 'interaction' nor 'question'"
            )
        if not turns:
            raise SchemaFormatError(f"{path}: entry {index} has no turns")

        try:
            for turn_no, turn in enumerate(turns, 1):
                try:
                    parse_sql(turn.gold_sql)
                except Exception as exc:
                    raise InteractionParseError(interaction_id, turn_no, exc) from exc
        except InteractionParseError:
            if skip_unparsable:
                continue
            raise
        interactions.append(
            Interaction(
                id=interaction_id,
                db_id=db_id,
                turns=turns,
                final_utterance=final,
                dataset=dataset,
            )
        )
    return interactions


def build_input(
    history: list[tuple[str, str]],
    current_utterance: str,
    schema: DatabaseSchema,
    separators: Separators = Separators(),
) -> str:
    """Assemble the serialized model input for one turn."""
    segments: list[str] = []
    for utterance, sql in history:
        segments.append(utterance)
        segments.append(sql)
    segments.append(current_utterance)
    dialogue = separators.segment.join(segments)
    return f"{dialogue}{separators.schema_prefix}{serialize_schema(schema)}"


@dataclass
class _SlotCounter:
    total: int = 0
    perturbed: int = 0


def _is_context_independent(interaction: Interaction, config: CorpusConfig) -> bool:
    spec = next(
        (d for d in config.datasets if d.name == interaction.dataset), None
    )
    return spec.context_independent if spec is not None else False


def make_samples(
    interaction: Interaction,
    schema: DatabaseSchema,
    config: CorpusConfig,
    slots: _SlotCounter | None = None,
) -> list[TaskSample]:
    """Emit the enabled task samples for one interaction.

    When ``config.perturb`` is set, the build is stage 2: only SQL
    generation samples come out, and each previous-SQL slot of the input
    is independently replaced by its perturbed form with probability
    alpha.  Targets always stay the unperturbed canonical gold.
    """
    tasks = set(config.enabled_tasks)
    if _is_context_independent(interaction, config):
        tasks &= {"SG", "RSP"}
    perturb = config.perturb
    if perturb is not None:
        tasks &= {"SG"}

    canon = []
    for turn_no, turn in enumerate(interaction.turns, 1):
        try:
            canon.append(canonicalize(parse_sql(turn.gold_sql), schema))
        except Exception as exc:
            raise InteractionParseError(interaction.id, turn_no, exc) from exc
    prints = [print_sql(q) for q in canon]

    samples: list[TaskSample] = []

    def emit(task: str, input_text: str, target: str, turn_index: int, perturbed: bool = False) -> None:
        prompt = config.prompts[task]
        samples.append(
            TaskSample(
                task=task,
                prompt=prompt,
                input=f"{prompt} {input_text}",
                target=target,
                dataset=interaction.dataset,
                db_id=interaction.db_id,
                interaction_id=interaction.id,
                turn_index=turn_index,
                perturbed=perturbed,
            )
        )

    last_input = ""
    for t, turn in enumerate(interaction.turns, 1):
        history = [
            (interaction.turns[j].utterance, prints[j]) for j in range(t - 1)
        ]
        plain_input = build_input(
            history, turn.utterance, schema, config.separators
        )
        last_input = plain_input

        if "SG" in tasks:
            if perturb is None:
                emit("SG", plain_input, prints[t - 1], t)
            else:
                input_text, altered = _perturbed_input(
                    interaction, canon, t, schema, config, perturb, slots
                )
                emit("SG", input_text, prints[t - 1], t, perturbed=altered)
        if "RSP" in tasks:
            label = extract_related_schema(canon[t - 1], schema)
            emit("RSP", plain_input, serialize_rsp(label), t)
        if "TWP" in tasks and t >= 2:
            label = compute_turn_switch(canon[t - 2], canon[t - 1], schema)
            emit("TWP", plain_input, serialize_twp(label), t)

    if "FUP" in tasks and interaction.final_utterance is not None:
        emit("FUP", last_input, interaction.final_utterance, len(interaction.turns))
    return samples


def _perturbed_input(
    interaction: Interaction,
    canon: list,
    t: int,
    schema: DatabaseSchema,
    config: CorpusConfig,
    perturb: PerturbConfig,
    slots: _SlotCounter | None,
) -> tuple[str, bool]:
    rng = random.Random(
        f"{perturb.seed}|{interaction.dataset}|{interaction.id}|{t}"
    )
    history: list[tuple[str, str]] = []
    altered = False
    for j in range(t - 1):
        sql_print = print_sql(canon[j])
        if slots is not None:
            slots.total += 1
        if rng.random() < perturb.alpha:
            mutated = print_sql(
                perturb_sql(canon[j], schema, perturb.beta, rng)
            )
            if mutated != sql_print:
                sql_print = mutated
                altered = True
                if slots is not None:
                    slots.perturbed += 1
        history.append((interaction.turns[j].utterance, sql_print))
    text = build_input(
        history, interaction.turns[t - 1].utterance, schema, config.separators
    )
    return text, altered


def build_pretrain_corpus(
    config: CorpusConfig, seed: int, jobs: int = 1
) -> tuple[list[TaskSample], dict]:
    """Stage-1 build: all enabled tasks, no perturbation, seeded shuffle."""
    if config.perturb is not None:
        raise ValueError("stage-1 builds take no perturbation config")
    return _build(config, seed, jobs)


def build_finetune_corpus(
    config: CorpusConfig, seed: int, jobs: int = 1
) -> tuple[list[TaskSample], dict]:
    """Stage-2 build: SQL-generation samples with perturbed contexts."""
    if config.perturb is None:
        raise ValueError("stage-2 builds require a perturbation config")
    if "SG" not in config.enabled_tasks:
        raise ValueError("stage-2 builds require the SG task")
    return _build(config, seed, jobs)


def _build(config: CorpusConfig, seed: int, jobs: int) -> tuple[list[TaskSample], dict]:
    samples: list[TaskSample] = []
    slots = _SlotCounter()
    interaction_total = 0
    turn_total = 0
    for spec in config.datasets:
        schemas = load_schemas(spec.tables_path)
        interactions = load_interactions(
            spec.interactions_path,
            context_independent=spec.context_independent,
            dataset=spec.name,
        )
        interaction_total += len(interactions)
        turn_total += sum(len(i.turns) for i in interactions)

        def emit_one(
            interaction: Interaction, tables_path: str = spec.tables_path
        ) -> tuple[list[TaskSample], _SlotCounter]:
            if interaction.db_id not in schemas:
                raise SchemaFormatError(
                    f"db {interaction.db_id!r} missing from {tables_path}"
                )
            # one counter per interaction; reduced below so workers never share
            local = _SlotCounter()
            chunk = make_samples(
                interaction, schemas[interaction.db_id], config, local
            )
            return chunk, local

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(emit_one, interactions))
        else:
            results = [emit_one(interaction) for interaction in interactions]
        for chunk, local in results:
            samples.extend(chunk)
            slots.total += local.total
            slots.perturbed += local.perturbed

    random.Random(seed).shuffle(samples)
    manifest = _manifest(config, seed, samples, interaction_total, turn_total, slots)
    return samples, manifest


def _manifest(
    config: CorpusConfig,
    seed: int,
    samples: list[TaskSample],
    interactions: int,
    turns: int,
    slots: _SlotCounter,
) -> dict:
    counts: dict[str, dict[str, int]] = {}
    totals = {task: 0 for task in TASKS}
    for sample in samples:
        per_ds = counts.setdefault(sample.dataset, {})
        per_ds[sample.task] = per_ds.get(sample.task, 0) + 1
        totals[sample.task] += 1
    manifest = {
        "seed": seed,
        "samples": len(samples),
        "interactions": interactions,
        "turns": turns,
        "counts": counts,
        "totals": totals,
        "context_slots_total": slots.total,
        "context_slots_perturbed": slots.perturbed,
    }
    if config.perturb is not None:
        manifest["alpha"] = config.perturb.alpha
        manifest["beta"] = config.perturb.beta
        manifest["perturb_seed"] = config.perturb.seed
    return manifest


def write_corpus(samples: list[TaskSample], path: str | Path) -> None:
    """Write samples as UTF-8 JSONL with LF newlines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in samples:
            fh.write(sample.to_json())
            fh.write("\n")


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def corpus_stats(path: str | Path) -> dict:
    """Count samples by dataset, task, and turn in a corpus file."""
    by_dataset: dict[str, dict[str, int]] = {}
    by_task = {task: 0 for task in TASKS}
    by_turn: dict[str, dict[int, int]] = {task: {} for task in TASKS}
    questions: set[tuple[str, str, int]] = set()
    interactions: set[tuple[str, str]] = set()
    total = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                task = obj["task"]
                meta = obj["meta"]
                dataset = meta["dataset"]
                turn = meta["turn_index"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise SchemaFormatError(f"{path}:{line_no}: bad corpus line: {exc}")
            total += 1
            per_ds = by_dataset.setdefault(dataset, {})
            per_ds[task] = per_ds.get(task, 0) + 1
            if task in by_task:
                by_task[task] += 1
                by_turn[task][turn] = by_turn[task].get(turn, 0) + 1
            interactions.add((dataset, meta["interaction_id"]))
            if task in ("SG", "RSP"):
                questions.add((dataset, meta["interaction_id"], turn))
    return {
        "samples": total,
        "by_dataset": by_dataset,
        "by_task": by_task,
        "by_turn": by_turn,
        "questions": len(questions),
        "interactions": len(interactions),
    }
