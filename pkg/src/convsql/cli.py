"""Command-line entry point.

Five subcommands: build-corpus, stats, perturb, infer, eval.  Each is a
thin adapter over the library; identical inputs through either surface
produce byte-identical artifacts.  Exit codes: 0 success, 1 domain error
(parse failures, bad files), 2 usage error.  Diagnostics go to standard
error; data goes to files or standard output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from convsql.canonical import canonicalize
from convsql.corpus import (
    CorpusConfig,
    DatasetSpec,
    Separators,
    TASKS,
    build_finetune_corpus,
    build_pretrain_corpus,
    corpus_stats,
    load_interactions,
    write_corpus,
    write_manifest,
)
from convsql.errors import ConvsqlError
from convsql.evaluation import evaluate, load_predictions
from convsql.inference import (
    ModelEndpoint,
    run_dataset,
    write_predictions,
)
from convsql.parser import parse_sql
from convsql.perturb import PerturbConfig, perturb_sql
from convsql.printer import print_sql
from convsql.schema import load_schemas

_CONFIG_KEYS = {"datasets", "enabled_tasks", "prompts", "perturb", "separators"}
_DATASET_KEYS = {"name", "interactions_path", "tables_path", "context_independent"}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvsqlError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convsql",
        description="Corpus building, perturbation, inference, and scoring "
        "for conversational text-to-SQL.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser(
        "build-corpus", help="assemble a stage-1 or stage-2 training corpus"
    )
    build.add_argument("--config", required=True, help="TOML or JSON corpus config")
    build.add_argument(
        "--stage", required=True, choices=("pretrain", "finetune")
    )
    build.add_argument("--out", required=True, help="output corpus JSONL path")
    build.add_argument("--seed", type=int, default=0, help="shuffle seed")
    build.add_argument("--tasks", help="comma-separated task subset override")
    build.add_argument("--datasets", help="comma-separated dataset name filter")
    build.add_argument("--alpha", type=float, help="context replacement probability")
    build.add_argument("--beta", type=float, help="token-budget fraction")
    build.add_argument("--jobs", type=int, default=1, help="worker count")
    build.set_defaults(func=_cmd_build)

    stats = sub.add_parser("stats", help="count samples in a corpus file")
    stats.add_argument("corpus", help="corpus JSONL path")
    stats.set_defaults(func=_cmd_stats)

    perturb = sub.add_parser("perturb", help="print one seeded perturbation of a SQL")
    perturb.add_argument("--sql", required=True)
    perturb.add_argument("--tables", required=True, help="schema catalog path")
    perturb.add_argument("--db", required=True, help="database id")
    perturb.add_argument("--beta", type=float, default=0.15)
    perturb.add_argument("--seed", type=int, default=0)
    perturb.set_defaults(func=_cmd_perturb)

    infer = sub.add_parser("infer", help="run context-chained inference")
    target = infer.add_mutually_exclusive_group(required=True)
    target.add_argument("--endpoint", help="HTTP base URL of a /generate server")
    target.add_argument(
        "--stub", help="built-in stub: gold-echo, constant:<sql>, fail-at:<turn>"
    )
    infer.add_argument("--data", required=True, help="interactions file")
    infer.add_argument("--tables", required=True, help="schema catalog path")
    infer.add_argument("--out", required=True, help="predictions JSONL path")
    infer.add_argument("--jobs", type=int, default=1)
    infer.set_defaults(func=_cmd_infer)

    evaluate_ = sub.add_parser("eval", help="score predictions against gold")
    evaluate_.add_argument("--pred", required=True, help="predictions JSONL path")
    evaluate_.add_argument("--gold", required=True, help="gold interactions file")
    evaluate_.add_argument("--tables", required=True, help="schema catalog path")
    evaluate_.add_argument("--report", help="write the JSON report here")
    evaluate_.set_defaults(func=_cmd_eval)

    return parser


# config handling


def load_corpus_config(path: str | Path) -> CorpusConfig:
    """Read a TOML or JSON file mirroring CorpusConfig one-to-one."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:  # stdlib from 3.11; tomli on 3.10
            import tomli as tomllib

        raw = tomllib.loads(text)
    else:
        raw = json.loads(text)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a table/object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {sorted(unknown)}")

    datasets = []
    for i, entry in enumerate(raw.get("datasets", [])):
        bad = set(entry) - _DATASET_KEYS
        if bad:
            raise ValueError(f"{path}: dataset {i}: unknown keys {sorted(bad)}")
        datasets.append(DatasetSpec(**entry))

    kwargs: dict = {"datasets": tuple(datasets)}
    if "enabled_tasks" in raw:
        kwargs["enabled_tasks"] = tuple(raw["enabled_tasks"])
    if "prompts" in raw:
        prompts = dict(raw["prompts"])
        bad = set(prompts) - set(TASKS)
        if bad:
            raise ValueError(f"{path}: prompts for unknown tasks {sorted(bad)}")
        kwargs["prompts"] = prompts
    if "perturb" in raw and raw["perturb"] is not None:
        kwargs["perturb"] = PerturbConfig(**raw["perturb"])
    if "separators" in raw:
        kwargs["separators"] = Separators(**raw["separators"])
    return CorpusConfig(**kwargs)


def _apply_overrides(config: CorpusConfig, args: argparse.Namespace) -> CorpusConfig:
    from dataclasses import replace

    if args.tasks:
        config = replace(
            config, enabled_tasks=tuple(t.strip() for t in args.tasks.split(","))
        )
    if args.datasets:
        wanted = {d.strip() for d in args.datasets.split(",")}
        chosen = tuple(d for d in config.datasets if d.name in wanted)
        missing = wanted - {d.name for d in chosen}
        if missing:
            raise ValueError(f"unknown dataset names: {sorted(missing)}")
        config = replace(config, datasets=chosen)
    if args.alpha is not None or args.beta is not None:
        base = config.perturb
        alpha = args.alpha if args.alpha is not None else (base.alpha if base else 0.0)
        beta = args.beta if args.beta is not None else (base.beta if base else 0.0)
        seed = base.seed if base else args.seed
        config = replace(
            config, perturb=PerturbConfig(alpha=alpha, beta=beta, seed=seed)
        )
    return config


# subcommands


def _cmd_build(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_corpus_config(args.config), args)
    if args.stage == "pretrain":
        samples, manifest = build_pretrain_corpus(config, args.seed, jobs=args.jobs)
    else:
        samples, manifest = build_finetune_corpus(config, args.seed, jobs=args.jobs)
    write_corpus(samples, args.out)
    manifest_path = f"{args.out}.manifest.json"
    write_manifest(manifest, manifest_path)
    print(
        f"wrote {len(samples)} samples to {args.out} "
        f"(manifest: {manifest_path})",
        file=sys.stderr,
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    print(json.dumps(corpus_stats(args.corpus), indent=2, sort_keys=True))
    return 0


def _cmd_perturb(args: argparse.Namespace) -> int:
    schemas = load_schemas(args.tables)
    if args.db not in schemas:
        raise ValueError(f"db {args.db!r} not in {args.tables}")
    schema = schemas[args.db]
    query = canonicalize(parse_sql(args.sql), schema)
    mutated = perturb_sql(query, schema, args.beta, random.Random(args.seed))
    print(print_sql(mutated))
    return 0


def _cmd_infer(args: argparse.Namespace) -> int:
    endpoint = ModelEndpoint(transport=args.endpoint or args.stub)
    schemas = load_schemas(args.tables)
    interactions = load_interactions(args.data)
    config = CorpusConfig(datasets=())
    run = run_dataset(endpoint, interactions, schemas, config, jobs=args.jobs)
    write_predictions(run, interactions, args.out)
    if run.errors:
        print(f"{len(run.errors)} turn(s) errored", file=sys.stderr)
    print(f"wrote predictions for {len(interactions)} interactions to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    schemas = load_schemas(args.tables)
    interactions = load_interactions(args.gold)
    predictions = load_predictions(args.pred)
    report = evaluate(predictions, interactions, schemas)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.render_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
