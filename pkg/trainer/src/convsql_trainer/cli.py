"""Command line: train a model, serve a checkpoint."""

from __future__ import annotations

import argparse
import logging
import sys

from convsql_trainer.errors import TrainerError
from convsql_trainer.server import serve
from convsql_trainer.training import TrainConfig, load_train_config, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convsql-trainer",
        description="Two-stage seq2seq training and serving for dialogue-to-SQL corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run both training stages")
    p.add_argument("--stage1", required=True, help="stage-one corpus (JSONL)")
    p.add_argument("--stage2", required=True, help="stage-two corpus (JSONL)")
    p.add_argument("--config", help="TrainConfig JSON file (defaults when omitted)")
    p.add_argument("--out", required=True, help="output directory for checkpoints")

    p = sub.add_parser("serve", help="answer /generate from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--port", type=int, default=8101)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            config = (
                load_train_config(args.config) if args.config else TrainConfig()
            )
            result = train(args.stage1, args.stage2, config, args.out)
            final = result.loss_log[-1]
            print(
                f"wrote {result.checkpoint_path} "
                f"(final loss {final['loss']:.4f}, "
                f"{result.truncated_inputs} inputs truncated)",
                file=sys.stderr,
            )
        else:
            serve(args.checkpoint, port=args.port, host=args.host)
    except (TrainerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
