"""Two-stage seq2seq trainer and generation server for JSONL corpora.

Consumes training corpora through their file format alone and exposes the
model through the one-route /generate wire protocol, so it composes with
any corpus builder and inference client speaking the same conventions.
"""

from convsql_trainer.corpus_io import (
    Sample,
    read_corpus,
    truncate_corpus,
    truncate_input,
)
from convsql_trainer.errors import CorpusFormatError, TrainerError
from convsql_trainer.model import SIZE_PRESETS, Seq2Seq, greedy_decode
from convsql_trainer.server import CheckpointDecoder, create_server, serve
from convsql_trainer.training import (
    TrainConfig,
    TrainResult,
    load_checkpoint,
    load_train_config,
    save_checkpoint,
    train,
)
from convsql_trainer.vocab import Vocab

__version__ = "0.1.0"

__all__ = [
    "CheckpointDecoder",
    "CorpusFormatError",
    "SIZE_PRESETS",
    "Sample",
    "Seq2Seq",
    "TrainConfig",
    "TrainResult",
    "TrainerError",
    "Vocab",
    "create_server",
    "greedy_decode",
    "load_checkpoint",
    "load_train_config",
    "read_corpus",
    "save_checkpoint",
    "serve",
    "train",
    "truncate_corpus",
    "truncate_input",
]
