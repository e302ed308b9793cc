"""Two-stage training over JSONL corpora.

Stage one fits the full multi-task corpus; stage two continues from the
stage-one weights on the perturbed SQL-generation corpus with its own
epoch count and learning rate.  The loss is mean token-level negative
log-likelihood of the target sequence, and the log records one entry per
epoch.  Seeded throughout: same config and corpora, same loss curve.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn as nn

from convsql_trainer.corpus_io import Sample, read_corpus, truncate_corpus
from convsql_trainer.errors import TrainerError
from convsql_trainer.model import SIZE_PRESETS, Seq2Seq
from convsql_trainer.vocab import BOS, EOS, PAD, Vocab

log = logging.getLogger("convsql_trainer")

OPTIMIZERS = ("adafactor", "adam")


@dataclass(frozen=True)
class TrainConfig:
    model_size: str = "tiny"
    stage1_epochs: int = 15
    stage2_epochs: int = 50
    stage1_lr: float = 1e-4
    stage2_lr: float = 5e-5
    batch_size: int = 64
    optimizer: str = "adafactor"
    seed: int = 0
    max_input_tokens: int = 256

    def __post_init__(self) -> None:
        if self.model_size not in SIZE_PRESETS:
            raise ValueError(
                f"unknown model size {self.model_size!r}, "
                f"expected one of {sorted(SIZE_PRESETS)}"
            )
        for name in ("stage1_epochs", "stage2_epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("stage1_lr", "stage2_lr"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(
                f"unknown optimizer {self.optimizer!r}, expected one of {OPTIMIZERS}"
            )
        if self.max_input_tokens < 1:
            raise ValueError("max_input_tokens must be >= 1")


def load_train_config(path: str | Path) -> TrainConfig:
    """Read a TrainConfig from a JSON file; unknown keys are rejected."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    known = set(TrainConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return TrainConfig(**data)


@dataclass(frozen=True)
class TrainResult:
    checkpoint_path: Path
    stage1_checkpoint_path: Path
    loss_log: tuple[dict, ...]
    truncated_inputs: int


def _make_optimizer(model: nn.Module, name: str, lr: float):
    if name == "adafactor":
        return torch.optim.Adafactor(model.parameters(), lr=lr)
    return torch.optim.Adam(model.parameters(), lr=lr)


def _pad(seqs: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    return torch.tensor([s + [PAD] * (width - len(s)) for s in seqs])


def _run_stage(
    model: Seq2Seq,
    vocab: Vocab,
    samples: list[Sample],
    stage: int,
    epochs: int,
    lr: float,
    config: TrainConfig,
    rng: random.Random,
) -> list[dict]:
    encoded = [
        (vocab.encode(s.input), vocab.encode(s.target)) for s in samples
    ]
    optimizer = _make_optimizer(model, config.optimizer, lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD, reduction="sum")
    entries = []
    order = list(range(len(encoded)))
    for epoch in range(1, epochs + 1):
        model.train()
        rng.shuffle(order)
        loss_sum = 0.0
        token_count = 0
        for start in range(0, len(order), config.batch_size):
            batch = [encoded[i] for i in order[start : start + config.batch_size]]
            src = _pad([inp for inp, _ in batch])
            lengths = torch.tensor([len(inp) for inp, _ in batch])
            tgt_in = _pad([[BOS] + tgt for _, tgt in batch])
            tgt_out = _pad([tgt + [EOS] for _, tgt in batch])
            optimizer.zero_grad()
            logits = model(src, lengths, tgt_in)
            loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
            tokens = int((tgt_out != PAD).sum())
            (loss / tokens).backward()
            optimizer.step()
            loss_sum += float(loss.detach())
            token_count += tokens
        mean_loss = loss_sum / token_count
        entries.append({"stage": stage, "epoch": epoch, "loss": mean_loss})
        log.info("stage %d epoch %d/%d: loss %.4f", stage, epoch, epochs, mean_loss)
    return entries


def save_checkpoint(
    model: Seq2Seq, vocab: Vocab, config: TrainConfig, path: Path
) -> None:
    torch.save(
        {
            "model_state": model.state_dict(),
            "itos": vocab.itos,
            "embed_dim": model.embed_dim,
            "hidden_dim": model.hidden_dim,
            "max_input_tokens": config.max_input_tokens,
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[Seq2Seq, Vocab, dict]:
    try:
        data = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise TrainerError(f"cannot load checkpoint {path}: {exc}") from exc
    vocab = Vocab(())
    vocab.itos = list(data["itos"])
    vocab.stoi = {w: i for i, w in enumerate(vocab.itos)}
    model = Seq2Seq(len(vocab), data["embed_dim"], data["hidden_dim"])
    model.load_state_dict(data["model_state"])
    model.eval()
    meta = {"max_input_tokens": data["max_input_tokens"]}
    return model, vocab, meta


def train(
    stage1_corpus: str | Path,
    stage2_corpus: str | Path,
    config: TrainConfig,
    out_dir: str | Path,
) -> TrainResult:
    """Run both stages and leave checkpoints plus a loss log in ``out_dir``.

    Both corpora are read and validated in full before the first gradient
    step, so a malformed file costs nothing but the read.
    """
    stage1_samples = read_corpus(stage1_corpus)
    stage2_samples = read_corpus(stage2_corpus)
    stage1_samples, cut1 = truncate_corpus(stage1_samples, config.max_input_tokens)
    stage2_samples, cut2 = truncate_corpus(stage2_samples, config.max_input_tokens)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    vocab = Vocab.from_texts(
        text
        for sample in stage1_samples + stage2_samples
        for text in (sample.input, sample.target)
    )
    model = Seq2Seq.sized(len(vocab), config.model_size)

    loss_log = _run_stage(
        model, vocab, stage1_samples, 1, config.stage1_epochs, config.stage1_lr,
        config, rng,
    )
    stage1_path = out_dir / "stage1_checkpoint.pt"
    save_checkpoint(model, vocab, config, stage1_path)

    loss_log += _run_stage(
        model, vocab, stage2_samples, 2, config.stage2_epochs, config.stage2_lr,
        config, rng,
    )
    final_path = out_dir / "checkpoint.pt"
    save_checkpoint(model, vocab, config, final_path)

    log_path = out_dir / "loss_log.json"
    log_path.write_text(
        json.dumps(
            {"config": asdict(config), "losses": loss_log},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return TrainResult(
        checkpoint_path=final_path,
        stage1_checkpoint_path=stage1_path,
        loss_log=tuple(loss_log),
        truncated_inputs=cut1 + cut2,
    )
