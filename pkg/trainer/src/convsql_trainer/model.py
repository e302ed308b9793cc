"""Tiny attention seq2seq: a GRU encoder-decoder that fits in a test run.

The encoder packs its input so that padded batches and single unpadded
sequences produce identical states; without packing, the backward half of
the bidirectional pass would walk through padding and training-time
encodings would not match decode-time ones.
"""

from __future__ import annotations

import torch
import torch.nn as nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from convsql_trainer.vocab import BOS, EOS, PAD, Vocab

SIZE_PRESETS = {
    "tiny": (64, 192),
    "small": (128, 384),
}


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int, hidden_dim: int):
        super().__init__()
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.encoder = nn.GRU(
            embed_dim, hidden_dim, batch_first=True, bidirectional=True
        )
        self.encoder_proj = nn.Linear(2 * hidden_dim, hidden_dim)
        self.decoder = nn.GRU(embed_dim + hidden_dim, hidden_dim, batch_first=True)
        self.attention_query = nn.Linear(hidden_dim, hidden_dim, bias=False)
        self.output = nn.Linear(2 * hidden_dim, vocab_size)

    @classmethod
    def sized(cls, vocab_size: int, size: str) -> "Seq2Seq":
        if size not in SIZE_PRESETS:
            raise ValueError(
                f"unknown model size {size!r}, expected one of {sorted(SIZE_PRESETS)}"
            )
        return cls(vocab_size, *SIZE_PRESETS[size])

    def encode(self, src: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        packed = pack_padded_sequence(
            self.embedding(src), lengths, batch_first=True, enforce_sorted=False
        )
        states, _ = self.encoder(packed)
        states, _ = pad_packed_sequence(states, batch_first=True)
        return self.encoder_proj(states)

    def initial_state(self, memory: torch.Tensor, mask: torch.Tensor):
        pooled = memory.sum(1) / mask.sum(1, keepdim=True)
        state = pooled.unsqueeze(0)
        context = memory.new_zeros(memory.size(0), 1, self.hidden_dim)
        return state, context

    def decode_step(self, token_emb, context, state, memory, mask):
        out, state = self.decoder(torch.cat([token_emb, context], dim=2), state)
        scores = torch.bmm(self.attention_query(out), memory.transpose(1, 2))
        scores = scores.masked_fill(
            ~mask.unsqueeze(1), torch.finfo(scores.dtype).min
        )
        context = torch.bmm(torch.softmax(scores, dim=2), memory)
        return torch.cat([out, context], dim=2), context, state

    def forward(self, src, lengths, tgt_in):
        """Teacher-forced logits, batch x target-length x vocab."""
        mask = src != PAD
        memory = self.encode(src, lengths)
        state, context = self.initial_state(memory, mask)
        embedded = self.embedding(tgt_in)
        steps = []
        for t in range(tgt_in.size(1)):
            step, context, state = self.decode_step(
                embedded[:, t : t + 1], context, state, memory, mask
            )
            steps.append(step)
        return self.output(torch.cat(steps, dim=1))


def greedy_decode(
    model: Seq2Seq, vocab: Vocab, text: str, max_len: int = 96
) -> str:
    """Decode one input with argmax steps until EOS or ``max_len``."""
    model.eval()
    ids = vocab.encode(text)
    if not ids:
        raise ValueError("cannot decode an empty input")
    with torch.no_grad():
        src = torch.tensor([ids])
        mask = src != PAD
        memory = model.encode(src, torch.tensor([len(ids)]))
        state, context = model.initial_state(memory, mask)
        token = BOS
        out_ids: list[int] = []
        for _ in range(max_len):
            embedded = model.embedding(torch.tensor([[token]]))
            step, context, state = model.decode_step(
                embedded, context, state, memory, mask
            )
            token = int(model.output(step)[0, -1].argmax())
            if token == EOS:
                break
            out_ids.append(token)
    return vocab.decode(out_ids)
