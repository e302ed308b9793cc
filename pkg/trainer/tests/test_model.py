import pytest
import torch

from convsql_trainer import Seq2Seq, Vocab, greedy_decode
from convsql_trainer.vocab import BOS, EOS, PAD, UNK


class TestVocab:
    def test_specials_come_first(self):
        vocab = Vocab(["zebra", "apple"])
        assert vocab.itos[:4] == ["<pad>", "<bos>", "<eos>", "<unk>"]
        assert (PAD, BOS, EOS, UNK) == (0, 1, 2, 3)

    def test_words_sorted_after_specials(self):
        vocab = Vocab.from_texts(["b a", "c a"])
        assert vocab.itos[4:] == ["a", "b", "c"]

    def test_round_trip(self):
        vocab = Vocab.from_texts(["select * from city"])
        text = "select from city"
        assert vocab.decode(vocab.encode(text)) == text

    def test_unknown_word_maps_to_unk(self):
        vocab = Vocab(["known"])
        assert vocab.encode("known mystery") == [vocab.stoi["known"], UNK]
        assert vocab.decode([UNK]) == "<unk>"

    def test_decode_skips_structural_specials(self):
        vocab = Vocab(["x"])
        ids = [BOS, vocab.stoi["x"], PAD, EOS]
        assert vocab.decode(ids) == "x"

    def test_special_literals_not_duplicated(self):
        vocab = Vocab(["<pad>", "x"])
        assert vocab.itos.count("<pad>") == 1
        assert len(vocab) == 5

    def test_same_words_same_vocab(self):
        a = Vocab.from_texts(["one two three"])
        b = Vocab.from_texts(["three one two", "two"])
        assert a.itos == b.itos


class TestSeq2Seq:
    @pytest.fixture()
    def model_and_vocab(self):
        torch.manual_seed(0)
        vocab = Vocab.from_texts(["a b c d e f g"])
        return Seq2Seq(len(vocab), 16, 24), vocab

    def test_sized_presets(self):
        model = Seq2Seq.sized(vocab_size=10, size="tiny")
        assert (model.embed_dim, model.hidden_dim) == (64, 192)
        model = Seq2Seq.sized(vocab_size=10, size="small")
        assert (model.embed_dim, model.hidden_dim) == (128, 384)

    def test_sized_rejects_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown model size"):
            Seq2Seq.sized(vocab_size=10, size="huge")

    def test_forward_shape(self, model_and_vocab):
        model, vocab = model_and_vocab
        src = torch.tensor([vocab.encode("a b c"), vocab.encode("d e") + [PAD]])
        tgt_in = torch.tensor([[BOS, 4, 5, 6], [BOS, 4, PAD, PAD]])
        logits = model(src, torch.tensor([3, 2]), tgt_in)
        assert logits.shape == (2, 4, len(vocab))

    def test_padded_batch_encodes_like_single_sequence(self, model_and_vocab):
        """Padding must not leak into encoder states.

        The backward half of the bidirectional encoder starts from the
        sequence end, so without packing a padded batch would encode the
        short row differently from the same row on its own.
        """
        model, vocab = model_and_vocab
        model.eval()
        long_ids = vocab.encode("a b c d e f g")
        short_ids = vocab.encode("c e")
        src = torch.tensor([long_ids, short_ids + [PAD] * (len(long_ids) - 2)])
        with torch.no_grad():
            batched = model.encode(src, torch.tensor([len(long_ids), 2]))
            alone = model.encode(torch.tensor([short_ids]), torch.tensor([2]))
        assert torch.allclose(batched[1, :2], alone[0], atol=1e-6)
        assert torch.allclose(batched[0], model.encode(
            torch.tensor([long_ids]), torch.tensor([len(long_ids)])
        )[0], atol=1e-6)


class TestGreedyDecode:
    def test_deterministic(self):
        torch.manual_seed(3)
        vocab = Vocab.from_texts(["a b c", "x y"])
        model = Seq2Seq(len(vocab), 16, 24)
        first = greedy_decode(model, vocab, "a b c")
        second = greedy_decode(model, vocab, "a b c")
        assert first == second

    def test_respects_max_len(self):
        torch.manual_seed(3)
        vocab = Vocab.from_texts(["a b c"])
        model = Seq2Seq(len(vocab), 16, 24)
        out = greedy_decode(model, vocab, "a b c", max_len=4)
        assert len(out.split()) <= 4

    def test_empty_input_rejected(self):
        vocab = Vocab(["a"])
        model = Seq2Seq(len(vocab), 16, 24)
        with pytest.raises(ValueError, match="empty input"):
            greedy_decode(model, vocab, "")
