"""Shared fixtures: fixture texts, a WordLevel tokenizer file, and small
TorchScript graphs that honor (or deliberately violate) the backend's
[batch, max_len] int64 -> [batch, 2] float contract."""

import pytest

from safegov.corpus import make_fixture_corpus

TOY_MAX_LEN = 16


def _fixture_vocab():
    words = {"[PAD]": 0, "[UNK]": 1}
    for ex in make_fixture_corpus(64, seed=7):
        for word in ex.text.lower().split():
            words.setdefault(word, len(words))
    return words


@pytest.fixture(scope="session")
def fixture_texts():
    return [ex.text for ex in make_fixture_corpus(25, seed=11)]


@pytest.fixture(scope="session")
def toy_tokenizer_path(tmp_path_factory):
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace

    tok = Tokenizer(WordLevel(_fixture_vocab(), unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    path = tmp_path_factory.mktemp("tok") / "tokenizer.json"
    tok.save(str(path))
    return str(path)


@pytest.fixture(scope="session")
def padded_tokenizer_path(tmp_path_factory):
    """Variant whose file carries its own padding section."""
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace

    tok = Tokenizer(WordLevel(_fixture_vocab(), unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    tok.enable_padding(length=8, pad_id=0, pad_token="[PAD]")
    path = tmp_path_factory.mktemp("tok_padded") / "tokenizer.json"
    tok.save(str(path))
    return str(path)


def _export_and_save(model, path, max_len):
    import torch
    from torch.export import Dim, export, save

    model.eval()
    ids = torch.zeros((2, max_len), dtype=torch.int64)
    mask = torch.ones((2, max_len), dtype=torch.int64)
    batch = Dim("batch", min=1, max=4096)
    program = export(model, (ids, mask), dynamic_shapes=({0: batch}, {0: batch}))
    save(program, str(path))
    return str(path)


def _toy_attention_model(out_classes=2):
    import torch
    import torch.nn as nn

    class ToyTextModel(nn.Module):
        def __init__(self):
            super().__init__()
            self.emb = nn.Embedding(len(_fixture_vocab()), 32)
            self.attn = nn.MultiheadAttention(32, 4, batch_first=True)
            self.head = nn.Linear(32, out_classes)

        def forward(self, ids, mask):
            x = self.emb(ids)
            pad = mask == 0
            att, _ = self.attn(x, x, x, key_padding_mask=pad)
            weights = mask.unsqueeze(-1).to(att.dtype)
            denom = weights.sum(dim=1).clamp(min=1.0)
            pooled = (att * weights).sum(dim=1) / denom
            return self.head(pooled)

    torch.manual_seed(1234)
    return ToyTextModel()


@pytest.fixture(scope="session")
def toy_model_path(tmp_path_factory):
    """Single-attention-block classifier exported at TOY_MAX_LEN."""
    pytest.importorskip("torch")
    path = tmp_path_factory.mktemp("model") / "toy_model.pt2"
    return _export_and_save(_toy_attention_model(), path, TOY_MAX_LEN)


@pytest.fixture(scope="session")
def toy_model_128_path(tmp_path_factory):
    """Same architecture exported at the production sequence length."""
    pytest.importorskip("torch")
    path = tmp_path_factory.mktemp("model128") / "toy_model_128.pt2"
    return _export_and_save(_toy_attention_model(), path, 128)


@pytest.fixture(scope="session")
def rigid_model_path(tmp_path_factory):
    """Classifier whose weights bake in max_len == TOY_MAX_LEN."""
    torch = pytest.importorskip("torch")
    import torch.nn as nn

    class RigidModel(nn.Module):
        def __init__(self):
            super().__init__()
            self.emb = nn.Embedding(len(_fixture_vocab()), 8)
            self.head = nn.Linear(TOY_MAX_LEN * 8, 2)

        def forward(self, ids, mask):
            x = self.emb(ids) * mask.unsqueeze(-1).to(torch.float32)
            return self.head(x.flatten(1))

    torch.manual_seed(99)
    path = tmp_path_factory.mktemp("model_rigid") / "rigid_model.pt2"
    return _export_and_save(RigidModel(), path, TOY_MAX_LEN)


@pytest.fixture(scope="session")
def three_class_model_path(tmp_path_factory):
    """Violates the contract: returns [batch, 3]."""
    pytest.importorskip("torch")
    path = tmp_path_factory.mktemp("model_bad") / "three_class.pt2"
    return _export_and_save(_toy_attention_model(out_classes=3), path, TOY_MAX_LEN)
