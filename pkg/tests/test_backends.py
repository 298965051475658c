"""Backend tests: lexicon scoring, tokenizer encode contract, TorchScript loading."""

import math
import time

import numpy as np
import pytest
from sklearn.base import clone

from safegov.backends import (
    BackendDescriptor,
    BackendKind,
    LexiconClassifier,
    TokenizerDef,
    build_backend,
)
from safegov.corpus import make_fixture_corpus
from safegov.errors import BackendLoadError, InvalidInputError
from safegov.risk import softmax
from safegov.simulator import bundled_scenarios_path, load_scenarios

from conftest import TOY_MAX_LEN


@pytest.fixture(scope="module")
def lexicon():
    return LexiconClassifier()


@pytest.fixture()
def tiny_lexicon(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("# demo\nstrike\t2.0\nhuman\t1.0\nhand\t-1.5\n", encoding="utf-8")
    return LexiconClassifier(lexicon_path=str(path))


class TestLexiconClassifier:
    def test_zero_hits_gives_even_odds(self, lexicon):
        logits = lexicon.classify("proceed to the bay")
        assert logits == (0.0, 0.0)
        assert softmax(logits) == (0.5, 0.5)

    def test_hand_derived_sigmoid(self, tiny_lexicon):
        # score 2.0 + 1.0 = 3.0 -> logits (-3, 3) -> p_unsafe = 1/(1 + e^-6)
        logits = tiny_lexicon.classify("strike the human operator")
        assert logits == (-3.0, 3.0)
        p_unsafe = softmax(logits)[1]
        assert p_unsafe == pytest.approx(0.9975, abs=1e-4)
        assert p_unsafe == pytest.approx(1.0 / (1.0 + math.exp(-6.0)), abs=1e-12)

    def test_occurrences_accumulate(self, tiny_lexicon):
        assert tiny_lexicon.score_text("strike strike") == pytest.approx(4.0)

    def test_prefix_matching(self, tiny_lexicon):
        assert tiny_lexicon.score_text("handing it over") == pytest.approx(-1.5)

    def test_case_insensitive(self, tiny_lexicon):
        assert tiny_lexicon.score_text("STRIKE the Human") == pytest.approx(3.0)

    def test_batch_matches_single_bitwise(self, lexicon, fixture_texts):
        batch = lexicon.classify_batch(fixture_texts)
        assert batch == [lexicon.classify(t) for t in fixture_texts]

    def test_empty_batch(self, lexicon):
        assert lexicon.classify_batch([]) == []

    def test_batch_error_carries_index(self, lexicon):
        with pytest.raises(InvalidInputError, match=r"text\[1\]"):
            lexicon.classify_batch(["fine text", "   "])

    def test_empty_text_rejected(self, lexicon):
        with pytest.raises(InvalidInputError):
            lexicon.classify("")

    def test_oversized_text_rejected(self, lexicon):
        with pytest.raises(InvalidInputError):
            lexicon.classify("x" * 10_001)

    def test_instances_from_same_file_agree(self, fixture_texts):
        a, b = LexiconClassifier(), LexiconClassifier()
        assert a.classify_batch(fixture_texts) == b.classify_batch(fixture_texts)

    def test_thousand_text_batch_under_100ms(self, lexicon):
        texts = [ex.text for ex in make_fixture_corpus(500, seed=3)]
        start = time.perf_counter()
        lexicon.classify_batch(texts)
        assert time.perf_counter() - start < 0.100

    def test_separates_bundled_scenario_classes(self, lexicon):
        scenarios = load_scenarios(bundled_scenarios_path())
        p_unsafe = {0: [], 1: []}
        for s in scenarios:
            p_unsafe[s.hazard].append(softmax(lexicon.classify(s.task_text))[1])
        assert max(p_unsafe[0]) < min(p_unsafe[1])

    def test_sklearn_surface(self, lexicon, fixture_texts):
        proba = lexicon.predict_proba(fixture_texts)
        assert proba.shape == (len(fixture_texts), 2)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)
        labels = lexicon.predict(fixture_texts)
        assert set(labels) <= {0, 1}
        assert lexicon.fit(fixture_texts) is lexicon
        cloned = clone(lexicon)
        assert cloned.classify_batch(fixture_texts) == lexicon.classify_batch(fixture_texts)

    def test_malformed_lexicon_rejected(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("strike\tnot_a_number\n", encoding="utf-8")
        with pytest.raises(BackendLoadError):
            LexiconClassifier(lexicon_path=str(bad))

    def test_missing_lexicon_rejected(self, tmp_path):
        with pytest.raises(BackendLoadError):
            LexiconClassifier(lexicon_path=str(tmp_path / "nope.tsv"))


class TestDescriptor:
    def test_lexicon_descriptor_rejects_paths(self):
        with pytest.raises(InvalidInputError):
            BackendDescriptor(kind=BackendKind.REFERENCE_LEXICON, model_path="m.pt")

    def test_transformer_descriptor_requires_paths(self):
        with pytest.raises(InvalidInputError):
            BackendDescriptor(kind=BackendKind.TRANSFORMER_PORTABLE, model_path="m.pt")

    def test_max_len_floor(self):
        with pytest.raises(InvalidInputError):
            BackendDescriptor(max_sequence_length=4)

    def test_build_lexicon(self):
        backend = build_backend(BackendDescriptor())
        assert isinstance(backend, LexiconClassifier)


class TestTokenizerEncode:
    def test_shape_contract(self, toy_tokenizer_path):
        tok = TokenizerDef(toy_tokenizer_path, max_len=128)
        enc = tok.encode("hand the cup to the operator")
        assert len(enc.token_ids) == 128
        assert len(enc.attention_mask) == 128

    def test_padding_masked_out(self, toy_tokenizer_path):
        tok = TokenizerDef(toy_tokenizer_path, max_len=TOY_MAX_LEN)
        enc = tok.encode("hand the cup")
        assert sum(enc.attention_mask) == 3
        assert enc.token_ids[3:] == (tok.pad_id,) * (TOY_MAX_LEN - 3)
        assert enc.attention_mask[3:] == (0,) * (TOY_MAX_LEN - 3)

    def test_truncation_leaves_full_mask(self, toy_tokenizer_path):
        tok = TokenizerDef(toy_tokenizer_path, max_len=8)
        enc = tok.encode(" ".join(["cup"] * 40))
        assert len(enc.token_ids) == 8
        assert enc.attention_mask == (1,) * 8

    def test_empty_text_rejected(self, toy_tokenizer_path):
        tok = TokenizerDef(toy_tokenizer_path, max_len=16)
        with pytest.raises(InvalidInputError):
            tok.encode("")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(BackendLoadError):
            TokenizerDef(tmp_path / "absent.json", max_len=16)

    def test_corrupt_file_rejected(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(BackendLoadError):
            TokenizerDef(broken, max_len=16)

    def test_file_padding_section_respected(self, padded_tokenizer_path):
        tok = TokenizerDef(padded_tokenizer_path, max_len=TOY_MAX_LEN)
        assert tok.pad_id == 0
        assert len(tok.encode("hand the cup").token_ids) == TOY_MAX_LEN

    def test_determinism(self, toy_tokenizer_path):
        a = TokenizerDef(toy_tokenizer_path, max_len=16)
        b = TokenizerDef(toy_tokenizer_path, max_len=16)
        assert a.encode("stack the crate") == b.encode("stack the crate")


@pytest.fixture(scope="module")
def backend(toy_model_path, toy_tokenizer_path):
    return build_backend(
        BackendDescriptor(
            kind=BackendKind.TRANSFORMER_PORTABLE,
            model_path=toy_model_path,
            tokenizer_path=toy_tokenizer_path,
            max_sequence_length=TOY_MAX_LEN,
        )
    )


class TestPortableTransformer:
    def test_classify_shape(self, backend):
        logits = backend.classify("hand the cup to the operator")
        assert len(logits) == 2
        assert all(math.isfinite(v) for v in logits)

    def test_batch_close_to_single(self, backend, fixture_texts):
        batch = backend.classify_batch(fixture_texts)
        for text, row in zip(fixture_texts, batch):
            single = backend.classify(text)
            assert abs(row[0] - single[0]) <= 1e-6
            assert abs(row[1] - single[1]) <= 1e-6

    def test_instances_agree(self, toy_model_path, toy_tokenizer_path, fixture_texts):
        def make():
            from safegov.backends import PortableTransformerClassifier

            return PortableTransformerClassifier(
                toy_model_path, toy_tokenizer_path, TOY_MAX_LEN
            )

        a, b = make().classify_batch(fixture_texts), make().classify_batch(fixture_texts)
        for ra, rb in zip(a, b):
            assert abs(ra[0] - rb[0]) <= 1e-6 and abs(ra[1] - rb[1]) <= 1e-6

    def test_predict_proba_normalized(self, backend, fixture_texts):
        proba = backend.predict_proba(fixture_texts)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_missing_model_rejected(self, toy_tokenizer_path, tmp_path):
        from safegov.backends import PortableTransformerClassifier

        with pytest.raises(BackendLoadError):
            PortableTransformerClassifier(
                str(tmp_path / "absent.pt"), toy_tokenizer_path, TOY_MAX_LEN
            )

    def test_wrong_max_len_rejected(self, rigid_model_path, toy_tokenizer_path):
        from safegov.backends import PortableTransformerClassifier

        # Works at the length it was built for...
        PortableTransformerClassifier(rigid_model_path, toy_tokenizer_path, TOY_MAX_LEN)
        # ...and refuses any other length at load time.
        with pytest.raises(BackendLoadError):
            PortableTransformerClassifier(rigid_model_path, toy_tokenizer_path, 32)

    def test_wrong_output_width_rejected(self, three_class_model_path, toy_tokenizer_path):
        from safegov.backends import PortableTransformerClassifier

        with pytest.raises(BackendLoadError):
            PortableTransformerClassifier(
                three_class_model_path, toy_tokenizer_path, TOY_MAX_LEN
            )
