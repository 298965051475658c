"""Classifier backends mapping task text to a two-class logit vector.

Two interchangeable backends, both sklearn-style estimators (stateless
``fit``, ``predict`` / ``predict_proba``, ``get_params``):

* :class:`LexiconClassifier` - deterministic reference backend scoring
  texts against a TSV lexicon of signed word-stem weights. Dependency-free
  and fast; the bundled lexicon drives the test fixtures and CLI defaults.
* :class:`PortableTransformerClassifier` - loads an exported-program graph
  (torch.export ``.pt2``) plus a self-describing tokenizer file (as emitted
  by the companion training tool) and runs a CPU forward pass.

Index convention everywhere: class 0 = acceptable, class 1 = unsafe.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .errors import BackendLoadError, InferenceError, InvalidInputError
from .risk import softmax
from .validation import check_task_text

__all__ = [
    "BackendKind",
    "BackendDescriptor",
    "TokenEncoding",
    "TokenizerDef",
    "LexiconClassifier",
    "PortableTransformerClassifier",
    "build_backend",
    "bundled_lexicon_path",
]

MIN_SEQUENCE_LENGTH = 8

_WORD_RE = re.compile(r"[a-z]+")
_PAD_TOKEN_CANDIDATES = ("[PAD]", "<pad>", "<PAD>")


class BackendKind(str, Enum):
    REFERENCE_LEXICON = "reference_lexicon"
    TRANSFORMER_PORTABLE = "transformer_portable"


@dataclass(frozen=True)
class BackendDescriptor:
    """Declarative recipe for constructing a backend (see :func:`build_backend`)."""

    kind: BackendKind = BackendKind.REFERENCE_LEXICON
    model_path: Optional[str] = None
    tokenizer_path: Optional[str] = None
    max_sequence_length: int = 128

    def __post_init__(self):
        if self.max_sequence_length < MIN_SEQUENCE_LENGTH:
            raise InvalidInputError(
                f"max_sequence_length must be >= {MIN_SEQUENCE_LENGTH}, "
                f"got {self.max_sequence_length}"
            )
        if self.kind == BackendKind.TRANSFORMER_PORTABLE:
            if not self.model_path or not self.tokenizer_path:
                raise InvalidInputError(
                    "transformer_portable requires both model_path and tokenizer_path"
                )
        elif self.model_path or self.tokenizer_path:
            raise InvalidInputError(
                "reference_lexicon takes no model_path or tokenizer_path"
            )


@dataclass(frozen=True)
class TokenEncoding:
    """Fixed-length token ids with a matching 0/1 attention mask."""

    token_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]

    def __post_init__(self):
        if len(self.token_ids) != len(self.attention_mask):
            raise InvalidInputError("token_ids and attention_mask lengths differ")
        if any(m not in (0, 1) for m in self.attention_mask):
            raise InvalidInputError("attention mask entries must be 0 or 1")


class TokenizerDef:
    """A tokenizer definition file bound to a fixed sequence length.

    Wraps a ``tokenizers`` JSON file; every encode truncates then pads to
    exactly ``max_len`` positions using the file's own pad token.
    """

    def __init__(self, path: str | Path, max_len: int):
        if max_len < MIN_SEQUENCE_LENGTH:
            raise InvalidInputError(f"max_len must be >= {MIN_SEQUENCE_LENGTH}")
        self.path = str(path)
        self.max_len = int(max_len)
        try:
            from tokenizers import Tokenizer
        except ImportError as exc:  # pragma: no cover - tokenizers is a hard dep
            raise BackendLoadError("the 'tokenizers' package is required") from exc
        try:
            raw = Path(path).read_text(encoding="utf-8")
            spec_pad = self._pad_from_json(raw)
            self._tok = Tokenizer.from_str(raw)
        except OSError as exc:
            raise BackendLoadError(f"cannot read tokenizer file {path}: {exc}") from exc
        except Exception as exc:
            raise BackendLoadError(f"corrupt tokenizer file {path}: {exc}") from exc
        pad_id, pad_token = spec_pad if spec_pad else self._pad_from_vocab()
        self._tok.enable_truncation(max_length=self.max_len)
        self._tok.enable_padding(length=self.max_len, pad_id=pad_id, pad_token=pad_token)
        self.pad_id = pad_id

    @staticmethod
    def _pad_from_json(raw: str) -> Optional[tuple[int, str]]:
        padding = json.loads(raw).get("padding")
        if isinstance(padding, dict) and "pad_id" in padding:
            return int(padding["pad_id"]), str(padding.get("pad_token", "[PAD]"))
        return None

    def _pad_from_vocab(self) -> tuple[int, str]:
        for token in _PAD_TOKEN_CANDIDATES:
            pad_id = self._tok.token_to_id(token)
            if pad_id is not None:
                return pad_id, token
        raise BackendLoadError(
            f"tokenizer file {self.path} defines no pad token "
            f"(looked for {', '.join(_PAD_TOKEN_CANDIDATES)})"
        )

    def encode(self, text: str) -> TokenEncoding:
        check_task_text(text)
        enc = self._tok.encode(text)
        return TokenEncoding(tuple(enc.ids), tuple(enc.attention_mask))

    def encode_batch(self, texts: Sequence[str]) -> list[TokenEncoding]:
        return [self.encode(t) for t in texts]


def bundled_lexicon_path() -> Path:
    """Filesystem path of the lexicon shipped with the package."""
    return Path(str(resources.files("safegov").joinpath("data/lexicon.tsv")))


def _parse_lexicon(path: Path) -> dict[str, float]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise BackendLoadError(f"cannot read lexicon {path}: {exc}") from exc
    stems: dict[str, float] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise BackendLoadError(
                f"{path}:{lineno}: expected 'stem<TAB>weight', got {line!r}"
            )
        stem, raw_weight = parts[0].strip().lower(), parts[1].strip()
        try:
            weight = float(raw_weight)
        except ValueError as exc:
            raise BackendLoadError(
                f"{path}:{lineno}: weight {raw_weight!r} is not a number"
            ) from exc
        if not stem or not math.isfinite(weight):
            raise BackendLoadError(f"{path}:{lineno}: invalid entry {line!r}")
        stems[stem] = weight
    if not stems:
        raise BackendLoadError(f"lexicon {path} contains no entries")
    return stems


class LexiconClassifier(BaseEstimator):
    """Reference backend: additive signed word-stem scoring.

    Every lowercase word in the text contributes the weight of each lexicon
    stem that prefixes it ("hand" matches "handing"); the summed score ``s``
    is emitted as the antisymmetric logit pair ``(-s, +s)``, so the softmax
    unsafe probability is ``sigmoid(2 s)``. Positive weights mark unsafe
    evidence, negative weights safe evidence; a text with no hits scores
    (0, 0), i.e. probability 0.5. Ship lexicons whose stems are prefix-free
    so no word double-counts.

    Instances are immutable after construction and safe to share across
    threads. ``fit`` is a no-op kept for pipeline compatibility.
    """

    def __init__(self, lexicon_path: Optional[str] = None):
        self.lexicon_path = lexicon_path
        path = Path(lexicon_path) if lexicon_path else bundled_lexicon_path()
        self._stems = _parse_lexicon(path)
        # Bucket stems by first letter so scoring scans a handful per word.
        self._by_first: dict[str, list[tuple[str, float]]] = {}
        for stem, weight in self._stems.items():
            self._by_first.setdefault(stem[0], []).append((stem, weight))

    def fit(self, X=None, y=None):
        return self

    def score_text(self, text: str) -> float:
        """Summed signed evidence for one text (positive = unsafe)."""
        check_task_text(text)
        total = 0.0
        for word in _WORD_RE.findall(text.lower()):
            for stem, weight in self._by_first.get(word[0], ()):
                if word.startswith(stem):
                    total += weight
        return total

    def classify(self, text: str) -> tuple[float, float]:
        s = self.score_text(text)
        return (0.0 - s, s)

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[float, float]]:
        out = []
        for i, text in enumerate(texts):
            try:
                out.append(self.classify(text))
            except InvalidInputError as exc:
                raise InvalidInputError(f"text[{i}]: {exc}") from exc
        return out

    def predict_proba(self, X: Sequence[str]) -> np.ndarray:
        return np.array([softmax(l) for l in self.classify_batch(list(X))], dtype=float)

    def predict(self, X: Sequence[str]) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] >= 0.5).astype(int)


class PortableTransformerClassifier(BaseEstimator):
    """Backend over an exported model graph (``.pt2``) and tokenizer file.

    The graph must accept two int64 tensors of shape [batch, max_len]
    (token ids, attention mask) and return a float tensor [batch, 2]; the
    contract is probed with a dummy forward pass at load time. A loaded
    instance may be shared for concurrent read-only classification.
    """

    #: Forward batches are chunked to keep memory flat on corpus-sized inputs.
    BATCH_CHUNK = 512

    def __init__(
        self,
        model_path: str,
        tokenizer_path: str,
        max_sequence_length: int = 128,
    ):
        self.model_path = model_path
        self.tokenizer_path = tokenizer_path
        self.max_sequence_length = max_sequence_length
        self._torch = self._import_torch()
        self._tokenizer = TokenizerDef(tokenizer_path, max_sequence_length)
        try:
            self._model = self._torch.export.load(model_path).module()
        except Exception as exc:
            raise BackendLoadError(f"cannot load model graph {model_path}: {exc}") from exc
        self._probe_shapes()

    @staticmethod
    def _import_torch():
        try:
            import torch
        except ImportError as exc:
            raise BackendLoadError(
                "the transformer backend needs torch (install safegov[transformer])"
            ) from exc
        return torch

    def _probe_shapes(self):
        enc = self._tokenizer.encode("shape probe")
        try:
            out = self._forward([enc])
        except InferenceError as exc:
            raise BackendLoadError(
                f"model {self.model_path} rejected a [1, {self.max_sequence_length}] "
                f"probe batch: {exc}"
            ) from exc
        if out.shape != (1, 2):
            raise BackendLoadError(
                f"model {self.model_path} returned shape {tuple(out.shape)}, "
                "expected [batch, 2]"
            )

    def _forward(self, encodings: Sequence[TokenEncoding]) -> np.ndarray:
        torch = self._torch
        chunks = []
        for start in range(0, len(encodings), self.BATCH_CHUNK):
            part = encodings[start : start + self.BATCH_CHUNK]
            ids = torch.tensor([e.token_ids for e in part], dtype=torch.int64)
            mask = torch.tensor([e.attention_mask for e in part], dtype=torch.int64)
            try:
                with torch.inference_mode():
                    out = self._model(ids, mask)
            except Exception as exc:
                raise InferenceError(f"forward pass failed: {exc}") from exc
            if isinstance(out, (tuple, list)):
                out = out[0]
            chunks.append(out.detach().cpu().numpy().astype(float))
        logits = np.concatenate(chunks, axis=0)
        if logits.ndim != 2 or logits.shape[1] != 2:
            raise InferenceError(f"model returned shape {logits.shape}, expected [batch, 2]")
        if not np.isfinite(logits).all():
            raise InferenceError("model produced non-finite logits")
        return logits

    def encode(self, text: str) -> TokenEncoding:
        return self._tokenizer.encode(text)

    def classify(self, text: str) -> tuple[float, float]:
        logits = self._forward([self._tokenizer.encode(text)])
        return (float(logits[0, 0]), float(logits[0, 1]))

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[float, float]]:
        if not texts:
            return []
        encodings = []
        for i, text in enumerate(texts):
            try:
                encodings.append(self._tokenizer.encode(text))
            except InvalidInputError as exc:
                raise InvalidInputError(f"text[{i}]: {exc}") from exc
        logits = self._forward(encodings)
        return [(float(a), float(u)) for a, u in logits]

    def predict_proba(self, X: Sequence[str]) -> np.ndarray:
        return np.array([softmax(l) for l in self.classify_batch(list(X))], dtype=float)

    def predict(self, X: Sequence[str]) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] >= 0.5).astype(int)


def build_backend(descriptor: BackendDescriptor):
    """Construct the classifier named by a :class:`BackendDescriptor`."""
    if descriptor.kind == BackendKind.REFERENCE_LEXICON:
        return LexiconClassifier()
    return PortableTransformerClassifier(
        model_path=descriptor.model_path,
        tokenizer_path=descriptor.tokenizer_path,
        max_sequence_length=descriptor.max_sequence_length,
    )
